#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pub/io.hpp"
#include "pub/profile.hpp"

namespace pub {

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StatEntry {
    std::string name;
    double raw = 0.0;
    double percentile = 0.0;  // [0, 100]
    std::string band;         // very low / low / medium / high / very high
};

struct NormalizedStats {
    std::string user_id;
    std::vector<StatEntry> entries;  // canonical feature order, absent features omitted
};

/// Empirical percentile of `value` within `population` using midpoint ranks
/// for ties: 100 * (r - 0.5) / n with r the average rank of the tied block.
double midpoint_percentile(double value, const std::vector<double>& sorted_population);

/// Qualitative band for a percentile; cut points at 10 / 35 / 65 / 90.
std::string percentile_band(double percentile);

/// Scalar signature features as (name, value) pairs; absent features omitted.
std::vector<std::pair<std::string, std::optional<double>>> scalar_features(
    const BehavioralSignature& s);

/// Maps each scalar feature of `s` to its percentile within the population.
/// A population of one yields percentile 50 across the board.
NormalizedStats normalize_stats(const BehavioralSignature& s,
                                const std::vector<BehavioralSignature>& population);

struct PromptContext {
    std::string user_id;
    std::string text;  // rendered document
    std::size_t token_count = 0;
    std::size_t token_budget = 0;
    std::size_t items_rendered = 0;
    std::size_t items_dropped = 0;
};

/// Renders the fused context document: normalized statistics plus the sampled
/// interaction history enriched with item metadata, chronological order. If
/// the render exceeds the budget, item descriptions are truncated first, then
/// review texts, then whole oldest items are dropped. Throws BudgetError when
/// not even the statistics section fits.
PromptContext build_context(const std::string& user_id,
                            const SampledHistory& history,
                            const std::unordered_map<std::string, ItemMetadata>& metadata,
                            const NormalizedStats& stats,
                            std::size_t token_budget,
                            const std::string& template_text);

/// The default document template shipped under assets/prompts/.
std::string default_context_template();

json prompt_context_to_json(const PromptContext& c);
PromptContext prompt_context_from_json(const json& j);

}  // namespace pub
