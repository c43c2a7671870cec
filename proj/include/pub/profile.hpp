#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pub/dataset.hpp"
#include "pub/io.hpp"

namespace pub {

struct Rhythm {
    double strength = 0.0;  // [0, 1], magnitude of the mean resultant vector
    double phase = 0.0;     // [0, 2*pi)
};

/// Per-user aggregated behaviour statistics. Absent optionals mean the user
/// lacked the evidence for that feature (no priced items, no review text,
/// fewer than two interactions); they are never reported as zero.
struct BehavioralSignature {
    std::string user_id;
    std::size_t purchase_count = 0;
    double span_days = 0.0;
    double purchase_frequency = 0.0;  // interactions per 30 days
    std::map<std::string, Rhythm> rhythm;
    std::optional<double> interval_entropy;  // bits
    double category_entropy = 0.0;           // bits
    std::map<std::string, double> category_histogram;
    std::optional<std::array<double, 5>> price_tiers;
    std::optional<double> review_length_mean;
    std::optional<double> review_length_cv;
    double rating_deviation = 0.0;
    std::map<std::string, bool> feature_coverage;
};

enum class WindowKind { week, month, quarter };

const char* window_kind_name(WindowKind k);
int window_kind_days(WindowKind k);

struct SampledBin {
    std::int64_t window_start = 0;
    std::int64_t window_end = 0;  // exclusive
    std::vector<InteractionRecord> records;
};

struct SampledHistory {
    std::string user_id;
    WindowKind kind = WindowKind::week;
    std::vector<SampledBin> bins;

    std::vector<InteractionRecord> flat() const;
    std::size_t total_records() const;
};

/// Global price quintile table, computed once over the metadata catalogue so
/// tier vectors are comparable across users.
struct PriceQuintiles {
    std::array<double, 4> edges{};
    bool valid = false;

    static PriceQuintiles from_catalogue(const std::unordered_map<std::string, ItemMetadata>& metadata);
    int tier(double price) const;  // 0 (cheapest) .. 4
};

/// Maps Unix seconds onto a unit circle for a cycle of `cycle_days` days:
/// theta = 2*pi*t / (cycle_days*86400) mod 2*pi.
double angular_transform(std::int64_t timestamp, int cycle_days);

/// Mean resultant vector over unit phasors of the given timestamps.
Rhythm purchase_rhythm(std::span<const std::int64_t> timestamps, int cycle_days);

/// Shannon entropy (bits) of inter-purchase gaps bucketed geometrically in
/// days: <1, 1-2, 2-4, 4-8, 8-16, 16-32, 32-64, >=64. Needs >= 2 timestamps.
std::optional<double> interval_entropy(std::span<const std::int64_t> sorted_timestamps);

/// Shannon entropy (bits) of a histogram given as counts or proportions.
double shannon_entropy_bits(std::span<const double> weights);

double category_entropy(const std::vector<const InteractionRecord*>& records);

std::map<std::string, double> category_histogram(const std::vector<const InteractionRecord*>& records);

std::optional<std::array<double, 5>> price_tier_distribution(
    const std::vector<const InteractionRecord*>& records,
    const std::unordered_map<std::string, ItemMetadata>& metadata,
    const PriceQuintiles& quintiles);

struct ReviewStats {
    std::optional<double> length_mean;
    std::optional<double> length_cv;
    double rating_deviation = 0.0;
};

/// Lengths in whitespace tokens over records that have text; cv is the
/// population std over the mean (0 when the mean is 0). rating_deviation is
/// the mean of (rating - category mean rating).
ReviewStats review_statistics(const std::vector<const InteractionRecord*>& records,
                              const std::map<std::string, double>& category_means);

/// Mean rating per category over a dataset (one read-only pass, shared by all
/// signature computations).
std::map<std::string, double> category_mean_ratings(const Dataset& d);

/// Assembles the full signature for one user. `records` must be the user's
/// chronologically sorted interactions and non-empty.
BehavioralSignature build_signature(const std::string& user_id,
                                    const std::vector<const InteractionRecord*>& records,
                                    const std::unordered_map<std::string, ItemMetadata>& metadata,
                                    const std::map<std::string, double>& category_means,
                                    const PriceQuintiles& quintiles,
                                    const std::vector<int>& rhythm_cycles = {7, 365});

/// Adaptive window length: week for spans up to 1 year, month up to 3 years,
/// quarter beyond (1 year = 365 days, 1 month = 30, 1 quarter = 91).
WindowKind window_kind(double span_days);

/// Partitions the user's span into contiguous windows anchored at the first
/// timestamp and keeps at most `eta` records per bin, preferring longer review
/// text and breaking ties toward recency. The first and last record always
/// survive, which pins the span and makes resampling a fixed point.
SampledHistory temporal_stratified_sample(const std::string& user_id,
                                          const std::vector<const InteractionRecord*>& records,
                                          std::size_t eta);

json signature_to_json(const BehavioralSignature& s);
BehavioralSignature signature_from_json(const json& j);
json sampled_history_to_json(const SampledHistory& h);
SampledHistory sampled_history_from_json(const json& j);

}  // namespace pub
