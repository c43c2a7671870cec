#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pub/dataset.hpp"
#include "pub/llmclient.hpp"
#include "pub/persona.hpp"
#include "pub/profile.hpp"
#include "pub/rng.hpp"

namespace pub {

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PolicyKind {
    personality_deterministic,
    personality_llm,
    random_policy,
    markov,
    ablation_random_personality,
    oracle,
};

PolicyKind policy_from_string(const std::string& name);
std::string policy_name(PolicyKind kind);

inline constexpr std::size_t kListSize = 10;  // 1 positive + 9 negatives

/// Item universe plus the priors the agent policies consult: popularity from
/// the train log, category labels (metadata first, interactions as fallback),
/// prices with global quintile tiers, and the train-log category transition
/// counts (add-one smoothing applied on lookup).
struct SimCatalogue {
    std::vector<std::string> items;  // sorted; negative-sampling universe
    std::unordered_map<std::string, double> popularity;  // [0,1], train count / max count
    std::unordered_map<std::string, std::string> item_category;
    std::unordered_map<std::string, double> item_price;
    PriceQuintiles quintiles;
    std::map<std::string, std::map<std::string, double>> transition_counts;
    std::map<std::string, double> transition_row_totals;
    std::size_t category_count = 0;

    static SimCatalogue build(const Dataset& full, const std::vector<InteractionRecord>& train);

    std::string category_of(const std::string& item_id) const;
    std::optional<int> tier_of(const std::string& item_id) const;
    double popularity_of(const std::string& item_id) const;
    /// Add-one-smoothed first-order transition probability; unseen source
    /// rows degrade to the uniform distribution.
    double transition(const std::string& from, const std::string& to) const;
};

/// The agent's evolving view of one user: real train history plus prior
/// synthetic selections.
struct UserSimState {
    std::map<std::string, double> category_counts;
    double total_count = 0.0;
    std::array<double, 5> tier_counts{};
    double priced_count = 0.0;
    std::string last_category;

    static UserSimState from_history(std::span<const InteractionRecord> train,
                                     const SimCatalogue& catalogue);
    void add_selection(const std::string& item_id, const SimCatalogue& catalogue);

    double affinity(const std::string& category) const;
    std::optional<int> modal_tier() const;  // smallest tier index on ties
};

struct RecommendationList {
    std::size_t step = 0;
    std::vector<std::string> items;  // exactly kListSize, shuffled presentation order
    std::string positive_item;
};

struct SelectionStep {
    std::size_t step = 0;
    std::string item_id;
    bool was_positive = false;
    std::int64_t timestamp = 0;  // inherited from the real positive
};

struct SyntheticSequence {
    std::string user_id;
    std::string policy;
    std::uint64_t seed = 0;
    std::vector<SelectionStep> selections;
};

/// score = w1*affinity + w2*O*(1-affinity) + w3*C*tier_match
///       + w4*popularity*E - w5*N*tier_deviation, w = (1, .5, .5, .25, .25).
/// Terms with missing metadata (unknown category/price/modal tier) contribute 0.
double deterministic_item_score(const PersonalityProfile& p, const std::string& item_id,
                                const SimCatalogue& catalogue, const UserSimState& state);

/// positive = P_u[step]; 9 negatives uniform without replacement from
/// catalogue \ I_u; presentation order shuffled. Throws SimError naming the
/// user when fewer than 9 candidates exist.
RecommendationList build_mock_list(const std::string& user_id, std::size_t step,
                                   const std::string& positive_item,
                                   const std::unordered_set<std::string>& interacted,
                                   const SimCatalogue& catalogue, Rng& rng);

struct LlmSelectionSettings {
    std::string model;
    std::string system_prompt;
    double temperature = 0.0;
    int max_tokens = 128;
    int parse_retries = 2;
};

std::string default_select_system_prompt();

/// Rendered user prompt for the personality-llm policy (exposed for tests and
/// cassette pre-recording).
std::string selection_prompt(const PersonalityProfile& p, const RecommendationList& list,
                             const SimCatalogue& catalogue, const UserSimState& state);

std::string agent_select(PolicyKind policy, const PersonalityProfile& personality,
                         const RecommendationList& list, const SimCatalogue& catalogue,
                         const UserSimState& state, Rng& rng, LlmClient* llm = nullptr,
                         const LlmSelectionSettings* llm_settings = nullptr);

class Simulator {
public:
    Simulator(const SimCatalogue& catalogue, std::uint64_t seed)
        : catalogue_(&catalogue), seed_(seed) {}

    /// Runs |test| steps for one user. `train`/`test` are the user's
    /// chronological split, `interacted` their full item set I_u. `profile`
    /// may be null for policies that ignore personality.
    SyntheticSequence simulate_user(const std::string& user_id, PolicyKind policy,
                                    std::span<const InteractionRecord> train,
                                    std::span<const InteractionRecord> test,
                                    const std::unordered_set<std::string>& interacted,
                                    const PersonalityProfile* profile, LlmClient* llm = nullptr,
                                    const LlmSelectionSettings* llm_settings = nullptr) const;

private:
    const SimCatalogue* catalogue_;
    std::uint64_t seed_;
};

/// Uniform-[0,1] traits drawn from the user's dedicated ablation stream.
PersonalityProfile random_personality(const std::string& user_id, std::uint64_t seed);

json selection_to_json(const SyntheticSequence& seq, const SelectionStep& s);
std::string serialize_sequences(const std::vector<SyntheticSequence>& sequences);
std::vector<SyntheticSequence> parse_synthetic_log(std::istream& in);

}  // namespace pub
