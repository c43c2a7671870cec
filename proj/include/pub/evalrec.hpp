#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pub/dataset.hpp"
#include "pub/io.hpp"
#include "pub/persona.hpp"
#include "pub/simulate.hpp"

namespace pub {

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// |a ∩ b| / |a ∪ b|; defined as 1 for two empty sets.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// Binary-gain nDCG with 1-based positions and log2(i+1) discounts; IDCG over
/// min(|relevant|, k) positions. Empty relevant set scores 0.
double ndcg_at_k(const std::vector<std::string>& ranked,
                 const std::unordered_set<std::string>& relevant, std::size_t k);

/// Rank-based equal-size deciles by interaction count, ascending; ties broken
/// by user_id. Decile 9 holds the most frequent users. Throws below 10 users.
std::map<std::string, int> frequency_deciles(const std::map<std::string, std::size_t>& counts);

/// Spearman rank correlation with average ranks for ties; identical rank
/// vectors short-circuit to exactly 1.0. Fewer than 2 points or zero variance
/// on either side -> nullopt.
std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b);

struct Hyperparams {
    int dims = 32;
    double lr = 0.01;
    double reg = 0.02;
    int epochs = 30;
};

struct RecModel {
    std::string kind;  // pop | mf | bpr | markov-seq
    std::vector<std::string> catalogue;  // sorted ranking universe

    std::unordered_map<std::string, double> pop_counts;  // also the cold-start fallback

    std::unordered_map<std::string, std::size_t> user_index, item_index;
    std::vector<std::vector<double>> user_factors, item_factors;
    std::vector<double> user_bias, item_bias;
    double global_mean = 0.0;

    std::map<std::string, std::map<std::string, double>> transitions;  // rows sum to 1
    std::unordered_map<std::string, std::string> item_category;
    std::unordered_map<std::string, std::string> user_last_category;

    std::vector<double> training_log;  // per-epoch objective (empty for pop/markov-seq)
};

RecModel train_model(const std::string& kind, const Dataset& train,
                     const std::vector<std::string>& catalogue, const Hyperparams& hp,
                     std::uint64_t seed);

/// Rating prediction for the mf model (mu + b_u + b_i + p.q); unseen users or
/// items contribute zero bias/factors.
double predict_rating(const RecModel& m, const std::string& user, const std::string& item);

struct RankedRecommendation {
    std::vector<std::string> items;
    bool cold_start = false;  // user unknown to a personalised model
};

/// Top-k catalogue items by model score, excluding `exclude`; ties by item_id.
RankedRecommendation recommend(const RecModel& m, const std::string& user,
                               const std::unordered_set<std::string>& exclude, std::size_t k);

struct SyntheticSplit {
    Dataset train;
    Dataset test;
    std::vector<std::string> shortfall_users;  // fewer selections than real test count
};

/// Materialises the synthetic log as an interaction dataset and splits it
/// chronologically per user with the test side sized to the user's real test
/// count. Hits inherit the real rating; misses impute the user's train-mean
/// rating; categories come from metadata first, interaction records second.
SyntheticSplit split_synthetic(const Dataset& real_train, const Dataset& real_test,
                               const std::vector<SyntheticSequence>& synthetic);

struct AlgoResult {
    std::string algorithm;
    double ndcg_real = 0.0;
    double ndcg_synthetic = 0.0;
    double rank_real = 0.0;  // 1 = best, average ranks on ties
    double rank_synthetic = 0.0;
    std::map<std::string, double> per_user_real;  // user -> nDCG on the real split
};

struct ComparisonReport {
    std::vector<AlgoResult> algorithms;
    std::optional<double> spearman;  // absent with < 2 algorithms
    std::vector<std::string> shortfall_users;
    std::size_t k = 0;
};

/// RQ2 harness: trains every algorithm on the real train split and on the
/// synthetic split, evaluates nDCG@k per side, and correlates the two
/// algorithm orderings. Users present in the real test split but absent from
/// the synthetic log raise an error listing them.
ComparisonReport compare_real_synthetic(const Dataset& real_train, const Dataset& real_test,
                                        const std::vector<SyntheticSequence>& synthetic,
                                        const std::vector<std::string>& algorithms, std::size_t k,
                                        const Hyperparams& hp, std::uint64_t seed);

struct TraitSummary {
    double mean = 0.0;
    std::array<std::size_t, 10> histogram{};  // bins over [0,1], 1.0 in the last bin
};

/// Per-trait mean and 10-bin histogram over [0,1].
std::map<std::string, TraitSummary> trait_distribution(
    const std::vector<PersonalityProfile>& profiles);

struct SusceptibilityRow {
    double top_mean = 0.0;
    double bottom_mean = 0.0;
    double difference = 0.0;  // top - bottom
};

struct SusceptibilityReport {
    std::string algorithm;
    std::size_t cohort_size = 0;
    std::map<std::string, SusceptibilityRow> traits;
};

/// Top/bottom ceil(0.1*n) users by nDCG (ties by user_id) against per-trait
/// cohort means. Throws below 20 users.
SusceptibilityReport susceptibility(const std::map<std::string, double>& per_user_ndcg,
                                    const std::map<std::string, PersonalityProfile>& profiles,
                                    const std::string& algorithm_label);

struct PolicyFidelity {
    std::string policy;
    std::map<std::string, double> per_user;  // user -> Jaccard(S_u, P_u)
    double mean = 0.0;
    std::map<std::string, double> percentile_summary;  // p10 p25 p50 p75 p90
    std::array<double, 10> decile_mean{};
    std::array<std::size_t, 10> decile_count{};
};

/// RQ1 fidelity for one policy's sequences against the real test item sets.
PolicyFidelity compute_fidelity(const std::string& policy,
                                const std::vector<SyntheticSequence>& sequences,
                                const std::map<std::string, std::set<std::string>>& real_test_sets,
                                const std::map<std::string, int>& deciles);

json fidelity_to_json(const PolicyFidelity& f);
json comparison_to_json(const ComparisonReport& r);
json trait_distribution_to_json(const std::map<std::string, TraitSummary>& dist);
json susceptibility_to_json(const SusceptibilityReport& s);

}  // namespace pub
