#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pub/context.hpp"
#include "pub/lexicon.hpp"
#include "pub/llmclient.hpp"
#include "pub/profile.hpp"

namespace pub {

/// Pooled psycholinguistic features over a user's review texts. Optionals are
/// absent when the user has no review tokens at all.
struct TextFeatures {
    std::optional<double> social_word_ratio;          // [0,1]
    std::optional<double> positive_sentiment_ratio;   // [0,1], fraction of reviews with score > 0.05
    std::optional<double> politeness_ratio;           // [0,1]
    std::optional<double> negative_emotion_volatility;  // >= 0, population std of per-review ratios
    std::optional<double> metaphor_density;           // [0,1]
    std::size_t review_count = 0;
    std::size_t token_count = 0;
};

struct EvidenceItem {
    std::string feature;
    double contribution = 0.0;
};

struct PersonalityProfile {
    std::string user_id;
    double openness = 0.5;
    double conscientiousness = 0.5;
    double extraversion = 0.5;
    double agreeableness = 0.5;
    double neuroticism = 0.5;
    std::string backend;  // "deterministic" or "llm"
    std::map<std::string, std::vector<EvidenceItem>> evidence;  // trait -> contributions
    std::vector<std::string> warnings;

    double trait(char letter) const;  // 'O','C','E','A','N'
};

/// Lexicon valence score with negation flipping (3 preceding tokens) and
/// booster intensification, squashed by s / sqrt(s^2 + 15) into [-1, 1].
double sentiment_score(const std::string& text, const Lexicons& lx);

/// Per-review sentiment plus pooled token-level lexicon ratios.
TextFeatures text_features(const std::vector<std::string>& reviews, const Lexicons& lx);

/// Percentile-composition backend: each trait is an equal-weighted mean of
/// its correlates' population percentiles (as fractions in [0,1]); inverted
/// correlates use 1 - percentile. Absent correlates drop out with the weights
/// renormalised; a trait with no available correlate scores a neutral 0.5.
class DeterministicInference {
public:
    struct Entry {
        const BehavioralSignature* signature = nullptr;
        const TextFeatures* text = nullptr;
    };

    /// Feature-name -> weight overrides (default weight 1.0 each).
    explicit DeterministicInference(const std::vector<Entry>& population,
                                    std::map<std::string, double> feature_weights = {});

    PersonalityProfile infer(const std::string& user_id, const BehavioralSignature& signature,
                             const TextFeatures& text) const;

private:
    std::optional<double> percentile_fraction(const std::string& feature,
                                              std::optional<double> value) const;

    std::map<std::string, std::vector<double>> populations_;  // feature -> sorted present values
    std::map<std::string, double> weights_;
};

/// Correlate values used by the deterministic backend, keyed by feature name.
/// Exposed for population assembly and tests.
std::map<std::string, std::optional<double>> deterministic_correlates(
    const BehavioralSignature& signature, const TextFeatures& text);

struct LlmInferenceSettings {
    std::string model;
    std::string system_prompt;
    double temperature = 0.0;
    int max_tokens = 256;
    int parse_retries = 2;  // re-asks after an unparseable reply
};

struct LlmParseError : LlmError {
    LlmParseError(const std::string& what, std::string raw)
        : LlmError(what), raw_response(std::move(raw)) {}
    std::string raw_response;
};

/// One chat call (plus up to parse_retries re-asks) requesting strict JSON
/// {"O":..,"C":..,"E":..,"A":..,"N":..}; lenient extraction, values clamped
/// to [0,1] with a warning when clamping fired.
PersonalityProfile infer_llm(const PromptContext& context, LlmClient& client,
                             const LlmInferenceSettings& settings);

/// Default system prompt shipped under assets/prompts/persona_system.txt.
std::string default_persona_system_prompt();

json profile_to_json(const PersonalityProfile& p);
PersonalityProfile profile_from_json(const json& j);

}  // namespace pub
