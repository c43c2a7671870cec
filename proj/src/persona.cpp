#include "pub/persona.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pub {

namespace {

constexpr const char* kTraits[5] = {"openness", "conscientiousness", "extraversion",
                                    "agreeableness", "neuroticism"};

// trait -> list of (feature name, inverted?)
const std::vector<std::pair<std::string, bool>>& trait_correlates(const std::string& trait) {
    static const std::map<std::string, std::vector<std::pair<std::string, bool>>> table = {
        {"openness", {{"category_entropy", false}, {"metaphor_density", false}}},
        {"conscientiousness",
         {{"review_length_cv", true}, {"abs_rating_deviation", true}, {"rhythm_week_strength", false}}},
        {"extraversion", {{"social_word_ratio", false}}},
        {"agreeableness", {{"positive_sentiment_ratio", false}, {"politeness_ratio", false}}},
        {"neuroticism", {{"negative_emotion_volatility", false}}},
    };
    return table.at(trait);
}

}  // namespace

double PersonalityProfile::trait(char letter) const {
    switch (letter) {
        case 'O': return openness;
        case 'C': return conscientiousness;
        case 'E': return extraversion;
        case 'A': return agreeableness;
        case 'N': return neuroticism;
    }
    throw std::invalid_argument("unknown trait letter");
}

double sentiment_score(const std::string& text, const Lexicons& lx) {
    const auto tokens = tokenize(text);
    double sum = 0.0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto it = lx.valence.find(tokens[i]);
        if (it == lx.valence.end()) continue;
        double v = it->second;
        bool negated = false;
        double boost = 1.0;
        for (std::size_t back = 1; back <= 3 && back <= i; ++back) {
            const std::string& prev = tokens[i - back];
            if (lx.negations.count(prev)) negated = true;
            auto bit = lx.boosters.find(prev);
            if (bit != lx.boosters.end()) boost *= bit->second;
        }
        v *= boost;
        if (negated) v = -v;
        sum += v;
    }
    if (sum == 0.0) return 0.0;
    return sum / std::sqrt(sum * sum + 15.0);
}

TextFeatures text_features(const std::vector<std::string>& reviews, const Lexicons& lx) {
    TextFeatures f;
    f.review_count = reviews.size();
    if (reviews.empty()) return f;

    std::size_t total_tokens = 0, social = 0, polite = 0, figurative = 0;
    std::size_t positive_reviews = 0;
    std::vector<double> negative_ratios;
    negative_ratios.reserve(reviews.size());

    for (const auto& review : reviews) {
        const auto tokens = tokenize(review);
        total_tokens += tokens.size();
        std::size_t negative = 0;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const std::string& t = tokens[i];
            if (lx.social.count(t)) ++social;
            if (lx.politeness.count(t)) ++polite;
            if (lx.negative.count(t)) ++negative;
            if (lx.figurative_words.count(t)) ++figurative;
            if (i + 1 < tokens.size()) {
                for (const auto& [a, b] : lx.figurative_phrases)
                    if (t == a && tokens[i + 1] == b) ++figurative;
            }
        }
        negative_ratios.push_back(tokens.empty() ? 0.0
                                                 : static_cast<double>(negative) / tokens.size());
        if (sentiment_score(review, lx) > 0.05) ++positive_reviews;
    }
    f.token_count = total_tokens;
    if (total_tokens == 0) return f;  // texts were all empty/punctuation

    const double n = static_cast<double>(total_tokens);
    f.social_word_ratio = std::min(1.0, social / n);
    f.politeness_ratio = std::min(1.0, polite / n);
    f.metaphor_density = std::min(1.0, figurative / n);
    f.positive_sentiment_ratio = static_cast<double>(positive_reviews) / reviews.size();

    const double mean = std::accumulate(negative_ratios.begin(), negative_ratios.end(), 0.0) /
                        negative_ratios.size();
    double var = 0.0;
    for (double r : negative_ratios) var += (r - mean) * (r - mean);
    var /= negative_ratios.size();
    f.negative_emotion_volatility = std::sqrt(var);
    return f;
}

std::map<std::string, std::optional<double>> deterministic_correlates(
    const BehavioralSignature& signature, const TextFeatures& text) {
    std::map<std::string, std::optional<double>> c;
    c["category_entropy"] = signature.category_entropy;
    c["metaphor_density"] = text.metaphor_density;
    c["review_length_cv"] = signature.review_length_cv;
    c["abs_rating_deviation"] = std::abs(signature.rating_deviation);
    auto rit = signature.rhythm.find("week");
    c["rhythm_week_strength"] =
        rit != signature.rhythm.end() ? std::optional<double>(rit->second.strength) : std::nullopt;
    c["social_word_ratio"] = text.social_word_ratio;
    c["positive_sentiment_ratio"] = text.positive_sentiment_ratio;
    c["politeness_ratio"] = text.politeness_ratio;
    c["negative_emotion_volatility"] = text.negative_emotion_volatility;
    return c;
}

DeterministicInference::DeterministicInference(const std::vector<Entry>& population,
                                               std::map<std::string, double> feature_weights)
    : weights_(std::move(feature_weights)) {
    if (population.empty()) throw std::invalid_argument("population must be non-empty");
    for (const auto& entry : population) {
        for (auto& [name, value] : deterministic_correlates(*entry.signature, *entry.text))
            if (value) populations_[name].push_back(*value);
    }
    for (auto& [name, values] : populations_) std::sort(values.begin(), values.end());
}

std::optional<double> DeterministicInference::percentile_fraction(
    const std::string& feature, std::optional<double> value) const {
    if (!value) return std::nullopt;
    auto it = populations_.find(feature);
    if (it == populations_.end() || it->second.empty()) return std::nullopt;
    return midpoint_percentile(*value, it->second) / 100.0;
}

PersonalityProfile DeterministicInference::infer(const std::string& user_id,
                                                 const BehavioralSignature& signature,
                                                 const TextFeatures& text) const {
    PersonalityProfile p;
    p.user_id = user_id;
    p.backend = "deterministic";

    const auto correlates = deterministic_correlates(signature, text);
    double scores[5];
    for (int ti = 0; ti < 5; ++ti) {
        const std::string trait = kTraits[ti];
        struct Part {
            std::string name;
            double value;
            double weight;
        };
        std::vector<Part> parts;
        for (const auto& [feature, inverted] : trait_correlates(trait)) {
            auto frac = percentile_fraction(feature, correlates.at(feature));
            if (!frac) continue;
            const double x = inverted ? 1.0 - *frac : *frac;
            auto wit = weights_.find(feature);
            const double w = wit != weights_.end() ? wit->second : 1.0;
            if (w <= 0.0) continue;
            parts.push_back({(inverted ? "inv_" : "") + feature + "_pct", x, w});
        }
        double score;
        auto& evidence = p.evidence[trait];
        if (parts.empty()) {
            score = 0.5;
            evidence.push_back({"neutral_prior", 0.5});
        } else {
            double wsum = 0.0;
            for (const auto& part : parts) wsum += part.weight;
            score = 0.0;
            for (const auto& part : parts) {
                const double contribution = part.value * part.weight / wsum;
                evidence.push_back({part.name, contribution});
                score += contribution;
            }
        }
        scores[ti] = std::clamp(score, 0.0, 1.0);
    }
    p.openness = scores[0];
    p.conscientiousness = scores[1];
    p.extraversion = scores[2];
    p.agreeableness = scores[3];
    p.neuroticism = scores[4];
    return p;
}

namespace {

/// Finds the first balanced {...} block that parses as a JSON object.
std::optional<json> extract_first_json_object(const std::string& text) {
    for (std::size_t start = text.find('{'); start != std::string::npos;
         start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false, escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            const char ch = text[i];
            if (in_string) {
                if (escaped)
                    escaped = false;
                else if (ch == '\\')
                    escaped = true;
                else if (ch == '"')
                    in_string = false;
                continue;
            }
            if (ch == '"') in_string = true;
            else if (ch == '{') ++depth;
            else if (ch == '}') {
                if (--depth == 0) {
                    json parsed = json::parse(text.substr(start, i - start + 1), nullptr, false);
                    if (!parsed.is_discarded() && parsed.is_object()) return parsed;
                    break;
                }
            }
        }
    }
    return std::nullopt;
}

std::optional<PersonalityProfile> parse_trait_json(const std::string& reply,
                                                   const std::string& user_id) {
    auto obj = extract_first_json_object(reply);
    if (!obj) return std::nullopt;
    static const char* kKeys[5] = {"O", "C", "E", "A", "N"};
    double values[5];
    for (int i = 0; i < 5; ++i) {
        if (!obj->contains(kKeys[i]) || !(*obj)[kKeys[i]].is_number()) return std::nullopt;
        values[i] = (*obj)[kKeys[i]].get<double>();
    }
    PersonalityProfile p;
    p.user_id = user_id;
    p.backend = "llm";
    for (int i = 0; i < 5; ++i) {
        const double clamped = std::clamp(values[i], 0.0, 1.0);
        if (clamped != values[i])
            p.warnings.push_back(std::string("clamped ") + kKeys[i] + " from " +
                                 std::to_string(values[i]));
        p.evidence[kTraits[i]].push_back({"llm_response", clamped});
        switch (i) {
            case 0: p.openness = clamped; break;
            case 1: p.conscientiousness = clamped; break;
            case 2: p.extraversion = clamped; break;
            case 3: p.agreeableness = clamped; break;
            case 4: p.neuroticism = clamped; break;
        }
    }
    return p;
}

}  // namespace

std::string default_persona_system_prompt() {
    return "You are a psychometric rater. Given a user's shopping statistics and review "
           "history, estimate their Big Five personality traits. Respond with only a JSON "
           "object of the form {\"O\":x,\"C\":x,\"E\":x,\"A\":x,\"N\":x} where every value "
           "is a number between 0 and 1. Do not add any other text.";
}

PersonalityProfile infer_llm(const PromptContext& context, LlmClient& client,
                             const LlmInferenceSettings& settings) {
    ChatRequest req;
    req.model = settings.model;
    req.temperature = settings.temperature;
    req.max_tokens = settings.max_tokens;
    req.messages.push_back({"system", settings.system_prompt});
    req.messages.push_back({"user", context.text});

    std::string last_reply;
    for (int attempt = 0; attempt <= settings.parse_retries; ++attempt) {
        if (attempt > 0)
            req.messages.push_back(
                {"user", "Your previous reply could not be parsed. Respond with only the JSON "
                         "object, no other text."});
        last_reply = client.chat(req);
        if (auto profile = parse_trait_json(last_reply, context.user_id)) return *profile;
    }
    throw LlmParseError("no parseable trait JSON after " +
                            std::to_string(settings.parse_retries) + " retries for user " +
                            context.user_id,
                        last_reply);
}

json profile_to_json(const PersonalityProfile& p) {
    json evidence = json::object();
    for (const auto& [trait, items] : p.evidence) {
        json arr = json::array();
        for (const auto& item : items)
            arr.push_back({{"feature", item.feature}, {"contribution", item.contribution}});
        evidence[trait] = std::move(arr);
    }
    json j{{"user_id", p.user_id},
           {"openness", p.openness},
           {"conscientiousness", p.conscientiousness},
           {"extraversion", p.extraversion},
           {"agreeableness", p.agreeableness},
           {"neuroticism", p.neuroticism},
           {"backend", p.backend},
           {"evidence", std::move(evidence)}};
    if (!p.warnings.empty()) j["warnings"] = p.warnings;
    return j;
}

PersonalityProfile profile_from_json(const json& j) {
    PersonalityProfile p;
    p.user_id = j.at("user_id").get<std::string>();
    p.openness = j.at("openness").get<double>();
    p.conscientiousness = j.at("conscientiousness").get<double>();
    p.extraversion = j.at("extraversion").get<double>();
    p.agreeableness = j.at("agreeableness").get<double>();
    p.neuroticism = j.at("neuroticism").get<double>();
    p.backend = j.at("backend").get<std::string>();
    if (j.contains("evidence"))
        for (const auto& [trait, arr] : j["evidence"].items())
            for (const auto& item : arr)
                p.evidence[trait].push_back({item.at("feature").get<std::string>(),
                                             item.at("contribution").get<double>()});
    if (j.contains("warnings")) p.warnings = j["warnings"].get<std::vector<std::string>>();
    return p;
}

}  // namespace pub
