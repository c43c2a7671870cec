#include "pub/simulate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "pub/io.hpp"

namespace pub {

PolicyKind policy_from_string(const std::string& name) {
    if (name == "personality-deterministic") return PolicyKind::personality_deterministic;
    if (name == "personality-llm") return PolicyKind::personality_llm;
    if (name == "random") return PolicyKind::random_policy;
    if (name == "markov") return PolicyKind::markov;
    if (name == "ablation-random-personality") return PolicyKind::ablation_random_personality;
    if (name == "oracle") return PolicyKind::oracle;
    throw SimError("unknown policy: " + name);
}

std::string policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::personality_deterministic: return "personality-deterministic";
        case PolicyKind::personality_llm: return "personality-llm";
        case PolicyKind::random_policy: return "random";
        case PolicyKind::markov: return "markov";
        case PolicyKind::ablation_random_personality: return "ablation-random-personality";
        case PolicyKind::oracle: return "oracle";
    }
    return "?";
}

SimCatalogue SimCatalogue::build(const Dataset& full, const std::vector<InteractionRecord>& train) {
    SimCatalogue c;

    std::set<std::string> item_set;
    for (const auto& r : full.interactions) item_set.insert(r.item_id);
    for (const auto& [id, meta] : full.metadata) item_set.insert(id);
    c.items.assign(item_set.begin(), item_set.end());

    for (const auto& [id, meta] : full.metadata) {
        if (!meta.category.empty()) c.item_category[id] = meta.category;
        if (meta.price) c.item_price[id] = *meta.price;
    }
    for (const auto& r : full.interactions)
        if (!r.category.empty()) c.item_category.emplace(r.item_id, r.category);

    std::unordered_map<std::string, std::size_t> counts;
    std::size_t max_count = 0;
    for (const auto& r : train) max_count = std::max(max_count, ++counts[r.item_id]);
    if (max_count > 0)
        for (const auto& [id, n] : counts)
            c.popularity[id] = static_cast<double>(n) / static_cast<double>(max_count);

    c.quintiles = PriceQuintiles::from_catalogue(full.metadata);

    // First-order category transitions over each user's chronological train
    // sequence; categories use the same labelling as candidates.
    std::map<std::string, std::vector<const InteractionRecord*>> per_user;
    for (const auto& r : train) per_user[r.user_id].push_back(&r);
    std::set<std::string> categories;
    for (auto& [user, records] : per_user) {
        std::stable_sort(records.begin(), records.end(),
                         [](const auto* a, const auto* b) { return a->timestamp < b->timestamp; });
        for (std::size_t i = 0; i < records.size(); ++i) {
            const std::string cat = c.category_of(records[i]->item_id);
            if (!cat.empty()) categories.insert(cat);
            if (i + 1 < records.size()) {
                const std::string next = c.category_of(records[i + 1]->item_id);
                if (!cat.empty() && !next.empty()) {
                    c.transition_counts[cat][next] += 1.0;
                    c.transition_row_totals[cat] += 1.0;
                }
            }
        }
    }
    c.category_count = categories.size();
    return c;
}

std::string SimCatalogue::category_of(const std::string& item_id) const {
    auto it = item_category.find(item_id);
    return it != item_category.end() ? it->second : std::string{};
}

std::optional<int> SimCatalogue::tier_of(const std::string& item_id) const {
    if (!quintiles.valid) return std::nullopt;
    auto it = item_price.find(item_id);
    if (it == item_price.end()) return std::nullopt;
    return quintiles.tier(it->second);
}

double SimCatalogue::popularity_of(const std::string& item_id) const {
    auto it = popularity.find(item_id);
    return it != popularity.end() ? it->second : 0.0;
}

double SimCatalogue::transition(const std::string& from, const std::string& to) const {
    if (category_count == 0) return 0.0;
    double count = 0.0, row_total = 0.0;
    auto row = transition_counts.find(from);
    if (row != transition_counts.end()) {
        auto cell = row->second.find(to);
        if (cell != row->second.end()) count = cell->second;
    }
    auto total = transition_row_totals.find(from);
    if (total != transition_row_totals.end()) row_total = total->second;
    return (count + 1.0) / (row_total + static_cast<double>(category_count));
}

UserSimState UserSimState::from_history(std::span<const InteractionRecord> train,
                                        const SimCatalogue& catalogue) {
    UserSimState s;
    for (const auto& r : train) {
        s.total_count += 1.0;
        const std::string cat = catalogue.category_of(r.item_id);
        if (!cat.empty()) s.category_counts[cat] += 1.0;
        if (auto tier = catalogue.tier_of(r.item_id)) {
            s.tier_counts[static_cast<std::size_t>(*tier)] += 1.0;
            s.priced_count += 1.0;
        }
    }
    if (!train.empty()) s.last_category = catalogue.category_of(train.back().item_id);
    return s;
}

void UserSimState::add_selection(const std::string& item_id, const SimCatalogue& catalogue) {
    total_count += 1.0;
    const std::string cat = catalogue.category_of(item_id);
    if (!cat.empty()) category_counts[cat] += 1.0;
    if (auto tier = catalogue.tier_of(item_id)) {
        tier_counts[static_cast<std::size_t>(*tier)] += 1.0;
        priced_count += 1.0;
    }
    last_category = cat;
}

double UserSimState::affinity(const std::string& category) const {
    if (total_count <= 0.0 || category.empty()) return 0.0;
    auto it = category_counts.find(category);
    return it != category_counts.end() ? it->second / total_count : 0.0;
}

std::optional<int> UserSimState::modal_tier() const {
    if (priced_count <= 0.0) return std::nullopt;
    int best = 0;
    for (int t = 1; t < 5; ++t)
        if (tier_counts[static_cast<std::size_t>(t)] > tier_counts[static_cast<std::size_t>(best)])
            best = t;
    return best;
}

double deterministic_item_score(const PersonalityProfile& p, const std::string& item_id,
                                const SimCatalogue& catalogue, const UserSimState& state) {
    constexpr double w1 = 1.0, w2 = 0.5, w3 = 0.5, w4 = 0.25, w5 = 0.25;
    double score = 0.0;

    const std::string category = catalogue.category_of(item_id);
    if (!category.empty()) {
        const double affinity = state.affinity(category);
        score += w1 * affinity;
        score += w2 * p.openness * (1.0 - affinity);
    }
    const auto item_tier = catalogue.tier_of(item_id);
    const auto modal = state.modal_tier();
    if (item_tier && modal) {
        const double gap = std::abs(*item_tier - *modal) / 4.0;
        score += w3 * p.conscientiousness * (1.0 - gap);
        score -= w5 * p.neuroticism * gap;
    }
    score += w4 * catalogue.popularity_of(item_id) * p.extraversion;
    return score;
}

RecommendationList build_mock_list(const std::string& user_id, std::size_t step,
                                   const std::string& positive_item,
                                   const std::unordered_set<std::string>& interacted,
                                   const SimCatalogue& catalogue, Rng& rng) {
    std::vector<const std::string*> eligible;
    eligible.reserve(catalogue.items.size());
    for (const auto& item : catalogue.items)
        if (!interacted.count(item) && item != positive_item) eligible.push_back(&item);
    if (eligible.size() < kListSize - 1)
        throw SimError("catalogue too small to draw " + std::to_string(kListSize - 1) +
                       " negatives for user " + user_id);

    RecommendationList list;
    list.step = step;
    list.positive_item = positive_item;
    list.items.push_back(positive_item);
    for (std::size_t idx : rng.sample_indices(eligible.size(), kListSize - 1))
        list.items.push_back(*eligible[idx]);
    rng.shuffle(list.items);
    return list;
}

namespace {

/// Highest-scoring item; ties go to the lexicographically smallest item_id.
template <typename ScoreFn>
std::string argmax_item(const std::vector<std::string>& items, ScoreFn&& score_of) {
    std::string best;
    double best_score = 0.0;
    for (const auto& item : items) {
        const double s = score_of(item);
        if (best.empty() || s > best_score || (s == best_score && item < best)) {
            best = item;
            best_score = s;
        }
    }
    return best;
}

std::string llm_select(const PersonalityProfile& p, const RecommendationList& list,
                       const SimCatalogue& catalogue, const UserSimState& state, LlmClient& llm,
                       const LlmSelectionSettings& settings) {
    ChatRequest req;
    req.model = settings.model;
    req.temperature = settings.temperature;
    req.max_tokens = settings.max_tokens;
    req.messages.push_back({"system", settings.system_prompt});
    req.messages.push_back({"user", selection_prompt(p, list, catalogue, state)});

    std::string last_reply;
    for (int attempt = 0; attempt <= settings.parse_retries; ++attempt) {
        if (attempt > 0)
            req.messages.push_back(
                {"user", "Your previous reply was invalid. Respond with only "
                         "{\"item_id\":\"<one id from the list>\"}."});
        last_reply = llm.chat(req);
        // Lenient extraction: first balanced JSON object with an item_id field.
        for (std::size_t start = last_reply.find('{'); start != std::string::npos;
             start = last_reply.find('{', start + 1)) {
            int depth = 0;
            bool in_string = false, escaped = false;
            for (std::size_t i = start; i < last_reply.size(); ++i) {
                const char ch = last_reply[i];
                if (in_string) {
                    if (escaped) escaped = false;
                    else if (ch == '\\') escaped = true;
                    else if (ch == '"') in_string = false;
                    continue;
                }
                if (ch == '"') in_string = true;
                else if (ch == '{') ++depth;
                else if (ch == '}' && --depth == 0) {
                    json obj = json::parse(last_reply.substr(start, i - start + 1), nullptr, false);
                    if (!obj.is_discarded() && obj.is_object() && obj.contains("item_id") &&
                        obj["item_id"].is_string()) {
                        const std::string chosen = obj["item_id"].get<std::string>();
                        if (std::find(list.items.begin(), list.items.end(), chosen) !=
                            list.items.end())
                            return chosen;
                    }
                    break;
                }
            }
        }
    }
    throw LlmParseError("personality-llm selection unparseable after " +
                            std::to_string(settings.parse_retries) + " retries",
                        last_reply);
}

}  // namespace

std::string default_select_system_prompt() {
    return "You are simulating a shopper with a given Big Five personality. From the "
           "numbered candidate list, choose the single item this person would most likely "
           "pick next. Respond with only a JSON object of the form {\"item_id\":\"...\"} "
           "using an id copied exactly from the list. Do not add any other text.";
}

std::string selection_prompt(const PersonalityProfile& p, const RecommendationList& list,
                             const SimCatalogue& catalogue, const UserSimState& state) {
    std::ostringstream out;
    out << "Persona (0..1): O=" << format_fixed(p.openness, 2)
        << " C=" << format_fixed(p.conscientiousness, 2)
        << " E=" << format_fixed(p.extraversion, 2) << " A=" << format_fixed(p.agreeableness, 2)
        << " N=" << format_fixed(p.neuroticism, 2) << "\n";
    if (!state.last_category.empty()) out << "Last purchase category: " << state.last_category << "\n";
    out << "Candidates (step " << list.step << "):\n";
    for (std::size_t i = 0; i < list.items.size(); ++i) {
        const auto& id = list.items[i];
        out << "  " << (i + 1) << ". item_id=" << id;
        const std::string cat = catalogue.category_of(id);
        if (!cat.empty()) out << " | " << cat;
        auto price = catalogue.item_price.find(id);
        if (price != catalogue.item_price.end()) out << " | $" << format_fixed(price->second, 2);
        out << " | popularity " << format_fixed(catalogue.popularity_of(id), 2);
        out << " | your affinity " << format_fixed(state.affinity(cat), 2);
        out << "\n";
    }
    out << "Pick exactly one item_id from the list above.";
    return out.str();
}

std::string agent_select(PolicyKind policy, const PersonalityProfile& personality,
                         const RecommendationList& list, const SimCatalogue& catalogue,
                         const UserSimState& state, Rng& rng, LlmClient* llm,
                         const LlmSelectionSettings* llm_settings) {
    switch (policy) {
        case PolicyKind::oracle:
            return list.positive_item;
        case PolicyKind::random_policy:
            return list.items[rng.below(list.items.size())];
        case PolicyKind::markov:
            return argmax_item(list.items, [&](const std::string& item) {
                return catalogue.transition(state.last_category, catalogue.category_of(item));
            });
        case PolicyKind::personality_deterministic:
        case PolicyKind::ablation_random_personality:
            return argmax_item(list.items, [&](const std::string& item) {
                return deterministic_item_score(personality, item, catalogue, state);
            });
        case PolicyKind::personality_llm:
            if (!llm || !llm_settings)
                throw SimError("personality-llm policy requires an LLM client");
            return llm_select(personality, list, catalogue, state, *llm, *llm_settings);
    }
    throw SimError("unhandled policy");
}

PersonalityProfile random_personality(const std::string& user_id, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, user_id + "/ablation-personality");
    PersonalityProfile p;
    p.user_id = user_id;
    p.backend = "ablation-random";
    p.openness = rng.unit();
    p.conscientiousness = rng.unit();
    p.extraversion = rng.unit();
    p.agreeableness = rng.unit();
    p.neuroticism = rng.unit();
    for (const char* trait : {"openness", "conscientiousness", "extraversion", "agreeableness",
                              "neuroticism"})
        p.evidence[trait].push_back(
            {"random_draw", p.trait(static_cast<char>(std::toupper(trait[0])))});
    return p;
}

SyntheticSequence Simulator::simulate_user(const std::string& user_id, PolicyKind policy,
                                           std::span<const InteractionRecord> train,
                                           std::span<const InteractionRecord> test,
                                           const std::unordered_set<std::string>& interacted,
                                           const PersonalityProfile* profile, LlmClient* llm,
                                           const LlmSelectionSettings* llm_settings) const {
    if (test.empty()) throw SimError("user " + user_id + " has an empty test sequence");

    SyntheticSequence seq;
    seq.user_id = user_id;
    seq.policy = policy_name(policy);
    seq.seed = seed_;

    // The list stream is shared by every policy so all policies face
    // identical candidate lists; selection noise draws from its own stream.
    Rng list_rng = Rng::stream(seed_, user_id + "/lists");
    Rng select_rng = Rng::stream(seed_, user_id + "/policy/" + seq.policy);

    PersonalityProfile local_profile;
    const PersonalityProfile* active = profile;
    if (policy == PolicyKind::ablation_random_personality) {
        local_profile = random_personality(user_id, seed_);
        active = &local_profile;
    } else if (policy == PolicyKind::personality_deterministic ||
               policy == PolicyKind::personality_llm) {
        if (!active)
            throw SimError("policy " + seq.policy + " requires a personality profile for user " +
                           user_id);
    } else if (!active) {
        local_profile.user_id = user_id;  // neutral placeholder, never consulted
        active = &local_profile;
    }

    UserSimState state = UserSimState::from_history(train, *catalogue_);
    for (std::size_t t = 0; t < test.size(); ++t) {
        const auto list =
            build_mock_list(user_id, t, test[t].item_id, interacted, *catalogue_, list_rng);
        const std::string chosen =
            agent_select(policy, *active, list, *catalogue_, state, select_rng, llm, llm_settings);
        seq.selections.push_back(
            {t, chosen, chosen == list.positive_item, test[t].timestamp});
        state.add_selection(chosen, *catalogue_);
    }
    return seq;
}

json selection_to_json(const SyntheticSequence& seq, const SelectionStep& s) {
    return json{{"user_id", seq.user_id},   {"policy", seq.policy},
                {"seed", seq.seed},         {"step", s.step},
                {"item_id", s.item_id},     {"was_positive", s.was_positive},
                {"timestamp", s.timestamp}};
}

std::string serialize_sequences(const std::vector<SyntheticSequence>& sequences) {
    std::vector<const SyntheticSequence*> ordered;
    ordered.reserve(sequences.size());
    for (const auto& s : sequences) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
        return std::tie(a->policy, a->user_id) < std::tie(b->policy, b->user_id);
    });
    std::string out;
    for (const auto* seq : ordered)
        for (const auto& s : seq->selections) out += selection_to_json(*seq, s).dump() + "\n";
    return out;
}

std::vector<SyntheticSequence> parse_synthetic_log(std::istream& in) {
    std::map<std::pair<std::string, std::string>, SyntheticSequence> grouped;
    for_each_line(in, [&](const std::string& line) {
        json j = json::parse(line);
        const auto key = std::make_pair(j.at("policy").get<std::string>(),
                                        j.at("user_id").get<std::string>());
        auto& seq = grouped[key];
        seq.policy = key.first;
        seq.user_id = key.second;
        seq.seed = j.at("seed").get<std::uint64_t>();
        seq.selections.push_back({j.at("step").get<std::size_t>(),
                                  j.at("item_id").get<std::string>(),
                                  j.at("was_positive").get<bool>(),
                                  j.at("timestamp").get<std::int64_t>()});
    });
    std::vector<SyntheticSequence> out;
    out.reserve(grouped.size());
    for (auto& [key, seq] : grouped) {
        std::sort(seq.selections.begin(), seq.selections.end(),
                  [](const auto& a, const auto& b) { return a.step < b.step; });
        out.push_back(std::move(seq));
    }
    return out;
}

}  // namespace pub
