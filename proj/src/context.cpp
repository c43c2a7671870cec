#include "pub/context.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pub {

double midpoint_percentile(double value, const std::vector<double>& sorted_population) {
    auto n = static_cast<double>(sorted_population.size());
    if (sorted_population.empty()) return 50.0;
    auto lo = std::lower_bound(sorted_population.begin(), sorted_population.end(), value);
    auto hi = std::upper_bound(sorted_population.begin(), sorted_population.end(), value);
    auto less = static_cast<double>(lo - sorted_population.begin());
    auto eq = static_cast<double>(hi - lo);
    double rank = less + (eq + 1.0) / 2.0;  // average rank of the tied block
    return 100.0 * (rank - 0.5) / n;
}

std::string percentile_band(double p) {
    if (p < 10.0) return "very low";
    if (p < 35.0) return "low";
    if (p < 65.0) return "medium";
    if (p < 90.0) return "high";
    return "very high";
}

std::vector<std::pair<std::string, std::optional<double>>> scalar_features(
    const BehavioralSignature& s) {
    std::vector<std::pair<std::string, std::optional<double>>> out;
    out.emplace_back("purchase_count", static_cast<double>(s.purchase_count));
    out.emplace_back("span_days", s.span_days);
    out.emplace_back("purchase_frequency", s.purchase_frequency);
    for (const auto& [name, r] : s.rhythm)
        out.emplace_back("rhythm_" + name + "_strength", r.strength);
    out.emplace_back("interval_entropy", s.interval_entropy);
    out.emplace_back("category_entropy", s.category_entropy);
    out.emplace_back("review_length_mean", s.review_length_mean);
    out.emplace_back("review_length_cv", s.review_length_cv);
    out.emplace_back("rating_deviation", s.rating_deviation);
    return out;
}

NormalizedStats normalize_stats(const BehavioralSignature& s,
                                const std::vector<BehavioralSignature>& population) {
    if (population.empty()) throw std::invalid_argument("normalize_stats: empty population");

    // Population value lists per feature, over users where the feature exists.
    std::map<std::string, std::vector<double>> pop_values;
    for (const auto& member : population) {
        for (const auto& [name, value] : scalar_features(member)) {
            if (value) pop_values[name].push_back(*value);
        }
    }
    for (auto& [name, v] : pop_values) std::sort(v.begin(), v.end());

    NormalizedStats out;
    out.user_id = s.user_id;
    for (const auto& [name, value] : scalar_features(s)) {
        if (!value) continue;
        StatEntry e;
        e.name = name;
        e.raw = *value;
        e.percentile = midpoint_percentile(*value, pop_values[name]);
        e.band = percentile_band(e.percentile);
        out.entries.push_back(std::move(e));
    }
    return out;
}

std::string default_context_template() {
    return "Shopper profile for {{user_id}}\n"
           "\n"
           "== Behaviour statistics (relative to the full user population) ==\n"
           "{{stats}}\n"
           "== Purchase history (chronological) ==\n"
           "{{items}}";
}

namespace {

std::string truncate_tokens(const std::string& text, std::size_t max_tokens) {
    if (max_tokens == 0) return "";
    std::istringstream in(text);
    std::string tok, out;
    std::size_t n = 0;
    while (in >> tok && n < max_tokens) {
        if (n > 0) out += ' ';
        out += tok;
        ++n;
    }
    if (n == max_tokens && in >> tok) out += "...";
    return out;
}

std::string render_stats(const NormalizedStats& stats) {
    std::string out;
    for (const auto& e : stats.entries) {
        out += "- " + e.name + ": " + format_fixed(e.raw, 3) + " (percentile " +
               format_fixed(e.percentile, 1) + ", " + e.band + ")\n";
    }
    return out;
}

struct ItemRender {
    const InteractionRecord* rec;
    const ItemMetadata* meta;  // may be null
};

std::string render_item(const ItemRender& it, std::size_t index, std::size_t desc_limit,
                        std::size_t review_limit) {
    const InteractionRecord& r = *it.rec;
    std::string out = "[" + std::to_string(index) + "] " + format_utc_date(r.timestamp);
    if (it.meta) {
        out += " | " + (it.meta->category.empty() ? r.category : it.meta->category);
        out += " | \"" + it.meta->title + "\"";
        if (it.meta->price) out += " | $" + format_fixed(*it.meta->price, 2);
    } else {
        out += " | " + r.category + " | item " + r.item_id + " (no catalogue entry)";
    }
    out += " | rated " + format_fixed(r.rating, 1) + "/5\n";
    if (it.meta && !it.meta->description.empty() && desc_limit > 0) {
        std::string d = truncate_tokens(it.meta->description, desc_limit);
        if (!d.empty()) out += "    about: " + d + "\n";
    }
    if (r.review_text && !r.review_text->empty() && review_limit > 0) {
        std::string t = truncate_tokens(*r.review_text, review_limit);
        if (!t.empty()) out += "    review: \"" + t + "\"\n";
    }
    return out;
}

std::string apply_template(const std::string& tmpl, const std::string& user_id,
                           const std::string& stats, const std::string& items) {
    std::string out = tmpl;
    auto replace_all = [&out](const std::string& key, const std::string& value) {
        for (std::size_t pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos)) {
            out.replace(pos, key.size(), value);
            pos += value.size();
        }
    };
    replace_all("{{user_id}}", user_id);
    replace_all("{{stats}}", stats);
    replace_all("{{items}}", items);
    return out;
}

}  // namespace

PromptContext build_context(const std::string& user_id,
                            const SampledHistory& history,
                            const std::unordered_map<std::string, ItemMetadata>& metadata,
                            const NormalizedStats& stats,
                            std::size_t token_budget,
                            const std::string& template_text) {
    std::vector<ItemRender> items;
    std::vector<InteractionRecord> flat = history.flat();
    items.reserve(flat.size());
    for (const auto& r : flat) {
        auto it = metadata.find(r.item_id);
        items.push_back({&r, it != metadata.end() ? &it->second : nullptr});
    }

    std::string stats_text = render_stats(stats);

    constexpr std::size_t kNoLimit = std::numeric_limits<std::size_t>::max();
    // Reduction ladder: descriptions go first, then reviews, then old items.
    const std::pair<std::size_t, std::size_t> ladder[] = {
        {kNoLimit, kNoLimit}, {12, kNoLimit}, {0, kNoLimit}, {0, 20}, {0, 0}};

    auto render_all = [&](std::size_t skip, std::size_t desc_limit, std::size_t review_limit) {
        std::string items_text;
        std::size_t printed = 0;
        for (std::size_t i = skip; i < items.size(); ++i) {
            items_text += render_item(items[i], ++printed, desc_limit, review_limit);
        }
        if (items.empty()) items_text = "(no history available)\n";
        return apply_template(template_text, user_id, stats_text, items_text);
    };

    PromptContext out;
    out.user_id = user_id;
    out.token_budget = token_budget;
    for (std::size_t skip = 0; skip <= items.size(); ++skip) {
        for (const auto& [desc_limit, review_limit] : ladder) {
            if (skip > 0 && (desc_limit != 0 || review_limit != 0)) continue;
            std::string text = render_all(skip, desc_limit, review_limit);
            std::size_t tokens = count_tokens(text);
            if (tokens <= token_budget) {
                out.text = std::move(text);
                out.token_count = tokens;
                out.items_rendered = items.size() - skip;
                out.items_dropped = skip;
                return out;
            }
        }
    }
    throw BudgetError("token budget " + std::to_string(token_budget) +
                      " cannot fit the statistics section for user " + user_id);
}

json prompt_context_to_json(const PromptContext& c) {
    return json{{"user_id", c.user_id},
                {"text", c.text},
                {"token_count", c.token_count},
                {"token_budget", c.token_budget},
                {"items_rendered", c.items_rendered},
                {"items_dropped", c.items_dropped}};
}

PromptContext prompt_context_from_json(const json& j) {
    PromptContext c;
    c.user_id = j.at("user_id").get<std::string>();
    c.text = j.at("text").get<std::string>();
    c.token_count = j.at("token_count").get<std::size_t>();
    c.token_budget = j.at("token_budget").get<std::size_t>();
    c.items_rendered = j.at("items_rendered").get<std::size_t>();
    c.items_dropped = j.at("items_dropped").get<std::size_t>();
    return c;
}

}  // namespace pub
