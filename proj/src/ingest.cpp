#include "pub/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

namespace pub {

namespace {

constexpr std::int64_t kMsThreshold = 100000000000LL;  // > 10^11 means milliseconds

const json* find_key(const json& j, std::initializer_list<const char*> names) {
    for (const char* n : names) {
        auto it = j.find(n);
        if (it != j.end() && !it->is_null()) return &*it;
    }
    return nullptr;
}

std::optional<double> parse_price(const json& j) {
    if (j.is_number()) {
        double p = j.get<double>();
        if (p < 0.0 || !std::isfinite(p)) return std::nullopt;
        return p;
    }
    if (j.is_string()) {
        // Amazon dumps sometimes carry "$12.99" or "12.99 - 15.99".
        std::string s = j.get<std::string>();
        std::size_t i = s.find_first_of("0123456789");
        if (i == std::string::npos) return std::nullopt;
        try {
            double p = std::stod(s.substr(i));
            if (p < 0.0 || !std::isfinite(p)) return std::nullopt;
            return p;
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace

std::vector<InteractionRecord> parse_interactions(std::istream& in,
                                                  const std::string& default_category,
                                                  ParseStats* stats) {
    ParseStats local;
    ParseStats& st = stats ? *stats : local;
    std::vector<InteractionRecord> out;

    for_each_line(in, [&](const std::string& line) {
        ++st.lines;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            ++st.malformed;
            return;
        }
        const json* user = find_key(j, {"user_id"});
        const json* item = find_key(j, {"parent_asin", "item_id", "asin"});
        const json* rating = find_key(j, {"rating"});
        const json* ts = find_key(j, {"timestamp"});
        if (!user || !user->is_string() || user->get<std::string>().empty() ||
            !item || !item->is_string() || item->get<std::string>().empty() ||
            !rating || !rating->is_number() || !ts || !ts->is_number()) {
            ++st.malformed;
            return;
        }
        double r = rating->get<double>();
        auto t = static_cast<std::int64_t>(ts->get<double>());
        if (r < 1.0 || r > 5.0 || t <= 0) {
            ++st.malformed;
            return;
        }
        if (t > kMsThreshold) {
            t /= 1000;
            ++st.ms_timestamps;
        }

        InteractionRecord rec;
        rec.user_id = user->get<std::string>();
        rec.item_id = item->get<std::string>();
        rec.rating = r;
        rec.timestamp = t;
        if (const json* cat = find_key(j, {"category"}); cat && cat->is_string())
            rec.category = cat->get<std::string>();
        else
            rec.category = default_category;
        if (const json* text = find_key(j, {"text"}); text && text->is_string())
            rec.review_text = text->get<std::string>();
        if (const json* title = find_key(j, {"title"}); title && title->is_string())
            rec.review_title = title->get<std::string>();
        out.push_back(std::move(rec));
        ++st.parsed;
    });
    return out;
}

std::unordered_map<std::string, ItemMetadata> parse_metadata(std::istream& in,
                                                             ParseStats* stats) {
    ParseStats local;
    ParseStats& st = stats ? *stats : local;
    std::unordered_map<std::string, ItemMetadata> out;

    for_each_line(in, [&](const std::string& line) {
        ++st.lines;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            ++st.malformed;
            return;
        }
        const json* item = find_key(j, {"parent_asin", "item_id", "asin"});
        if (!item || !item->is_string() || item->get<std::string>().empty()) {
            ++st.malformed;
            return;
        }
        ItemMetadata m;
        m.item_id = item->get<std::string>();
        if (const json* t = find_key(j, {"title"}); t && t->is_string())
            m.title = t->get<std::string>();
        if (const json* d = find_key(j, {"description"})) {
            if (d->is_string()) {
                m.description = d->get<std::string>();
            } else if (d->is_array()) {
                std::string joined;
                for (const auto& part : *d) {
                    if (!part.is_string()) continue;
                    if (!joined.empty()) joined += ' ';
                    joined += part.get<std::string>();
                }
                m.description = joined;
            }
        }
        if (const json* p = find_key(j, {"price"})) m.price = parse_price(*p);
        if (const json* c = find_key(j, {"main_category", "category"}); c && c->is_string())
            m.category = c->get<std::string>();
        if (const json* a = find_key(j, {"average_rating"}); a && a->is_number()) {
            double v = a->get<double>();
            if (v >= 1.0 && v <= 5.0) m.average_rating = v;
        }
        out[m.item_id] = std::move(m);
        ++st.parsed;
    });
    return out;
}

Dataset unify_categories(const std::vector<std::pair<std::string, Dataset>>& parts,
                         UnifyStats* stats) {
    UnifyStats local;
    UnifyStats& st = stats ? *stats : local;

    Dataset out;
    std::set<std::tuple<std::string, std::string, std::int64_t>> seen;
    for (const auto& [category, part] : parts) {
        for (const auto& r : part.interactions) {
            auto key = std::make_tuple(r.user_id, r.item_id, r.timestamp);
            if (!seen.insert(key).second) {
                ++st.duplicates;
                continue;
            }
            InteractionRecord rec = r;
            if (rec.category.empty()) rec.category = category;
            out.interactions.push_back(std::move(rec));
        }
        for (const auto& [id, m] : part.metadata) {
            out.metadata.emplace(id, m);  // first part wins
        }
    }
    out.rebuild_index();
    return out;
}

Dataset filter_k_core(const Dataset& d, std::size_t min_count) {
    std::vector<InteractionRecord> kept = d.interactions;
    for (;;) {
        std::unordered_map<std::string, std::size_t> user_count, item_count;
        for (const auto& r : kept) {
            ++user_count[r.user_id];
            ++item_count[r.item_id];
        }
        std::vector<InteractionRecord> next;
        next.reserve(kept.size());
        for (auto& r : kept) {
            if (user_count[r.user_id] >= min_count && item_count[r.item_id] >= min_count)
                next.push_back(std::move(r));
        }
        bool stable = next.size() == kept.size();
        kept = std::move(next);
        if (stable) break;
    }
    Dataset out;
    out.interactions = std::move(kept);
    out.metadata = d.metadata;
    out.rebuild_index();
    return out;
}

SplitResult chronological_split(const Dataset& d, double test_fraction) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("test_fraction must be in (0,1)");

    SplitResult res;
    std::unordered_set<std::size_t> test_idx;
    for (const auto& [user, idx] : d.by_user) {
        std::size_t n = idx.size();
        if (n < 2)
            throw std::invalid_argument("chronological_split: user " + user +
                                        " has fewer than 2 interactions");
        auto train_n = static_cast<std::size_t>(
            std::ceil((1.0 - test_fraction) * static_cast<double>(n)));
        train_n = std::min(train_n, n - 1);  // test side never empty
        train_n = std::max<std::size_t>(train_n, 1);
        for (std::size_t k = train_n; k < n; ++k) test_idx.insert(idx[k]);

        bool all_equal = d.interactions[idx.front()].timestamp ==
                         d.interactions[idx.back()].timestamp;
        if (all_equal) res.stable_order_users.push_back(user);
    }
    for (std::size_t i = 0; i < d.interactions.size(); ++i) {
        if (test_idx.count(i))
            res.test.interactions.push_back(d.interactions[i]);
        else
            res.train.interactions.push_back(d.interactions[i]);
    }
    res.train.metadata = d.metadata;
    res.test.metadata = d.metadata;
    res.train.rebuild_index();
    res.test.rebuild_index();
    return res;
}

json record_to_json(const InteractionRecord& r) {
    json j;
    j["user_id"] = r.user_id;
    j["item_id"] = r.item_id;
    j["timestamp"] = r.timestamp;
    j["rating"] = r.rating;
    j["category"] = r.category;
    if (r.review_text) j["text"] = *r.review_text;
    if (r.review_title) j["title"] = *r.review_title;
    return j;
}

InteractionRecord record_from_json(const json& j) {
    InteractionRecord r;
    r.user_id = j.at("user_id").get<std::string>();
    r.item_id = j.at("item_id").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::int64_t>();
    r.rating = j.at("rating").get<double>();
    r.category = j.value("category", std::string());
    if (j.contains("text")) r.review_text = j["text"].get<std::string>();
    if (j.contains("title")) r.review_title = j["title"].get<std::string>();
    return r;
}

json metadata_to_json(const ItemMetadata& m) {
    json j;
    j["item_id"] = m.item_id;
    j["title"] = m.title;
    j["description"] = m.description;
    if (m.price) j["price"] = *m.price;
    j["category"] = m.category;
    if (m.average_rating) j["average_rating"] = *m.average_rating;
    return j;
}

std::string serialize_interactions(const std::vector<InteractionRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += record_to_json(r).dump();
        out += '\n';
    }
    return out;
}

std::string serialize_metadata(const std::unordered_map<std::string, ItemMetadata>& metadata) {
    std::vector<const ItemMetadata*> sorted;
    sorted.reserve(metadata.size());
    for (const auto& [id, m] : metadata) sorted.push_back(&m);
    std::sort(sorted.begin(), sorted.end(),
              [](const ItemMetadata* a, const ItemMetadata* b) { return a->item_id < b->item_id; });
    std::string out;
    for (const ItemMetadata* m : sorted) {
        out += metadata_to_json(*m).dump();
        out += '\n';
    }
    return out;
}

}  // namespace pub
