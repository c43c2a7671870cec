// Toy corpus generator.
//
// Produces a small, fully deterministic review corpus (50 users, ~2200
// interactions, 96 items in 12 categories) with planted couplings between
// writing/shopping style and behaviour so that end-to-end runs have known
// signal to recover:
//
//   group A  "clockwork loyalists"  - weekly cadence, one price tier, the
//                                     same terse review every time
//   group B  "social hub chasers"   - gravitate to a shared set of popular
//                                     items, social/gifting vocabulary
//   group C  "polite homebodies"    - one home category, polite positive text
//   group D  "volatile complainers" - alternate 5/2-star ratings, bursts of
//                                     negative words in the angry reviews
//   group E  "figurative explorers" - uniform category sweep, figurative
//                                     language and simile phrases
//
// Plant strength scales with a user's interaction count so that activity
// deciles order how recoverable each user's behaviour is. The corpus also
// plants ingest edge cases: malformed lines, one exact cross-file duplicate,
// millisecond timestamps in one file, an item with no metadata entry, string
// prices ("$28.75"), and one user who never writes review text.
//
// Usage: make_toy_corpus [output-dir]   (default: data/toy)

#include <pub/dataset.hpp>
#include <pub/profile.hpp>
#include <pub/rng.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::uint64_t kSeed = 0x70b5eedULL;
constexpr std::int64_t kBase = 1609459200;  // 2021-01-01T00:00:00Z
constexpr int kCatCount = 12;
constexpr int kSlots = 12;
constexpr int kItems = kCatCount * kSlots;
constexpr int kUsers = 50;
constexpr int kMinItemCount = 10;  // keep every item above the k-core floor

const std::array<std::string, kCatCount> kCats = {
    "books",  "electronics", "grocery", "beauty", "toys",       "sports",
    "home",   "clothing",    "music",   "garden", "automotive", "office"};

// Word pools. Neutral words deliberately avoid every lexicon (sentiment,
// social, politeness, figurative, negation, booster) so planted ratios stay
// clean; the special pools are drawn from the bundled lexicon files.
const std::vector<std::string> kNeutral = {
    "the",   "box",   "arrived", "on",    "time",    "and",     "it",
    "does",  "what",  "should",  "for",   "my",      "desk",    "setup",
    "every", "day",   "overall", "works", "there",   "is",      "much",
    "else",  "to",    "say",     "about", "this",    "item",    "came",
    "with",  "basic", "model",   "unit",  "version", "arrives", "weekly"};
const std::vector<std::string> kSocial = {
    "we", "family", "friends", "gift", "party", "everyone", "together"};
const std::vector<std::string> kPositive = {"great", "love", "enjoy"};
const std::vector<std::string> kPolite = {"thank", "please", "appreciate",
                                          "kindly"};
const std::vector<std::string> kPositiveC = {"wonderful", "excellent", "great",
                                             "love"};
const std::vector<std::string> kNegative = {"terrible",     "awful", "broke",
                                            "disappointed", "waste", "annoyed"};
const std::vector<std::string> kFigurative = {
    "magical", "dreamlike", "poetic",  "resembles",
    "treasure", "literally", "velvet", "whisper"};
const std::vector<std::string> kPhrases = {"like a", "as if", "reminds me",
                                           "feels like"};
const std::string kASentence =
    "solid quality and works as described perfectly fine for daily routine";

std::string item_name(int idx) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "i%03d", idx);
    return buf;
}

std::string user_name(int gi) {
    if (gi == 0) return "u_regular";
    if (gi == 37) return "u_notext";
    char buf[8];
    std::snprintf(buf, sizeof buf, "u%02d", gi + 1);
    return buf;
}

bool has_metadata(int idx) { return idx != 71; }
bool has_price(int idx) { return idx != 119 && idx != 131 && idx != 143; }

// Prices are exact multiples of 0.25 so the "$xx.xx" string form reparses to
// the identical double and tier assignments match bit-for-bit.
double price_of(int idx) {
    int cat = idx / kSlots;
    int slot = idx % kSlots;
    return 4.0 + 12.0 * slot + 0.75 * cat;
}

std::string title_of(int idx) {
    std::string cat = kCats[idx / kSlots];
    cat[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(cat[0])));
    return cat + " item " + item_name(idx);
}

std::string description_of(int idx) {
    static const std::array<std::string, 4> shapes = {
        "a dependable pick for everyday use",
        "compact design with a sturdy finish",
        "a popular choice in its range this season",
        "simple to set up and easy to maintain"};
    return "The " + kCats[idx / kSlots] + " shelf staple: " + shapes[idx % 4] +
           ".";
}

struct ToyRecord {
    std::string user;
    int item = 0;
    double rating = 0.0;
    std::int64_t ts = 0;
    std::string text;   // empty -> field omitted
    std::string title;  // empty -> field omitted
    int force_file = -1;
};

struct UserSpec {
    int gi = 0;
    std::string id;
    char group = 'A';
    int count = 0;
    double delta = 0.0;  // activity scale in [0,1]; stronger plant when high
    std::int64_t start = 0;
    std::int64_t span = 0;  // seconds
    std::vector<int> top_cats;
    int modal_tier = 0;
    int home_cat = 0;
    int home_cat2 = 0;  // group C shops a two-category "home" pool
};

std::string join(const std::vector<std::string>& toks) {
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) out += ' ';
        out += toks[i];
    }
    return out;
}

struct Generator {
    std::map<std::string, pub::ItemMetadata> metadata;  // ordered for output
    pub::PriceQuintiles quintiles;
    std::array<std::array<std::vector<int>, 5>, kCatCount> bucket{};
    std::array<std::vector<int>, kCatCount> cat_items{};
    std::vector<int> hubs;           // two well-known slots per category
    std::array<std::vector<int>, kCatCount> non_hub{};
    std::array<int, kItems> global_count{};
    std::vector<ToyRecord> records;
    std::vector<UserSpec> users;

    void build_metadata() {
        std::unordered_map<std::string, pub::ItemMetadata> lookup;
        for (int idx = 0; idx < kItems; ++idx) {
            if (!has_metadata(idx)) continue;
            pub::ItemMetadata m;
            m.item_id = item_name(idx);
            m.title = title_of(idx);
            m.description = description_of(idx);
            m.category = kCats[idx / kSlots];
            if (has_price(idx)) m.price = price_of(idx);
            m.average_rating = 3.0 + (idx % 8) * 0.25;
            lookup[m.item_id] = m;
            metadata[m.item_id] = m;
        }
        quintiles = pub::PriceQuintiles::from_catalogue(lookup);
        for (int idx = 0; idx < kItems; ++idx) {
            int cat = idx / kSlots;
            int slot = idx % kSlots;
            cat_items[cat].push_back(idx);
            if (has_metadata(idx) && has_price(idx))
                bucket[cat][quintiles.tier(price_of(idx))].push_back(idx);
            if (slot == 3 || slot == 6)
                hubs.push_back(idx);
            else
                non_hub[cat].push_back(idx);
        }
    }

    void build_users() {
        std::vector<int> counts(kUsers);
        for (int gi = 0; gi < kUsers; ++gi) counts[gi] = 24 + gi * 36 / 49;
        pub::Rng counts_rng = pub::Rng::stream(kSeed, "toy/counts");
        counts_rng.shuffle(counts);
        counts[0] = 40;  // pin u_regular to a mid-range activity level

        for (int gi = 0; gi < kUsers; ++gi) {
            UserSpec u;
            u.gi = gi;
            u.id = user_name(gi);
            u.group = gi < 12 ? 'A' : gi < 24 ? 'B' : gi < 38 ? 'C' : gi < 44 ? 'D' : 'E';
            u.count = counts[gi];
            u.delta = std::clamp((u.count - 24) / 36.0, 0.0, 1.0);
            u.start = kBase + static_cast<std::int64_t>(gi) * 259200;
            u.top_cats = {gi % kCatCount, (gi + 3) % kCatCount,
                          (gi + 6) % kCatCount, (gi + 9) % kCatCount};
            u.modal_tier = gi % 5;
            u.home_cat = gi % kCatCount;
            u.home_cat2 = (gi + 1) % kCatCount;
            double span_days = 0.0;
            switch (u.group) {
                case 'A': span_days = (u.count - 1) * 7.0 + 0.2; break;
                case 'B': span_days = 300.0 + 500.0 * u.delta; break;
                case 'C': span_days = 420.0 + 400.0 * u.delta; break;
                case 'D': span_days = 380.0 + 300.0 * u.delta; break;
                default:  span_days = 500.0 + 300.0 * u.delta; break;
            }
            u.span = static_cast<std::int64_t>(span_days * 86400.0);
            users.push_back(std::move(u));
        }
    }

    std::vector<std::int64_t> make_timestamps(const UserSpec& u, pub::Rng& rng) const {
        std::vector<std::int64_t> ts(static_cast<std::size_t>(u.count));
        if (u.group == 'A') {
            for (int i = 0; i < u.count; ++i)
                ts[static_cast<std::size_t>(i)] =
                    u.start + static_cast<std::int64_t>(i) * 604800 +
                    static_cast<std::int64_t>(rng.below(14401)) - 7200;
        } else {
            for (auto& t : ts)
                t = u.start + static_cast<std::int64_t>(
                                  rng.below(static_cast<std::uint64_t>(u.span)));
        }
        std::sort(ts.begin(), ts.end());
        for (std::size_t i = 1; i < ts.size(); ++i)
            if (ts[i] <= ts[i - 1]) ts[i] = ts[i - 1] + 1;
        return ts;
    }

    static bool is_hub(int idx) {
        int slot = idx % kSlots;
        return slot == 3 || slot == 6;
    }

    // Repeat purchases steer away from hub items so the hubs' popularity
    // stays concentrated in group B and every user still has unused hubs
    // left for the novelty tail.
    int pick_item(const std::vector<int>& pool, const std::map<int, int>& used) const {
        auto key = [&](int idx) {
            auto it = used.find(idx);
            int u = it == used.end() ? 0 : it->second;
            return std::tuple<int, int, int, int>(u, is_hub(idx) ? 1 : 0,
                                                  global_count[idx], idx);
        };
        int best = pool.front();
        for (int idx : pool)
            if (key(idx) < key(best)) best = idx;
        return best;
    }

    const std::vector<int>& tier_bucket(int cat, int tier) const {
        for (int d = 0; d < 5; ++d)
            for (int s : {tier - d, tier + d})
                if (s >= 0 && s < 5 && !bucket[cat][s].empty()) return bucket[cat][s];
        return cat_items[cat];
    }

    bool has_unused(const std::vector<int>& pool, const std::map<int, int>& used) const {
        return std::any_of(pool.begin(), pool.end(),
                           [&](int idx) { return used.find(idx) == used.end(); });
    }

    // First-time purchases prefer hub items: the held-out tail then carries
    // the catalogue's genuinely popular items, which is what gives the
    // popularity baseline real signal to recover.
    int pick_unused(const std::vector<int>& pool, const std::map<int, int>& used) const {
        int best = -1;
        auto key = [&](int idx) {
            return std::tuple<int, int, int>(is_hub(idx) ? 0 : 1, global_count[idx], idx);
        };
        for (int idx : pool) {
            if (used.count(idx)) continue;
            if (best < 0 || key(idx) < key(best)) best = idx;
        }
        return best;
    }

    // Any still-unused item, cheapest-coverage first. A user's count never
    // reaches the catalogue size, so this always succeeds.
    int pick_unused_anywhere(const std::map<int, int>& used) const {
        int best = -1;
        for (int idx = 0; idx < kItems; ++idx) {
            if (used.count(idx)) continue;
            if (best < 0 || std::tuple<int, int>(global_count[idx], idx) <
                                std::tuple<int, int>(global_count[best], best))
                best = idx;
        }
        return best;
    }

    // A not-yet-bought item near (cat, tier), allowing one tier of slack.
    // Returns -1 when nothing in-plant is left; the caller then repeats a
    // known item rather than drift off-plant.
    int pick_novel_tiered(int cat, int tier, const std::map<int, int>& used) const {
        for (int d = 0; d < 2; ++d)
            for (int s : {tier - d, tier + d})
                if (s >= 0 && s < 5 && has_unused(bucket[cat][s], used))
                    return pick_unused(bucket[cat][s], used);
        return -1;
    }

    int pick_novel_in_cat(int cat, const std::map<int, int>& used) const {
        if (has_unused(cat_items[cat], used)) return pick_unused(cat_items[cat], used);
        return -1;
    }

    static int other_of(pub::Rng& rng, int n, int excluded) {
        int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
        return v >= excluded ? v + 1 : v;
    }

    std::string mixed_text(pub::Rng& rng, int len,
                           const std::vector<std::string>& special, double p_special,
                           const std::vector<std::string>& special2 = {},
                           double p_special2 = 0.0) const {
        std::vector<std::string> toks;
        toks.reserve(static_cast<std::size_t>(len));
        for (int k = 0; k < len; ++k) {
            double r = rng.unit();
            if (r < p_special && !special.empty())
                toks.push_back(special[rng.below(special.size())]);
            else if (r < p_special + p_special2 && !special2.empty())
                toks.push_back(special2[rng.below(special2.size())]);
            else
                toks.push_back(kNeutral[rng.below(kNeutral.size())]);
        }
        return join(toks);
    }

    std::string e_text(pub::Rng& rng, int i) const {
        int len = 9 + i % 10;
        std::vector<std::string> toks;
        toks.reserve(static_cast<std::size_t>(len) + 2);
        for (int k = 0; k < len; ++k) {
            double r = rng.unit();
            if (r < 0.22)
                toks.push_back(kFigurative[rng.below(kFigurative.size())]);
            else if (r < 0.27)
                toks.push_back(kSocial[rng.below(kSocial.size())]);
            else
                toks.push_back(kNeutral[rng.below(kNeutral.size())]);
        }
        if (i % 3 == 0) {
            const std::string& ph = kPhrases[rng.below(kPhrases.size())];
            auto sp = ph.find(' ');
            std::vector<std::string> pair = {ph.substr(0, sp), ph.substr(sp + 1)};
            toks.insert(toks.begin() + 2, pair.begin(), pair.end());
        }
        return join(toks);
    }

    void push(ToyRecord rec, std::map<int, int>& used) {
        ++global_count[rec.item];
        ++used[rec.item];
        records.push_back(std::move(rec));
    }

    void generate_user(const UserSpec& u) {
        pub::Rng rng = pub::Rng::stream(kSeed, "toy/user/" + u.id);
        auto ts = make_timestamps(u, rng);
        std::map<int, int> used;
        std::vector<int> hub_deck = hubs;
        rng.shuffle(hub_deck);
        std::size_t hub_pos = 0;

        // In the last third of the sequence, every other purchase tries a
        // first-time item (staying in-plant), so the chronologically held-out
        // part mixes novel items recommenders can rank with the repeat
        // purchases that carry the behavioural signal.
        const int tail_start = u.count - u.count / 3 - 2;

        for (int i = 0; i < u.count; ++i) {
            const bool novel = i >= tail_start && (i - tail_start) % 2 == 0;
            ToyRecord rec;
            rec.user = u.id;
            rec.ts = ts[static_cast<std::size_t>(i)];
            switch (u.group) {
                case 'A': {
                    // Deterministic category rotation: a strong first-order
                    // sequence signal on top of the tier loyalty.
                    int cat = rng.chance(0.85) ? u.top_cats[static_cast<std::size_t>(i) % 4]
                                               : static_cast<int>(rng.below(kCatCount));
                    bool modal = rng.chance(0.6 + 0.4 * u.delta);
                    int tier = modal ? u.modal_tier : other_of(rng, 5, u.modal_tier);
                    int fresh = novel ? pick_novel_tiered(cat, tier, used) : -1;
                    rec.item = fresh >= 0 ? fresh : pick_item(tier_bucket(cat, tier), used);
                    rec.rating = 4.0;
                    rec.text = kASentence;
                    if (i % 5 == 0) rec.title = "reliable choice";
                    break;
                }
                case 'B': {
                    bool hub = rng.chance(0.7 + 0.3 * u.delta);
                    if (hub && novel && !has_unused(hubs, used)) hub = false;
                    if (hub) {
                        if (novel) {
                            rec.item = pick_unused(hubs, used);
                        } else {
                            if (hub_pos == hub_deck.size()) {
                                rng.shuffle(hub_deck);
                                hub_pos = 0;
                            }
                            rec.item = hub_deck[hub_pos++];
                        }
                    } else {
                        int cat = static_cast<int>(rng.below(kCatCount));
                        int fresh = novel ? pick_novel_in_cat(cat, used) : -1;
                        rec.item = fresh >= 0 ? fresh : pick_item(non_hub[cat], used);
                    }
                    rec.rating = 5.0;
                    rec.text = mixed_text(rng, 6 + (i * 7) % 25, kSocial, 0.30,
                                          kPositive, 0.12);
                    if (i % 4 == 0) rec.title = "great gift";
                    break;
                }
                case 'C': {
                    int cat;
                    if (rng.chance(0.55 + 0.45 * u.delta))
                        cat = rng.chance(0.5) ? u.home_cat : u.home_cat2;
                    else
                        cat = other_of(rng, kCatCount, u.home_cat);
                    int fresh = novel ? pick_novel_in_cat(cat, used) : -1;
                    rec.item = fresh >= 0 ? fresh : pick_item(cat_items[cat], used);
                    rec.rating = (i % 4 == 0) ? 4.0 : 5.0;
                    if (u.id != "u_notext") {
                        rec.text = mixed_text(rng, 8 + i % 9, kPolite, 0.18,
                                              kPositiveC, 0.18);
                        // Faint social vocabulary keeps group C's social-word
                        // rank above the all-zero groups but far below B.
                        if (i % 4 == 1) rec.text += " " + kSocial[rng.below(kSocial.size())];
                        if (i % 6 == 0) rec.title = "thank you";
                    }
                    break;
                }
                case 'D': {
                    int cat = rng.chance(0.85) ? u.top_cats[static_cast<std::size_t>(i) % 4]
                                               : static_cast<int>(rng.below(kCatCount));
                    bool modal = rng.chance(0.75 + 0.25 * u.delta);
                    int tier = modal ? u.modal_tier : other_of(rng, 5, u.modal_tier);
                    int fresh = novel ? pick_novel_tiered(cat, tier, used) : -1;
                    rec.item = fresh >= 0 ? fresh : pick_item(tier_bucket(cat, tier), used);
                    if (i % 2 == 0) {
                        rec.rating = 5.0;
                        rec.text = mixed_text(rng, 6, {}, 0.0);
                    } else {
                        rec.rating = 2.0;
                        rec.text = mixed_text(rng, 18, kNegative, 0.45);
                    }
                    break;
                }
                default: {  // 'E'
                    int cat = i % kCatCount;
                    int fresh = novel ? pick_novel_in_cat(cat, used) : -1;
                    rec.item = fresh >= 0 ? fresh : pick_item(cat_items[cat], used);
                    rec.rating = 3.0 + i % 3;
                    rec.text = e_text(rng, i);
                    if (i % 7 == 0) rec.title = "like a dream";
                    break;
                }
            }
            push(std::move(rec), used);
        }
    }

    // Top up thinly covered items with extra group-B purchases so the
    // item-side k-core filter never drops catalogue entries.
    void coverage_fill() {
        pub::Rng rng = pub::Rng::stream(kSeed, "toy/fill");
        std::set<std::tuple<std::string, int, std::int64_t>> seen;
        for (const auto& r : records) seen.insert({r.user, r.item, r.ts});
        int next_b = 0;
        for (int idx = 0; idx < kItems; ++idx) {
            while (global_count[idx] < kMinItemCount) {
                const UserSpec& u = users[static_cast<std::size_t>(12 + next_b)];
                next_b = (next_b + 1) % 12;
                ToyRecord rec;
                rec.user = u.id;
                rec.item = idx;
                rec.rating = 5.0;
                rec.ts = u.start + static_cast<std::int64_t>(rng.below(
                                       static_cast<std::uint64_t>(u.span)));
                while (seen.count({rec.user, rec.item, rec.ts})) ++rec.ts;
                seen.insert({rec.user, rec.item, rec.ts});
                rec.text = mixed_text(rng, 6 + static_cast<int>(rng.below(20)),
                                      kSocial, 0.30, kPositive, 0.12);
                ++global_count[idx];
                records.push_back(std::move(rec));
            }
        }
    }

    // Re-emit u_regular's chronologically first record through the office
    // file so cross-file duplicate detection has exactly one hit.
    void plant_duplicate() {
        const ToyRecord* first = nullptr;
        for (const auto& r : records)
            if (r.user == "u_regular" && (!first || r.ts < first->ts)) first = &r;
        ToyRecord dup = *first;
        dup.force_file = kCatCount - 1;
        records.push_back(std::move(dup));
    }

    void write_interaction_files(const fs::path& dir) const {
        std::array<std::vector<const ToyRecord*>, kCatCount> by_file;
        for (const auto& r : records)
            by_file[static_cast<std::size_t>(
                        r.force_file >= 0 ? r.force_file : r.item / kSlots)]
                .push_back(&r);
        for (int f = 0; f < kCatCount; ++f) {
            auto& rows = by_file[static_cast<std::size_t>(f)];
            std::stable_sort(rows.begin(), rows.end(),
                             [](const ToyRecord* a, const ToyRecord* b) {
                                 return std::tie(a->ts, a->user, a->item) <
                                        std::tie(b->ts, b->user, b->item);
                             });
            std::ofstream out(dir / ("reviews_" + kCats[f] + ".jsonl"));
            int explicit_left = (f == 0) ? 5 : 0;
            for (const ToyRecord* r : rows) {
                json j;
                j["user_id"] = r->user;
                j["parent_asin"] = item_name(r->item);
                j["rating"] = r->rating;
                // The electronics feed uses millisecond epochs.
                j["timestamp"] = (f == 1) ? r->ts * 1000 : r->ts;
                if (!r->text.empty()) j["text"] = r->text;
                if (!r->title.empty()) j["title"] = r->title;
                if (explicit_left > 0) {
                    j["category"] = kCats[f];
                    --explicit_left;
                }
                out << j.dump() << "\n";
            }
            if (f == 0) {
                out << R"({"user_id":"u_bad","parent_asin":"i000","rating":9,"timestamp":1609459200})"
                    << "\n";
                out << R"({"user_id":"u_bad"})" << "\n";
                out << "this line is not json\n";
                out << R"({"user_id":"","parent_asin":"i001","rating":4,"timestamp":1609459200})"
                    << "\n";
            }
        }
    }

    void write_metadata(const fs::path& dir) const {
        std::ofstream out(dir / "metadata.jsonl");
        for (const auto& [id, m] : metadata) {
            int idx = std::stoi(id.substr(1));
            json j;
            j["parent_asin"] = id;
            j["title"] = m.title;
            j["description"] = m.description;
            j["main_category"] = m.category;
            if (m.price) {
                if (idx % 16 == 2) {
                    char buf[32];
                    std::snprintf(buf, sizeof buf, "$%.2f", *m.price);
                    j["price"] = buf;
                } else {
                    j["price"] = *m.price;
                }
            }
            j["average_rating"] = *m.average_rating;
            out << j.dump() << "\n";
        }
    }

    void write_config(const fs::path& dir) const {
        std::ofstream out(dir / "config.toml");
        out << "# Pipeline configuration for the bundled toy corpus.\n";
        out << "inputs = [";
        for (int f = 0; f < kCatCount; ++f)
            out << (f ? ", " : "") << "\"data/toy/reviews_" << kCats[f] << ".jsonl\"";
        out << "]\n";
        out << "metadata = \"data/toy/metadata.jsonl\"\n";
        out << "out = \"out/toy\"\n";
        out << "min-interactions = 8\n";
        out << "test-fraction = 0.2\n";
        out << "eta = 5\n";
        out << "token-budget = 3000\n";
        out << "backend = \"deterministic\"\n";
        out << "policies = [\"personality-deterministic\", \"random\", \"markov\", "
               "\"ablation-random-personality\"]\n";
        out << "algorithms = [\"pop\", \"mf\", \"bpr\", \"markov-seq\"]\n";
        out << "ndcg-k = 10\n";
        out << "seed = 42\n";
        out << "jobs = 1\n";
    }
};

}  // namespace

int main(int argc, char** argv) {
    fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path("data/toy");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        std::cerr << "cannot create " << dir.string() << ": " << ec.message() << "\n";
        return 1;
    }

    Generator g;
    g.build_metadata();
    g.build_users();
    for (const auto& u : g.users) g.generate_user(u);
    g.coverage_fill();
    g.plant_duplicate();
    g.write_interaction_files(dir);
    g.write_metadata(dir);
    g.write_config(dir);

    std::cout << "wrote " << g.records.size() << " interactions for "
              << g.users.size() << " users and " << g.metadata.size()
              << " metadata rows into " << dir.string() << "\n";
    return 0;
}
