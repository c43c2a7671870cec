#include "pub/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pub/ingest.hpp"

namespace pub {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::int64_t kSecondsPerDay = 86400;
}  // namespace

const char* window_kind_name(WindowKind k) {
    switch (k) {
        case WindowKind::week: return "week";
        case WindowKind::month: return "month";
        case WindowKind::quarter: return "quarter";
    }
    return "week";
}

int window_kind_days(WindowKind k) {
    switch (k) {
        case WindowKind::week: return 7;
        case WindowKind::month: return 30;
        case WindowKind::quarter: return 91;
    }
    return 7;
}

std::vector<InteractionRecord> SampledHistory::flat() const {
    std::vector<InteractionRecord> out;
    for (const auto& b : bins) out.insert(out.end(), b.records.begin(), b.records.end());
    return out;
}

std::size_t SampledHistory::total_records() const {
    std::size_t n = 0;
    for (const auto& b : bins) n += b.records.size();
    return n;
}

PriceQuintiles PriceQuintiles::from_catalogue(
    const std::unordered_map<std::string, ItemMetadata>& metadata) {
    std::vector<double> prices;
    prices.reserve(metadata.size());
    for (const auto& [id, m] : metadata)
        if (m.price) prices.push_back(*m.price);
    PriceQuintiles q;
    if (prices.size() < 5) return q;
    std::sort(prices.begin(), prices.end());
    std::size_t n = prices.size();
    for (int k = 1; k <= 4; ++k) {
        // nearest-rank percentile at 20k%
        std::size_t rank = (n * static_cast<std::size_t>(k) + 4) / 5;  // ceil(n*k/5)
        q.edges[k - 1] = prices[rank - 1];
    }
    q.valid = true;
    return q;
}

int PriceQuintiles::tier(double price) const {
    for (int i = 0; i < 4; ++i)
        if (price <= edges[i]) return i;
    return 4;
}

double angular_transform(std::int64_t timestamp, int cycle_days) {
    if (cycle_days < 1) throw std::invalid_argument("cycle_days must be >= 1");
    std::int64_t cycle = static_cast<std::int64_t>(cycle_days) * kSecondsPerDay;
    std::int64_t rem = timestamp % cycle;
    if (rem < 0) rem += cycle;
    return kTwoPi * static_cast<double>(rem) / static_cast<double>(cycle);
}

Rhythm purchase_rhythm(std::span<const std::int64_t> timestamps, int cycle_days) {
    if (timestamps.empty()) throw std::invalid_argument("purchase_rhythm: no timestamps");
    double sum_cos = 0.0, sum_sin = 0.0;
    for (std::int64_t t : timestamps) {
        double theta = angular_transform(t, cycle_days);
        sum_cos += std::cos(theta);
        sum_sin += std::sin(theta);
    }
    auto n = static_cast<double>(timestamps.size());
    double mc = sum_cos / n;
    double ms = sum_sin / n;
    Rhythm r;
    r.strength = std::min(1.0, std::hypot(mc, ms));
    if (timestamps.size() == 1) r.strength = 1.0;  // single phasor has unit length exactly
    r.phase = std::atan2(ms, mc);
    if (r.phase < 0.0) r.phase += kTwoPi;
    if (r.phase >= kTwoPi) r.phase = 0.0;
    return r;
}

namespace {

// Geometric day-scale gap buckets; raw-second intervals would all be distinct
// and make the entropy degenerate.
int interval_bucket(double gap_days) {
    static constexpr double edges[] = {1, 2, 4, 8, 16, 32, 64};
    int b = 0;
    for (double e : edges) {
        if (gap_days < e) return b;
        ++b;
    }
    return 7;
}

}  // namespace

double shannon_entropy_bits(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double w : weights) {
        if (w <= 0.0) continue;
        double p = w / total;
        h -= p * std::log2(p);
    }
    return std::max(0.0, h);
}

std::optional<double> interval_entropy(std::span<const std::int64_t> ts) {
    if (ts.size() < 2) return std::nullopt;
    std::array<double, 8> counts{};
    for (std::size_t i = 1; i < ts.size(); ++i) {
        double gap_days = static_cast<double>(ts[i] - ts[i - 1]) / kSecondsPerDay;
        ++counts[interval_bucket(gap_days)];
    }
    return shannon_entropy_bits(counts);
}

std::map<std::string, double> category_histogram(
    const std::vector<const InteractionRecord*>& records) {
    std::map<std::string, double> hist;
    for (const auto* r : records) hist[r->category] += 1.0;
    double total = static_cast<double>(records.size());
    if (total > 0)
        for (auto& [cat, v] : hist) v /= total;
    return hist;
}

double category_entropy(const std::vector<const InteractionRecord*>& records) {
    auto hist = category_histogram(records);
    std::vector<double> w;
    w.reserve(hist.size());
    for (const auto& [cat, p] : hist) w.push_back(p);
    return shannon_entropy_bits(w);
}

std::optional<std::array<double, 5>> price_tier_distribution(
    const std::vector<const InteractionRecord*>& records,
    const std::unordered_map<std::string, ItemMetadata>& metadata,
    const PriceQuintiles& quintiles) {
    if (!quintiles.valid) return std::nullopt;
    std::array<double, 5> tiers{};
    std::size_t priced = 0;
    for (const auto* r : records) {
        auto it = metadata.find(r->item_id);
        if (it == metadata.end() || !it->second.price) continue;
        ++tiers[quintiles.tier(*it->second.price)];
        ++priced;
    }
    if (priced == 0) return std::nullopt;
    for (auto& t : tiers) t /= static_cast<double>(priced);
    return tiers;
}

ReviewStats review_statistics(const std::vector<const InteractionRecord*>& records,
                              const std::map<std::string, double>& category_means) {
    ReviewStats out;
    std::vector<double> lengths;
    for (const auto* r : records) {
        if (r->review_text) lengths.push_back(static_cast<double>(count_tokens(*r->review_text)));
    }
    if (!lengths.empty()) {
        double mean = 0.0;
        for (double l : lengths) mean += l;
        mean /= static_cast<double>(lengths.size());
        double var = 0.0;
        for (double l : lengths) var += (l - mean) * (l - mean);
        var /= static_cast<double>(lengths.size());  // population variance
        out.length_mean = mean;
        out.length_cv = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
    }
    double dev = 0.0;
    for (const auto* r : records) {
        auto it = category_means.find(r->category);
        double cm = it != category_means.end() ? it->second : r->rating;
        dev += r->rating - cm;
    }
    if (!records.empty()) dev /= static_cast<double>(records.size());
    out.rating_deviation = dev;
    return out;
}

std::map<std::string, double> category_mean_ratings(const Dataset& d) {
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto& r : d.interactions) {
        auto& [sum, n] = acc[r.category];
        sum += r.rating;
        ++n;
    }
    std::map<std::string, double> out;
    for (const auto& [cat, sn] : acc) out[cat] = sn.first / static_cast<double>(sn.second);
    return out;
}

namespace {

std::string cycle_label(int days) {
    if (days == 7) return "week";
    if (days == 365) return "year";
    return std::to_string(days) + "d";
}

}  // namespace

BehavioralSignature build_signature(const std::string& user_id,
                                    const std::vector<const InteractionRecord*>& records,
                                    const std::unordered_map<std::string, ItemMetadata>& metadata,
                                    const std::map<std::string, double>& category_means,
                                    const PriceQuintiles& quintiles,
                                    const std::vector<int>& rhythm_cycles) {
    if (records.empty()) throw std::invalid_argument("build_signature: no records");

    BehavioralSignature s;
    s.user_id = user_id;
    s.purchase_count = records.size();

    std::vector<std::int64_t> ts;
    ts.reserve(records.size());
    for (const auto* r : records) ts.push_back(r->timestamp);

    s.span_days = static_cast<double>(ts.back() - ts.front()) / kSecondsPerDay;
    s.purchase_frequency =
        static_cast<double>(s.purchase_count) / std::max(s.span_days, 1.0) * 30.0;

    for (int cycle : rhythm_cycles) s.rhythm[cycle_label(cycle)] = purchase_rhythm(ts, cycle);

    s.interval_entropy = interval_entropy(ts);
    s.category_histogram = category_histogram(records);
    s.category_entropy = category_entropy(records);
    s.price_tiers = price_tier_distribution(records, metadata, quintiles);

    ReviewStats rs = review_statistics(records, category_means);
    s.review_length_mean = rs.length_mean;
    s.review_length_cv = rs.length_cv;
    s.rating_deviation = rs.rating_deviation;

    s.feature_coverage["purchase_count"] = true;
    s.feature_coverage["span_days"] = true;
    s.feature_coverage["purchase_frequency"] = true;
    for (int cycle : rhythm_cycles) s.feature_coverage["rhythm_" + cycle_label(cycle)] = true;
    s.feature_coverage["interval_entropy"] = s.interval_entropy.has_value();
    s.feature_coverage["category_entropy"] = true;
    s.feature_coverage["category_histogram"] = true;
    s.feature_coverage["price_tiers"] = s.price_tiers.has_value();
    s.feature_coverage["review_length_mean"] = s.review_length_mean.has_value();
    s.feature_coverage["review_length_cv"] = s.review_length_cv.has_value();
    s.feature_coverage["rating_deviation"] = true;
    return s;
}

WindowKind window_kind(double span_days) {
    if (span_days <= 365.0) return WindowKind::week;
    if (span_days <= 3.0 * 365.0) return WindowKind::month;
    return WindowKind::quarter;
}

SampledHistory temporal_stratified_sample(const std::string& user_id,
                                          const std::vector<const InteractionRecord*>& records,
                                          std::size_t eta) {
    if (eta < 1) throw std::invalid_argument("eta must be >= 1");
    SampledHistory out;
    out.user_id = user_id;
    if (records.empty()) return out;

    std::int64_t t0 = records.front()->timestamp;
    std::int64_t t_end = records.back()->timestamp;
    double span_days = static_cast<double>(t_end - t0) / kSecondsPerDay;
    out.kind = window_kind(span_days);
    std::int64_t w = static_cast<std::int64_t>(window_kind_days(out.kind)) * kSecondsPerDay;

    std::size_t n_bins = static_cast<std::size_t>((t_end - t0) / w) + 1;
    std::vector<std::vector<std::size_t>> bins(n_bins);
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto b = static_cast<std::size_t>((records[i]->timestamp - t0) / w);
        bins[b].push_back(i);
    }

    for (std::size_t b = 0; b < n_bins; ++b) {
        SampledBin sb;
        sb.window_start = t0 + static_cast<std::int64_t>(b) * w;
        sb.window_end = sb.window_start + w;

        auto order = bins[b];
        // Preference: pinned endpoints, then longest review text, then recency.
        auto text_len = [&](std::size_t i) -> std::size_t {
            return records[i]->review_text ? records[i]->review_text->size() : 0;
        };
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
            bool pa = a == 0 || a == records.size() - 1;
            bool pc = c == 0 || c == records.size() - 1;
            if (pa != pc) return pa;
            std::size_t la = text_len(a), lc = text_len(c);
            if (la != lc) return la > lc;
            return a > c;
        });
        if (order.size() > eta) order.resize(eta);
        std::sort(order.begin(), order.end());  // restore chronological order
        for (std::size_t i : order) sb.records.push_back(*records[i]);
        out.bins.push_back(std::move(sb));
    }
    return out;
}

json signature_to_json(const BehavioralSignature& s) {
    json j;
    j["user_id"] = s.user_id;
    j["purchase_count"] = s.purchase_count;
    j["span_days"] = s.span_days;
    j["purchase_frequency"] = s.purchase_frequency;
    json rhythm = json::object();
    for (const auto& [name, r] : s.rhythm)
        rhythm[name] = {{"strength", r.strength}, {"phase", r.phase}};
    j["rhythm"] = rhythm;
    if (s.interval_entropy) j["interval_entropy"] = *s.interval_entropy;
    j["category_entropy"] = s.category_entropy;
    j["category_histogram"] = s.category_histogram;
    if (s.price_tiers) j["price_tiers"] = *s.price_tiers;
    if (s.review_length_mean) j["review_length_mean"] = *s.review_length_mean;
    if (s.review_length_cv) j["review_length_cv"] = *s.review_length_cv;
    j["rating_deviation"] = s.rating_deviation;
    j["feature_coverage"] = s.feature_coverage;
    return j;
}

BehavioralSignature signature_from_json(const json& j) {
    BehavioralSignature s;
    s.user_id = j.at("user_id").get<std::string>();
    s.purchase_count = j.at("purchase_count").get<std::size_t>();
    s.span_days = j.at("span_days").get<double>();
    s.purchase_frequency = j.at("purchase_frequency").get<double>();
    for (const auto& [name, r] : j.at("rhythm").items())
        s.rhythm[name] = Rhythm{r.at("strength").get<double>(), r.at("phase").get<double>()};
    if (j.contains("interval_entropy")) s.interval_entropy = j["interval_entropy"].get<double>();
    s.category_entropy = j.at("category_entropy").get<double>();
    s.category_histogram = j.at("category_histogram").get<std::map<std::string, double>>();
    if (j.contains("price_tiers")) s.price_tiers = j["price_tiers"].get<std::array<double, 5>>();
    if (j.contains("review_length_mean"))
        s.review_length_mean = j["review_length_mean"].get<double>();
    if (j.contains("review_length_cv")) s.review_length_cv = j["review_length_cv"].get<double>();
    s.rating_deviation = j.at("rating_deviation").get<double>();
    s.feature_coverage = j.at("feature_coverage").get<std::map<std::string, bool>>();
    return s;
}

json sampled_history_to_json(const SampledHistory& h) {
    json bins = json::array();
    for (const auto& b : h.bins) {
        json recs = json::array();
        for (const auto& r : b.records) recs.push_back(record_to_json(r));
        bins.push_back({{"window_start", b.window_start},
                        {"window_end", b.window_end},
                        {"records", recs}});
    }
    return json{{"user_id", h.user_id},
                {"window_kind", window_kind_name(h.kind)},
                {"bins", bins}};
}

SampledHistory sampled_history_from_json(const json& j) {
    SampledHistory h;
    h.user_id = j.at("user_id").get<std::string>();
    std::string kind = j.at("window_kind").get<std::string>();
    h.kind = kind == "month" ? WindowKind::month
             : kind == "quarter" ? WindowKind::quarter
                                 : WindowKind::week;
    for (const auto& b : j.at("bins")) {
        SampledBin sb;
        sb.window_start = b.at("window_start").get<std::int64_t>();
        sb.window_end = b.at("window_end").get<std::int64_t>();
        for (const auto& r : b.at("records")) sb.records.push_back(record_from_json(r));
        h.bins.push_back(std::move(sb));
    }
    return h;
}

}  // namespace pub
