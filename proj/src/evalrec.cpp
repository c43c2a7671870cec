#include "pub/evalrec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pub/rng.hpp"

namespace pub {

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t intersection = 0;
    for (const auto& x : a) intersection += b.count(x);
    const std::size_t unions = a.size() + b.size() - intersection;
    return static_cast<double>(intersection) / static_cast<double>(unions);
}

double ndcg_at_k(const std::vector<std::string>& ranked,
                 const std::unordered_set<std::string>& relevant, std::size_t k) {
    if (relevant.empty() || k == 0) return 0.0;
    double dcg = 0.0;
    const std::size_t limit = std::min(k, ranked.size());
    for (std::size_t i = 0; i < limit; ++i)
        if (relevant.count(ranked[i])) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    double idcg = 0.0;
    const std::size_t ideal = std::min(k, relevant.size());
    for (std::size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    return dcg / idcg;
}

std::map<std::string, int> frequency_deciles(const std::map<std::string, std::size_t>& counts) {
    if (counts.size() < 10)
        throw EvalError("frequency_deciles needs >= 10 users, got " +
                        std::to_string(counts.size()));
    std::vector<std::pair<std::size_t, std::string>> ordered;  // (count, user), ascending
    ordered.reserve(counts.size());
    for (const auto& [user, count] : counts) ordered.emplace_back(count, user);
    std::sort(ordered.begin(), ordered.end());
    std::map<std::string, int> deciles;
    const std::size_t n = ordered.size();
    for (std::size_t rank = 0; rank < n; ++rank)
        deciles[ordered[rank].second] = static_cast<int>(rank * 10 / n);
    return deciles;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw EvalError("spearman: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) return std::nullopt;
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    if (ra == rb) return 1.0;  // identical orderings are exact by definition
    const double mean = (static_cast<double>(n) + 1.0) / 2.0;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (ra[i] - mean) * (rb[i] - mean);
        va += (ra[i] - mean) * (ra[i] - mean);
        vb += (rb[i] - mean) * (rb[i] - mean);
    }
    if (va == 0.0 || vb == 0.0) return std::nullopt;
    return cov / std::sqrt(va * vb);
}

namespace {

std::unordered_map<std::string, std::string> label_items(const Dataset& d) {
    std::unordered_map<std::string, std::string> labels;
    for (const auto& [id, meta] : d.metadata)
        if (!meta.category.empty()) labels[id] = meta.category;
    for (const auto& r : d.interactions)
        if (!r.category.empty()) labels.emplace(r.item_id, r.category);
    return labels;
}

void train_mf(RecModel& m, const Dataset& data, const Hyperparams& hp, std::uint64_t seed) {
    const std::size_t nu = m.user_index.size(), ni = m.item_index.size();
    const std::size_t d = static_cast<std::size_t>(hp.dims);
    Rng rng = Rng::stream(seed, "mf/init");
    m.user_factors.assign(nu, std::vector<double>(d));
    m.item_factors.assign(ni, std::vector<double>(d));
    m.user_bias.assign(nu, 0.0);
    m.item_bias.assign(ni, 0.0);
    for (auto& row : m.user_factors)
        for (auto& x : row) x = 0.1 * rng.gaussian();
    for (auto& row : m.item_factors)
        for (auto& x : row) x = 0.1 * rng.gaussian();

    double sum = 0.0;
    for (const auto& r : data.interactions) sum += r.rating;
    m.global_mean = sum / static_cast<double>(data.interactions.size());

    std::vector<std::size_t> order(data.interactions.size());
    std::iota(order.begin(), order.end(), 0);
    Rng epoch_rng = Rng::stream(seed, "mf/epochs");
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        epoch_rng.shuffle(order);
        double sq_err = 0.0;
        for (std::size_t idx : order) {
            const auto& r = data.interactions[idx];
            const std::size_t u = m.user_index.at(r.user_id);
            const std::size_t i = m.item_index.at(r.item_id);
            auto& p = m.user_factors[u];
            auto& q = m.item_factors[i];
            double pred = m.global_mean + m.user_bias[u] + m.item_bias[i];
            for (std::size_t f = 0; f < d; ++f) pred += p[f] * q[f];
            const double err = r.rating - pred;
            sq_err += err * err;
            m.user_bias[u] += hp.lr * (err - hp.reg * m.user_bias[u]);
            m.item_bias[i] += hp.lr * (err - hp.reg * m.item_bias[i]);
            for (std::size_t f = 0; f < d; ++f) {
                const double pf = p[f];
                p[f] += hp.lr * (err * q[f] - hp.reg * pf);
                q[f] += hp.lr * (err * pf - hp.reg * q[f]);
            }
        }
        const double objective = sq_err / static_cast<double>(order.size());
        if (!std::isfinite(objective))
            throw EvalError("mf training diverged at epoch " + std::to_string(epoch));
        m.training_log.push_back(objective);
    }
}

void train_bpr(RecModel& m, const Dataset& data, const Hyperparams& hp, std::uint64_t seed) {
    const std::size_t nu = m.user_index.size(), ni = m.item_index.size();
    const std::size_t d = static_cast<std::size_t>(hp.dims);
    Rng rng = Rng::stream(seed, "bpr/init");
    m.user_factors.assign(nu, std::vector<double>(d));
    m.item_factors.assign(ni, std::vector<double>(d));
    m.item_bias.assign(ni, 0.0);
    for (auto& row : m.user_factors)
        for (auto& x : row) x = 0.1 * rng.gaussian();
    for (auto& row : m.item_factors)
        for (auto& x : row) x = 0.1 * rng.gaussian();

    // Distinct positives per user, in deterministic order.
    std::vector<std::pair<std::size_t, std::size_t>> positives;  // (u, i) indices
    std::vector<std::unordered_set<std::size_t>> seen(nu);
    for (const auto& r : data.interactions) {
        const std::size_t u = m.user_index.at(r.user_id);
        const std::size_t i = m.item_index.at(r.item_id);
        if (seen[u].insert(i).second) positives.emplace_back(u, i);
    }

    Rng epoch_rng = Rng::stream(seed, "bpr/epochs");
    std::vector<std::size_t> order(positives.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        epoch_rng.shuffle(order);
        double loss = 0.0;
        std::size_t updates = 0;
        for (std::size_t idx : order) {
            const auto [u, i] = positives[idx];
            std::size_t j = ni;  // uniform negative not positive for u
            for (int attempt = 0; attempt < 50; ++attempt) {
                const std::size_t candidate = epoch_rng.below(ni);
                if (!seen[u].count(candidate)) {
                    j = candidate;
                    break;
                }
            }
            if (j == ni) continue;
            auto& p = m.user_factors[u];
            auto& qi = m.item_factors[i];
            auto& qj = m.item_factors[j];
            double x = m.item_bias[i] - m.item_bias[j];
            for (std::size_t f = 0; f < d; ++f) x += p[f] * (qi[f] - qj[f]);
            const double sigma = 1.0 / (1.0 + std::exp(-x));
            loss += -std::log(std::max(sigma, 1e-12));
            ++updates;
            const double g = 1.0 - sigma;
            m.item_bias[i] += hp.lr * (g - hp.reg * m.item_bias[i]);
            m.item_bias[j] += hp.lr * (-g - hp.reg * m.item_bias[j]);
            for (std::size_t f = 0; f < d; ++f) {
                const double pf = p[f];
                p[f] += hp.lr * (g * (qi[f] - qj[f]) - hp.reg * pf);
                qi[f] += hp.lr * (g * pf - hp.reg * qi[f]);
                qj[f] += hp.lr * (-g * pf - hp.reg * qj[f]);
            }
        }
        const double objective = updates > 0 ? loss / static_cast<double>(updates) : 0.0;
        if (!std::isfinite(objective))
            throw EvalError("bpr training diverged at epoch " + std::to_string(epoch));
        m.training_log.push_back(objective);
    }
}

void train_markov(RecModel& m, const Dataset& data) {
    m.item_category = label_items(data);
    auto category_of = [&](const std::string& item) {
        auto it = m.item_category.find(item);
        return it != m.item_category.end() ? it->second : std::string{};
    };

    std::set<std::string> categories;
    std::map<std::string, std::map<std::string, double>> counts;
    std::map<std::string, double> row_totals;
    for (const auto& [user, indices] : data.by_user) {
        std::string prev;
        for (std::size_t idx : indices) {
            const std::string cat = category_of(data.interactions[idx].item_id);
            if (!cat.empty()) {
                categories.insert(cat);
                if (!prev.empty()) {
                    counts[prev][cat] += 1.0;
                    row_totals[prev] += 1.0;
                }
                prev = cat;
            }
        }
        if (!prev.empty()) m.user_last_category[user] = prev;
    }

    // Add-one smoothing over the observed category set; rows sum to 1.
    const double c = static_cast<double>(categories.size());
    for (const auto& from : categories) {
        auto& row = m.transitions[from];
        const double total = row_totals.count(from) ? row_totals[from] : 0.0;
        for (const auto& to : categories) {
            const double n =
                counts.count(from) && counts[from].count(to) ? counts[from][to] : 0.0;
            row[to] = (n + 1.0) / (total + c);
        }
    }
}

}  // namespace

RecModel train_model(const std::string& kind, const Dataset& train,
                     const std::vector<std::string>& catalogue, const Hyperparams& hp,
                     std::uint64_t seed) {
    if (train.interactions.empty()) throw EvalError("train_model: empty training log");
    RecModel m;
    m.kind = kind;
    m.catalogue = catalogue;
    for (const auto& r : train.interactions) m.pop_counts[r.item_id] += 1.0;

    if (kind == "pop") return m;

    if (kind == "mf" || kind == "bpr") {
        for (const auto& r : train.interactions) {
            m.user_index.emplace(r.user_id, m.user_index.size());
            m.item_index.emplace(r.item_id, m.item_index.size());
        }
        if (kind == "mf")
            train_mf(m, train, hp, seed);
        else
            train_bpr(m, train, hp, seed);
        return m;
    }
    if (kind == "markov-seq") {
        train_markov(m, train);
        return m;
    }
    throw EvalError("unknown recommender kind: " + kind);
}

double predict_rating(const RecModel& m, const std::string& user, const std::string& item) {
    if (m.kind != "mf") throw EvalError("predict_rating requires an mf model");
    double pred = m.global_mean;
    const auto u = m.user_index.find(user);
    const auto i = m.item_index.find(item);
    if (u != m.user_index.end()) pred += m.user_bias[u->second];
    if (i != m.item_index.end()) pred += m.item_bias[i->second];
    if (u != m.user_index.end() && i != m.item_index.end()) {
        const auto& p = m.user_factors[u->second];
        const auto& q = m.item_factors[i->second];
        for (std::size_t f = 0; f < p.size(); ++f) pred += p[f] * q[f];
    }
    return pred;
}

RankedRecommendation recommend(const RecModel& m, const std::string& user,
                               const std::unordered_set<std::string>& exclude, std::size_t k) {
    RankedRecommendation out;

    std::function<double(const std::string&)> score;
    if (m.kind == "pop") {
        score = [&](const std::string& item) {
            auto it = m.pop_counts.find(item);
            return it != m.pop_counts.end() ? it->second : 0.0;
        };
    } else if (m.kind == "mf") {
        auto u = m.user_index.find(user);
        if (u == m.user_index.end()) {
            out.cold_start = true;
        } else {
            const std::size_t ui = u->second;
            score = [&m, ui](const std::string& item) {
                auto i = m.item_index.find(item);
                if (i == m.item_index.end()) return m.global_mean + m.user_bias[ui];
                double s = m.global_mean + m.user_bias[ui] + m.item_bias[i->second];
                const auto& p = m.user_factors[ui];
                const auto& q = m.item_factors[i->second];
                for (std::size_t f = 0; f < p.size(); ++f) s += p[f] * q[f];
                return s;
            };
        }
    } else if (m.kind == "bpr") {
        auto u = m.user_index.find(user);
        if (u == m.user_index.end()) {
            out.cold_start = true;
        } else {
            const std::size_t ui = u->second;
            score = [&m, ui](const std::string& item) {
                auto i = m.item_index.find(item);
                if (i == m.item_index.end()) return 0.0;
                double s = m.item_bias[i->second];
                const auto& p = m.user_factors[ui];
                const auto& q = m.item_factors[i->second];
                for (std::size_t f = 0; f < p.size(); ++f) s += p[f] * q[f];
                return s;
            };
        }
    } else if (m.kind == "markov-seq") {
        auto last = m.user_last_category.find(user);
        if (last == m.user_last_category.end()) {
            out.cold_start = true;
        } else {
            const auto row = m.transitions.find(last->second);
            score = [&m, row](const std::string& item) {
                if (row == m.transitions.end()) return 0.0;
                auto cat = m.item_category.find(item);
                if (cat == m.item_category.end()) return 0.0;
                auto cell = row->second.find(cat->second);
                return cell != row->second.end() ? cell->second : 0.0;
            };
        }
    } else {
        throw EvalError("unknown recommender kind: " + m.kind);
    }

    if (out.cold_start) {
        score = [&](const std::string& item) {
            auto it = m.pop_counts.find(item);
            return it != m.pop_counts.end() ? it->second : 0.0;
        };
    }

    std::vector<std::pair<double, const std::string*>> scored;
    scored.reserve(m.catalogue.size());
    for (const auto& item : m.catalogue)
        if (!exclude.count(item)) scored.emplace_back(score(item), &item);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return *a.second < *b.second;
    });
    const std::size_t limit = std::min(k, scored.size());
    out.items.reserve(limit);
    for (std::size_t i = 0; i < limit; ++i) out.items.push_back(*scored[i].second);
    return out;
}

SyntheticSplit split_synthetic(const Dataset& real_train, const Dataset& real_test,
                               const std::vector<SyntheticSequence>& synthetic) {
    SyntheticSplit out;
    out.train.metadata = real_train.metadata;
    out.test.metadata = real_train.metadata;

    auto labels = label_items(real_train);
    for (const auto& [id, cat] : label_items(real_test)) labels.emplace(id, cat);

    std::map<std::string, const SyntheticSequence*> by_user;
    for (const auto& seq : synthetic) by_user[seq.user_id] = &seq;

    std::map<std::string, double> train_mean_rating;
    for (const auto& [user, indices] : real_train.by_user) {
        double sum = 0.0;
        for (std::size_t idx : indices) sum += real_train.interactions[idx].rating;
        train_mean_rating[user] = sum / static_cast<double>(indices.size());
    }

    std::vector<std::string> missing;
    for (const auto& [user, indices] : real_test.by_user)
        if (!by_user.count(user)) missing.push_back(user);
    if (!missing.empty()) {
        std::string msg = "synthetic log missing users:";
        for (const auto& u : missing) msg += " " + u;
        throw EvalError(msg);
    }

    out.train.interactions = real_train.interactions;
    for (const auto& [user, indices] : real_test.by_user) {
        const SyntheticSequence& seq = *by_user.at(user);
        const std::size_t target = indices.size();
        const std::size_t take = std::min(target, seq.selections.size());
        if (seq.selections.size() < target) out.shortfall_users.push_back(user);
        const std::size_t skip = seq.selections.size() - take;  // extras land in train

        for (std::size_t s = 0; s < seq.selections.size(); ++s) {
            const auto& sel = seq.selections[s];
            InteractionRecord r;
            r.user_id = user;
            r.item_id = sel.item_id;
            r.timestamp = sel.timestamp;
            if (sel.was_positive && sel.step < indices.size())
                r.rating = real_test.interactions[indices[sel.step]].rating;
            else
                r.rating = train_mean_rating.count(user) ? train_mean_rating.at(user) : 3.0;
            auto label = labels.find(sel.item_id);
            if (label != labels.end()) r.category = label->second;
            (s < skip ? out.train : out.test).interactions.push_back(std::move(r));
        }
    }
    out.train.rebuild_index();
    out.test.rebuild_index();
    return out;
}

ComparisonReport compare_real_synthetic(const Dataset& real_train, const Dataset& real_test,
                                        const std::vector<SyntheticSequence>& synthetic,
                                        const std::vector<std::string>& algorithms, std::size_t k,
                                        const Hyperparams& hp, std::uint64_t seed) {
    ComparisonReport report;
    report.k = k;

    auto synth = split_synthetic(real_train, real_test, synthetic);
    report.shortfall_users = synth.shortfall_users;

    std::set<std::string> universe;
    for (const auto& r : real_train.interactions) universe.insert(r.item_id);
    for (const auto& r : real_test.interactions) universe.insert(r.item_id);
    for (const auto& [id, meta] : real_train.metadata) universe.insert(id);
    const std::vector<std::string> catalogue(universe.begin(), universe.end());

    auto evaluate = [&](const RecModel& model, const Dataset& train, const Dataset& test,
                        std::map<std::string, double>* per_user) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& [user, indices] : test.by_user) {
            std::unordered_set<std::string> exclude;
            auto it = train.by_user.find(user);
            if (it != train.by_user.end())
                for (std::size_t idx : it->second) exclude.insert(train.interactions[idx].item_id);
            std::unordered_set<std::string> relevant;
            for (std::size_t idx : indices) relevant.insert(test.interactions[idx].item_id);
            const auto ranked = recommend(model, user, exclude, k);
            const double score = ndcg_at_k(ranked.items, relevant, k);
            if (per_user) (*per_user)[user] = score;
            sum += score;
            ++n;
        }
        return n > 0 ? sum / static_cast<double>(n) : 0.0;
    };

    for (const auto& algorithm : algorithms) {
        AlgoResult res;
        res.algorithm = algorithm;
        const RecModel real_model = train_model(algorithm, real_train, catalogue, hp, seed);
        res.ndcg_real = evaluate(real_model, real_train, real_test, &res.per_user_real);
        const RecModel synth_model = train_model(algorithm, synth.train, catalogue, hp, seed);
        res.ndcg_synthetic = evaluate(synth_model, synth.train, synth.test, nullptr);
        report.algorithms.push_back(std::move(res));
    }

    std::vector<double> real_scores, synth_scores;
    for (const auto& a : report.algorithms) {
        real_scores.push_back(a.ndcg_real);
        synth_scores.push_back(a.ndcg_synthetic);
    }
    if (!report.algorithms.empty()) {
        // rank 1 = best: ranks of the negated scores
        std::vector<double> neg_real, neg_synth;
        for (double v : real_scores) neg_real.push_back(-v);
        for (double v : synth_scores) neg_synth.push_back(-v);
        const auto rr = average_ranks(neg_real);
        const auto rs = average_ranks(neg_synth);
        for (std::size_t i = 0; i < report.algorithms.size(); ++i) {
            report.algorithms[i].rank_real = rr[i];
            report.algorithms[i].rank_synthetic = rs[i];
        }
    }
    report.spearman = spearman(real_scores, synth_scores);
    return report;
}

std::map<std::string, TraitSummary> trait_distribution(
    const std::vector<PersonalityProfile>& profiles) {
    if (profiles.empty()) throw EvalError("trait_distribution needs >= 1 profile");
    static const std::pair<const char*, char> kTraits[5] = {{"openness", 'O'},
                                                            {"conscientiousness", 'C'},
                                                            {"extraversion", 'E'},
                                                            {"agreeableness", 'A'},
                                                            {"neuroticism", 'N'}};
    std::map<std::string, TraitSummary> out;
    for (const auto& [name, letter] : kTraits) {
        TraitSummary s;
        double sum = 0.0;
        for (const auto& p : profiles) {
            const double v = p.trait(letter);
            sum += v;
            const auto bin = std::min<std::size_t>(9, static_cast<std::size_t>(v * 10.0));
            ++s.histogram[bin];
        }
        s.mean = sum / static_cast<double>(profiles.size());
        out[name] = s;
    }
    return out;
}

SusceptibilityReport susceptibility(const std::map<std::string, double>& per_user_ndcg,
                                    const std::map<std::string, PersonalityProfile>& profiles,
                                    const std::string& algorithm_label) {
    const std::size_t n = per_user_ndcg.size();
    if (n < 20)
        throw EvalError("susceptibility needs >= 20 users, got " + std::to_string(n));

    std::vector<std::pair<double, std::string>> ordered;  // (ndcg, user)
    ordered.reserve(n);
    for (const auto& [user, score] : per_user_ndcg) {
        if (!profiles.count(user)) throw EvalError("susceptibility: no profile for user " + user);
        ordered.emplace_back(score, user);
    }
    std::sort(ordered.begin(), ordered.end());  // ascending score, user_id tie-break

    SusceptibilityReport report;
    report.algorithm = algorithm_label;
    report.cohort_size = (n + 9) / 10;  // ceil(0.1 * n)

    static const std::pair<const char*, char> kTraits[5] = {{"openness", 'O'},
                                                            {"conscientiousness", 'C'},
                                                            {"extraversion", 'E'},
                                                            {"agreeableness", 'A'},
                                                            {"neuroticism", 'N'}};
    for (const auto& [name, letter] : kTraits) {
        double bottom = 0.0, top = 0.0;
        for (std::size_t i = 0; i < report.cohort_size; ++i) {
            bottom += profiles.at(ordered[i].second).trait(letter);
            top += profiles.at(ordered[n - 1 - i].second).trait(letter);
        }
        SusceptibilityRow row;
        row.bottom_mean = bottom / static_cast<double>(report.cohort_size);
        row.top_mean = top / static_cast<double>(report.cohort_size);
        row.difference = row.top_mean - row.bottom_mean;
        report.traits[name] = row;
    }
    return report;
}

PolicyFidelity compute_fidelity(const std::string& policy,
                                const std::vector<SyntheticSequence>& sequences,
                                const std::map<std::string, std::set<std::string>>& real_test_sets,
                                const std::map<std::string, int>& deciles) {
    PolicyFidelity f;
    f.policy = policy;

    for (const auto& seq : sequences) {
        auto truth = real_test_sets.find(seq.user_id);
        if (truth == real_test_sets.end()) continue;
        std::set<std::string> chosen;
        for (const auto& s : seq.selections) chosen.insert(s.item_id);
        f.per_user[seq.user_id] = jaccard(chosen, truth->second);
    }
    if (f.per_user.empty()) throw EvalError("compute_fidelity: no overlapping users");

    std::vector<double> values;
    values.reserve(f.per_user.size());
    double sum = 0.0;
    std::array<double, 10> decile_sum{};
    for (const auto& [user, v] : f.per_user) {
        values.push_back(v);
        sum += v;
        auto d = deciles.find(user);
        if (d != deciles.end()) {
            decile_sum[static_cast<std::size_t>(d->second)] += v;
            ++f.decile_count[static_cast<std::size_t>(d->second)];
        }
    }
    f.mean = sum / static_cast<double>(values.size());
    for (std::size_t d = 0; d < 10; ++d)
        f.decile_mean[d] = f.decile_count[d] > 0
                               ? decile_sum[d] / static_cast<double>(f.decile_count[d])
                               : 0.0;

    std::sort(values.begin(), values.end());
    auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] * (1.0 - frac) + values[hi] * frac;
    };
    for (const auto& [label, p] : std::initializer_list<std::pair<const char*, double>>{
             {"p10", 0.10}, {"p25", 0.25}, {"p50", 0.50}, {"p75", 0.75}, {"p90", 0.90}})
        f.percentile_summary[label] = quantile(p);
    return f;
}

json fidelity_to_json(const PolicyFidelity& f) {
    json per_user = json::object();
    for (const auto& [user, v] : f.per_user) per_user[user] = v;
    json deciles = json::array();
    for (std::size_t d = 0; d < 10; ++d)
        deciles.push_back({{"decile", d},
                           {"mean_jaccard", f.decile_mean[d]},
                           {"users", f.decile_count[d]}});
    return json{{"policy", f.policy},
                {"mean_jaccard", f.mean},
                {"percentiles", f.percentile_summary},
                {"per_user", std::move(per_user)},
                {"by_decile", std::move(deciles)}};
}

json comparison_to_json(const ComparisonReport& r) {
    json algos = json::array();
    for (const auto& a : r.algorithms)
        algos.push_back({{"algorithm", a.algorithm},
                         {"ndcg_real", a.ndcg_real},
                         {"ndcg_synthetic", a.ndcg_synthetic},
                         {"rank_real", a.rank_real},
                         {"rank_synthetic", a.rank_synthetic}});
    json j{{"k", r.k}, {"algorithms", std::move(algos)}};
    if (r.spearman)
        j["spearman"] = *r.spearman;
    else
        j["spearman"] = nullptr;
    if (!r.shortfall_users.empty()) j["shortfall_users"] = r.shortfall_users;
    return j;
}

json trait_distribution_to_json(const std::map<std::string, TraitSummary>& dist) {
    json j = json::object();
    for (const auto& [trait, s] : dist) {
        json bins = json::array();
        for (const auto count : s.histogram) bins.push_back(count);
        j[trait] = {{"mean", s.mean}, {"histogram", std::move(bins)}};
    }
    return j;
}

json susceptibility_to_json(const SusceptibilityReport& s) {
    json traits = json::object();
    for (const auto& [trait, row] : s.traits)
        traits[trait] = {{"top_mean", row.top_mean},
                         {"bottom_mean", row.bottom_mean},
                         {"difference", row.difference}};
    return json{{"algorithm", s.algorithm},
                {"cohort_size", s.cohort_size},
                {"traits", std::move(traits)}};
}

}  // namespace pub
