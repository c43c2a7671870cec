#include "pub/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "pub/context.hpp"
#include "pub/evalrec.hpp"
#include "pub/ingest.hpp"
#include "pub/lexicon.hpp"
#include "pub/persona.hpp"
#include "pub/profile.hpp"
#include "pub/simulate.hpp"

namespace pub {

namespace {

/// Index-sharded worker pool. Results must be written into pre-sized slots so
/// output is independent of scheduling; the first exception wins and rethrows.
void parallel_for(int jobs, std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> workers;
    const int count = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), n));
    workers.reserve(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

std::ifstream open_artifact(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw MissingArtifactError(path);
    std::ifstream in(path);
    if (!in) throw IoError("cannot open artifact: " + path.string());
    return in;
}

Dataset load_split(const std::filesystem::path& interactions_path,
                   const std::filesystem::path& metadata_path) {
    Dataset d;
    {
        auto in = open_artifact(interactions_path);
        d.interactions = parse_interactions(in, "");
    }
    {
        auto in = open_artifact(metadata_path);
        d.metadata = parse_metadata(in);
    }
    d.rebuild_index();
    return d;
}

std::vector<BehavioralSignature> load_signatures(const std::filesystem::path& path) {
    auto in = open_artifact(path);
    std::vector<BehavioralSignature> out;
    for_each_line(in, [&](const std::string& line) {
        out.push_back(signature_from_json(json::parse(line)));
    });
    return out;
}

std::vector<SampledHistory> load_histories(const std::filesystem::path& path) {
    auto in = open_artifact(path);
    std::vector<SampledHistory> out;
    for_each_line(in, [&](const std::string& line) {
        out.push_back(sampled_history_from_json(json::parse(line)));
    });
    return out;
}

std::map<std::string, PersonalityProfile> load_profiles(const std::filesystem::path& path) {
    auto in = open_artifact(path);
    std::map<std::string, PersonalityProfile> out;
    for_each_line(in, [&](const std::string& line) {
        PersonalityProfile p = profile_from_json(json::parse(line));
        out[p.user_id] = std::move(p);
    });
    return out;
}

std::vector<InteractionRecord> materialize(const std::vector<const InteractionRecord*>& ptrs) {
    std::vector<InteractionRecord> out;
    out.reserve(ptrs.size());
    for (const auto* r : ptrs) out.push_back(*r);
    return out;
}

LlmClient::Options llm_options(const RunConfig& cfg) {
    LlmClient::Options opt;
    opt.base_url = cfg.llm_base_url;
    opt.mode = cassette_mode_from_string(cfg.cassette_mode);
    opt.cassette_path = cfg.cassette_path;
    opt.timeout_seconds = cfg.llm_timeout_seconds;
    opt.max_inflight = cfg.llm_max_inflight;
    return opt;
}

Hyperparams hyperparams(const RunConfig& cfg) {
    Hyperparams hp;
    hp.dims = cfg.mf_dims;
    hp.lr = cfg.mf_lr;
    hp.reg = cfg.mf_reg;
    hp.epochs = cfg.mf_epochs;
    return hp;
}

std::string csv_num(double v) { return format_fixed(v, 6); }

}  // namespace

void cmd_ingest(const RunConfig& cfg) {
    validate(cfg);
    for (const auto& input : cfg.inputs)
        if (!std::filesystem::exists(input))
            throw ConfigError("inputs", "file does not exist: " + input);
    if (!cfg.metadata_path.empty() && !std::filesystem::exists(cfg.metadata_path))
        throw ConfigError("metadata", "file does not exist: " + cfg.metadata_path);

    ParseStats stats;
    std::vector<std::pair<std::string, Dataset>> parts;
    for (const auto& input : cfg.inputs) {
        std::ifstream in(input);
        if (!in) throw IoError("cannot open " + input);
        Dataset part;
        part.interactions = parse_interactions(in, part_label(input), &stats);
        part.rebuild_index();
        parts.emplace_back(part_label(input), std::move(part));
    }
    if (!cfg.metadata_path.empty()) {
        std::ifstream in(cfg.metadata_path);
        if (!in) throw IoError("cannot open " + cfg.metadata_path);
        Dataset meta_part;
        meta_part.metadata = parse_metadata(in, &stats);
        parts.emplace_back("metadata", std::move(meta_part));
    }

    UnifyStats unify_stats;
    Dataset unified = unify_categories(parts, &unify_stats);
    Dataset filtered = filter_k_core(unified, cfg.min_interactions);
    if (filtered.interactions.empty())
        throw std::runtime_error("k-core filtering removed every interaction (min_interactions=" +
                                 std::to_string(cfg.min_interactions) + ")");
    SplitResult split = chronological_split(filtered, cfg.test_fraction);

    ArtifactPaths paths(cfg.out_dir);
    std::filesystem::create_directories(paths.out);
    write_atomic(paths.train(), serialize_interactions(split.train.interactions));
    write_atomic(paths.test(), serialize_interactions(split.test.interactions));
    write_atomic(paths.metadata(), serialize_metadata(filtered.metadata));

    json summary{{"users", filtered.by_user.size()},
                 {"interactions", filtered.interactions.size()},
                 {"train_interactions", split.train.interactions.size()},
                 {"test_interactions", split.test.interactions.size()},
                 {"parsed_lines", stats.parsed},
                 {"malformed_lines", stats.malformed},
                 {"ms_timestamps", stats.ms_timestamps},
                 {"duplicates_dropped", unify_stats.duplicates},
                 {"metadata_items", filtered.metadata.size()},
                 {"metadata_missing_interactions", filtered.metadata_missing_count()},
                 {"stable_order_users", split.stable_order_users}};
    write_atomic(paths.ingest_summary(), summary.dump(2) + "\n");

    std::cout << "ingest: " << filtered.by_user.size() << " users, "
              << filtered.interactions.size() << " interactions -> train "
              << split.train.interactions.size() << " / test " << split.test.interactions.size()
              << " (" << stats.malformed << " malformed, " << unify_stats.duplicates
              << " duplicates)" << std::endl;
}

void cmd_profile(const RunConfig& cfg) {
    validate(cfg);
    ArtifactPaths paths(cfg.out_dir);
    Dataset train = load_split(paths.train(), paths.metadata());

    const PriceQuintiles quintiles = PriceQuintiles::from_catalogue(train.metadata);
    const auto category_means = category_mean_ratings(train);
    const auto users = train.user_ids();

    std::vector<BehavioralSignature> signatures(users.size());
    std::vector<SampledHistory> histories(users.size());
    std::size_t sampled_total = 0;
    parallel_for(cfg.jobs, users.size(), [&](std::size_t i) {
        const auto records = train.user_records(users[i]);
        signatures[i] = build_signature(users[i], records, train.metadata, category_means,
                                        quintiles, cfg.cycles);
        histories[i] = temporal_stratified_sample(users[i], records, cfg.eta);
    });
    for (const auto& h : histories) sampled_total += h.total_records();

    std::string sig_lines, hist_lines;
    for (std::size_t i = 0; i < users.size(); ++i) {
        sig_lines += signature_to_json(signatures[i]).dump() + "\n";
        hist_lines += sampled_history_to_json(histories[i]).dump() + "\n";
    }
    write_atomic(paths.signatures(), sig_lines);
    write_atomic(paths.histories(), hist_lines);

    std::cout << "profile: " << users.size() << " signatures, " << sampled_total
              << " sampled interactions" << std::endl;
}

void cmd_infer(const RunConfig& cfg) {
    validate(cfg);
    ArtifactPaths paths(cfg.out_dir);
    Dataset train = load_split(paths.train(), paths.metadata());
    auto signatures = load_signatures(paths.signatures());
    auto histories = load_histories(paths.histories());
    if (signatures.size() != histories.size())
        throw std::runtime_error("signatures and histories artifacts disagree on user count");

    // Contexts (always emitted; the llm backend consumes them directly).
    std::vector<PromptContext> contexts(signatures.size());
    const std::string context_template = default_context_template();
    parallel_for(cfg.jobs, signatures.size(), [&](std::size_t i) {
        const auto stats = normalize_stats(signatures[i], signatures);
        contexts[i] = build_context(signatures[i].user_id, histories[i], train.metadata, stats,
                                    cfg.token_budget, context_template);
    });

    std::vector<PersonalityProfile> profiles(signatures.size());
    if (cfg.backend == "deterministic") {
        if (!std::filesystem::exists(cfg.lexicon_dir))
            throw ConfigError("lexicon_dir", "directory does not exist: " + cfg.lexicon_dir);
        const Lexicons lexicons = Lexicons::load(cfg.lexicon_dir);

        std::vector<TextFeatures> features(signatures.size());
        parallel_for(cfg.jobs, signatures.size(), [&](std::size_t i) {
            std::vector<std::string> texts;
            for (const auto* r : train.user_records(signatures[i].user_id))
                if (r->review_text && !r->review_text->empty()) texts.push_back(*r->review_text);
            features[i] = text_features(texts, lexicons);
        });

        std::vector<DeterministicInference::Entry> population(signatures.size());
        for (std::size_t i = 0; i < signatures.size(); ++i)
            population[i] = {&signatures[i], &features[i]};
        const DeterministicInference inference(population);
        parallel_for(cfg.jobs, signatures.size(), [&](std::size_t i) {
            profiles[i] = inference.infer(signatures[i].user_id, signatures[i], features[i]);
        });
    } else {
        LlmClient client(llm_options(cfg));
        LlmInferenceSettings settings;
        settings.model = cfg.llm_model;
        settings.system_prompt = default_persona_system_prompt();
        settings.temperature = cfg.llm_temperature;
        settings.max_tokens = cfg.llm_max_tokens;
        parallel_for(cfg.jobs, signatures.size(), [&](std::size_t i) {
            profiles[i] = infer_llm(contexts[i], client, settings);
        });
    }

    std::string context_lines, profile_lines;
    for (std::size_t i = 0; i < signatures.size(); ++i) {
        context_lines += prompt_context_to_json(contexts[i]).dump() + "\n";
        profile_lines += profile_to_json(profiles[i]).dump() + "\n";
    }
    write_atomic(paths.contexts(), context_lines);
    write_atomic(paths.personalities(), profile_lines);

    std::cout << "infer: " << profiles.size() << " profiles (" << cfg.backend << " backend)"
              << std::endl;
}

void cmd_simulate(const RunConfig& cfg) {
    validate(cfg);
    ArtifactPaths paths(cfg.out_dir);
    Dataset train = load_split(paths.train(), paths.metadata());
    Dataset test = load_split(paths.test(), paths.metadata());
    auto profiles = load_profiles(paths.personalities());

    Dataset full;
    full.metadata = train.metadata;
    full.interactions = train.interactions;
    full.interactions.insert(full.interactions.end(), test.interactions.begin(),
                             test.interactions.end());
    full.rebuild_index();

    const SimCatalogue catalogue = SimCatalogue::build(full, train.interactions);
    const Simulator simulator(catalogue, cfg.seed);

    std::vector<std::string> users;
    for (const auto& [user, indices] : test.by_user) users.push_back(user);

    std::optional<LlmClient> llm;
    LlmSelectionSettings llm_settings;
    const bool needs_llm = std::find(cfg.policies.begin(), cfg.policies.end(),
                                     "personality-llm") != cfg.policies.end();
    if (needs_llm) {
        llm.emplace(llm_options(cfg));
        llm_settings.model = cfg.llm_model;
        llm_settings.system_prompt = default_select_system_prompt();
        llm_settings.temperature = cfg.llm_temperature;
        llm_settings.max_tokens = cfg.llm_max_tokens;
    }

    std::size_t total_steps = 0;
    for (const auto& policy_name_str : cfg.policies) {
        const PolicyKind policy = policy_from_string(policy_name_str);
        std::vector<SyntheticSequence> sequences(users.size());
        parallel_for(cfg.jobs, users.size(), [&](std::size_t i) {
            const std::string& user = users[i];
            const auto train_u = materialize(train.user_records(user));
            const auto test_u = materialize(test.user_records(user));
            std::unordered_set<std::string> interacted;
            for (const auto* r : full.user_records(user)) interacted.insert(r->item_id);
            const PersonalityProfile* profile = nullptr;
            auto it = profiles.find(user);
            if (it != profiles.end()) profile = &it->second;
            sequences[i] = simulator.simulate_user(user, policy, train_u, test_u, interacted,
                                                   profile, llm ? &*llm : nullptr,
                                                   needs_llm ? &llm_settings : nullptr);
        });
        for (const auto& s : sequences) total_steps += s.selections.size();
        write_atomic(paths.synthetic(policy_name_str), serialize_sequences(sequences));
    }

    std::cout << "simulate: " << cfg.policies.size() << " policies x " << users.size()
              << " users, " << total_steps << " selections" << std::endl;
}

void cmd_evaluate(const RunConfig& cfg) {
    validate(cfg);
    ArtifactPaths paths(cfg.out_dir);
    Dataset train = load_split(paths.train(), paths.metadata());
    Dataset test = load_split(paths.test(), paths.metadata());
    auto profiles = load_profiles(paths.personalities());

    std::map<std::string, std::vector<SyntheticSequence>> synthetic;
    for (const auto& policy : cfg.policies) {
        auto in = open_artifact(paths.synthetic(policy));
        synthetic[policy] = parse_synthetic_log(in);
    }

    std::map<std::string, std::size_t> counts;
    for (const auto& [user, indices] : train.by_user) counts[user] += indices.size();
    for (const auto& [user, indices] : test.by_user) counts[user] += indices.size();
    const auto deciles = frequency_deciles(counts);

    std::map<std::string, std::set<std::string>> real_test_sets;
    for (const auto& [user, indices] : test.by_user)
        for (std::size_t idx : indices) real_test_sets[user].insert(test.interactions[idx].item_id);

    const Hyperparams hp = hyperparams(cfg);

    std::map<std::string, PolicyFidelity> fidelity;
    std::map<std::string, ComparisonReport> comparisons;
    for (const auto& policy : cfg.policies) {
        fidelity[policy] = compute_fidelity(policy, synthetic[policy], real_test_sets, deciles);
        comparisons[policy] = compare_real_synthetic(train, test, synthetic[policy],
                                                     cfg.algorithms, cfg.ndcg_k, hp, cfg.seed);
    }

    std::vector<PersonalityProfile> profile_list;
    for (const auto& [user, p] : profiles) profile_list.push_back(p);
    const auto traits = trait_distribution(profile_list);

    // Per-user real-side nDCG with the configured susceptibility algorithm.
    std::set<std::string> universe;
    for (const auto& r : train.interactions) universe.insert(r.item_id);
    for (const auto& r : test.interactions) universe.insert(r.item_id);
    for (const auto& [id, meta] : train.metadata) universe.insert(id);
    const std::vector<std::string> catalogue(universe.begin(), universe.end());
    const RecModel susceptibility_model =
        train_model(cfg.susceptibility_algorithm, train, catalogue, hp, cfg.seed);
    std::map<std::string, double> per_user_ndcg;
    for (const auto& [user, indices] : test.by_user) {
        std::unordered_set<std::string> exclude;
        auto it = train.by_user.find(user);
        if (it != train.by_user.end())
            for (std::size_t idx : it->second) exclude.insert(train.interactions[idx].item_id);
        std::unordered_set<std::string> relevant(real_test_sets[user].begin(),
                                                 real_test_sets[user].end());
        const auto ranked = recommend(susceptibility_model, user, exclude, cfg.ndcg_k);
        per_user_ndcg[user] = ndcg_at_k(ranked.items, relevant, cfg.ndcg_k);
    }
    const auto suscept = susceptibility(per_user_ndcg, profiles, cfg.susceptibility_algorithm);

    json report{{"schema_version", 1},
                {"seed", cfg.seed},
                {"ndcg_k", cfg.ndcg_k},
                {"backend", cfg.backend},
                {"dataset",
                 {{"users", counts.size()},
                  {"train_interactions", train.interactions.size()},
                  {"test_interactions", test.interactions.size()}}},
                {"trait_distribution", trait_distribution_to_json(traits)},
                {"susceptibility", susceptibility_to_json(suscept)}};
    json fidelity_json = json::array();
    for (const auto& [policy, f] : fidelity) fidelity_json.push_back(fidelity_to_json(f));
    report["fidelity"] = std::move(fidelity_json);
    json comparisons_json = json::object();
    for (const auto& [policy, c] : comparisons) comparisons_json[policy] = comparison_to_json(c);
    report["comparisons"] = std::move(comparisons_json);
    write_atomic(paths.report(), report.dump(2) + "\n");

    // Plot-ready CSV companions.
    {
        std::string csv = "policy,user_id,jaccard\n";
        for (const auto& [policy, f] : fidelity)
            for (const auto& [user, v] : f.per_user)
                csv += policy + "," + user + "," + csv_num(v) + "\n";
        write_atomic(paths.jaccard_by_user_csv(), csv);
    }
    {
        std::string csv = "policy,decile,mean_jaccard,users\n";
        for (const auto& [policy, f] : fidelity)
            for (std::size_t d = 0; d < 10; ++d)
                csv += policy + "," + std::to_string(d) + "," + csv_num(f.decile_mean[d]) + "," +
                       std::to_string(f.decile_count[d]) + "\n";
        write_atomic(paths.jaccard_by_decile_csv(), csv);
    }
    {
        std::string csv =
            "policy,algorithm,ndcg_real,ndcg_synthetic,rank_real,rank_synthetic,spearman\n";
        for (const auto& [policy, c] : comparisons) {
            const std::string rho = c.spearman ? csv_num(*c.spearman) : "";
            for (const auto& a : c.algorithms)
                csv += policy + "," + a.algorithm + "," + csv_num(a.ndcg_real) + "," +
                       csv_num(a.ndcg_synthetic) + "," + csv_num(a.rank_real) + "," +
                       csv_num(a.rank_synthetic) + "," + rho + "\n";
        }
        write_atomic(paths.algo_comparison_csv(), csv);
    }
    {
        std::string csv = "trait,mean";
        for (int b = 0; b < 10; ++b) csv += ",bin" + std::to_string(b);
        csv += "\n";
        for (const auto& [trait, s] : traits) {
            csv += trait + "," + csv_num(s.mean);
            for (const auto count : s.histogram) csv += "," + std::to_string(count);
            csv += "\n";
        }
        write_atomic(paths.trait_distribution_csv(), csv);
    }
    {
        std::string csv = "algorithm,trait,top_mean,bottom_mean,difference,cohort_size\n";
        for (const auto& [trait, row] : suscept.traits)
            csv += suscept.algorithm + "," + trait + "," + csv_num(row.top_mean) + "," +
                   csv_num(row.bottom_mean) + "," + csv_num(row.difference) + "," +
                   std::to_string(suscept.cohort_size) + "\n";
        write_atomic(paths.susceptibility_csv(), csv);
    }

    std::ostringstream line;
    line << "evaluate: report " << paths.report().string();
    for (const auto& [policy, f] : fidelity)
        line << " | " << policy << " J=" << format_fixed(f.mean, 3);
    std::cout << line.str() << std::endl;
}

void cmd_run_all(const RunConfig& cfg) {
    cmd_ingest(cfg);
    cmd_profile(cfg);
    cmd_infer(cfg);
    cmd_simulate(cfg);
    cmd_evaluate(cfg);
}

}  // namespace pub
