#include "pub/config.hpp"

#include <filesystem>
#include <set>

namespace pub {

void validate(const RunConfig& cfg) {
    if (cfg.inputs.empty()) throw ConfigError("inputs", "at least one interactions file required");
    if (cfg.out_dir.empty()) throw ConfigError("out", "output directory must be set");
    if (cfg.min_interactions < 2)
        throw ConfigError("min_interactions", "must be >= 2 so every user can be split");
    if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0))
        throw ConfigError("test_fraction", "must lie strictly between 0 and 1");
    if (cfg.eta < 1) throw ConfigError("eta", "must be >= 1");
    if (cfg.cycles.empty()) throw ConfigError("cycles", "at least one rhythm cycle required");
    for (int c : cfg.cycles)
        if (c < 1) throw ConfigError("cycles", "cycle lengths must be positive days");
    if (cfg.token_budget < 1) throw ConfigError("token_budget", "must be >= 1");
    if (cfg.backend != "deterministic" && cfg.backend != "llm")
        throw ConfigError("backend", "must be 'deterministic' or 'llm': " + cfg.backend);
    if (cfg.cassette_mode != "live" && cfg.cassette_mode != "record" &&
        cfg.cassette_mode != "replay")
        throw ConfigError("cassette_mode", "must be live, record or replay: " + cfg.cassette_mode);
    if (cfg.backend == "llm" && cfg.cassette_mode != "replay" && cfg.llm_base_url.empty())
        throw ConfigError("llm_base_url", "required for the llm backend outside replay mode");
    if (cfg.policies.empty()) throw ConfigError("policies", "at least one policy required");
    static const std::set<std::string> kPolicies = {
        "personality-deterministic", "personality-llm",           "random",
        "markov",                    "ablation-random-personality", "oracle"};
    for (const auto& p : cfg.policies) {
        if (!kPolicies.count(p)) throw ConfigError("policies", "unknown policy: " + p);
        if (p == "oracle" && !cfg.allow_oracle)
            throw ConfigError("policies",
                              "the oracle policy is test-harness only; set allow_oracle=true");
    }
    if (cfg.algorithms.empty()) throw ConfigError("algorithms", "at least one algorithm required");
    static const std::set<std::string> kAlgorithms = {"pop", "mf", "bpr", "markov-seq"};
    for (const auto& a : cfg.algorithms)
        if (!kAlgorithms.count(a)) throw ConfigError("algorithms", "unknown algorithm: " + a);
    if (!kAlgorithms.count(cfg.susceptibility_algorithm))
        throw ConfigError("susceptibility_algorithm",
                          "unknown algorithm: " + cfg.susceptibility_algorithm);
    if (cfg.ndcg_k < 1) throw ConfigError("ndcg_k", "must be >= 1");
    if (cfg.mf_dims < 1) throw ConfigError("mf_dims", "must be >= 1");
    if (cfg.mf_lr <= 0.0) throw ConfigError("mf_lr", "must be positive");
    if (cfg.mf_reg < 0.0) throw ConfigError("mf_reg", "must be non-negative");
    if (cfg.mf_epochs < 1) throw ConfigError("mf_epochs", "must be >= 1");
    if (cfg.jobs < 1) throw ConfigError("jobs", "must be >= 1");
    if (cfg.llm_max_inflight < 1) throw ConfigError("llm_max_inflight", "must be >= 1");
    if (cfg.llm_timeout_seconds < 1) throw ConfigError("llm_timeout_seconds", "must be >= 1");
    if (cfg.llm_max_tokens < 1) throw ConfigError("llm_max_tokens", "must be >= 1");
    if (cfg.llm_temperature < 0.0) throw ConfigError("llm_temperature", "must be >= 0");
}

std::string part_label(const std::string& path) {
    std::string stem = std::filesystem::path(path).stem().string();
    constexpr const char* kPrefix = "reviews_";
    if (stem.rfind(kPrefix, 0) == 0) stem = stem.substr(std::string(kPrefix).size());
    return stem.empty() ? "unknown" : stem;
}

}  // namespace pub
