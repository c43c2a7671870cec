#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "pub/config.hpp"
#include "pub/io.hpp"
#include "pub/llmclient.hpp"
#include "pub/pipeline.hpp"

namespace {

// All options live on the main app; subcommands are bare verbs with
// fallthrough so `pub <verb> --flag` works. CLI11 only processes a config
// file on the app parse() runs on, so set_config must sit here too.
void add_common_options(CLI::App* cmd, pub::RunConfig& cfg) {
    cmd->set_config("--config", "", "TOML-style config file; flags override file values");

    cmd->add_option("--inputs", cfg.inputs, "Interaction JSONL files (one per category part)")
        ->delimiter(',');
    cmd->add_option("--metadata", cfg.metadata_path, "Item metadata JSONL file")
        ->capture_default_str();
    cmd->add_option("--out", cfg.out_dir, "Output directory for artifacts")
        ->capture_default_str();
    cmd->add_option("--min-interactions", cfg.min_interactions, "k-core threshold")
        ->capture_default_str();
    cmd->add_option("--test-fraction", cfg.test_fraction, "Chronological test fraction per user")
        ->capture_default_str();
    cmd->add_option("--eta", cfg.eta, "Samples kept per adaptive time window")
        ->capture_default_str();
    cmd->add_option("--cycles", cfg.cycles, "Rhythm cycle lengths in days")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--token-budget", cfg.token_budget, "Context document token budget")
        ->capture_default_str();
    cmd->add_option("--backend", cfg.backend, "Persona backend: deterministic | llm")
        ->capture_default_str();
    cmd->add_option("--lexicon-dir", cfg.lexicon_dir, "Directory with the bundled word lists")
        ->capture_default_str();
    cmd->add_option("--llm-base-url", cfg.llm_base_url,
                    "OpenAI-compatible endpoint base URL (e.g. http://host:port/v1)");
    cmd->add_option("--llm-model", cfg.llm_model, "Model name sent to the endpoint")
        ->capture_default_str();
    cmd->add_option("--cassette-mode", cfg.cassette_mode, "LLM cassette mode: live|record|replay")
        ->capture_default_str();
    cmd->add_option("--cassette-path", cfg.cassette_path, "Cassette JSONL path")
        ->capture_default_str();
    cmd->add_option("--llm-temperature", cfg.llm_temperature, "Sampling temperature")
        ->capture_default_str();
    cmd->add_option("--llm-max-tokens", cfg.llm_max_tokens, "Max output tokens per request")
        ->capture_default_str();
    cmd->add_option("--llm-timeout", cfg.llm_timeout_seconds, "Per-request timeout (seconds)")
        ->capture_default_str();
    cmd->add_option("--llm-max-inflight", cfg.llm_max_inflight, "Max concurrent LLM requests")
        ->capture_default_str();
    cmd->add_option("--policies", cfg.policies, "Agent policies to simulate")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_flag("--allow-oracle", cfg.allow_oracle,
                  "Permit the oracle policy (test harness only)");
    cmd->add_option("--algorithms", cfg.algorithms, "Recommenders for the RQ2 comparison")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--ndcg-k", cfg.ndcg_k, "Cutoff for nDCG@k")->capture_default_str();
    cmd->add_option("--susceptibility-algorithm", cfg.susceptibility_algorithm,
                    "Algorithm whose per-user nDCG feeds the susceptibility analysis")
        ->capture_default_str();
    cmd->add_option("--mf-dims", cfg.mf_dims, "Latent dimensions for mf/bpr")
        ->capture_default_str();
    cmd->add_option("--mf-lr", cfg.mf_lr, "Learning rate for mf/bpr")->capture_default_str();
    cmd->add_option("--mf-reg", cfg.mf_reg, "L2 regularisation for mf/bpr")
        ->capture_default_str();
    cmd->add_option("--mf-epochs", cfg.mf_epochs, "Training epochs for mf/bpr")
        ->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "Global 64-bit seed")->capture_default_str();
    cmd->add_option("--jobs", cfg.jobs, "Worker threads for per-user stages")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pub: personality-driven user-behaviour simulation and evaluation"};
    app.require_subcommand(1);

    pub::RunConfig cfg;
    std::map<std::string, std::function<void(const pub::RunConfig&)>> dispatch = {
        {"ingest", pub::cmd_ingest},     {"profile", pub::cmd_profile},
        {"infer", pub::cmd_infer},       {"simulate", pub::cmd_simulate},
        {"evaluate", pub::cmd_evaluate}, {"run-all", pub::cmd_run_all},
    };
    static const std::map<std::string, std::string> kDescriptions = {
        {"ingest", "Parse, unify, k-core filter and chronologically split the review logs"},
        {"profile", "Compute behavioural signatures and temporally stratified histories"},
        {"infer", "Build prompt contexts and infer Big Five profiles"},
        {"simulate", "Run the proxy-recommender simulation loop for each policy"},
        {"evaluate", "Produce fidelity, comparison, trait and susceptibility reports"},
        {"run-all", "Run ingest -> profile -> infer -> simulate -> evaluate"},
    };
    add_common_options(&app, cfg);
    for (const auto& [name, fn] : dispatch)
        app.add_subcommand(name, kDescriptions.at(name))->fallthrough();

    CLI11_PARSE(app, argc, argv);

    const std::string chosen = app.get_subcommands().front()->get_name();
    try {
        dispatch.at(chosen)(cfg);
    } catch (const pub::ConfigError& e) {
        std::cerr << e.what() << std::endl;
        return 1;
    } catch (const pub::MissingArtifactError& e) {
        std::cerr << e.what() << " (run the upstream stage first)" << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    }
    return 0;
}
