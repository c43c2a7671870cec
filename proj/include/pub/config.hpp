#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pub {

struct ConfigError : std::runtime_error {
    ConfigError(std::string field_name, const std::string& message)
        : std::runtime_error("config error: " + field_name + ": " + message),
          field(std::move(field_name)) {}
    std::string field;
};

/// One run configuration shared by every subcommand. File values load via the
/// CLI config parser; flags override file values.
struct RunConfig {
    // dataset
    std::vector<std::string> inputs;  // interaction JSONL parts
    std::string metadata_path;
    std::string out_dir = "out";

    // ingest
    std::size_t min_interactions = 20;
    double test_fraction = 0.2;

    // profile
    std::size_t eta = 5;            // per-window sample budget
    std::vector<int> cycles = {7, 365};

    // context
    std::size_t token_budget = 3000;

    // persona
    std::string backend = "deterministic";  // deterministic | llm
    std::string lexicon_dir = "assets/lexicons";
    std::string llm_base_url;
    std::string llm_model = "default";
    std::string cassette_mode = "replay";  // live | record | replay
    std::string cassette_path = "cassettes/run.jsonl";
    double llm_temperature = 0.0;
    int llm_max_tokens = 256;
    int llm_timeout_seconds = 60;
    int llm_max_inflight = 4;

    // simulate
    std::vector<std::string> policies = {"personality-deterministic", "random", "markov",
                                         "ablation-random-personality"};
    bool allow_oracle = false;  // the oracle policy is a test-harness upper bound

    // evaluate
    std::vector<std::string> algorithms = {"pop", "mf", "bpr", "markov-seq"};
    std::size_t ndcg_k = 20;
    std::string susceptibility_algorithm = "markov-seq";
    int mf_dims = 32;
    double mf_lr = 0.01;
    double mf_reg = 0.02;
    int mf_epochs = 30;

    std::uint64_t seed = 42;
    int jobs = 1;
};

/// Throws ConfigError naming the offending field.
void validate(const RunConfig& cfg);

/// Part label for an interactions file: the stem minus a "reviews_" prefix
/// ("data/toy/reviews_books.jsonl" -> "books").
std::string part_label(const std::string& path);

}  // namespace pub
