#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "pub/config.hpp"

namespace pub {

struct MissingArtifactError : std::runtime_error {
    explicit MissingArtifactError(const std::filesystem::path& p)
        : std::runtime_error("missing artifact: " + p.string()), path(p) {}
    std::filesystem::path path;
};

struct ArtifactPaths {
    std::filesystem::path out;

    explicit ArtifactPaths(const std::string& out_dir) : out(out_dir) {}

    std::filesystem::path train() const { return out / "dataset_train.jsonl"; }
    std::filesystem::path test() const { return out / "dataset_test.jsonl"; }
    std::filesystem::path metadata() const { return out / "metadata.jsonl"; }
    std::filesystem::path ingest_summary() const { return out / "ingest_summary.json"; }
    std::filesystem::path signatures() const { return out / "signatures.jsonl"; }
    std::filesystem::path histories() const { return out / "sampled_histories.jsonl"; }
    std::filesystem::path contexts() const { return out / "contexts.jsonl"; }
    std::filesystem::path personalities() const { return out / "personalities.jsonl"; }
    std::filesystem::path synthetic(const std::string& policy) const {
        return out / ("synthetic_" + policy + ".jsonl");
    }
    std::filesystem::path report() const { return out / "report.json"; }
    std::filesystem::path jaccard_by_user_csv() const { return out / "jaccard_by_user.csv"; }
    std::filesystem::path jaccard_by_decile_csv() const { return out / "jaccard_by_decile.csv"; }
    std::filesystem::path algo_comparison_csv() const { return out / "algo_comparison.csv"; }
    std::filesystem::path trait_distribution_csv() const {
        return out / "trait_distribution.csv";
    }
    std::filesystem::path susceptibility_csv() const { return out / "susceptibility.csv"; }
};

/// Each stage validates the config, loads upstream artifacts (throwing
/// MissingArtifactError when absent), writes its outputs atomically, and
/// prints a one-line summary. Unexpected failures propagate as exceptions.
void cmd_ingest(const RunConfig& cfg);
void cmd_profile(const RunConfig& cfg);
void cmd_infer(const RunConfig& cfg);
void cmd_simulate(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_run_all(const RunConfig& cfg);

}  // namespace pub
