#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pub/io.hpp"

namespace fs = std::filesystem;
using pub::json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Runs the CLI with the repository root as the working directory (the toy
/// config uses paths relative to it).
CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() / "pub_test_cli";
    fs::create_directories(dir);
    const fs::path out_file = dir / ("stdout" + std::to_string(counter) + ".txt");
    const fs::path err_file = dir / ("stderr" + std::to_string(counter) + ".txt");
    ++counter;

    const std::string cmd = "cd '" PUB_SOURCE_DIR "' && '" PUB_CLI_PATH "' " + args + " > '" +
                            out_file.string() + "' 2> '" + err_file.string() + "'";
    const int status = std::system(cmd.c_str());

    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

fs::path fresh_out_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "pub_test_cli" / name;
    fs::remove_all(dir);
    return dir;
}

const std::string kToyConfig = "--config data/toy/config.toml";

}  // namespace

TEST_CASE("--help exits 0 and lists the pipeline verbs") {
    CliResult r = run_cli("--help");
    CHECK(r.exit_code == 0);
    for (const char* verb : {"ingest", "profile", "infer", "simulate", "evaluate", "run-all"})
        CHECK(r.out.find(verb) != std::string::npos);
}

TEST_CASE("a missing subcommand is a usage error") {
    CliResult r = run_cli("--seed 1");
    CHECK(r.exit_code != 0);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("config validation failures exit 1 naming the field") {
    const fs::path out = fresh_out_dir("badcfg");
    CliResult r = run_cli("run-all " + kToyConfig + " --out " + out.string() +
                          " --test-fraction 1.5");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("config error: test_fraction") != std::string::npos);

    // Nonexistent input files are caught up front by validation, not at
    // stage runtime.
    CliResult missing = run_cli("ingest --inputs no/such/reviews_x.jsonl"
                                " --metadata no/such/meta.jsonl --out " + out.string());
    CHECK(missing.exit_code == 1);
    CHECK(missing.err.find("config error: inputs") != std::string::npos);

    SUBCASE("the oracle policy is gated behind --allow-oracle") {
        CliResult gated = run_cli("run-all " + kToyConfig + " --out " + out.string() +
                                  " --policies oracle");
        CHECK(gated.exit_code == 1);
        CHECK(gated.err.find("allow_oracle") != std::string::npos);

        // With the flag, validation passes; the empty out dir now surfaces as
        // a missing artifact from the evaluate stage instead.
        CliResult allowed = run_cli("evaluate " + kToyConfig + " --out " + out.string() +
                                    " --policies oracle --allow-oracle");
        CHECK(allowed.exit_code == 2);
    }
}

TEST_CASE("running a stage before its inputs exist exits 2") {
    const fs::path out = fresh_out_dir("noartifacts");
    CliResult r = run_cli("profile " + kToyConfig + " --out " + out.string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("missing artifact") != std::string::npos);
    CHECK(r.err.find("(run the upstream stage first)") != std::string::npos);
}

TEST_CASE("runtime failures exit 3 with an error prefix") {
    // An out dir nested under a regular file cannot be created; the
    // filesystem error surfaces as a generic runtime failure.
    const fs::path blocker = fresh_out_dir("badout") / "blocker";
    std::ofstream(blocker) << "";
    CliResult r = run_cli("ingest " + kToyConfig + " --out " + (blocker / "sub").string());
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("error: ") != std::string::npos);

    // So does a k-core threshold that removes every interaction.
    const fs::path out = fresh_out_dir("kcorecollapse");
    CliResult collapsed = run_cli("ingest " + kToyConfig + " --out " + out.string() +
                                  " --min-interactions 1000");
    CHECK(collapsed.exit_code == 3);
    CHECK(collapsed.err.find("error: ") != std::string::npos);
    CHECK(collapsed.err.find("k-core") != std::string::npos);
}

TEST_CASE("run-all on the bundled corpus produces the full artifact set") {
    const fs::path out = fresh_out_dir("full");
    CliResult r = run_cli("run-all " + kToyConfig + " --out " + out.string());
    REQUIRE(r.exit_code == 0);
    // One status line per stage.
    for (const char* stage : {"ingest:", "profile:", "infer:", "simulate:", "evaluate:"})
        CHECK(r.out.find(stage) != std::string::npos);

    for (const char* name :
         {"dataset_train.jsonl", "dataset_test.jsonl", "metadata.jsonl", "ingest_summary.json",
          "signatures.jsonl", "sampled_histories.jsonl", "contexts.jsonl", "personalities.jsonl",
          "synthetic_personality-deterministic.jsonl", "synthetic_random.jsonl",
          "synthetic_markov.jsonl", "synthetic_ablation-random-personality.jsonl", "report.json",
          "jaccard_by_user.csv", "jaccard_by_decile.csv", "algo_comparison.csv",
          "trait_distribution.csv", "susceptibility.csv"})
        CHECK(fs::exists(out / name));

    const json summary = json::parse(slurp(out / "ingest_summary.json"));
    CHECK(summary["users"] == 50);
    CHECK(summary["interactions"] == 2061);
    CHECK(summary["malformed_lines"] == 4);
    CHECK(summary["duplicates_dropped"] == 1);

    const json report = json::parse(slurp(out / "report.json"));
    CHECK(report["schema_version"] == 1);
    CHECK(report["seed"] == 42);
    CHECK(report["ndcg_k"] == 10);
    CHECK(report["backend"] == "deterministic");
    CHECK(report["dataset"]["users"] == 50);
    CHECK(report["fidelity"].size() == 4);
    CHECK(report["comparisons"].size() == 4);
    for (const auto& [policy, cmp] : report["comparisons"].items()) {
        CHECK(cmp["algorithms"].size() == 4);
        CHECK(cmp["spearman"].is_number());
    }
    CHECK(report["trait_distribution"].size() == 5);
    CHECK(report["susceptibility"]["traits"].size() == 5);

    SUBCASE("signature and context golden files for u_regular") {
        std::ifstream sigs(out / "signatures.jsonl");
        json got;
        std::string line;
        while (std::getline(sigs, line)) {
            json j = json::parse(line);
            if (j["user_id"] == "u_regular") {
                got = std::move(j);
                break;
            }
        }
        REQUIRE_FALSE(got.is_null());
        const json want =
            json::parse(slurp(fs::path(PUB_SOURCE_DIR) / "tests/golden/u_regular_signature.json"));
        CHECK(got == want);

        std::ifstream ctxs(out / "contexts.jsonl");
        std::string text;
        while (std::getline(ctxs, line)) {
            json j = json::parse(line);
            if (j["user_id"] == "u_regular") {
                text = j["text"].get<std::string>();
                break;
            }
        }
        const std::string want_text =
            slurp(fs::path(PUB_SOURCE_DIR) / "tests/golden/u_regular_context.txt");
        CHECK(text == want_text);
    }

    SUBCASE("a second run with --jobs 8 is byte-identical") {
        const fs::path out2 = fresh_out_dir("full_jobs8");
        CliResult r2 = run_cli("run-all " + kToyConfig + " --out " + out2.string() + " --jobs 8");
        REQUIRE(r2.exit_code == 0);
        for (const char* name : {"report.json", "signatures.jsonl", "contexts.jsonl",
                                 "personalities.jsonl", "synthetic_personality-deterministic.jsonl",
                                 "jaccard_by_decile.csv"})
            CHECK(slurp(out / name) == slurp(out2 / name));
    }
}

TEST_CASE("command-line flags override config-file values") {
    const fs::path out = fresh_out_dir("override");
    // config.toml says min-interactions = 8 (keeps all 50 users); the flag
    // tightens the k-core and must win.
    CliResult r = run_cli("ingest " + kToyConfig + " --out " + out.string() +
                          " --min-interactions 12");
    REQUIRE(r.exit_code == 0);
    const json summary = json::parse(slurp(out / "ingest_summary.json"));
    CHECK(summary["users"] < 50);
    CHECK(summary["users"] > 0);
}

TEST_CASE("stages can be run one at a time in order") {
    const fs::path out = fresh_out_dir("staged");
    CHECK(run_cli("ingest " + kToyConfig + " --out " + out.string()).exit_code == 0);
    CHECK(run_cli("profile " + kToyConfig + " --out " + out.string()).exit_code == 0);
    CHECK(run_cli("infer " + kToyConfig + " --out " + out.string()).exit_code == 0);
    CHECK(run_cli("simulate " + kToyConfig + " --out " + out.string()).exit_code == 0);
    CHECK(run_cli("evaluate " + kToyConfig + " --out " + out.string()).exit_code == 0);
    CHECK(fs::exists(out / "report.json"));
}
