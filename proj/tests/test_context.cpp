#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pub/context.hpp"
#include "pub/io.hpp"

using namespace pub;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

InteractionRecord rec(std::int64_t ts, const std::string& item, const std::string& cat,
                      double rating = 4.0) {
    InteractionRecord r;
    r.user_id = "u";
    r.item_id = item;
    r.timestamp = ts;
    r.rating = rating;
    r.category = cat;
    return r;
}

SampledHistory history_of(const std::vector<InteractionRecord>& recs) {
    SampledHistory h;
    h.user_id = "u";
    SampledBin bin;
    bin.window_start = 0;
    bin.window_end = 1;
    bin.records = recs;
    h.bins.push_back(std::move(bin));
    return h;
}

BehavioralSignature sig(const std::string& id, double entropy, std::size_t count) {
    BehavioralSignature s;
    s.user_id = id;
    s.purchase_count = count;
    s.span_days = 100.0;
    s.purchase_frequency = static_cast<double>(count) / 100.0 * 30.0;
    s.category_entropy = entropy;
    s.rhythm["week"] = Rhythm{0.5, 0.0};
    return s;
}

}  // namespace

TEST_CASE("midpoint_percentile averages tied ranks") {
    std::vector<double> pop = {1, 2, 3, 4};
    CHECK(midpoint_percentile(2.0, pop) == doctest::Approx(37.5));
    CHECK(midpoint_percentile(2.5, pop) == doctest::Approx(50.0));
    CHECK(midpoint_percentile(0.0, pop) == doctest::Approx(0.0));
    CHECK(midpoint_percentile(9.0, pop) == doctest::Approx(100.0));

    std::vector<double> ties = {5, 5, 5, 5};
    CHECK(midpoint_percentile(5.0, ties) == doctest::Approx(50.0));

    std::vector<double> empty;
    CHECK(midpoint_percentile(3.0, empty) == 50.0);
}

TEST_CASE("percentile_band cut points") {
    CHECK(percentile_band(0.0) == "very low");
    CHECK(percentile_band(9.99) == "very low");
    CHECK(percentile_band(10.0) == "low");
    CHECK(percentile_band(34.9) == "low");
    CHECK(percentile_band(35.0) == "medium");
    CHECK(percentile_band(64.9) == "medium");
    CHECK(percentile_band(65.0) == "high");
    CHECK(percentile_band(89.9) == "high");
    CHECK(percentile_band(90.0) == "very high");
    CHECK(percentile_band(100.0) == "very high");
}

TEST_CASE("scalar_features omits absent optionals") {
    BehavioralSignature s = sig("u1", 1.5, 10);  // no interval entropy, no review stats
    auto feats = scalar_features(s);
    bool has_interval = false, has_review_mean = false, has_entropy = false;
    for (const auto& [name, value] : feats) {
        if (name == "interval_entropy") has_interval = value.has_value();
        if (name == "review_length_mean") has_review_mean = value.has_value();
        if (name == "category_entropy") has_entropy = value.has_value();
    }
    CHECK_FALSE(has_interval);
    CHECK_FALSE(has_review_mean);
    CHECK(has_entropy);
}

TEST_CASE("normalize_stats with a population of one pins every percentile at 50") {
    BehavioralSignature s = sig("only", 2.0, 5);
    NormalizedStats ns = normalize_stats(s, {s});
    REQUIRE_FALSE(ns.entries.empty());
    for (const auto& e : ns.entries) {
        CHECK(e.percentile == doctest::Approx(50.0));
        CHECK(e.band == "medium");
    }
}

TEST_CASE("normalize_stats ranks within the population") {
    BehavioralSignature lo = sig("lo", 0.5, 2);
    BehavioralSignature mid = sig("mid", 1.0, 5);
    BehavioralSignature hi = sig("hi", 2.0, 9);
    NormalizedStats ns = normalize_stats(hi, {lo, mid, hi});
    for (const auto& e : ns.entries) {
        if (e.name == "category_entropy" || e.name == "purchase_count") {
            CHECK(e.percentile == doctest::Approx(100.0 * (3.0 - 0.5) / 3.0));
            CHECK(e.band == "high");
        }
        if (e.name == "span_days") CHECK(e.percentile == doctest::Approx(50.0));  // all tied
    }
    CHECK_THROWS_AS(normalize_stats(hi, {}), std::invalid_argument);
}

TEST_CASE("build_context renders stats, metadata and reviews inside the budget") {
    std::vector<InteractionRecord> recs = {rec(1700000000, "I1", "books", 4.5),
                                           rec(1700100000, "MISSING", "toys", 2.0)};
    recs[0].review_text = "a sweeping epic that rewards patience";
    std::unordered_map<std::string, ItemMetadata> md;
    ItemMetadata m;
    m.item_id = "I1";
    m.title = "The Long Novel";
    m.description = "six hundred pages of family history";
    m.price = 19.99;
    md["I1"] = m;

    BehavioralSignature s = sig("u", 1.0, 2);
    NormalizedStats ns = normalize_stats(s, {s});
    PromptContext ctx = build_context("u", history_of(recs), md, ns, 10000,
                                      default_context_template());
    CHECK(ctx.user_id == "u");
    CHECK(ctx.items_rendered == 2);
    CHECK(ctx.items_dropped == 0);
    CHECK(ctx.token_count <= ctx.token_budget);
    CHECK(ctx.text.find("Shopper profile for u") != std::string::npos);
    CHECK(ctx.text.find("The Long Novel") != std::string::npos);
    CHECK(ctx.text.find("$19.99") != std::string::npos);
    CHECK(ctx.text.find("six hundred pages") != std::string::npos);
    CHECK(ctx.text.find("a sweeping epic") != std::string::npos);
    CHECK(ctx.text.find("(no catalogue entry)") != std::string::npos);  // the MISSING item
    CHECK(ctx.text.find("category_entropy") != std::string::npos);
    // Token accounting matches the whitespace tokenizer.
    CHECK(ctx.token_count == count_tokens(ctx.text));
}

TEST_CASE("build_context truncates descriptions before touching reviews") {
    std::string long_desc, review;
    for (int i = 0; i < 60; ++i) long_desc += "desctoken" + std::to_string(i) + " ";
    for (int i = 0; i < 10; ++i) review += "reviewtoken" + std::to_string(i) + " ";
    std::vector<InteractionRecord> recs = {rec(1700000000, "I1", "books")};
    recs[0].review_text = review;
    std::unordered_map<std::string, ItemMetadata> md;
    ItemMetadata m;
    m.item_id = "I1";
    m.title = "Wordy";
    m.description = long_desc;
    md["I1"] = m;
    BehavioralSignature s = sig("u", 1.0, 1);
    NormalizedStats ns = normalize_stats(s, {s});

    PromptContext full = build_context("u", history_of(recs), md, ns, 100000,
                                       default_context_template());
    REQUIRE(full.token_count > 60);

    // One token under the full render forces the first reduction step: the
    // description shrinks to 12 tokens, the review survives whole.
    PromptContext reduced = build_context("u", history_of(recs), md, ns, full.token_count - 1,
                                          default_context_template());
    CHECK(reduced.items_dropped == 0);
    CHECK(reduced.text.find("desctoken0") != std::string::npos);
    CHECK(reduced.text.find("desctoken11...") != std::string::npos);
    CHECK(reduced.text.find("desctoken12") == std::string::npos);
    CHECK(reduced.text.find("reviewtoken9") != std::string::npos);
}

TEST_CASE("build_context drops oldest items last and errors below the stats floor") {
    std::vector<InteractionRecord> recs;
    for (int i = 0; i < 5; ++i) {
        auto r = rec(1700000000 + i * 86400, "I" + std::to_string(i), "books");
        r.review_text = "routine purchase as always fine";
        recs.push_back(r);
    }
    std::unordered_map<std::string, ItemMetadata> md;
    BehavioralSignature s = sig("u", 1.0, 5);
    NormalizedStats ns = normalize_stats(s, {s});
    const std::string tmpl = default_context_template();

    PromptContext full = build_context("u", history_of(recs), md, ns, 100000, tmpl);
    CHECK(full.items_rendered == 5);

    // Sweep the budget downward: the result must always respect the budget,
    // drop older items before newer ones, and only fail below the stats floor.
    std::size_t min_ok_budget = 0;
    std::size_t last_rendered = 5;
    for (std::size_t budget = full.token_count; budget > 0; --budget) {
        try {
            PromptContext c = build_context("u", history_of(recs), md, ns, budget, tmpl);
            CHECK(c.token_count <= budget);
            CHECK(c.items_rendered + c.items_dropped == 5);
            CHECK(c.items_rendered <= last_rendered + 0);  // monotone in shrinking budget
            last_rendered = c.items_rendered;
            if (c.items_dropped > 0) {
                // The newest item always survives while anything is rendered.
                if (c.items_rendered > 0) CHECK(c.text.find("I4") != std::string::npos);
                CHECK(c.text.find("I0") == std::string::npos);
            }
            min_ok_budget = budget;
        } catch (const BudgetError&) {
            break;
        }
    }
    REQUIRE(min_ok_budget > 0);
    // Below the floor, every smaller budget must throw too.
    CHECK_THROWS_AS(build_context("u", history_of(recs), md, ns, min_ok_budget - 1, tmpl),
                    BudgetError);
    CHECK_THROWS_AS(build_context("u", history_of(recs), md, ns, 1, tmpl), BudgetError);
}

TEST_CASE("custom templates substitute every placeholder occurrence") {
    std::vector<InteractionRecord> recs = {rec(1700000000, "I1", "books")};
    std::unordered_map<std::string, ItemMetadata> md;
    BehavioralSignature s = sig("u_42", 1.0, 1);
    NormalizedStats ns = normalize_stats(s, {s});
    PromptContext ctx = build_context("u_42", history_of(recs), md, ns, 10000,
                                      "{{user_id}} and again {{user_id}}\n{{stats}}{{items}}");
    CHECK(ctx.text.find("u_42 and again u_42") != std::string::npos);
}

TEST_CASE("prompt contexts round-trip through JSON") {
    PromptContext c;
    c.user_id = "u7";
    c.text = "hello\nworld";
    c.token_count = 2;
    c.token_budget = 100;
    c.items_rendered = 3;
    c.items_dropped = 1;
    PromptContext back = prompt_context_from_json(prompt_context_to_json(c));
    CHECK(back.user_id == c.user_id);
    CHECK(back.text == c.text);
    CHECK(back.token_count == c.token_count);
    CHECK(back.token_budget == c.token_budget);
    CHECK(back.items_rendered == c.items_rendered);
    CHECK(back.items_dropped == c.items_dropped);
}

TEST_CASE("the shipped template asset matches the built-in default") {
    CHECK(slurp(PUB_SOURCE_DIR "/assets/prompts/context_template.txt") ==
          default_context_template());
}
