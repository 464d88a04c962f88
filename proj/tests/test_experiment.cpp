#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ccmis/experiment.hpp"

using namespace ccmis;
namespace fs = std::filesystem;

namespace {

experiment_spec small_spec() {
    experiment_spec spec;
    spec.family = "gnp";
    spec.n = 96;
    spec.p = 0.15;
    spec.seeds = {1, 2, 3, 4};
    spec.threshold = degree_threshold::fixed(4);
    return spec;
}

}  // namespace

TEST_CASE("an empty seed list yields an empty, passing report") {
    experiment_spec spec = small_spec();
    spec.seeds.clear();
    const report rep = run_suite(spec);
    CHECK(rep.runs.empty());
    CHECK(rep.aggregate.runs == 0);
    CHECK_FALSE(rep.hard_failure);
}

TEST_CASE("a small gnp suite passes every check") {
    const report rep = run_suite(small_spec());
    REQUIRE(rep.runs.size() == 4);
    CHECK_FALSE(rep.hard_failure);
    CHECK(rep.aggregate.verify_failures == 0);
    CHECK(rep.aggregate.equivalence_failures == 0);
    CHECK(rep.aggregate.rounds_mismatches == 0);
    CHECK(rep.aggregate.sparsity_violations == 0);
    CHECK(rep.aggregate.decay_violations == 0);
    for (const run_record& r : rep.runs) {
        CHECK_FALSE(r.aborted);
        CHECK(r.verify_ok);
        CHECK(r.mis_size > 0);
        CHECK(r.stats.total_rounds == r.stats.formula_rounds);
    }
}

TEST_CASE("suite runs are reproducible byte for byte") {
    const report a = run_suite(small_spec());
    const report b = run_suite(small_spec());
    CHECK(report_to_json(a).dump() == report_to_json(b).dump());
    CHECK(a.config_hash == b.config_hash);
}

TEST_CASE("spec JSON round trips through its schema") {
    experiment_spec spec = small_spec();
    spec.suites = {suite_kind::sparsity, suite_kind::rounds};
    spec.out_dir = "somewhere";
    const experiment_spec back = spec_from_json(spec_to_json(spec));
    CHECK(spec_to_json(back).dump() == spec_to_json(spec).dump());

    const auto fixed = spec_from_json(nlohmann::json::parse(R"({"n": 8, "tau": 64})"));
    CHECK(fixed.threshold == degree_threshold::fixed(64));
    const auto powered = spec_from_json(nlohmann::json::parse(R"({"n": 8, "tau": {"ln_exp": 2}})"));
    CHECK(powered.threshold == degree_threshold::ln_pow(2));
    CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"family": "nope"})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"suites": ["lemmas"]})")),
                    std::invalid_argument);
}

TEST_CASE("report files land on disk and stay consistent") {
    experiment_spec spec = small_spec();
    spec.seeds = {1, 2};
    const fs::path dir = fs::temp_directory_path() / "ccmis_report_test";
    fs::remove_all(dir);
    spec.out_dir = dir.string();
    const report rep = run_suite(spec);
    write_report_files(rep, spec.out_dir);

    for (const char* name : {"report.json", "iterations.csv", "rounds.csv", "luby.csv",
                             "sparsity.csv"})
        CHECK(fs::exists(dir / name));

    std::ifstream in(dir / "report.json");
    nlohmann::json j;
    in >> j;
    CHECK(j.at("runs").size() == 2);
    CHECK(j.at("hard_failure") == false);
    CHECK(j.at("version").get<std::string>() == ccmis::version);

    std::ifstream rounds(dir / "rounds.csv");
    std::string header;
    std::getline(rounds, header);
    CHECK(header ==
          "seed,total_rounds,formula_rounds,match,order_agreement,initial_broadcast,"
          "stage2,finisher,luby_rounds");
    int rows = 0;
    for (std::string line; std::getline(rounds, line);) ++rows;
    CHECK(rows == 2);
    fs::remove_all(dir);
}

TEST_CASE("sparsity csv rows cover every step of every seed") {
    experiment_spec spec = small_spec();
    spec.seeds = {5};
    spec.suites = {suite_kind::sparsity};
    const report rep = run_suite(spec);
    std::stringstream ss;
    write_sparsity_csv(ss, rep);
    std::string line;
    std::getline(ss, line);
    int rows = 0;
    while (std::getline(ss, line)) ++rows;
    CHECK(rows == 96);  // one row per t in [1, n]
}

TEST_CASE("file-family suites reuse the fixture graph") {
    const fs::path dir = fs::temp_directory_path() / "ccmis_fixture_test";
    fs::create_directories(dir);
    const fs::path file = dir / "g.edges";
    {
        std::ofstream os(file);
        write_edge_list(os, gnp_random(40, 0.2, 77));
    }
    experiment_spec spec;
    spec.family = "file";
    spec.graph_file = file.string();
    spec.seeds = {1, 2, 3};
    spec.threshold = degree_threshold::fixed(3);
    const report rep = run_suite(spec);
    CHECK_FALSE(rep.hard_failure);
    for (const run_record& r : rep.runs) {
        CHECK(r.n == 40);
        CHECK(r.verify_ok);
    }
    fs::remove_all(dir);
}

TEST_CASE("aborted runs are recorded as hard failures, not crashes") {
    experiment_spec spec = small_spec();
    spec.seeds = {1, 2};
    spec.max_iterations = 1;  // the 96-vertex run needs more than one block
    spec.threshold = degree_threshold::fixed(1);
    const report rep = run_suite(spec);
    CHECK(rep.hard_failure);
    CHECK(rep.aggregate.aborted >= 1);
    for (const run_record& r : rep.runs)
        if (r.aborted) CHECK_FALSE(r.error.empty());
}

TEST_CASE("seed lists parse singletons, lists, and ranges") {
    CHECK(parse_seed_list("5") == std::vector<std::uint64_t>{5});
    CHECK(parse_seed_list("1,2,9") == std::vector<std::uint64_t>{1, 2, 9});
    CHECK(parse_seed_list("3..6") == std::vector<std::uint64_t>{3, 4, 5, 6});
    CHECK(parse_seed_list("1,4..6,9") == std::vector<std::uint64_t>{1, 4, 5, 6, 9});
    CHECK(parse_seed_list("").empty());
    CHECK_THROWS_AS(parse_seed_list("x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_seed_list("9..3"), std::invalid_argument);
}

TEST_CASE("suite names round trip") {
    for (suite_kind k : all_suites()) CHECK(suite_from_name(suite_name(k)) == k);
    CHECK_THROWS_AS(suite_from_name("bogus"), std::invalid_argument);
}
