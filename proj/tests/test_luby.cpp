#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ccmis/graph.hpp"
#include "ccmis/greedy.hpp"
#include "ccmis/luby.hpp"
#include "ccmis/verify.hpp"

using namespace ccmis;

TEST_CASE("empty residual finishes in zero rounds") {
    const auto res = run_finisher(graph::from_edges(0, {}), 1);
    CHECK(res.in_set.size() == 0);
    CHECK(res.outcome.luby_rounds == 0);
    CHECK(res.outcome.rounds_consumed == 0);
}

TEST_CASE("edgeless residual joins everyone in one finisher round") {
    const auto res = run_finisher(graph::from_edges(5, {}), 7);
    CHECK(res.in_set == vertex_subset::full(5));
    CHECK(res.outcome.luby_rounds == 1);
    CHECK(res.outcome.rounds_consumed == 2);
    CHECK(res.outcome.active_curve == std::vector<std::uint32_t>{5});
}

TEST_CASE("on a single edge the smaller (priority, id) endpoint joins") {
    const graph g = path_graph(2);
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        const word pa = luby_priority(seed, 0, 0, 4);
        const word pb = luby_priority(seed, 1, 0, 4);
        const vertex_id winner = (pa < pb || (pa == pb && 0 < 1)) ? 0 : 1;
        const auto res = run_finisher(g, seed);
        CHECK(res.in_set.size() == 1);
        CHECK(res.in_set.contains(winner));
        CHECK(res.outcome.luby_rounds <= 2);
    }
}

TEST_CASE("wins_round breaks priority ties by smaller id") {
    const delivery from3{3, message::of(luby_tag::priority, 5)};
    const delivery from1{1, message::of(luby_tag::priority, 5)};
    CHECK(wins_round(5, 2, std::span(&from3, 1)));        // equal priority, self id smaller
    CHECK_FALSE(wins_round(5, 2, std::span(&from1, 1)));  // equal priority, peer id smaller
    CHECK(wins_round(4, 9, std::span(&from1, 1)));
    CHECK_FALSE(wins_round(6, 0, std::span(&from1, 1)));
    CHECK(wins_round(6, 0, {}));  // no active peers: always a local minimum
}

TEST_CASE("K3 keeps exactly one vertex") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto res = run_finisher(complete_graph(3), seed);
        CHECK(res.in_set.size() == 1);
        CHECK(verify_mis(complete_graph(3), res.in_set).ok);
    }
}

TEST_CASE("finisher output is a valid MIS and every round makes progress") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const auto n = static_cast<std::uint32_t>(1 + rng() % 150);
        const graph g = gnp_random(n, 0.15, rng());
        const auto res = run_finisher(g, rng());
        CHECK(verify_mis(g, res.in_set).ok);
        CHECK(res.outcome.rounds_consumed == 2 * res.outcome.luby_rounds);
        for (std::size_t i = 1; i < res.outcome.active_curve.size(); ++i)
            CHECK(res.outcome.active_curve[i] < res.outcome.active_curve[i - 1]);
    }
}

TEST_CASE("low-degree residuals finish within 4 log2(n) rounds") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const graph g = gnp_random(1024, 0.03, seed);
        const auto res = run_finisher(g, seed + 500);
        CHECK(res.outcome.luby_rounds <= 40);
        CHECK(verify_mis(g, res.in_set).ok);
    }
}

TEST_CASE("the finisher respects its round cap") {
    CHECK_THROWS_AS(run_finisher(path_graph(10), 3, 0), safety_cap_exceeded);
    CHECK(default_luby_round_cap(1) == 64);
    CHECK(default_luby_round_cap(1024) == 640);
}

TEST_CASE("finisher on a residual graph composes with earlier selections") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        const auto n = static_cast<std::uint32_t>(10 + rng() % 100);
        const graph g = gnp_random(n, 0.2, rng());
        const auto order = uniform_order(n, rng());
        const auto trace = greedy_mis(g, order);
        const std::uint32_t t = 1 + n / 3;  // stop greedy partway
        vertex_subset stage(n);
        trace.chosen.for_each([&](vertex_id v) {
            if (order.position[v] < t) stage.insert(v);
        });
        // uncovered w.r.t. the partial selection
        vertex_subset uncovered = vertex_subset::full(n);
        closed_neighborhood(g, stage).for_each([&](vertex_id v) { uncovered.erase(v); });
        const auto residual = induced_subgraph(g, uncovered);
        const auto fin = run_finisher(residual.g, rng());
        vertex_subset combined = stage;
        fin.in_set.for_each([&](vertex_id lv) { combined.insert(residual.original[lv]); });
        CHECK(verify_mis(g, combined).ok);
    }
}
