#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ccmis/clique_mis.hpp"
#include "ccmis/graph.hpp"
#include "ccmis/greedy.hpp"
#include "ccmis/verify.hpp"

using namespace ccmis;

namespace {

// Engine with every node's protocol knowledge filled in as if order agreement
// and the initial broadcast already ran; lets phase operations be tested in
// isolation.
mis_engine make_prepared_engine(const graph& g, const vertex_order& order) {
    const std::uint32_t n = g.size();
    mis_engine eng(n);
    const std::uint32_t delta = max_degree(g);
    for (vertex_id v = 0; v < n; ++v) {
        node_state& st = eng.state(v);
        st.id = v;
        st.rank = order.position[v];
        st.rank_of = order.position;
        if (st.rank == 0) st.by_rank = order.perm;
        st.uncovered = true;
        st.u_flags.assign(n, 1);
        st.residual_degree = g.degree(v);
        st.known_max_degree = delta;
    }
    return eng;
}

graph disjoint_cliques(std::uint32_t count, std::uint32_t clique_size) {
    std::vector<edge> edges;
    for (std::uint32_t c = 0; c < count; ++c) {
        const vertex_id base = c * clique_size;
        for (vertex_id u = 0; u < clique_size; ++u)
            for (vertex_id v = u + 1; v < clique_size; ++v)
                edges.emplace_back(base + u, base + v);
    }
    return graph::from_edges(count * clique_size, std::move(edges));
}

}  // namespace

TEST_CASE("order agreement costs 3 rounds and reproduces the seeded order") {
    for (const auto& [n, seed] : std::vector<std::pair<std::uint32_t, std::uint64_t>>{
             {1, 5}, {2, 9}, {7, 1}, {64, 123}}) {
        mis_engine eng(n);
        for (vertex_id v = 0; v < n; ++v) eng.state(v).id = v;
        const vertex_order order = agree_on_order(eng, seed);
        CHECK(order == uniform_order(n, seed));
        CHECK(eng.clock().logical_rounds == 3);
        CHECK(eng.clock().engine_rounds == 3);
    }
}

TEST_CASE("after agreement every node holds the identical full rank table") {
    mis_engine eng(4);
    for (vertex_id v = 0; v < 4; ++v) eng.state(v).id = v;
    const vertex_order order = agree_on_order(eng, 1);
    for (vertex_id v = 0; v < 4; ++v) {
        CHECK(eng.state(v).rank_of == order.position);
        CHECK(eng.state(v).rank == order.position[v]);
    }
    CHECK(eng.state(order.perm[0]).by_rank == order.perm);
}

TEST_CASE("compute_k evaluates the window formula with clamping") {
    CHECK(compute_k(10000, 10000, 5) == 20);
    CHECK(compute_k(100, 100, 5) == 2);
    CHECK(compute_k(16, 16, 5) == 1);  // raw 0.8 clamps up to 1
    CHECK(compute_k(10, 1, 1) == 10);  // raw n clamps to n
    CHECK_THROWS_AS(compute_k(10, 0, 5), std::invalid_argument);
}

TEST_CASE("collect_block ships each window edge once to the simulator") {
    const graph g = path_graph(4);
    const vertex_order order = vertex_order::identity(4);

    SECTION("P4 with k=3 collects the path 0-1-2") {
        mis_engine eng = make_prepared_engine(g, order);
        const auto rep = collect_block(eng, g, 0, 3);
        CHECK(rep.messages_sent == 2);
        CHECK(eng.state(0).block_edges ==
              std::vector<edge>{{1, 0}, {2, 1}});  // sender first, lower rank second
    }
    SECTION("k=1 is a single vertex and no edges") {
        mis_engine eng = make_prepared_engine(g, order);
        CHECK(collect_block(eng, g, 0, 1).messages_sent == 0);
        CHECK(eng.state(0).block_edges.empty());
    }
    SECTION("a fully covered prefix sends nothing") {
        mis_engine eng = make_prepared_engine(g, order);
        for (vertex_id v = 0; v < 4; ++v) {
            eng.state(v).uncovered = false;
            eng.state(v).u_flags.assign(4, 0);
        }
        CHECK(collect_block(eng, g, 0, 4).messages_sent == 0);
    }
}

TEST_CASE("simulate_block replays greedy on the collected window") {
    const graph g = path_graph(4);
    mis_engine eng = make_prepared_engine(g, vertex_order::identity(4));

    SECTION("empty window selects nothing") {
        node_state& sim = eng.state(0);
        sim.u_flags.assign(4, 0);
        CHECK(simulate_block(sim, 0, 3).empty());
    }
    SECTION("edgeless window selects everything") {
        node_state& sim = eng.state(0);
        sim.block_edges.clear();
        sim.u_flags.assign(4, 0);
        sim.u_flags[1] = sim.u_flags[3] = 1;  // ranks 1 and 3, non-adjacent in H
        CHECK(simulate_block(sim, 0, 4) == std::vector<vertex_id>{1, 3});
    }
    SECTION("path window picks alternating vertices") {
        collect_block(eng, g, 0, 3);
        CHECK(simulate_block(eng.state(0), 0, 3) == std::vector<vertex_id>{0, 2});
    }
}

TEST_CASE("collect_block_adaptive halves an oversized window") {
    // K6 plus 4 isolated vertices: k=6 offers C(6,2)=15 > n=10 edges.
    std::vector<edge> edges;
    for (vertex_id u = 0; u < 6; ++u)
        for (vertex_id v = u + 1; v < 6; ++v) edges.emplace_back(u, v);
    const graph g = graph::from_edges(10, std::move(edges));
    const vertex_order order = vertex_order::identity(10);

    SECTION("fallback on: halve once and succeed") {
        mis_engine eng = make_prepared_engine(g, order);
        const collect_outcome out = collect_block_adaptive(eng, g, 0, 0, 6, true);
        CHECK(out.retries == 1);
        CHECK(out.k == 3);
        CHECK(out.block_edges == 3);  // C(3,2)
        CHECK(eng.clock().primitive_invocations == 2);  // failed attempt is charged
        CHECK(eng.clock().logical_rounds == 2 * eng.clock().route_cost);
    }
    SECTION("fallback off: the violation propagates") {
        mis_engine eng = make_prepared_engine(g, order);
        CHECK_THROWS_AS(collect_block_adaptive(eng, g, 0, 0, 6, false),
                        routing_precondition_violation);
    }
}

TEST_CASE("disseminate_and_update costs 4 rounds and refreshes all views") {
    SECTION("empty selection changes nothing") {
        const graph g = path_graph(4);
        mis_engine eng = make_prepared_engine(g, vertex_order::identity(4));
        eng.state(0).block_selected.clear();
        disseminate_and_update(eng, g, 0);
        CHECK(eng.clock().logical_rounds == 4);
        for (vertex_id v = 0; v < 4; ++v) {
            CHECK(eng.state(v).uncovered);
            CHECK(eng.state(v).known_max_degree == 2);
        }
    }
    SECTION("selecting the center of K4 covers everyone") {
        const graph g = complete_graph(4);
        mis_engine eng = make_prepared_engine(g, vertex_order::identity(4));
        eng.state(0).block_selected = {0};
        disseminate_and_update(eng, g, 0);
        for (vertex_id v = 0; v < 4; ++v) {
            CHECK_FALSE(eng.state(v).uncovered);
            CHECK(eng.state(v).known_max_degree == 0);
            CHECK(eng.state(v).u_flags == std::vector<std::uint8_t>(4, 0));
        }
        CHECK(eng.state(0).in_set);
    }
    SECTION("recomputed degree equals the induced-subgraph truth") {
        std::mt19937_64 rng(17);
        for (int trial = 0; trial < 10; ++trial) {
            const graph g = gnp_random(40, 0.2, rng());
            const vertex_order order = uniform_order(40, rng());
            mis_engine eng = make_prepared_engine(g, order);
            collect_block(eng, g, order.perm[0], 8);
            simulate_block(eng.state(order.perm[0]), 0, 8);
            disseminate_and_update(eng, g, order.perm[0]);
            vertex_subset uncovered(40);
            for (vertex_id v = 0; v < 40; ++v)
                if (eng.state(v).uncovered) uncovered.insert(v);
            const auto truth = max_degree(induced_subgraph(g, uncovered).g);
            for (vertex_id v = 0; v < 40; ++v)
                CHECK(eng.state(v).known_max_degree == truth);
        }
    }
}

TEST_CASE("full run on an edgeless graph selects everyone in zero iterations") {
    const graph g = graph::from_edges(6, {});
    clique_mis_config cfg;
    cfg.seed = 4;
    const auto res = run_clique_mis(g, cfg);
    CHECK(res.mis == vertex_subset::full(6));
    CHECK(res.stats.while_iterations == 0);
    CHECK(res.stats.k_final == 0);
    CHECK(res.stats.rounds_finisher == 2);  // one finisher round, everyone joins
    CHECK(res.stats.total_rounds == 3 + 1 + 2);
    CHECK(res.stats.total_rounds == res.stats.formula_rounds);
}

TEST_CASE("full run on a single vertex") {
    const graph g = graph::from_edges(1, {});
    clique_mis_config cfg;
    const auto res = run_clique_mis(g, cfg);
    CHECK(res.mis.size() == 1);
    CHECK(res.stats.total_rounds == res.stats.formula_rounds);
}

TEST_CASE("configs outside the parameter domain are rejected") {
    const graph g = path_graph(3);
    clique_mis_config cfg;
    cfg.C = 4;
    CHECK_THROWS_AS(run_clique_mis(g, cfg), std::invalid_argument);
    cfg.C = 5;
    cfg.route_cost = 0;
    CHECK_THROWS_AS(run_clique_mis(g, cfg), std::invalid_argument);
}

TEST_CASE("complete graphs always produce a single selection") {
    clique_mis_config cfg;
    cfg.seed = 11;
    cfg.threshold = degree_threshold::fixed(4);
    cfg.debug_validate = true;
    const auto res = run_clique_mis(complete_graph(40), cfg);
    CHECK(res.mis.size() == 1);
    CHECK(res.stats.while_iterations == 1);  // the first block covers the graph
    CHECK(res.stats.final_delta == 0);
    CHECK(verify_mis(complete_graph(40), res.mis).ok);
}

TEST_CASE("block selections equal the sequential prefix on random graphs") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 12; ++trial) {
        const auto n = static_cast<std::uint32_t>(8 + rng() % 120);
        const double p = 0.05 + 0.25 * static_cast<double>(trial % 4);
        const graph g = gnp_random(n, p, rng());
        clique_mis_config cfg;
        cfg.seed = rng();
        cfg.threshold = degree_threshold::fixed(1 + rng() % 6);
        cfg.debug_validate = true;
        const auto res = run_clique_mis(g, cfg);
        CHECK(stage_selection_matches_greedy(g, res));
        CHECK(verify_mis(g, res.mis).ok);
        CHECK(res.stats.total_rounds == res.stats.formula_rounds);
    }
}

TEST_CASE("closed-form round accounting holds with a different routing cost") {
    const graph g = gnp_random(60, 0.3, 3);
    clique_mis_config cfg;
    cfg.seed = 7;
    cfg.route_cost = 5;
    cfg.threshold = degree_threshold::fixed(3);
    const auto res = run_clique_mis(g, cfg);
    std::uint64_t stage2 = 0;
    for (const auto& it : res.stats.iterations) {
        CHECK(it.rounds == 5 * (1 + it.fallback_retries) + 4);
        stage2 += it.rounds;
    }
    CHECK(res.stats.total_rounds == 3 + 1 + stage2 + res.stats.rounds_finisher);
}

TEST_CASE("recorded deltas never increase and end below the threshold") {
    // At deep thresholds the forced one-rank windows can plateau the residual
    // degree for a few iterations; only monotone non-increase is guaranteed.
    const graph g = gnp_random(512, 0.15, 21);
    clique_mis_config cfg;
    cfg.seed = 2;
    cfg.threshold = degree_threshold::fixed(8);
    cfg.debug_validate = true;
    const auto res = run_clique_mis(g, cfg);
    REQUIRE(res.stats.while_iterations >= 1);
    std::uint32_t prev = UINT32_MAX;
    for (const auto& it : res.stats.iterations) {
        CHECK(it.delta <= prev);
        CHECK(static_cast<double>(it.delta) <= it.decay_bound);
        prev = it.delta;
    }
    CHECK(res.stats.final_delta <= 8);
    CHECK(res.stats.final_delta < res.stats.initial_max_degree);
}

TEST_CASE("iteration safety cap trips when progress is too slow for it") {
    // 25 disjoint K9: the first window (k ~= 15) cannot touch every clique,
    // so a second iteration is always required.
    const graph g = disjoint_cliques(25, 9);
    clique_mis_config cfg;
    cfg.seed = 3;
    cfg.threshold = degree_threshold::fixed(1);
    cfg.max_iterations = 1;
    CHECK_THROWS_AS(run_clique_mis(g, cfg), safety_cap_exceeded);
}

TEST_CASE("the whole protocol is schedule independent") {
    const graph g = gnp_random(48, 0.2, 9);
    clique_mis_config cfg;
    cfg.seed = 13;
    cfg.threshold = degree_threshold::fixed(2);
    cfg.check_schedule_independence = true;
    const auto res = run_clique_mis(g, cfg);
    CHECK(verify_mis(g, res.mis).ok);
    CHECK(stage_selection_matches_greedy(g, res));
}

TEST_CASE("identical config reproduces identical runs and reports") {
    const graph g = gnp_random(64, 0.25, 5);
    clique_mis_config cfg;
    cfg.seed = 31;
    cfg.threshold = degree_threshold::fixed(4);
    const auto a = run_clique_mis(g, cfg);
    const auto b = run_clique_mis(g, cfg);
    CHECK(a.mis == b.mis);
    CHECK(a.reports == b.reports);
    CHECK(a.stats.total_rounds == b.stats.total_rounds);
}

TEST_CASE("k grows by at least one rank per iteration") {
    const graph g = gnp_random(256, 0.08, 19);
    clique_mis_config cfg;
    cfg.seed = 6;
    cfg.threshold = degree_threshold::fixed(1);
    const auto res = run_clique_mis(g, cfg);
    std::uint32_t prev = 0;
    for (const auto& it : res.stats.iterations) {
        CHECK(it.k > prev);
        prev = it.k;
    }
    CHECK(res.stats.k_final == prev);
}
