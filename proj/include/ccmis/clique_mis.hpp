#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccmis/engine.hpp"
#include "ccmis/graph.hpp"
#include "ccmis/greedy.hpp"
#include "ccmis/luby.hpp"
#include "ccmis/order.hpp"
#include "ccmis/subset.hpp"

namespace ccmis {

// Block simulation of sequential greedy MIS on the round engine. The run has
// three phases: all nodes agree on a random order (3 rounds) and broadcast
// initial degrees (1 round); while the residual maximum degree exceeds the
// threshold, the uncovered prefix window is routed to the rank-0 node, which
// replays greedy locally and disseminates the selections (route_cost + 4
// rounds per iteration); finally the low-degree residual is finished by the
// Luby module inside the same engine.

/// Degree threshold tau(n) ending the block phase; either a power of ln(n)
/// or a fixed desk-scale override. Never below 1.
struct degree_threshold {
    enum class kind : std::uint8_t { ln_power, fixed };
    kind mode = kind::ln_power;
    double value = 4.0;

    static degree_threshold ln_pow(double exponent) { return {kind::ln_power, exponent}; }
    static degree_threshold fixed(double threshold) { return {kind::fixed, threshold}; }

    double operator()(std::uint32_t n) const {
        const double t = mode == kind::ln_power
                             ? std::pow(std::log(static_cast<double>(n)), value)
                             : value;
        return std::max(1.0, t);
    }

    bool operator==(const degree_threshold&) const = default;
};

struct clique_mis_config {
    std::uint32_t C = 5;
    degree_threshold threshold{};
    std::uint32_t route_cost = 2;
    std::uint64_t seed = 0;
    bool adaptive_k_fallback = true;
    std::uint32_t max_iterations = 0;  // 0 = n + 8
    bool debug_validate = false;       // cross-check node views against ground truth
    bool check_schedule_independence = false;
};

struct iteration_stats {
    std::uint32_t index = 0;          // 1-based while-iteration number
    std::uint32_t delta = 0;          // max residual degree at loop entry
    std::uint32_t k = 0;              // prefix length after any fallback halving
    std::uint32_t k_formula = 0;      // prefix length the degree formula asked for
    std::uint64_t block_edges = 0;
    std::uint32_t selected = 0;
    std::uint32_t rounds = 0;
    std::uint32_t fallback_retries = 0;
    double decay_bound = 0.0;         // Delta^(1/2^(i-1)) * 100 * C^2 * ln^2 n
    bool decay_ok = true;
    bool edge_budget_ok = true;       // block edges fit the routing capacity unmodified
    std::uint32_t max_block_degree = 0;  // max residual degree into the new rank window
    double vertex_budget = 0.0;          // n / k
};

struct clique_mis_stats {
    std::uint32_t n = 0;
    std::uint64_t m = 0;
    std::uint32_t initial_max_degree = 0;
    double threshold_value = 1.0;
    std::vector<iteration_stats> iterations;
    std::uint32_t while_iterations = 0;
    std::uint32_t k_final = 0;
    std::uint32_t final_delta = 0;          // residual max degree handed to the finisher
    std::uint32_t rounds_order_agreement = 0;
    std::uint32_t rounds_initial_broadcast = 0;
    std::uint64_t rounds_stage2 = 0;
    std::uint64_t rounds_finisher = 0;
    std::uint32_t luby_rounds = 0;
    std::uint32_t fallback_triggers = 0;    // iterations whose formula k violated the edge budget
    std::uint32_t total_fallback_retries = 0;
    std::uint64_t total_rounds = 0;         // engine clock at completion
    std::uint64_t formula_rounds = 0;       // 3 + 1 + sum(route_cost*(1+retries) + 4) + finisher
};

struct node_state {
    vertex_id id = 0;
    vertex_id leader = 0;
    std::uint32_t rank = 0;
    std::vector<std::uint32_t> rank_of;  // vertex -> rank, known after order agreement
    std::vector<vertex_id> by_rank;      // rank -> vertex, kept only by the rank-0 simulator
    bool uncovered = true;
    bool in_set = false;
    bool select_notice = false;
    std::vector<std::uint8_t> u_flags;   // last broadcast uncovered flags, all vertices
    std::uint32_t residual_degree = 0;
    std::uint32_t known_max_degree = 0;
    std::vector<edge> block_edges;       // collected window edges (simulator only)
    std::vector<vertex_id> block_selected;
    luby_state fin;

    bool operator==(const node_state&) const = default;
};

using mis_engine = clique_engine<node_state>;

namespace mis_tag {
constexpr std::uint8_t rank = 2;
constexpr std::uint8_t window_edge = 5;
constexpr std::uint8_t selected = 6;
constexpr std::uint8_t covered = 7;
}  // namespace mis_tag

/// Step 1: ID exchange, order draw at the smallest-ID node, position unicast,
/// position broadcast. Exactly 3 engine rounds; afterwards every node holds
/// the full rank table.
inline vertex_order agree_on_order(mis_engine& eng, std::uint64_t seed) {
    const std::uint32_t n = eng.size();

    eng.broadcast_all([](vertex_id, node_state& st, const inbox_view&) {
        return static_cast<word>(st.id);
    });

    eng.run_round([&](vertex_id v, node_state& st, const inbox_view& in, auto& ob) {
        word min_id = in.broadcast[0];
        vertex_id leader = 0;
        for (vertex_id w = 1; w < n; ++w)
            if (in.broadcast[w] < min_id) { min_id = in.broadcast[w]; leader = w; }
        st.leader = leader;
        if (v != leader) return;
        const vertex_order order = uniform_order(n, seed);
        st.rank = order.position[v];
        for (vertex_id w = 0; w < n; ++w)
            if (w != v) ob.send(w, message::of(mis_tag::rank, order.position[w]));
    });

    eng.broadcast_all([](vertex_id, node_state& st, const inbox_view& in) {
        for (const delivery& d : in.messages)
            if (d.msg.tag == mis_tag::rank) st.rank = static_cast<std::uint32_t>(d.msg.w[0]);
        return static_cast<word>(st.rank);
    });

    eng.absorb([&](vertex_id, node_state& st, const inbox_view& in) {
        st.rank_of.resize(n);
        for (vertex_id w = 0; w < n; ++w)
            st.rank_of[w] = static_cast<std::uint32_t>(in.broadcast[w]);
        if (st.rank == 0) {
            st.by_rank.resize(n);
            for (vertex_id w = 0; w < n; ++w) st.by_rank[st.rank_of[w]] = w;
        }
    });

    std::vector<vertex_id> perm(n);
    for (vertex_id v = 0; v < n; ++v) perm[eng.state(v).rank_of[v]] = v;
    return vertex_order::from_perm(std::move(perm));
}

/// Pre-loop round: every vertex marks itself uncovered and broadcasts its
/// degree, after which every node knows the maximum degree.
inline void broadcast_initial_degrees(mis_engine& eng, const graph& g) {
    const std::uint32_t n = eng.size();
    eng.broadcast_all([&](vertex_id v, node_state& st, const inbox_view&) {
        st.uncovered = true;
        st.residual_degree = g.degree(v);
        return static_cast<word>(st.residual_degree);
    });
    eng.absorb([&](vertex_id, node_state& st, const inbox_view& in) {
        st.u_flags.assign(n, 1);
        word mx = 0;
        for (word d : in.broadcast) mx = std::max(mx, d);
        st.known_max_degree = static_cast<std::uint32_t>(mx);
    });
}

/// k = floor(n / (sqrt(delta') * C)), clamped to [1, n].
inline std::uint32_t compute_k(std::uint32_t n, std::uint32_t delta_prime, std::uint32_t C) {
    if (delta_prime < 1) throw std::invalid_argument("compute_k: delta' must be >= 1");
    if (C < 1) throw std::invalid_argument("compute_k: C must be >= 1");
    const double raw = static_cast<double>(n) /
                       (std::sqrt(static_cast<double>(delta_prime)) * static_cast<double>(C));
    auto k = static_cast<std::uint64_t>(std::floor(raw));
    k = std::max<std::uint64_t>(1, std::min<std::uint64_t>(k, n));
    return static_cast<std::uint32_t>(k);
}

/// Largest block of residual vertices whose induced subgraph is guaranteed to
/// fit the routing budget: m(m-1)/2 <= n.
inline std::uint32_t residual_block_cap(std::uint32_t n) {
    const auto m = static_cast<std::uint32_t>(
        (1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(n))) / 2.0);
    return std::max<std::uint32_t>(1, m);
}

/// Step 2(b): every uncovered vertex with rank below k routes its window
/// edges (to lower-ranked uncovered neighbors) to the simulator, which stores
/// the received subgraph. One routing call; throws if the edge count exceeds
/// the capacity n.
inline round_report collect_block(mis_engine& eng, const graph& g, vertex_id simulator,
                                  std::uint32_t k) {
    const auto rep = eng.lenzen_route(simulator, [&](vertex_id v, node_state& st,
                                                     const inbox_view&) {
        std::vector<message> msgs;
        if (!st.uncovered || st.rank >= k) return msgs;
        for (vertex_id w : g.neighbors(v))
            if (st.u_flags[w] && st.rank_of[w] < st.rank)
                msgs.push_back(message::of(mis_tag::window_edge, v, w));
        return msgs;
    });
    eng.absorb([&](vertex_id v, node_state& st, const inbox_view& in) {
        if (v != simulator) return;
        st.block_edges.clear();
        for (const delivery& d : in.messages)
            if (d.msg.tag == mis_tag::window_edge)
                st.block_edges.emplace_back(static_cast<vertex_id>(d.msg.w[0]),
                                            static_cast<vertex_id>(d.msg.w[1]));
    });
    return rep;
}

/// Step 2(c): local greedy replay over the uncovered rank window [k_prev, k)
/// using only the simulator's own knowledge. Zero communication.
inline std::vector<vertex_id> simulate_block(node_state& sim, std::uint32_t k_prev,
                                             std::uint32_t k) {
    const auto n = static_cast<std::uint32_t>(sim.u_flags.size());
    std::vector<vertex_id> window;  // uncovered window vertices in rank order
    for (std::uint32_t r = k_prev; r < k && r < n; ++r) {
        const vertex_id v = sim.by_rank[r];
        if (sim.u_flags[v]) window.push_back(v);
    }
    std::vector<std::uint32_t> local(n, UINT32_MAX);
    for (std::uint32_t i = 0; i < window.size(); ++i) local[window[i]] = i;
    std::vector<std::vector<std::uint32_t>> adj(window.size());
    for (const auto& [a, b] : sim.block_edges) {
        if (a >= n || b >= n || local[a] == UINT32_MAX || local[b] == UINT32_MAX)
            throw std::logic_error("simulate_block: edge outside the uncovered window");
        adj[local[a]].push_back(local[b]);
        adj[local[b]].push_back(local[a]);
    }
    std::vector<std::uint8_t> covered(window.size(), 0);
    sim.block_selected.clear();
    for (std::uint32_t i = 0; i < window.size(); ++i) {
        if (covered[i]) continue;
        sim.block_selected.push_back(window[i]);
        covered[i] = 1;
        for (std::uint32_t j : adj[i]) covered[j] = 1;
    }
    return sim.block_selected;
}

struct collect_outcome {
    std::uint32_t k = 0;          // window end actually used
    std::uint32_t retries = 0;    // halving attempts before the budget held
    std::uint64_t block_edges = 0;
};

/// collect_block with the desk-scale fallback: when the offered edge count
/// exceeds the routing capacity, the window span is halved and the call
/// retried, charging route_cost per attempt. Disabled fallback (or a span
/// already at 1) propagates the violation.
inline collect_outcome collect_block_adaptive(mis_engine& eng, const graph& g,
                                              vertex_id simulator, std::uint32_t k_prev,
                                              std::uint32_t k, bool adaptive) {
    collect_outcome out;
    for (;;) {
        try {
            out.block_edges = collect_block(eng, g, simulator, k).messages_sent;
            out.k = k;
            return out;
        } catch (const routing_precondition_violation& e) {
            if (!adaptive || k - k_prev <= 1)
                throw routing_precondition_violation(e.offered, e.capacity);
            k = k_prev + std::max<std::uint32_t>(1, (k - k_prev) / 2);
            ++out.retries;
        }
    }
}

/// Steps 2(d)-(f): notify the selected vertices, let them announce to their
/// neighbors, broadcast uncovered flags, then broadcast residual degrees.
/// Exactly 4 engine rounds; afterwards every node knows the new residual
/// maximum degree.
inline void disseminate_and_update(mis_engine& eng, const graph& g, vertex_id simulator) {
    const std::uint32_t n = eng.size();

    eng.run_round([&](vertex_id v, node_state& st, const inbox_view&, auto& ob) {
        if (v != simulator) return;
        for (vertex_id chosen : st.block_selected) {
            if (chosen == v) st.select_notice = true;
            else ob.send(chosen, message::of(mis_tag::selected));
        }
    });

    eng.run_round([&](vertex_id v, node_state& st, const inbox_view& in, auto& ob) {
        for (const delivery& d : in.messages)
            if (d.msg.tag == mis_tag::selected) st.select_notice = true;
        if (!st.select_notice) return;
        st.select_notice = false;
        st.in_set = true;
        st.uncovered = false;
        for (vertex_id w : g.neighbors(v)) ob.send(w, message::of(mis_tag::covered));
    });

    eng.broadcast_all([](vertex_id, node_state& st, const inbox_view& in) {
        for (const delivery& d : in.messages)
            if (d.msg.tag == mis_tag::covered) { st.uncovered = false; break; }
        return static_cast<word>(st.uncovered ? 1 : 0);
    });

    eng.broadcast_all([&](vertex_id v, node_state& st, const inbox_view& in) {
        for (vertex_id w = 0; w < n; ++w) st.u_flags[w] = in.broadcast[w] ? 1 : 0;
        std::uint32_t deg = 0;
        if (st.uncovered)
            for (vertex_id w : g.neighbors(v)) deg += st.u_flags[w];
        st.residual_degree = deg;
        return static_cast<word>(deg);
    });

    eng.absorb([&](vertex_id, node_state& st, const inbox_view& in) {
        word mx = 0;
        for (vertex_id w = 0; w < n; ++w)
            if (st.u_flags[w]) mx = std::max(mx, in.broadcast[w]);
        st.known_max_degree = static_cast<std::uint32_t>(mx);
    });
}

struct clique_mis_result {
    vertex_subset mis;
    vertex_subset stage_selected;  // selections made by the block phase only
    vertex_order order;
    clique_mis_stats stats;
    std::vector<round_report> reports;
    std::vector<std::uint32_t> luby_active_curve;
};

namespace detail {

inline double decay_bound(std::uint32_t initial_delta, std::uint32_t iteration,
                          std::uint32_t C, std::uint32_t n) {
    const double root = std::pow(static_cast<double>(initial_delta),
                                 1.0 / std::exp2(static_cast<double>(iteration - 1)));
    const double ln_n = std::log(static_cast<double>(n));
    return root * 100.0 * static_cast<double>(C) * static_cast<double>(C) * ln_n * ln_n;
}

inline vertex_subset uncovered_subset(const mis_engine& eng) {
    vertex_subset s(eng.size());
    for (vertex_id v = 0; v < eng.size(); ++v)
        if (eng.state(v).uncovered) s.insert(v);
    return s;
}

// Ground-truth cross-checks of the nodes' local views; O(n^2 + m) per call,
// intended for tests and small runs.
inline void validate_views(const mis_engine& eng, const graph& g) {
    const vertex_subset uncovered = uncovered_subset(eng);
    const auto residual = induced_subgraph(g, uncovered);
    const std::uint32_t truth = max_degree(residual.g);
    for (vertex_id v = 0; v < eng.size(); ++v) {
        const node_state& st = eng.state(v);
        if (st.known_max_degree != truth)
            throw std::logic_error("node " + std::to_string(v) +
                                   " disagrees with the true residual max degree");
        for (vertex_id w = 0; w < eng.size(); ++w)
            if ((st.u_flags[w] != 0) != uncovered.contains(w))
                throw std::logic_error("node " + std::to_string(v) + " holds a stale flag");
    }
}

// Largest residual degree from any uncovered vertex into the new rank window;
// the routing feasibility argument bounds this by n / k.
inline std::uint32_t max_window_degree(const mis_engine& eng, const graph& g,
                                       const vertex_order& order, std::uint32_t k_prev,
                                       std::uint32_t k) {
    std::uint32_t best = 0;
    for (vertex_id v = 0; v < eng.size(); ++v) {
        if (!eng.state(v).uncovered) continue;
        std::uint32_t d = 0;
        for (vertex_id w : g.neighbors(v)) {
            const std::uint32_t r = order.position[w];
            d += eng.state(w).uncovered && r >= k_prev && r < k;
        }
        best = std::max(best, d);
    }
    return best;
}

}  // namespace detail

/// Full run: order agreement, the block-simulation loop, and the Luby
/// finisher, all in one audited engine. Returns the MIS together with
/// per-iteration statistics and the round ledger.
inline clique_mis_result run_clique_mis(const graph& g, const clique_mis_config& cfg) {
    const std::uint32_t n = g.size();
    if (n < 1) throw std::invalid_argument("run_clique_mis: graph must have at least one vertex");
    if (cfg.C < 5) throw std::invalid_argument("run_clique_mis: C must be >= 5");
    if (cfg.route_cost < 1) throw std::invalid_argument("run_clique_mis: route cost must be >= 1");

    engine_config ecfg;
    ecfg.route_cost = cfg.route_cost;
    ecfg.check_schedule_independence = cfg.check_schedule_independence;
    mis_engine eng(n, ecfg);
    for (vertex_id v = 0; v < n; ++v) eng.state(v).id = v;

    clique_mis_result res;
    res.order = agree_on_order(eng, cfg.seed);
    broadcast_initial_degrees(eng, g);

    clique_mis_stats& stats = res.stats;
    stats.n = n;
    stats.m = g.edge_count();
    stats.initial_max_degree = eng.state(0).known_max_degree;
    stats.threshold_value = cfg.threshold(n);
    stats.rounds_order_agreement = 3;
    stats.rounds_initial_broadcast = 1;
    if (cfg.debug_validate && stats.initial_max_degree != max_degree(g))
        throw std::logic_error("initial degree broadcast disagrees with the graph");

    const vertex_id simulator = res.order.perm[0];
    const std::uint32_t max_iterations = cfg.max_iterations ? cfg.max_iterations : n + 8;
    std::uint32_t k_prev = 0;

    while (static_cast<double>(eng.state(0).known_max_degree) > stats.threshold_value) {
        const std::uint32_t delta = eng.state(0).known_max_degree;
        if (stats.while_iterations >= max_iterations)
            throw safety_cap_exceeded("block phase exceeded " + std::to_string(max_iterations) +
                                      " iterations at residual degree " + std::to_string(delta));
        iteration_stats it;
        it.index = stats.while_iterations + 1;
        it.delta = delta;
        it.k_formula = compute_k(n, delta, cfg.C);
        std::uint32_t k_target = std::min<std::uint32_t>(n, std::max(it.k_formula, k_prev + 1));

        // The degree formula assumes a regime where the prefix keeps growing;
        // at small n it can stall below the already-processed prefix. When
        // the window holds no residual vertex, take the next block of
        // residual vertices instead: a block of residual_block_cap(n)
        // vertices offers at most n edges, so the routing budget holds
        // deterministically. Every node can compute the same window from the
        // broadcast flags and ranks.
        bool window_has_residual = false;
        for (std::uint32_t r = k_prev; r < k_target && !window_has_residual; ++r)
            window_has_residual = eng.state(res.order.perm[r]).uncovered;
        if (!window_has_residual) {
            std::uint32_t taken = 0;
            const std::uint32_t cap = residual_block_cap(n);
            for (std::uint32_t r = k_target; r < n && taken < cap; ++r) {
                if (eng.state(res.order.perm[r]).uncovered) {
                    ++taken;
                    k_target = r + 1;
                }
            }
            if (taken == 0)
                throw std::logic_error("positive residual degree but no residual vertex");
        }

        const collect_outcome collected = collect_block_adaptive(
            eng, g, simulator, k_prev, k_target, cfg.adaptive_k_fallback);
        const std::uint32_t k = collected.k;
        it.fallback_retries = collected.retries;

        it.k = k;
        it.block_edges = collected.block_edges;
        it.max_block_degree = detail::max_window_degree(eng, g, res.order, k_prev, k);
        it.vertex_budget = static_cast<double>(n) / static_cast<double>(k);
        it.edge_budget_ok = it.fallback_retries == 0;
        it.decay_bound = detail::decay_bound(stats.initial_max_degree, it.index, cfg.C, n);
        it.decay_ok = static_cast<double>(delta) <= it.decay_bound;
        it.selected =
            static_cast<std::uint32_t>(simulate_block(eng.state(simulator), k_prev, k).size());
        disseminate_and_update(eng, g, simulator);
        it.rounds = cfg.route_cost * (1 + it.fallback_retries) + 4;

        stats.rounds_stage2 += it.rounds;
        stats.total_fallback_retries += it.fallback_retries;
        stats.fallback_triggers += it.fallback_retries > 0;
        stats.iterations.push_back(it);
        ++stats.while_iterations;
        k_prev = k;

        if (cfg.debug_validate) detail::validate_views(eng, g);
    }

    stats.k_final = k_prev;
    stats.final_delta = eng.state(0).known_max_degree;

    res.stage_selected = vertex_subset(n);
    for (vertex_id v = 0; v < n; ++v)
        if (eng.state(v).in_set) res.stage_selected.insert(v);

    // Finisher init is local: statuses and peer lists come from each node's
    // own flags and adjacency.
    for (vertex_id v = 0; v < n; ++v) {
        node_state& st = eng.state(v);
        st.fin.status = st.uncovered ? luby_status::active : luby_status::inactive;
        st.fin.peers.clear();
        if (st.uncovered)
            for (vertex_id w : g.neighbors(v))
                if (st.u_flags[w]) st.fin.peers.push_back(w);
    }
    const luby_outcome fin =
        run_luby(eng, [](node_state& s) -> luby_state& { return s.fin; }, cfg.seed,
                 default_luby_round_cap(n));
    stats.luby_rounds = fin.luby_rounds;
    stats.rounds_finisher = fin.rounds_consumed;
    res.luby_active_curve = fin.active_curve;

    res.mis = vertex_subset(n);
    for (vertex_id v = 0; v < n; ++v) {
        const node_state& st = eng.state(v);
        if (st.in_set || st.fin.status == luby_status::in_mis) res.mis.insert(v);
    }

    stats.total_rounds = eng.clock().logical_rounds;
    stats.formula_rounds = 3 + 1 + stats.rounds_stage2 + stats.rounds_finisher;
    res.reports.assign(eng.reports().begin(), eng.reports().end());
    return res;
}

/// Master equivalence check: the block phase must select exactly the greedy
/// choices among the first k_final ranks of the same order.
inline bool stage_selection_matches_greedy(const graph& g, const clique_mis_result& res) {
    const greedy_trace trace = greedy_mis(g, res.order);
    vertex_subset expected(g.size());
    trace.chosen.for_each([&](vertex_id v) {
        if (res.order.position[v] < res.stats.k_final) expected.insert(v);
    });
    return expected == res.stage_selected;
}

}  // namespace ccmis
