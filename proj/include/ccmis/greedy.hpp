#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "ccmis/graph.hpp"
#include "ccmis/order.hpp"
#include "ccmis/subset.hpp"

namespace ccmis {

/// Full record of one sequential greedy run. U_t is the uncovered set at the
/// beginning of iteration t (1-based, U_1 = V); it is stored as per-step
/// removal deltas and reconstructed on demand, while |U_t| and the residual
/// maximum degree are kept per step.
struct greedy_trace {
    vertex_order order;
    vertex_subset chosen;
    std::vector<std::uint32_t> removal_offsets;     // size n+1, step t removed = [offsets[t-1], offsets[t])
    std::vector<vertex_id> removed;                 // chosen vertex first, then covered neighbors ascending
    std::vector<std::uint32_t> uncovered_count;     // index t-1 holds |U_t|, t in [1, n+1]
    std::vector<std::uint32_t> max_residual_degree; // index t-1 holds max deg of G[U_t], t in [1, n+1]

    std::uint32_t n() const { return order.size(); }

    vertex_subset uncovered_at(std::uint32_t t) const {
        if (t < 1 || t > n() + 1) throw std::out_of_range("greedy_trace: t outside [1, n+1]");
        vertex_subset u = vertex_subset::full(n());
        for (std::uint32_t i = 0; i < removal_offsets[t - 1]; ++i) u.erase(removed[i]);
        return u;
    }

    std::uint32_t uncovered_count_at(std::uint32_t t) const {
        if (t < 1 || t > n() + 1) throw std::out_of_range("greedy_trace: t outside [1, n+1]");
        return uncovered_count[t - 1];
    }

    std::uint32_t residual_max_degree_at(std::uint32_t t) const {
        if (t < 1 || t > n() + 1) throw std::out_of_range("greedy_trace: t outside [1, n+1]");
        return max_residual_degree[t - 1];
    }
};

/// Processes vertices in the given order; the current vertex joins the
/// independent set iff it is still uncovered, which then covers its closed
/// neighborhood. Residual degrees are maintained incrementally and the
/// maximum is tracked with a monotone bucket pointer, so a full run is
/// O(n + m).
inline greedy_trace greedy_mis(const graph& g, const vertex_order& order) {
    const std::uint32_t n = g.size();
    if (order.size() != n) throw std::invalid_argument("greedy_mis: order size mismatch");

    greedy_trace trace;
    trace.order = order;
    trace.chosen = vertex_subset(n);
    trace.removal_offsets.assign(n + 1, 0);
    trace.uncovered_count.reserve(n + 1);
    trace.max_residual_degree.reserve(n + 1);

    std::vector<std::uint8_t> uncovered(n, 1);
    std::vector<std::uint32_t> resdeg(n);
    std::uint32_t delta = 0;
    for (vertex_id v = 0; v < n; ++v) {
        resdeg[v] = g.degree(v);
        delta = std::max(delta, resdeg[v]);
    }
    std::vector<std::uint32_t> bucket(delta + 1, 0);
    for (vertex_id v = 0; v < n; ++v) ++bucket[resdeg[v]];
    std::uint32_t max_ptr = delta;
    std::uint32_t alive = n;

    const auto remove_vertex = [&](vertex_id x) {
        uncovered[x] = 0;
        --bucket[resdeg[x]];
        --alive;
        for (vertex_id y : g.neighbors(x)) {
            if (!uncovered[y]) continue;
            --bucket[resdeg[y]];
            ++bucket[--resdeg[y]];
        }
        trace.removed.push_back(x);
    };

    for (std::uint32_t t = 1; t <= n; ++t) {
        trace.uncovered_count.push_back(alive);
        trace.max_residual_degree.push_back(alive ? max_ptr : 0);
        const vertex_id v = order.perm[t - 1];
        if (uncovered[v]) {
            trace.chosen.insert(v);
            remove_vertex(v);
            for (vertex_id w : g.neighbors(v))
                if (uncovered[w]) remove_vertex(w);
            while (max_ptr > 0 && bucket[max_ptr] == 0) --max_ptr;
        }
        trace.removal_offsets[t] = static_cast<std::uint32_t>(trace.removed.size());
    }
    trace.uncovered_count.push_back(alive);
    trace.max_residual_degree.push_back(alive ? max_ptr : 0);
    return trace;
}

/// Residual sparsity envelope 10 * ln(n) * n / t (natural logarithm).
inline double residual_sparsity_bound(std::uint32_t n, std::uint32_t t) {
    return 10.0 * std::log(static_cast<double>(n)) * static_cast<double>(n) / static_cast<double>(t);
}

struct sparsity_violation {
    std::uint32_t t;
    std::uint32_t residual_max_degree;
    double bound;
};

/// Checks every t in [1, n) against the sparsity envelope and returns the
/// failures. The per-t failure probability is at most n^-9, so any violation
/// on a correct implementation is a bug signal.
inline std::vector<sparsity_violation> check_residual_sparsity(const greedy_trace& trace,
                                                               std::uint32_t n) {
    if (n != trace.n()) throw std::invalid_argument("check_residual_sparsity: n mismatch");
    std::vector<sparsity_violation> out;
    for (std::uint32_t t = 1; t < n; ++t) {
        const double bound = residual_sparsity_bound(n, t);
        const std::uint32_t deg = trace.residual_max_degree_at(t);
        if (static_cast<double>(deg) > bound) out.push_back({t, deg, bound});
    }
    return out;
}

inline void write_trace_csv(std::ostream& os, const greedy_trace& trace) {
    const std::uint32_t n = trace.n();
    os << "t,uncovered,residual_max_degree,bound,violated\n";
    for (std::uint32_t t = 1; t <= n; ++t) {
        const double bound = residual_sparsity_bound(n, t);
        const std::uint32_t deg = trace.residual_max_degree_at(t);
        os << t << ',' << trace.uncovered_count_at(t) << ',' << deg << ',' << bound << ','
           << (static_cast<double>(deg) > bound ? 1 : 0) << '\n';
    }
}

}  // namespace ccmis
