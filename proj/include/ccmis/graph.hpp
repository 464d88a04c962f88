#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ccmis/subset.hpp"

namespace ccmis {

using edge = std::pair<vertex_id, vertex_id>;

/// Simple undirected graph, immutable after construction. Adjacency rows are
/// sorted so iteration order is deterministic and membership is a binary search.
class graph {
public:
    graph() = default;

    static graph from_edges(std::uint32_t n, std::vector<edge> edges) {
        graph g;
        g.n_ = n;
        g.m_ = edges.size();
        std::vector<std::uint32_t> deg(n, 0);
        for (auto& [u, v] : edges) {
            if (u >= n || v >= n) throw std::invalid_argument("graph: endpoint outside [0, n)");
            if (u == v) throw std::invalid_argument("graph: self-loop rejected");
            if (u > v) std::swap(u, v);
            ++deg[u];
            ++deg[v];
        }
        g.offsets_.assign(n + 1, 0);
        for (std::uint32_t v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + deg[v];
        g.adj_.resize(g.offsets_[n]);
        std::vector<std::uint32_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
        for (const auto& [u, v] : edges) {
            g.adj_[cursor[u]++] = v;
            g.adj_[cursor[v]++] = u;
        }
        for (std::uint32_t v = 0; v < n; ++v) {
            auto row = g.adj_.begin() + g.offsets_[v];
            auto end = g.adj_.begin() + g.offsets_[v + 1];
            std::sort(row, end);
            if (std::adjacent_find(row, end) != end)
                throw std::invalid_argument("graph: duplicate edge rejected");
        }
        return g;
    }

    std::uint32_t size() const { return n_; }
    std::uint64_t edge_count() const { return m_; }

    std::uint32_t degree(vertex_id v) const {
        check(v);
        return offsets_[v + 1] - offsets_[v];
    }

    std::span<const vertex_id> neighbors(vertex_id v) const {
        check(v);
        return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
    }

    bool has_edge(vertex_id u, vertex_id v) const {
        auto row = neighbors(u);
        check(v);
        return std::binary_search(row.begin(), row.end(), v);
    }

    template <typename F>
    void for_each_edge(F&& f) const {  // each edge once, as (u, v) with u < v
        for (vertex_id u = 0; u < n_; ++u)
            for (vertex_id v : neighbors(u))
                if (u < v) f(u, v);
    }

    std::vector<edge> edges() const {
        std::vector<edge> out;
        out.reserve(m_);
        for_each_edge([&](vertex_id u, vertex_id v) { out.emplace_back(u, v); });
        return out;
    }

    bool operator==(const graph&) const = default;

private:
    void check(vertex_id v) const {
        if (v >= n_) throw std::out_of_range("graph: vertex outside [0, n)");
    }

    std::uint32_t n_ = 0;
    std::uint64_t m_ = 0;
    std::vector<std::uint32_t> offsets_;
    std::vector<vertex_id> adj_;
};

inline std::uint32_t max_degree(const graph& g) {
    std::uint32_t d = 0;
    for (vertex_id v = 0; v < g.size(); ++v) d = std::max(d, g.degree(v));
    return d;
}

/// s together with every vertex adjacent to a member of s.
inline vertex_subset closed_neighborhood(const graph& g, const vertex_subset& s) {
    if (s.universe_size() != g.size())
        throw std::invalid_argument("closed_neighborhood: universe mismatch");
    vertex_subset out = s;
    s.for_each([&](vertex_id v) {
        for (vertex_id w : g.neighbors(v)) out.insert(w);
    });
    return out;
}

/// Induced subgraph with re-indexed vertices and the mapping back to the parent.
/// original[i] is the parent id of local vertex i; originals are ascending.
struct induced_graph {
    graph g;
    std::vector<vertex_id> original;
};

inline induced_graph induced_subgraph(const graph& g, const vertex_subset& s) {
    if (s.universe_size() != g.size())
        throw std::invalid_argument("induced_subgraph: universe mismatch");
    induced_graph out;
    out.original = s.to_vector();
    std::vector<std::uint32_t> local(g.size(), UINT32_MAX);
    for (std::uint32_t i = 0; i < out.original.size(); ++i) local[out.original[i]] = i;
    std::vector<edge> edges;
    for (vertex_id u : out.original)
        for (vertex_id v : g.neighbors(u))
            if (u < v && local[v] != UINT32_MAX) edges.emplace_back(local[u], local[v]);
    out.g = graph::from_edges(static_cast<std::uint32_t>(out.original.size()), std::move(edges));
    return out;
}

namespace detail {

// Lemire multiply-shift; keeps draws identical regardless of the standard
// library's distribution internals.
inline std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("bounded_rand: zero bound");
    unsigned __int128 m = static_cast<unsigned __int128>(rng()) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
        const std::uint64_t threshold = -bound % bound;
        while (lo < threshold) {
            m = static_cast<unsigned __int128>(rng()) * bound;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

inline double unit_open(std::mt19937_64& rng) {  // uniform in (0, 1]
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

}  // namespace detail

/// Erdos-Renyi G(n, p); every unordered pair is an edge independently with
/// probability p. Bit-identical for a fixed (n, p, seed).
inline graph gnp_random(std::uint32_t n, double p, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gnp_random: n must be >= 1");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("gnp_random: p must lie in [0, 1]");
    std::vector<edge> edges;
    const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    if (p >= 1.0) {
        for (vertex_id u = 0; u < n; ++u)
            for (vertex_id v = u + 1; v < n; ++v) edges.emplace_back(u, v);
    } else if (p > 0.0 && total > 0) {
        std::mt19937_64 rng(seed);
        edges.reserve(static_cast<std::size_t>(static_cast<double>(total) * p * 1.05) + 16);
        const double log_q = std::log1p(-p);
        // skip-sample over the linearized pair index: row u starts at offset(u)
        const auto offset = [&](std::uint64_t u) { return u * n - u * (u + 1) / 2; };
        std::uint64_t idx = 0;
        bool first = true;
        while (true) {
            const double skip = std::floor(std::log(detail::unit_open(rng)) / log_q);
            if (skip >= static_cast<double>(total)) break;
            idx += static_cast<std::uint64_t>(skip) + (first ? 0 : 1);
            first = false;
            if (idx >= total) break;
            std::uint64_t lo = 0, hi = n - 1;  // find row u with offset(u) <= idx < offset(u+1)
            while (lo < hi) {
                const std::uint64_t mid = (lo + hi + 1) / 2;
                if (offset(mid) <= idx) lo = mid; else hi = mid - 1;
            }
            const auto u = static_cast<vertex_id>(lo);
            const auto v = static_cast<vertex_id>(lo + 1 + (idx - offset(lo)));
            edges.emplace_back(u, v);
        }
    }
    return graph::from_edges(n, std::move(edges));
}

/// Random d-regular graph: configuration model, whole matchings rejected until
/// the result is simple.
inline graph random_regular(std::uint32_t n, std::uint32_t d, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("random_regular: n must be >= 1");
    if (d >= n) throw std::invalid_argument("random_regular: d must be < n");
    if ((static_cast<std::uint64_t>(n) * d) % 2 != 0)
        throw std::invalid_argument("random_regular: n*d must be even");
    if (d == 0) return graph::from_edges(n, {});
    std::mt19937_64 rng(seed);
    std::vector<vertex_id> stubs;
    stubs.reserve(static_cast<std::size_t>(n) * d);
    constexpr int max_attempts = 1000;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        stubs.clear();
        for (vertex_id v = 0; v < n; ++v)
            for (std::uint32_t i = 0; i < d; ++i) stubs.push_back(v);
        for (std::size_t i = stubs.size() - 1; i > 0; --i)
            std::swap(stubs[i], stubs[detail::bounded_rand(rng, i + 1)]);
        std::vector<edge> edges;
        edges.reserve(stubs.size() / 2);
        bool simple = true;
        for (std::size_t i = 0; i + 1 < stubs.size() && simple; i += 2) {
            vertex_id u = stubs[i], v = stubs[i + 1];
            if (u == v) { simple = false; break; }
            if (u > v) std::swap(u, v);
            edges.emplace_back(u, v);
        }
        if (!simple) continue;
        std::sort(edges.begin(), edges.end());
        if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) continue;
        return graph::from_edges(n, std::move(edges));
    }
    throw std::runtime_error("random_regular: no simple matching found");
}

inline graph path_graph(std::uint32_t n) {
    std::vector<edge> e;
    for (vertex_id v = 0; v + 1 < n; ++v) e.emplace_back(v, v + 1);
    return graph::from_edges(n, std::move(e));
}

inline graph cycle_graph(std::uint32_t n) {
    if (n < 3) throw std::invalid_argument("cycle_graph: n must be >= 3");
    std::vector<edge> e;
    for (vertex_id v = 0; v + 1 < n; ++v) e.emplace_back(v, v + 1);
    e.emplace_back(0, n - 1);
    return graph::from_edges(n, std::move(e));
}

inline graph complete_graph(std::uint32_t n) { return gnp_random(n, 1.0, 0); }

inline graph star_graph(std::uint32_t n) {
    std::vector<edge> e;
    for (vertex_id v = 1; v < n; ++v) e.emplace_back(0, v);
    return graph::from_edges(n, std::move(e));
}

/// Plain-text edge list: first line "n m", then m lines "u v" with u < v.
inline void write_edge_list(std::ostream& os, const graph& g) {
    os << g.size() << ' ' << g.edge_count() << '\n';
    g.for_each_edge([&](vertex_id u, vertex_id v) { os << u << ' ' << v << '\n'; });
}

inline graph read_edge_list(std::istream& is) {
    std::uint32_t n = 0;
    std::uint64_t m = 0;
    if (!(is >> n >> m)) throw std::runtime_error("edge list: bad header, expected \"n m\"");
    std::vector<edge> edges;
    edges.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) {
        vertex_id u, v;
        if (!(is >> u >> v)) throw std::runtime_error("edge list: truncated at edge " + std::to_string(i));
        if (u >= v) throw std::runtime_error("edge list: edges must satisfy u < v");
        edges.emplace_back(u, v);
    }
    return graph::from_edges(n, std::move(edges));
}

}  // namespace ccmis
