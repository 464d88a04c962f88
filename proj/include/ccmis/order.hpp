#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "ccmis/graph.hpp"

namespace ccmis {

/// A processing order: perm maps rank -> vertex, position maps vertex -> rank.
/// Ranks are 0-based; rank 0 is processed first.
struct vertex_order {
    std::vector<vertex_id> perm;
    std::vector<std::uint32_t> position;

    std::uint32_t size() const { return static_cast<std::uint32_t>(perm.size()); }

    static vertex_order identity(std::uint32_t n) {
        vertex_order o;
        o.perm.resize(n);
        std::iota(o.perm.begin(), o.perm.end(), 0);
        o.position = o.perm;
        return o;
    }

    static vertex_order from_perm(std::vector<vertex_id> perm) {
        vertex_order o;
        const auto n = static_cast<std::uint32_t>(perm.size());
        o.position.assign(n, UINT32_MAX);
        for (std::uint32_t r = 0; r < n; ++r) {
            if (perm[r] >= n || o.position[perm[r]] != UINT32_MAX)
                throw std::invalid_argument("vertex_order: not a permutation of [0, n)");
            o.position[perm[r]] = r;
        }
        o.perm = std::move(perm);
        return o;
    }

    bool operator==(const vertex_order&) const = default;
};

/// Fisher-Yates permutation from a seeded generator; uniform over all n! orders.
inline vertex_order uniform_order(std::uint32_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("uniform_order: n must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<vertex_id> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[detail::bounded_rand(rng, i + 1)]);
    return vertex_order::from_perm(std::move(perm));
}

}  // namespace ccmis
