#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ccmis/graph.hpp"
#include "ccmis/subset.hpp"

namespace ccmis {

class size_limit_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Outcome of a maximal-independent-set check, with a witness on failure:
/// either an edge inside the set or a vertex that could still be added.
struct verify_result {
    enum class failure : std::uint8_t { none, dependent_edge, extendable_vertex };
    bool ok = true;
    failure kind = failure::none;
    vertex_id a = 0;
    vertex_id b = 0;
};

inline verify_result verify_mis(const graph& g, const vertex_subset& in_set) {
    if (in_set.universe_size() != g.size())
        throw std::invalid_argument("verify_mis: universe mismatch");
    verify_result res;
    for (vertex_id v = 0; v < g.size(); ++v) {
        if (in_set.contains(v)) {
            for (vertex_id w : g.neighbors(v)) {
                if (w > v && in_set.contains(w))
                    return {false, verify_result::failure::dependent_edge, v, w};
            }
        } else {
            bool covered = false;
            for (vertex_id w : g.neighbors(v))
                if (in_set.contains(w)) { covered = true; break; }
            if (!covered) return {false, verify_result::failure::extendable_vertex, v, 0};
        }
    }
    return res;
}

/// Exhaustive enumeration of every maximal independent set, for tiny oracles.
/// Results are sorted vertex lists in ascending lexicographic order.
inline std::vector<std::vector<vertex_id>> brute_force_all_mis(const graph& g) {
    const std::uint32_t n = g.size();
    if (n > 20) throw size_limit_error("brute_force_all_mis: n must be <= 20");
    std::vector<std::uint32_t> adj_mask(n, 0), closed_mask(n, 0);
    for (vertex_id v = 0; v < n; ++v) {
        for (vertex_id w : g.neighbors(v)) adj_mask[v] |= 1u << w;
        closed_mask[v] = adj_mask[v] | (1u << v);
    }
    const std::uint32_t all = n == 32 ? ~0u : (1u << n) - 1;
    std::vector<std::vector<vertex_id>> out;
    for (std::uint32_t mask = 0; mask <= all; ++mask) {
        bool independent = true;
        std::uint32_t covered = 0;
        for (std::uint32_t rest = mask; rest && independent; rest &= rest - 1) {
            const auto v = static_cast<vertex_id>(std::countr_zero(rest));
            independent = (adj_mask[v] & mask) == 0;
            covered |= closed_mask[v];
        }
        if (!independent || covered != all) continue;
        std::vector<vertex_id> members;
        for (std::uint32_t rest = mask; rest; rest &= rest - 1)
            members.push_back(static_cast<vertex_id>(std::countr_zero(rest)));
        out.push_back(std::move(members));
        if (mask == all) break;
    }
    return out;
}

}  // namespace ccmis
