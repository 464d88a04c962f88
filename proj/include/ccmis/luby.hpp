#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ccmis/engine.hpp"
#include "ccmis/graph.hpp"
#include "ccmis/subset.hpp"

namespace ccmis {

// MIS finisher for the low-degree residual phase: classic random-priority
// symmetry breaking run as node programs inside the round engine. Each
// finisher round costs 2 engine rounds: active vertices exchange fresh
// priorities with their known peers, then strict lexicographic (priority, id)
// minima join and announce. A joiner's neighbors become covered on receipt
// of the announcement; the globally minimal active vertex always joins, so
// every round retires at least one vertex.

enum class luby_status : std::uint8_t { inactive, active, in_mis, covered };

struct luby_state {
    luby_status status = luby_status::inactive;
    std::vector<vertex_id> peers;  // possibly-active neighbors; refreshed from actual senders
    word priority = 0;

    bool operator==(const luby_state&) const = default;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Per-(seed, vertex, round) priority stream, independent of any schedule,
/// reduced to the engine's word range.
inline word luby_priority(std::uint64_t seed, vertex_id v, std::uint32_t round, word max_word) {
    std::uint64_t x = detail::splitmix64(seed ^ detail::splitmix64(0x6c75627900ULL + v));
    x = detail::splitmix64(x ^ (0x9e3779b97f4a7c15ULL * (round + 1)));
    const auto bound = static_cast<std::uint64_t>(max_word);
    return static_cast<word>((static_cast<unsigned __int128>(x) * bound) >> 64);
}

struct luby_outcome {
    std::uint32_t luby_rounds = 0;
    std::uint64_t rounds_consumed = 0;           // engine rounds, 2 per luby round
    std::vector<std::uint32_t> active_curve;     // active count before each luby round
};

inline std::uint32_t default_luby_round_cap(std::uint32_t n) {
    const std::uint32_t log2n = n > 1 ? std::bit_width(n - 1) : 1;
    return std::max<std::uint32_t>(64, 64 * log2n);
}

namespace luby_tag {
constexpr std::uint8_t priority = 40;
constexpr std::uint8_t join = 41;
}  // namespace luby_tag

/// Joins (p, id)-minima among a vertex and its received peer priorities.
/// Exposed for oracle tests of the per-round decision.
inline bool wins_round(word own_priority, vertex_id self, std::span<const delivery> received) {
    for (const delivery& d : received) {
        if (d.msg.tag != luby_tag::priority) continue;
        const word p = d.msg.w[0];
        if (p < own_priority || (p == own_priority && d.sender < self)) return false;
    }
    return true;
}

/// One finisher round: priority exchange, then joins and announcements.
/// Costs exactly 2 engine rounds and updates statuses in place.
template <typename State, typename GetLuby>
void luby_round(clique_engine<State>& eng, GetLuby get, std::uint64_t seed, std::uint32_t round) {
    eng.run_round([&](vertex_id v, State& st, const inbox_view&, auto& ob) {
        luby_state& L = get(st);
        if (L.status != luby_status::active) return;
        L.priority = luby_priority(seed, v, round, eng.max_word());
        const message m = message::of(luby_tag::priority, L.priority);
        for (vertex_id w : L.peers) ob.send(w, m);
    });

    eng.run_round([&](vertex_id v, State& st, const inbox_view& in, auto& ob) {
        luby_state& L = get(st);
        if (L.status != luby_status::active) return;
        L.peers.clear();
        for (const delivery& d : in.messages)
            if (d.msg.tag == luby_tag::priority) L.peers.push_back(d.sender);
        if (!wins_round(L.priority, v, in.messages)) return;
        L.status = luby_status::in_mis;
        const message m = message::of(luby_tag::join);
        for (vertex_id w : L.peers) ob.send(w, m);
    });

    eng.absorb([&](vertex_id, State& st, const inbox_view& in) {
        luby_state& L = get(st);
        if (L.status != luby_status::active) return;
        for (const delivery& d : in.messages)
            if (d.msg.tag == luby_tag::join) { L.status = luby_status::covered; break; }
    });
}

/// Runs finisher rounds until no active vertex remains. get(state) must
/// return the node's luby_state; the caller initializes statuses and peers
/// (active vertices must list every possibly-active neighbor).
template <typename State, typename GetLuby>
luby_outcome run_luby(clique_engine<State>& eng, GetLuby get, std::uint64_t seed,
                      std::uint32_t max_luby_rounds) {
    luby_outcome out;
    const auto count_active = [&] {
        std::uint32_t c = 0;
        for (vertex_id v = 0; v < eng.size(); ++v)
            if (get(eng.state(v)).status == luby_status::active) ++c;
        return c;
    };

    for (std::uint32_t active = count_active(); active > 0; active = count_active()) {
        if (out.luby_rounds >= max_luby_rounds)
            throw safety_cap_exceeded("finisher exceeded " + std::to_string(max_luby_rounds) +
                                      " rounds with " + std::to_string(active) +
                                      " vertices still active");
        out.active_curve.push_back(active);
        luby_round(eng, get, seed, out.luby_rounds);
        ++out.luby_rounds;
        out.rounds_consumed += 2;
    }
    return out;
}

struct finisher_result {
    vertex_subset in_set;
    luby_outcome outcome;
};

/// Standalone MIS on a residual graph in its own engine; every vertex starts
/// active with all of its neighbors as peers.
inline finisher_result run_finisher(const graph& residual, std::uint64_t seed,
                                    std::uint32_t max_luby_rounds) {
    struct node {
        luby_state fin;
        bool operator==(const node&) const = default;
    };
    finisher_result res;
    res.in_set = vertex_subset(residual.size());
    if (residual.size() == 0) return res;
    clique_engine<node> eng(residual.size());
    for (vertex_id v = 0; v < residual.size(); ++v) {
        auto& L = eng.state(v).fin;
        L.status = luby_status::active;
        L.peers.assign(residual.neighbors(v).begin(), residual.neighbors(v).end());
    }
    res.outcome = run_luby(eng, [](node& s) -> luby_state& { return s.fin; }, seed, max_luby_rounds);
    for (vertex_id v = 0; v < residual.size(); ++v)
        if (eng.state(v).fin.status == luby_status::in_mis) res.in_set.insert(v);
    return res;
}

inline finisher_result run_finisher(const graph& residual, std::uint64_t seed) {
    return run_finisher(residual, seed, default_luby_round_cap(residual.size()));
}

}  // namespace ccmis
