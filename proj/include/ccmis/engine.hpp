#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccmis/subset.hpp"

namespace ccmis {

// Synchronous round engine for an n-node fully connected message-passing
// network. A round is unlimited local computation per node followed by one
// communication step; a node may send at most one word-bounded message to
// each other node per round, and deliveries become readable only in the
// following round. Three communication primitives are provided:
//
//   run_round      one engine round of point-to-point messages (cost 1)
//   broadcast_all  every node sends one word to everyone (cost 1)
//   lenzen_route   up to n messages converge on one destination; modeled as
//                  a costed black box (cost route_cost) whose precondition
//                  "total message count <= n" is validated, not re-derived
//
// Every primitive audits congestion (at most one message per ordered pair)
// and the word budget (at most 3 payload words, each in [0, n^2)). absorb()
// is a zero-cost receive-only pass for reading the last delivery; local
// computation is free in this model.

using word = std::int64_t;

class congestion_violation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class word_size_violation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class routing_precondition_violation : public std::runtime_error {
public:
    routing_precondition_violation(std::uint64_t offered_, std::uint64_t capacity_)
        : std::runtime_error("lenzen_route: " + std::to_string(offered_) +
                             " messages offered, capacity is " + std::to_string(capacity_)),
          offered(offered_),
          capacity(capacity_) {}
    std::uint64_t offered;
    std::uint64_t capacity;
};

class safety_cap_exceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One O(log n)-bit message: up to 3 integer words, each in [0, n^2), plus a
/// one-byte tag.
struct message {
    std::uint8_t tag = 0;
    std::uint8_t count = 0;
    std::array<word, 3> w{};

    static message of(std::uint8_t tag) { return {tag, 0, {}}; }
    static message of(std::uint8_t tag, word a) { return {tag, 1, {a, 0, 0}}; }
    static message of(std::uint8_t tag, word a, word b) { return {tag, 2, {a, b, 0}}; }
    static message of(std::uint8_t tag, word a, word b, word c) { return {tag, 3, {a, b, c}}; }

    bool operator==(const message&) const = default;
};

struct delivery {
    vertex_id sender = 0;
    message msg;
    bool operator==(const delivery&) const = default;
};

enum class round_kind : std::uint8_t { engine, broadcast, route };

struct round_report {
    std::uint64_t round_index = 0;
    round_kind kind = round_kind::engine;
    std::uint64_t messages_sent = 0;
    std::uint32_t max_pair_load = 0;
    std::uint32_t rounds_charged = 1;
    std::uint32_t primitive_invocations = 0;
    std::uint64_t logical_rounds_after = 0;

    bool operator==(const round_report&) const = default;
};

inline void write_round_reports_jsonl(std::ostream& os, std::span<const round_report> reports) {
    static constexpr const char* names[] = {"engine", "broadcast", "route"};
    for (const auto& r : reports) {
        os << "{\"round_index\":" << r.round_index << ",\"kind\":\""
           << names[static_cast<int>(r.kind)] << "\",\"messages_sent\":" << r.messages_sent
           << ",\"max_pair_load\":" << r.max_pair_load << ",\"rounds_charged\":" << r.rounds_charged
           << ",\"primitive_invocations\":" << r.primitive_invocations
           << ",\"logical_rounds_after\":" << r.logical_rounds_after << "}\n";
    }
}

struct sim_clock {
    std::uint64_t logical_rounds = 0;
    std::uint64_t engine_rounds = 0;
    std::uint64_t primitive_invocations = 0;
    std::uint32_t route_cost = 2;
};

struct engine_config {
    std::uint32_t route_cost = 2;
    // Runs every pass twice with opposite node orders and compares outcomes;
    // node programs must not observe the within-round update order.
    bool check_schedule_independence = false;
};

/// What a node can read during its compute phase: the previous round's
/// point-to-point deliveries (sorted by sender) and, after a broadcast round,
/// all n broadcast words indexed by sender.
struct inbox_view {
    std::span<const delivery> messages;
    std::span<const word> broadcast;

    bool has_broadcast() const { return !broadcast.empty(); }
};

template <typename State>
class clique_engine {
public:
    explicit clique_engine(std::uint32_t n, engine_config cfg = {})
        : n_(n), cfg_(cfg), states_(n), inbox_msgs_(n), dest_stamp_(n, 0) {
        if (n < 1) throw std::invalid_argument("clique_engine: n must be >= 1");
        clock_.route_cost = cfg.route_cost;
        max_word_ = static_cast<word>(std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n)));
    }

    std::uint32_t size() const { return n_; }
    word max_word() const { return max_word_; }
    State& state(vertex_id v) { return states_.at(v); }
    const State& state(vertex_id v) const { return states_.at(v); }
    const sim_clock& clock() const { return clock_; }
    std::span<const round_report> reports() const { return reports_; }

    /// Collects an outbox from every node and delivers it as the next round's
    /// inboxes. f(self, state, inbox, outbox).
    template <typename F>
    round_report run_round(F&& f) {
        staged_.assign(n_, {});
        run_pass([&](vertex_id v, State& st, const inbox_view& in) {
            outbox ob{this, v};
            f(v, st, in, ob);
        });
        for (auto& box : staged_)
            std::sort(box.begin(), box.end(),
                      [](const delivery& a, const delivery& b) { return a.sender < b.sender; });
        commit_messages();
        return push_report(round_kind::engine, pass_sent_, 1, 0);
    }

    /// One word from every node to every node. f(self, state, inbox) -> word.
    template <typename F>
    round_report broadcast_all(F&& f) {
        staged_bcast_.assign(n_, 0);
        run_pass([&](vertex_id v, State& st, const inbox_view& in) {
            const word value = f(v, st, in);
            check_word(value);
            staged_bcast_[v] = value;
        });
        for (auto& box : inbox_msgs_) box.clear();
        inbox_bcast_ = staged_bcast_;
        const std::uint64_t sent = n_ > 1 ? static_cast<std::uint64_t>(n_) * (n_ - 1) : 0;
        return push_report(round_kind::broadcast, sent, 1, 0);
    }

    /// Routing primitive: each node offers a message list for `dest`; all are
    /// delivered in route_cost logical rounds provided the total does not
    /// exceed n. A violating call is still charged before it throws, and
    /// delivers nothing; callers that retry must use idempotent producers.
    template <typename F>
    round_report lenzen_route(vertex_id dest, F&& f) {
        if (dest >= n_) throw std::invalid_argument("lenzen_route: bad destination");
        staged_.assign(n_, {});
        run_pass([&](vertex_id v, State& st, const inbox_view& in) {
            std::vector<message> msgs = f(v, st, in);
            for (const message& m : msgs) check_message(m);
            pass_sent_ += msgs.size();
            for (message& m : msgs) staged_[dest].push_back({v, std::move(m)});
        });
        if (pass_sent_ > n_) {
            push_report(round_kind::route, pass_sent_, clock_.route_cost, 1);
            throw routing_precondition_violation(pass_sent_, n_);
        }
        std::stable_sort(staged_[dest].begin(), staged_[dest].end(),
                         [](const delivery& a, const delivery& b) { return a.sender < b.sender; });
        commit_messages();
        return push_report(round_kind::route, pass_sent_, clock_.route_cost, 1);
    }

    /// Zero-cost receive-only pass; consumes the pending deliveries.
    template <typename F>
    void absorb(F&& f) {
        run_pass([&](vertex_id v, State& st, const inbox_view& in) { f(v, st, in); });
        for (auto& box : inbox_msgs_) box.clear();
        inbox_bcast_.clear();
    }

    class outbox {
    public:
        void send(vertex_id dest, const message& m) {
            if (dest >= eng_->n_) throw std::invalid_argument("outbox: bad destination");
            if (dest == self_) throw std::invalid_argument("outbox: self-messages are local state");
            eng_->check_message(m);
            if (eng_->dest_stamp_[dest] == stamp_)
                throw congestion_violation("node " + std::to_string(self_) +
                                           " sent two messages to node " + std::to_string(dest) +
                                           " in one round");
            eng_->dest_stamp_[dest] = stamp_;
            eng_->staged_[dest].push_back({self_, m});
            ++eng_->pass_sent_;
        }

    private:
        friend class clique_engine;
        outbox(clique_engine* eng, vertex_id self)
            : eng_(eng), self_(self), stamp_(++eng->stamp_counter_) {}
        clique_engine* eng_;
        vertex_id self_;
        std::uint64_t stamp_;
    };

private:
    friend class outbox;

    inbox_view inbox_of(vertex_id v) const {
        return {std::span<const delivery>(inbox_msgs_[v]), std::span<const word>(inbox_bcast_)};
    }

    // Applies the per-node compute phase, optionally twice with opposite
    // orders to assert that the update order is unobservable.
    template <typename Body>
    void run_pass(Body&& body) {
        pass_sent_ = 0;
        if (!cfg_.check_schedule_independence) {
            for (vertex_id v = 0; v < n_; ++v) body(v, states_[v], inbox_of(v));
            return;
        }
        const std::vector<State> snapshot = states_;
        const auto staged_snapshot = staged_;
        const auto bcast_snapshot = staged_bcast_;
        for (vertex_id v = 0; v < n_; ++v) body(v, states_[v], inbox_of(v));
        std::vector<State> forward_states = std::move(states_);
        auto forward_staged = sorted_staging();
        auto forward_bcast = staged_bcast_;
        const auto forward_sent = pass_sent_;
        states_ = snapshot;
        staged_ = staged_snapshot;
        staged_bcast_ = bcast_snapshot;
        pass_sent_ = 0;
        for (vertex_id v = n_; v-- > 0;) body(v, states_[v], inbox_of(v));
        if (states_ != forward_states || pass_sent_ != forward_sent ||
            sorted_staging() != forward_staged || staged_bcast_ != forward_bcast)
            throw std::logic_error("clique_engine: node program observed the update order");
    }

    std::vector<std::vector<delivery>> sorted_staging() const {
        auto copy = staged_;
        for (auto& box : copy)
            std::stable_sort(box.begin(), box.end(),
                             [](const delivery& a, const delivery& b) { return a.sender < b.sender; });
        return copy;
    }

    void commit_messages() {
        inbox_msgs_ = std::move(staged_);
        staged_.clear();
        inbox_bcast_.clear();
    }

    void check_word(word value) const {
        if (value < 0 || value >= max_word_)
            throw word_size_violation("payload word " + std::to_string(value) +
                                      " outside [0, " + std::to_string(max_word_) + ")");
    }

    void check_message(const message& m) const {
        if (m.count > 3) throw word_size_violation("message carries more than 3 words");
        for (std::uint8_t i = 0; i < m.count; ++i) check_word(m.w[i]);
    }

    round_report push_report(round_kind kind, std::uint64_t sent, std::uint32_t charged,
                             std::uint32_t primitive) {
        round_report rep;
        rep.round_index = reports_.size();
        rep.kind = kind;
        rep.messages_sent = sent;
        rep.max_pair_load = sent > 0 ? 1 : 0;
        rep.rounds_charged = charged;
        rep.primitive_invocations = primitive;
        clock_.logical_rounds += charged;
        if (primitive) ++clock_.primitive_invocations; else ++clock_.engine_rounds;
        rep.logical_rounds_after = clock_.logical_rounds;
        reports_.push_back(rep);
        return rep;
    }

    std::uint32_t n_;
    engine_config cfg_;
    word max_word_ = 1;
    sim_clock clock_;
    std::vector<State> states_;
    std::vector<std::vector<delivery>> inbox_msgs_;
    std::vector<word> inbox_bcast_;
    std::vector<std::vector<delivery>> staged_;
    std::vector<word> staged_bcast_;
    std::vector<std::uint64_t> dest_stamp_;
    std::uint64_t stamp_counter_ = 0;
    std::uint64_t pass_sent_ = 0;
    std::vector<round_report> reports_;
};

}  // namespace ccmis
