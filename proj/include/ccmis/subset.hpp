#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ccmis {

using vertex_id = std::uint32_t;

/// Membership bitmap over a fixed vertex universe [0, n).
class vertex_subset {
public:
    vertex_subset() = default;

    explicit vertex_subset(std::uint32_t universe)
        : n_(universe), bits_((universe + 63) / 64, 0) {}

    static vertex_subset full(std::uint32_t universe) {
        vertex_subset s(universe);
        for (std::uint32_t v = 0; v < universe; ++v) s.bits_[v >> 6] |= std::uint64_t{1} << (v & 63);
        s.count_ = universe;
        return s;
    }

    std::uint32_t universe_size() const { return n_; }
    std::uint32_t size() const { return count_; }
    bool empty() const { return count_ == 0; }

    bool contains(vertex_id v) const {
        check(v);
        return (bits_[v >> 6] >> (v & 63)) & 1u;
    }

    void insert(vertex_id v) {
        check(v);
        std::uint64_t& w = bits_[v >> 6];
        const std::uint64_t bit = std::uint64_t{1} << (v & 63);
        count_ += !(w & bit);
        w |= bit;
    }

    void erase(vertex_id v) {
        check(v);
        std::uint64_t& w = bits_[v >> 6];
        const std::uint64_t bit = std::uint64_t{1} << (v & 63);
        count_ -= (w & bit) ? 1 : 0;
        w &= ~bit;
    }

    void clear() {
        bits_.assign(bits_.size(), 0);
        count_ = 0;
    }

    template <typename F>
    void for_each(F&& f) const {  // ascending vertex order
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            std::uint64_t w = bits_[i];
            while (w) {
                const int b = std::countr_zero(w);
                f(static_cast<vertex_id>(i * 64 + b));
                w &= w - 1;
            }
        }
    }

    std::vector<vertex_id> to_vector() const {
        std::vector<vertex_id> out;
        out.reserve(count_);
        for_each([&](vertex_id v) { out.push_back(v); });
        return out;
    }

    bool is_subset_of(const vertex_subset& other) const {
        require_same_universe(other);
        for (std::size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i] & ~other.bits_[i]) return false;
        return true;
    }

    vertex_subset& operator|=(const vertex_subset& other) {
        require_same_universe(other);
        count_ = 0;
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            bits_[i] |= other.bits_[i];
            count_ += static_cast<std::uint32_t>(std::popcount(bits_[i]));
        }
        return *this;
    }

    vertex_subset& operator&=(const vertex_subset& other) {
        require_same_universe(other);
        count_ = 0;
        for (std::size_t i = 0; i < bits_.size(); ++i) {
            bits_[i] &= other.bits_[i];
            count_ += static_cast<std::uint32_t>(std::popcount(bits_[i]));
        }
        return *this;
    }

    bool operator==(const vertex_subset&) const = default;

private:
    void check(vertex_id v) const {
        if (v >= n_) throw std::out_of_range("vertex_subset: vertex outside universe");
    }
    void require_same_universe(const vertex_subset& other) const {
        if (n_ != other.n_) throw std::invalid_argument("vertex_subset: universe mismatch");
    }

    std::uint32_t n_ = 0;
    std::uint32_t count_ = 0;
    std::vector<std::uint64_t> bits_;
};

}  // namespace ccmis
