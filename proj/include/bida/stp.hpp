#pragma once

// N x N sliding-tile puzzle. Tiles are labelled 0..N*N-1 with 0 as the blank;
// the solved state is the identity permutation (blank in cell 0). Actions
// move the blank.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ranking.hpp"

namespace bida {

template <int N>
class TilePuzzle {
    static_assert(N >= 2 && N <= 4, "TilePuzzle supports N in [2,4]");

public:
    static constexpr int kCells = N * N;
    static constexpr int kMaxBranching = 4;
    // Shallowest cycle has length 12, so depths up to 5 have no duplicate
    // equal-length paths and the deduplicated frontier stays exact.
    static constexpr int kDInitCap = 5;
    static constexpr char kPdbTag = 'S';
    static constexpr int kPdbBoard = kCells;

    using Action = std::uint8_t;
    static constexpr Action kUp = 0, kDown = 1, kLeft = 2, kRight = 3;
    static constexpr Action kNoAction = 0xFF;

    struct State {
        std::array<std::uint8_t, kCells> tiles{}; // tiles[cell] = label, 0 = blank
        std::uint8_t blank = 0;

        bool operator==(const State &o) const { return tiles == o.tiles; }
    };

    static State solved() {
        State s;
        for (int i = 0; i < kCells; ++i)
            s.tiles[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
        s.blank = 0;
        return s;
    }

    static State from_tiles(std::span<const int> tiles) {
        if (static_cast<int>(tiles.size()) != kCells)
            throw std::invalid_argument("TilePuzzle::from_tiles: wrong length");
        State s;
        std::array<bool, kCells> seen{};
        for (int i = 0; i < kCells; ++i) {
            const int t = tiles[static_cast<std::size_t>(i)];
            if (t < 0 || t >= kCells || seen[static_cast<std::size_t>(t)])
                throw std::invalid_argument("TilePuzzle::from_tiles: not a permutation");
            seen[static_cast<std::size_t>(t)] = true;
            s.tiles[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(t);
            if (t == 0)
                s.blank = static_cast<std::uint8_t>(i);
        }
        return s;
    }

    static bool valid(const State &s) {
        std::array<bool, kCells> seen{};
        for (int i = 0; i < kCells; ++i) {
            const int t = s.tiles[static_cast<std::size_t>(i)];
            if (t < 0 || t >= kCells || seen[static_cast<std::size_t>(t)])
                return false;
            seen[static_cast<std::size_t>(t)] = true;
        }
        return s.tiles[s.blank] == 0;
    }

    static Action inverse(Action a) { return a ^ 1; }

    // Legal blank moves. With prune on and a previous action given, the
    // inverse of that action is excluded so the parent is never regenerated.
    static int actions(const State &s, Action last, bool prune,
                       std::array<Action, kMaxBranching> &out) {
        const int r = s.blank / N, c = s.blank % N;
        const Action skip = (prune && last != kNoAction) ? inverse(last) : kNoAction;
        int n = 0;
        if (r > 0 && kUp != skip)
            out[static_cast<std::size_t>(n++)] = kUp;
        if (r < N - 1 && kDown != skip)
            out[static_cast<std::size_t>(n++)] = kDown;
        if (c > 0 && kLeft != skip)
            out[static_cast<std::size_t>(n++)] = kLeft;
        if (c < N - 1 && kRight != skip)
            out[static_cast<std::size_t>(n++)] = kRight;
        return n;
    }

    static State apply(const State &s, Action a) {
        const int r = s.blank / N, c = s.blank % N;
        int target = -1;
        switch (a) {
        case kUp: target = r > 0 ? s.blank - N : -1; break;
        case kDown: target = r < N - 1 ? s.blank + N : -1; break;
        case kLeft: target = c > 0 ? s.blank - 1 : -1; break;
        case kRight: target = c < N - 1 ? s.blank + 1 : -1; break;
        default: break;
        }
        if (target < 0)
            throw std::invalid_argument("TilePuzzle::apply: illegal action");
        State n = s;
        n.tiles[n.blank] = n.tiles[static_cast<std::size_t>(target)];
        n.tiles[static_cast<std::size_t>(target)] = 0;
        n.blank = static_cast<std::uint8_t>(target);
        return n;
    }

    static State undo(const State &s, Action a) { return apply(s, inverse(a)); }

    // 4 bits per cell; fits a u64 exactly for N=4.
    static std::uint64_t pack(const State &s) {
        std::uint64_t v = 0;
        for (int i = 0; i < kCells; ++i)
            v |= static_cast<std::uint64_t>(s.tiles[static_cast<std::size_t>(i)]) << (4 * i);
        return v;
    }

    struct Hash {
        std::size_t operator()(const State &s) const {
            std::uint64_t v = pack(s);
            v ^= v >> 33;
            v *= 0xff51afd7ed558ccdULL;
            v ^= v >> 33;
            return static_cast<std::size_t>(v);
        }
    };

    // One-hot per cell over labels.
    static constexpr int feature_length() { return kCells * kCells; }

    static void encode(const State &s, float *out) {
        for (int i = 0; i < feature_length(); ++i)
            out[static_cast<std::size_t>(i)] = 0.0f;
        for (int cell = 0; cell < kCells; ++cell)
            out[static_cast<std::size_t>(cell * kCells + s.tiles[static_cast<std::size_t>(cell)])] = 1.0f;
    }

    static State decode(const float *x) {
        State s;
        for (int cell = 0; cell < kCells; ++cell) {
            int best = 0;
            for (int t = 1; t < kCells; ++t)
                if (x[static_cast<std::size_t>(cell * kCells + t)] >
                    x[static_cast<std::size_t>(cell * kCells + best)])
                    best = t;
            s.tiles[static_cast<std::size_t>(cell)] = static_cast<std::uint8_t>(best);
            if (best == 0)
                s.blank = static_cast<std::uint8_t>(cell);
        }
        return s;
    }

    // Lexicographic rank of the cell positions of the pattern labels, taken
    // in pattern order.
    static std::uint64_t rank(const State &s, std::span<const std::uint8_t> pattern) {
        std::vector<std::uint8_t> pos(pattern.size());
        for (std::size_t i = 0; i < pattern.size(); ++i) {
            if (pattern[i] >= kCells)
                throw std::invalid_argument("TilePuzzle::rank: pattern label out of range");
            pos[i] = 0xFF;
        }
        for (int cell = 0; cell < kCells; ++cell) {
            const std::uint8_t t = s.tiles[static_cast<std::size_t>(cell)];
            for (std::size_t i = 0; i < pattern.size(); ++i)
                if (pattern[i] == t)
                    pos[i] = static_cast<std::uint8_t>(cell);
        }
        return partial_perm_rank(pos, kCells);
    }

    // Abstract space induced by a pattern of tracked labels. If the blank
    // (label 0) is tracked, abstract moves are blank moves; otherwise moves
    // slide a tracked tile into any cell free of tracked tiles, which keeps
    // disjoint patterns additive.
    class Abstraction {
    public:
        // Positions of the tracked labels, in pattern order.
        using AbsState = std::vector<std::uint8_t>;

        Abstraction(std::vector<std::uint8_t> pattern, const State &goal)
            : pattern_(std::move(pattern)) {
            if (pattern_.empty())
                throw std::invalid_argument("TilePuzzle::Abstraction: empty pattern");
            blank_index_ = -1;
            for (std::size_t i = 0; i < pattern_.size(); ++i) {
                if (pattern_[i] >= kCells)
                    throw std::invalid_argument("TilePuzzle::Abstraction: label out of range");
                if (pattern_[i] == 0)
                    blank_index_ = static_cast<int>(i);
            }
            goal_ = project(goal);
        }

        std::uint64_t size() const {
            return partial_perm_count(kCells, static_cast<int>(pattern_.size()));
        }

        AbsState project(const State &s) const {
            AbsState a(pattern_.size(), 0xFF);
            for (int cell = 0; cell < kCells; ++cell) {
                const std::uint8_t t = s.tiles[static_cast<std::size_t>(cell)];
                for (std::size_t i = 0; i < pattern_.size(); ++i)
                    if (pattern_[i] == t)
                        a[i] = static_cast<std::uint8_t>(cell);
            }
            return a;
        }

        std::uint64_t rank(const AbsState &a) const { return partial_perm_rank(a, kCells); }

        AbsState unrank(std::uint64_t r) const {
            AbsState a(pattern_.size());
            partial_perm_unrank(r, kCells, a);
            return a;
        }

        std::uint64_t rank_state(const State &s) const { return rank(project(s)); }

        const AbsState &goal_abs() const { return goal_; }

        void successors(const AbsState &a, std::vector<AbsState> &out) const {
            out.clear();
            if (blank_index_ >= 0) {
                const int bp = a[static_cast<std::size_t>(blank_index_)];
                std::array<int, 4> nb{};
                const int deg = neighbors(bp, nb);
                for (int d = 0; d < deg; ++d) {
                    AbsState n = a;
                    n[static_cast<std::size_t>(blank_index_)] = static_cast<std::uint8_t>(nb[static_cast<std::size_t>(d)]);
                    for (std::size_t i = 0; i < a.size(); ++i)
                        if (static_cast<int>(i) != blank_index_ &&
                            a[i] == nb[static_cast<std::size_t>(d)])
                            n[i] = static_cast<std::uint8_t>(bp);
                    out.push_back(std::move(n));
                }
            } else {
                for (std::size_t i = 0; i < a.size(); ++i) {
                    std::array<int, 4> nb{};
                    const int deg = neighbors(a[i], nb);
                    for (int d = 0; d < deg; ++d) {
                        bool occupied = false;
                        for (std::size_t j = 0; j < a.size(); ++j)
                            if (a[j] == nb[static_cast<std::size_t>(d)])
                                occupied = true;
                        if (occupied)
                            continue;
                        AbsState n = a;
                        n[i] = static_cast<std::uint8_t>(nb[static_cast<std::size_t>(d)]);
                        out.push_back(std::move(n));
                    }
                }
            }
        }

        const std::vector<std::uint8_t> &pattern() const { return pattern_; }

    private:
        static int neighbors(int cell, std::array<int, 4> &out) {
            const int r = cell / N, c = cell % N;
            int n = 0;
            if (r > 0)
                out[static_cast<std::size_t>(n++)] = cell - N;
            if (r < N - 1)
                out[static_cast<std::size_t>(n++)] = cell + N;
            if (c > 0)
                out[static_cast<std::size_t>(n++)] = cell - 1;
            if (c < N - 1)
                out[static_cast<std::size_t>(n++)] = cell + 1;
            return n;
        }

        std::vector<std::uint8_t> pattern_;
        int blank_index_;
        AbsState goal_;
    };
};

} // namespace bida
