#pragma once

// 3x3 Rubik's cube on the cubie level. Corner positions are numbered
// URF=0, UFL=1, ULB=2, UBR=3, DFR=4, DLF=5, DBL=6, DRB=7 and edge positions
// UR=0, UF=1, UL=2, UB=3, DR=4, DF=5, DL=6, DB=7, FR=8, FL=9, BL=10, BR=11.
// cp[i] is the cubie sitting at position i; co/eo are twists relative to the
// solved placement. An action is (face, number of clockwise quarter turns).

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ranking.hpp"

namespace bida {

class RubiksCube {
public:
    static constexpr int kFaces = 6; // U=0, D=1, L=2, R=3, F=4, B=5
    static constexpr int kMaxBranching = 18;
    static constexpr int kDInitCap = 6;
    static constexpr char kPdbTag = 'R';
    static constexpr int kPdbBoard = 0;

    using Action = std::uint8_t; // face * 3 + (quarter turns - 1)
    static constexpr Action kNoAction = 0xFF;

    struct State {
        std::array<std::uint8_t, 8> cp{};
        std::array<std::uint8_t, 8> co{};
        std::array<std::uint8_t, 12> ep{};
        std::array<std::uint8_t, 12> eo{};

        bool operator==(const State &o) const {
            return cp == o.cp && co == o.co && ep == o.ep && eo == o.eo;
        }
    };

    static State solved() {
        State s;
        for (int i = 0; i < 8; ++i)
            s.cp[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
        for (int i = 0; i < 12; ++i)
            s.ep[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
        return s;
    }

    static int face_of(Action a) { return a / 3; }
    static int turns_of(Action a) { return a % 3 + 1; }
    static Action make_action(int face, int turns) {
        return static_cast<Action>(face * 3 + turns - 1);
    }

    static Action inverse(Action a) {
        return make_action(face_of(a), 4 - turns_of(a));
    }

    // All 18 face twists; with prune on, twists of the face just twisted are
    // excluded (consecutive same-face twists always merge into one).
    static int actions(const State &, Action last, bool prune,
                       std::array<Action, kMaxBranching> &out) {
        const int skip_face = (prune && last != kNoAction) ? face_of(last) : -1;
        int n = 0;
        for (int f = 0; f < kFaces; ++f) {
            if (f == skip_face)
                continue;
            for (int t = 1; t <= 3; ++t)
                out[static_cast<std::size_t>(n++)] = make_action(f, t);
        }
        return n;
    }

    static State apply(const State &s, Action a) {
        if (a >= 18)
            throw std::invalid_argument("RubiksCube::apply: illegal action");
        const MoveTable &m = move_tables()[a];
        State n;
        for (int i = 0; i < 8; ++i) {
            n.cp[static_cast<std::size_t>(i)] = s.cp[m.cf[static_cast<std::size_t>(i)]];
            n.co[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
                (s.co[m.cf[static_cast<std::size_t>(i)]] + m.co[static_cast<std::size_t>(i)]) % 3);
        }
        for (int i = 0; i < 12; ++i) {
            n.ep[static_cast<std::size_t>(i)] = s.ep[m.ef[static_cast<std::size_t>(i)]];
            n.eo[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
                (s.eo[m.ef[static_cast<std::size_t>(i)]] + m.eo[static_cast<std::size_t>(i)]) % 2);
        }
        return n;
    }

    static State undo(const State &s, Action a) { return apply(s, inverse(a)); }

    static bool valid(const State &s) {
        std::array<bool, 8> cseen{};
        std::array<bool, 12> eseen{};
        int cosum = 0, eosum = 0;
        for (int i = 0; i < 8; ++i) {
            if (s.cp[static_cast<std::size_t>(i)] >= 8 || cseen[s.cp[static_cast<std::size_t>(i)]])
                return false;
            cseen[s.cp[static_cast<std::size_t>(i)]] = true;
            if (s.co[static_cast<std::size_t>(i)] >= 3)
                return false;
            cosum += s.co[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i < 12; ++i) {
            if (s.ep[static_cast<std::size_t>(i)] >= 12 || eseen[s.ep[static_cast<std::size_t>(i)]])
                return false;
            eseen[s.ep[static_cast<std::size_t>(i)]] = true;
            if (s.eo[static_cast<std::size_t>(i)] >= 2)
                return false;
            eosum += s.eo[static_cast<std::size_t>(i)];
        }
        if (cosum % 3 != 0 || eosum % 2 != 0)
            return false;
        return perm_parity(std::span<const std::uint8_t>(s.cp)) ==
               perm_parity(std::span<const std::uint8_t>(s.ep));
    }

    struct Packed {
        std::uint64_t lo = 0, hi = 0;
        bool operator==(const Packed &o) const { return lo == o.lo && hi == o.hi; }
    };

    static Packed pack(const State &s) {
        Packed p;
        for (int i = 0; i < 8; ++i)
            p.lo |= static_cast<std::uint64_t>(s.cp[static_cast<std::size_t>(i)]) << (3 * i);
        for (int i = 0; i < 8; ++i)
            p.lo |= static_cast<std::uint64_t>(s.co[static_cast<std::size_t>(i)]) << (24 + 2 * i);
        for (int i = 0; i < 12; ++i)
            p.lo |= static_cast<std::uint64_t>(s.eo[static_cast<std::size_t>(i)]) << (40 + i);
        for (int i = 0; i < 12; ++i)
            p.hi |= static_cast<std::uint64_t>(s.ep[static_cast<std::size_t>(i)]) << (4 * i);
        return p;
    }

    struct Hash {
        std::size_t operator()(const State &s) const {
            const Packed p = pack(s);
            std::uint64_t v = p.lo * 0x9e3779b97f4a7c15ULL;
            v ^= p.hi + 0x9e3779b97f4a7c15ULL + (v << 6) + (v >> 2);
            v ^= v >> 29;
            v *= 0xbf58476d1ce4e5b9ULL;
            v ^= v >> 32;
            return static_cast<std::size_t>(v);
        }
    };

    // One-hot per cubie over (position, orientation): 8*24 corner entries
    // followed by 12*24 edge entries.
    static constexpr int feature_length() { return 8 * 24 + 12 * 24; }

    static void encode(const State &s, float *out) {
        for (int i = 0; i < feature_length(); ++i)
            out[static_cast<std::size_t>(i)] = 0.0f;
        for (int pos = 0; pos < 8; ++pos) {
            const int c = s.cp[static_cast<std::size_t>(pos)];
            out[static_cast<std::size_t>(c * 24 + pos * 3 + s.co[static_cast<std::size_t>(pos)])] = 1.0f;
        }
        for (int pos = 0; pos < 12; ++pos) {
            const int e = s.ep[static_cast<std::size_t>(pos)];
            out[static_cast<std::size_t>(192 + e * 24 + pos * 2 + s.eo[static_cast<std::size_t>(pos)])] = 1.0f;
        }
    }

    static State decode(const float *x) {
        State s;
        for (int c = 0; c < 8; ++c) {
            int best = 0;
            for (int j = 1; j < 24; ++j)
                if (x[static_cast<std::size_t>(c * 24 + j)] > x[static_cast<std::size_t>(c * 24 + best)])
                    best = j;
            s.cp[static_cast<std::size_t>(best / 3)] = static_cast<std::uint8_t>(c);
            s.co[static_cast<std::size_t>(best / 3)] = static_cast<std::uint8_t>(best % 3);
        }
        for (int e = 0; e < 12; ++e) {
            int best = 0;
            for (int j = 1; j < 24; ++j)
                if (x[static_cast<std::size_t>(192 + e * 24 + j)] >
                    x[static_cast<std::size_t>(192 + e * 24 + best)])
                    best = j;
            s.ep[static_cast<std::size_t>(best / 2)] = static_cast<std::uint8_t>(e);
            s.eo[static_cast<std::size_t>(best / 2)] = static_cast<std::uint8_t>(best % 2);
        }
        return s;
    }

    // Rank over a corner pattern: partial-permutation rank of the tracked
    // corners' positions times 3^m, plus their orientations in mixed radix.
    static std::uint64_t rank(const State &s, std::span<const std::uint8_t> pattern) {
        std::vector<std::uint8_t> pos(pattern.size(), 0xFF);
        std::vector<std::uint8_t> ori(pattern.size(), 0);
        for (std::size_t i = 0; i < pattern.size(); ++i)
            if (pattern[i] >= 8)
                throw std::invalid_argument("RubiksCube::rank: only corner labels 0..7 supported");
        for (int p = 0; p < 8; ++p) {
            const std::uint8_t c = s.cp[static_cast<std::size_t>(p)];
            for (std::size_t i = 0; i < pattern.size(); ++i)
                if (pattern[i] == c) {
                    pos[i] = static_cast<std::uint8_t>(p);
                    ori[i] = s.co[static_cast<std::size_t>(p)];
                }
        }
        std::uint64_t r = partial_perm_rank(pos, 8);
        for (std::size_t i = 0; i < pattern.size(); ++i)
            r = r * 3 + ori[i];
        return r;
    }

    // Abstract space tracking a subset of corners: their positions and
    // orientations. Every move is preserved, so abstract distances are
    // admissible and consistent.
    class Abstraction {
    public:
        struct AbsState {
            std::vector<std::uint8_t> pos;
            std::vector<std::uint8_t> ori;
            bool operator==(const AbsState &o) const { return pos == o.pos && ori == o.ori; }
        };

        Abstraction(std::vector<std::uint8_t> pattern, const State &goal)
            : pattern_(std::move(pattern)) {
            if (pattern_.empty())
                throw std::invalid_argument("RubiksCube::Abstraction: empty pattern");
            for (std::uint8_t label : pattern_)
                if (label >= 8)
                    throw std::invalid_argument(
                        "RubiksCube::Abstraction: only corner labels 0..7 supported");
            for (int a = 0; a < 18; ++a) {
                const MoveTable &m = move_tables()[static_cast<std::size_t>(a)];
                for (int i = 0; i < 8; ++i)
                    dest_[static_cast<std::size_t>(a)][m.cf[static_cast<std::size_t>(i)]] =
                        static_cast<std::uint8_t>(i);
            }
            goal_ = project(goal);
        }

        std::uint64_t size() const {
            std::uint64_t r = partial_perm_count(8, static_cast<int>(pattern_.size()));
            for (std::size_t i = 0; i < pattern_.size(); ++i)
                r *= 3;
            return r;
        }

        AbsState project(const State &s) const {
            AbsState a;
            a.pos.assign(pattern_.size(), 0xFF);
            a.ori.assign(pattern_.size(), 0);
            for (int p = 0; p < 8; ++p) {
                const std::uint8_t c = s.cp[static_cast<std::size_t>(p)];
                for (std::size_t i = 0; i < pattern_.size(); ++i)
                    if (pattern_[i] == c) {
                        a.pos[i] = static_cast<std::uint8_t>(p);
                        a.ori[i] = s.co[static_cast<std::size_t>(p)];
                    }
            }
            return a;
        }

        std::uint64_t rank(const AbsState &a) const {
            std::uint64_t r = partial_perm_rank(a.pos, 8);
            for (std::size_t i = 0; i < a.ori.size(); ++i)
                r = r * 3 + a.ori[i];
            return r;
        }

        std::uint64_t rank_state(const State &s) const { return rank(project(s)); }

        AbsState unrank(std::uint64_t r) const {
            AbsState a;
            const std::size_t m = pattern_.size();
            a.ori.assign(m, 0);
            for (std::size_t i = m; i-- > 0;) {
                a.ori[i] = static_cast<std::uint8_t>(r % 3);
                r /= 3;
            }
            a.pos.assign(m, 0);
            partial_perm_unrank(r, 8, a.pos);
            return a;
        }

        const AbsState &goal_abs() const { return goal_; }

        void successors(const AbsState &a, std::vector<AbsState> &out) const {
            out.clear();
            out.reserve(18);
            for (int act = 0; act < 18; ++act) {
                const MoveTable &m = move_tables()[static_cast<std::size_t>(act)];
                AbsState n = a;
                for (std::size_t i = 0; i < a.pos.size(); ++i) {
                    const std::uint8_t d = dest_[static_cast<std::size_t>(act)][a.pos[i]];
                    n.pos[i] = d;
                    n.ori[i] = static_cast<std::uint8_t>((a.ori[i] + m.co[d]) % 3);
                }
                out.push_back(std::move(n));
            }
        }

        const std::vector<std::uint8_t> &pattern() const { return pattern_; }

    private:
        std::vector<std::uint8_t> pattern_;
        std::array<std::array<std::uint8_t, 8>, 18> dest_{};
        AbsState goal_;
    };

private:
    struct MoveTable {
        std::array<std::uint8_t, 8> cf{};
        std::array<std::uint8_t, 8> co{};
        std::array<std::uint8_t, 12> ef{};
        std::array<std::uint8_t, 12> eo{};
    };

    static bool perm_parity(std::span<const std::uint8_t> p) {
        bool parity = false;
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = i + 1; j < p.size(); ++j)
                if (p[i] > p[j])
                    parity = !parity;
        return parity;
    }

    static MoveTable compose(const MoveTable &a, const MoveTable &b) {
        // Result of applying a then b.
        MoveTable c;
        for (int i = 0; i < 8; ++i) {
            c.cf[static_cast<std::size_t>(i)] = a.cf[b.cf[static_cast<std::size_t>(i)]];
            c.co[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
                (a.co[b.cf[static_cast<std::size_t>(i)]] + b.co[static_cast<std::size_t>(i)]) % 3);
        }
        for (int i = 0; i < 12; ++i) {
            c.ef[static_cast<std::size_t>(i)] = a.ef[b.ef[static_cast<std::size_t>(i)]];
            c.eo[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
                (a.eo[b.ef[static_cast<std::size_t>(i)]] + b.eo[static_cast<std::size_t>(i)]) % 2);
        }
        return c;
    }

    static const std::array<MoveTable, 18> &move_tables() {
        static const std::array<MoveTable, 18> tables = [] {
            // Clockwise quarter turns; cf[i]/ef[i] name the position whose
            // cubie moves to position i, co/eo the twist added on arrival.
            std::array<MoveTable, 6> q{};
            q[0] = MoveTable{{3, 0, 1, 2, 4, 5, 6, 7},
                             {0, 0, 0, 0, 0, 0, 0, 0},
                             {3, 0, 1, 2, 4, 5, 6, 7, 8, 9, 10, 11},
                             {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}}; // U
            q[1] = MoveTable{{0, 1, 2, 3, 5, 6, 7, 4},
                             {0, 0, 0, 0, 0, 0, 0, 0},
                             {0, 1, 2, 3, 5, 6, 7, 4, 8, 9, 10, 11},
                             {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}}; // D
            q[2] = MoveTable{{0, 2, 6, 3, 4, 1, 5, 7},
                             {0, 1, 2, 0, 0, 2, 1, 0},
                             {0, 1, 10, 3, 4, 5, 9, 7, 8, 2, 6, 11},
                             {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}}; // L
            q[3] = MoveTable{{4, 1, 2, 0, 7, 5, 6, 3},
                             {2, 0, 0, 1, 1, 0, 0, 2},
                             {8, 1, 2, 3, 11, 5, 6, 7, 4, 9, 10, 0},
                             {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}}; // R
            q[4] = MoveTable{{1, 5, 2, 3, 0, 4, 6, 7},
                             {1, 2, 0, 0, 2, 1, 0, 0},
                             {0, 9, 2, 3, 4, 8, 6, 7, 1, 5, 10, 11},
                             {0, 1, 0, 0, 0, 1, 0, 0, 1, 1, 0, 0}}; // F
            q[5] = MoveTable{{0, 1, 3, 7, 4, 5, 2, 6},
                             {0, 0, 1, 2, 0, 0, 2, 1},
                             {0, 1, 2, 11, 4, 5, 6, 10, 8, 9, 3, 7},
                             {0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1, 1}}; // B
            std::array<MoveTable, 18> all{};
            for (int f = 0; f < 6; ++f) {
                all[static_cast<std::size_t>(f * 3)] = q[static_cast<std::size_t>(f)];
                all[static_cast<std::size_t>(f * 3 + 1)] =
                    compose(q[static_cast<std::size_t>(f)], q[static_cast<std::size_t>(f)]);
                all[static_cast<std::size_t>(f * 3 + 2)] = compose(
                    all[static_cast<std::size_t>(f * 3 + 1)], q[static_cast<std::size_t>(f)]);
            }
            return all;
        }();
        return tables;
    }
};

} // namespace bida
