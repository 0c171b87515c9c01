#pragma once

// Pattern database tables: exact goal distances over an abstract space,
// filled by breadth-first search from the abstracted goal, plus DIV/MOD
// compression and the on-disk format.
//
// File layout ("BPDB1"): magic, domain tag byte ('S' or 'R'), board size
// byte (0 for the cube), pattern length byte, pattern labels, entry count as
// a 64-bit little-endian integer, then one byte per entry.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace bida {

inline constexpr std::uint64_t kDefaultPdbEntryCap = 1ull << 28;
inline constexpr std::uint8_t kPdbUnreachable = 0xFF;

template <class D>
class PdbTable {
public:
    using State = typename D::State;
    using Abstraction = typename D::Abstraction;

    static PdbTable build(std::vector<std::uint8_t> pattern, const State &goal,
                          std::uint64_t max_entries = kDefaultPdbEntryCap) {
        Abstraction abs(std::move(pattern), goal);
        const std::uint64_t size = abs.size();
        if (size > max_entries)
            throw std::runtime_error("PDB abstract space needs " + std::to_string(size) +
                                     " entries, cap is " + std::to_string(max_entries));

        PdbTable t(std::move(abs), goal);
        t.entries_.assign(size, kPdbUnreachable);
        t.entries_[t.abs_.rank(t.abs_.goal_abs())] = 0;

        std::vector<std::uint64_t> frontier{t.abs_.rank(t.abs_.goal_abs())};
        std::vector<std::uint64_t> next;
        std::vector<typename Abstraction::AbsState> succs;
        std::uint8_t depth = 0;
        while (!frontier.empty()) {
            ++depth;
            next.clear();
            for (std::uint64_t r : frontier) {
                t.abs_.successors(t.unrank(r), succs);
                for (const auto &a : succs) {
                    const std::uint64_t ar = t.abs_.rank(a);
                    if (t.entries_[ar] == kPdbUnreachable) {
                        t.entries_[ar] = depth;
                        next.push_back(ar);
                    }
                }
            }
            if (!next.empty())
                t.max_depth_ = depth;
            frontier.swap(next);
        }
        return t;
    }

    int lookup(const State &s) const {
        const std::uint8_t e = entries_[abs_.rank_state(s)];
        return e == kPdbUnreachable ? 0 : static_cast<int>(e);
    }

    std::uint64_t size() const { return entries_.size(); }
    int max_depth() const { return max_depth_; }
    const std::vector<std::uint8_t> &entries() const { return entries_; }
    const Abstraction &abstraction() const { return abs_; }
    const std::vector<std::uint8_t> &pattern() const { return abs_.pattern(); }
    const State &goal() const { return goal_; }

    void save(const std::string &path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot write PDB file: " + path);
        f.write("BPDB1", 5);
        f.put(D::kPdbTag);
        f.put(static_cast<char>(D::kPdbBoard));
        f.put(static_cast<char>(pattern().size()));
        f.write(reinterpret_cast<const char *>(pattern().data()),
                static_cast<std::streamsize>(pattern().size()));
        std::uint8_t cnt[8];
        const std::uint64_t n = entries_.size();
        for (int i = 0; i < 8; ++i)
            cnt[i] = static_cast<std::uint8_t>((n >> (8 * i)) & 0xFF);
        f.write(reinterpret_cast<const char *>(cnt), 8);
        f.write(reinterpret_cast<const char *>(entries_.data()),
                static_cast<std::streamsize>(entries_.size()));
        if (!f)
            throw std::runtime_error("short write to PDB file: " + path);
    }

    static PdbTable load(const std::string &path) {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot open PDB file: " + path);
        char magic[5];
        f.read(magic, 5);
        if (!f || std::memcmp(magic, "BPDB1", 5) != 0)
            throw std::runtime_error("not a BPDB1 file: " + path);
        const int tag = f.get();
        const int board = f.get();
        if (tag != D::kPdbTag || board != D::kPdbBoard)
            throw std::runtime_error("PDB domain mismatch: " + path);
        const int plen = f.get();
        if (plen <= 0)
            throw std::runtime_error("corrupt PDB header: " + path);
        std::vector<std::uint8_t> pattern(static_cast<std::size_t>(plen));
        f.read(reinterpret_cast<char *>(pattern.data()), plen);
        std::uint8_t cnt[8];
        f.read(reinterpret_cast<char *>(cnt), 8);
        if (!f)
            throw std::runtime_error("corrupt PDB header: " + path);
        std::uint64_t n = 0;
        for (int i = 0; i < 8; ++i)
            n |= static_cast<std::uint64_t>(cnt[i]) << (8 * i);

        const State goal = D::solved();
        PdbTable t(Abstraction(std::move(pattern), goal), goal);
        if (n != t.abs_.size())
            throw std::runtime_error("PDB entry count does not match pattern: " + path);
        t.entries_.resize(n);
        f.read(reinterpret_cast<char *>(t.entries_.data()), static_cast<std::streamsize>(n));
        if (!f)
            throw std::runtime_error("truncated PDB file: " + path);
        if (t.entries_[t.abs_.rank(t.abs_.goal_abs())] != 0)
            throw std::runtime_error("PDB goal entry is nonzero: " + path);
        for (std::uint8_t e : t.entries_)
            if (e != kPdbUnreachable && e > t.max_depth_)
                t.max_depth_ = e;
        return t;
    }

private:
    PdbTable(Abstraction abs, State goal) : abs_(std::move(abs)), goal_(std::move(goal)) {}

    typename Abstraction::AbsState unrank(std::uint64_t r) const { return abs_.unrank(r); }

    Abstraction abs_;
    State goal_;
    std::vector<std::uint8_t> entries_;
    int max_depth_ = 0;
};

enum class CompressMode { Div, Mod };

// Lossy PDB shrinking: each compressed entry is the minimum over its source
// group, so compressed lookups never exceed the source lookup.
template <class D>
class CompressedPdb {
public:
    using State = typename D::State;

    CompressedPdb(const PdbTable<D> &source, CompressMode mode, std::uint64_t k)
        : abs_(source.abstraction()), mode_(mode), k_(k), source_size_(source.size()) {
        if (k < 1)
            throw std::invalid_argument("CompressedPdb: k must be >= 1");
        const std::uint64_t m = source.size();
        stride_ = (m + k - 1) / k; // group count for DIV, modulus for MOD
        if (mode == CompressMode::Div) {
            entries_.assign(stride_, kPdbUnreachable);
            for (std::uint64_t j = 0; j < m; ++j)
                fold(j / k, source.entries()[j]);
        } else {
            entries_.assign(stride_, kPdbUnreachable);
            for (std::uint64_t j = 0; j < m; ++j)
                fold(j % stride_, source.entries()[j]);
        }
    }

    int lookup(const State &s) const {
        const std::uint64_t r = abs_.rank_state(s);
        const std::uint8_t e =
            entries_[mode_ == CompressMode::Div ? r / k_ : r % stride_];
        return e == kPdbUnreachable ? 0 : static_cast<int>(e);
    }

    CompressMode mode() const { return mode_; }
    std::uint64_t group_factor() const { return k_; }
    std::uint64_t source_size() const { return source_size_; }
    const std::vector<std::uint8_t> &entries() const { return entries_; }

private:
    void fold(std::uint64_t i, std::uint8_t v) {
        if (v < entries_[i])
            entries_[i] = v;
    }

    typename D::Abstraction abs_;
    CompressMode mode_;
    std::uint64_t k_;
    std::uint64_t stride_;
    std::uint64_t source_size_;
    std::vector<std::uint8_t> entries_;
};

template <class D>
CompressedPdb<D> compress_div(const PdbTable<D> &pdb, std::uint64_t k) {
    return CompressedPdb<D>(pdb, CompressMode::Div, k);
}

template <class D>
CompressedPdb<D> compress_mod(const PdbTable<D> &pdb, std::uint64_t k) {
    return CompressedPdb<D>(pdb, CompressMode::Mod, k);
}

} // namespace bida
