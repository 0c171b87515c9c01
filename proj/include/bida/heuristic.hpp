#pragma once

// Admissible heuristic sources: PDB lookups (plain, compressed, additive
// sums), Manhattan distance for the tile puzzle, and the quantile/ensemble
// mechanics used to keep classifier outputs conservative.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdb.hpp"
#include "stp.hpp"

namespace bida {

template <class D>
class Heuristic {
public:
    virtual ~Heuristic() = default;
    virtual int lookup(const typename D::State &s) const = 0;
};

template <class D>
class ZeroHeuristic final : public Heuristic<D> {
public:
    int lookup(const typename D::State &) const override { return 0; }
};

template <class D>
class PdbHeuristic final : public Heuristic<D> {
public:
    explicit PdbHeuristic(std::shared_ptr<const PdbTable<D>> table) : table_(std::move(table)) {}
    int lookup(const typename D::State &s) const override { return table_->lookup(s); }
    const PdbTable<D> &table() const { return *table_; }

private:
    std::shared_ptr<const PdbTable<D>> table_;
};

template <class D>
class CompressedPdbHeuristic final : public Heuristic<D> {
public:
    explicit CompressedPdbHeuristic(std::shared_ptr<const CompressedPdb<D>> table)
        : table_(std::move(table)) {}
    int lookup(const typename D::State &s) const override { return table_->lookup(s); }

private:
    std::shared_ptr<const CompressedPdb<D>> table_;
};

// Sum of lookups over disjoint-pattern PDBs built without the blank, so each
// move is counted by at most one component.
template <class D>
class AdditiveHeuristic final : public Heuristic<D> {
public:
    explicit AdditiveHeuristic(std::vector<std::shared_ptr<const PdbTable<D>>> parts)
        : parts_(std::move(parts)) {
        if (parts_.empty())
            throw std::invalid_argument("AdditiveHeuristic: no components");
    }
    int lookup(const typename D::State &s) const override {
        int sum = 0;
        for (const auto &p : parts_)
            sum += p->lookup(s);
        return sum;
    }

private:
    std::vector<std::shared_ptr<const PdbTable<D>>> parts_;
};

template <int N>
class ManhattanHeuristic final : public Heuristic<TilePuzzle<N>> {
public:
    int lookup(const typename TilePuzzle<N>::State &s) const override {
        int sum = 0;
        for (int cell = 0; cell < TilePuzzle<N>::kCells; ++cell) {
            const int t = s.tiles[static_cast<std::size_t>(cell)];
            if (t == 0)
                continue;
            sum += std::abs(cell / N - t / N) + std::abs(cell % N - t % N);
        }
        return sum;
    }
};

// Probabilities over ordered integer classes 0..C-1.
struct ClassDistribution {
    std::vector<double> p;

    void validate() const {
        double sum = 0.0;
        for (double v : p) {
            if (v < 0.0)
                throw std::invalid_argument("ClassDistribution: negative probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("ClassDistribution: probabilities must sum to 1");
    }
};

// Smallest class whose cumulative probability reaches q. Lower quantiles give
// more conservative (smaller) heuristic values.
inline int quantile_class(const ClassDistribution &dist, double q) {
    if (q <= 0.0 || q > 1.0)
        throw std::invalid_argument("quantile_class: q must be in (0, 1]");
    dist.validate();
    double cum = 0.0;
    for (std::size_t c = 0; c < dist.p.size(); ++c) {
        cum += dist.p[c];
        if (cum >= q - 1e-12)
            return static_cast<int>(c);
    }
    return static_cast<int>(dist.p.size()) - 1;
}

inline int ensemble_min(std::span<const int> estimates) {
    if (estimates.empty())
        throw std::invalid_argument("ensemble_min: empty estimate list");
    return *std::min_element(estimates.begin(), estimates.end());
}

} // namespace bida
