#pragma once

// Problem instances and the line-oriented instance text format.
//
//   stp <N> <N*N tile labels>
//   rc <label> <cp x8> <co x8> <ep x12> <eo x12>
//
// For the 4x4 puzzle, raw Korf-style lines of exactly 16 integers are also
// accepted.

#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rubiks.hpp"
#include "stp.hpp"

namespace bida {

template <class D>
struct Instance {
    typename D::State start;
    typename D::State goal;
    std::string label;
    std::uint64_t seed = 0;
    int walk_length = 0;
};

// Deterministic random walk from the goal. Each step picks uniformly among
// the legal actions minus the one that would retract the previous step, so
// the walk length upper-bounds the optimal solution cost.
template <class D>
Instance<D> random_walk_instance(const typename D::State &goal, int length, std::uint64_t seed) {
    if (length < 0)
        throw std::invalid_argument("random_walk_instance: negative length");
    std::mt19937_64 rng(seed);
    typename D::State s = goal;
    typename D::Action last = D::kNoAction;
    for (int step = 0; step < length; ++step) {
        std::array<typename D::Action, D::kMaxBranching> acts{};
        const int n = D::actions(s, last, /*prune=*/true, acts);
        const auto pick = std::uniform_int_distribution<int>(0, n - 1)(rng);
        last = acts[static_cast<std::size_t>(pick)];
        s = D::apply(s, last);
    }
    Instance<D> inst;
    inst.start = s;
    inst.goal = goal;
    inst.seed = seed;
    inst.walk_length = length;
    inst.label = "walk" + std::to_string(length) + "-s" + std::to_string(seed);
    return inst;
}

namespace detail {

template <int N>
void format_line(std::ostream &os, const Instance<TilePuzzle<N>> &inst) {
    os << "stp " << N;
    for (int i = 0; i < TilePuzzle<N>::kCells; ++i)
        os << ' ' << static_cast<int>(inst.start.tiles[static_cast<std::size_t>(i)]);
}

inline void format_line(std::ostream &os, const Instance<RubiksCube> &inst) {
    std::string label = inst.label.empty() ? std::string("rc") : inst.label;
    for (char &c : label)
        if (c == ' ')
            c = '_';
    os << "rc " << label;
    for (int i = 0; i < 8; ++i)
        os << ' ' << static_cast<int>(inst.start.cp[static_cast<std::size_t>(i)]);
    for (int i = 0; i < 8; ++i)
        os << ' ' << static_cast<int>(inst.start.co[static_cast<std::size_t>(i)]);
    for (int i = 0; i < 12; ++i)
        os << ' ' << static_cast<int>(inst.start.ep[static_cast<std::size_t>(i)]);
    for (int i = 0; i < 12; ++i)
        os << ' ' << static_cast<int>(inst.start.eo[static_cast<std::size_t>(i)]);
}

template <int N>
Instance<TilePuzzle<N>> parse_line(const std::vector<std::string> &tok, int line_no,
                                   const TilePuzzle<N> *) {
    using D = TilePuzzle<N>;
    std::vector<int> tiles;
    if (!tok.empty() && tok[0] == "stp") {
        if (tok.size() != static_cast<std::size_t>(2 + D::kCells) || std::stoi(tok[1]) != N)
            throw std::runtime_error("instance line " + std::to_string(line_no) +
                                     ": expected 'stp " + std::to_string(N) + "' with " +
                                     std::to_string(D::kCells) + " tiles");
        for (std::size_t i = 2; i < tok.size(); ++i)
            tiles.push_back(std::stoi(tok[i]));
    } else if (N == 4 && tok.size() == 16) {
        // Korf benchmark format: 16 bare integers per line.
        for (const std::string &t : tok)
            tiles.push_back(std::stoi(t));
    } else {
        throw std::runtime_error("instance line " + std::to_string(line_no) +
                                 ": unrecognized sliding-tile line");
    }
    Instance<D> inst;
    inst.start = D::from_tiles(tiles);
    inst.goal = D::solved();
    inst.label = "line" + std::to_string(line_no);
    return inst;
}

inline Instance<RubiksCube> parse_line(const std::vector<std::string> &tok, int line_no,
                                       const RubiksCube *) {
    if (tok.size() != 2 + 40 || tok[0] != "rc")
        throw std::runtime_error("instance line " + std::to_string(line_no) +
                                 ": expected 'rc <label>' with 40 integers");
    RubiksCube::State s;
    std::size_t k = 2;
    for (int i = 0; i < 8; ++i)
        s.cp[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::stoi(tok[k++]));
    for (int i = 0; i < 8; ++i)
        s.co[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::stoi(tok[k++]));
    for (int i = 0; i < 12; ++i)
        s.ep[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::stoi(tok[k++]));
    for (int i = 0; i < 12; ++i)
        s.eo[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::stoi(tok[k++]));
    if (!RubiksCube::valid(s))
        throw std::runtime_error("instance line " + std::to_string(line_no) +
                                 ": cube state violates invariants");
    Instance<RubiksCube> inst;
    inst.start = s;
    inst.goal = RubiksCube::solved();
    inst.label = tok[1];
    return inst;
}

} // namespace detail

template <class D>
void write_instances(std::ostream &os, const std::vector<Instance<D>> &instances) {
    for (const Instance<D> &inst : instances) {
        detail::format_line(os, inst);
        os << '\n';
    }
}

template <class D>
std::vector<Instance<D>> parse_instances(std::istream &is) {
    std::vector<Instance<D>> out;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::vector<std::string> tok;
        std::string t;
        while (ls >> t)
            tok.push_back(t);
        if (tok.empty() || tok[0][0] == '#')
            continue;
        out.push_back(detail::parse_line(tok, line_no, static_cast<const D *>(nullptr)));
    }
    return out;
}

template <class D>
std::vector<Instance<D>> load_instances(const std::string &path) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open instance file: " + path);
    return parse_instances<D>(f);
}

} // namespace bida
