#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <map>
#include <random>

#include "bida/heuristic.hpp"
#include "bida/pdb.hpp"
#include "bida/rubiks.hpp"
#include "bida/search.hpp"
#include "bida/stp.hpp"

using namespace bida;

namespace {

using S3 = TilePuzzle<3>;

S3::State random_state3(std::mt19937_64 &rng, int steps = 50) {
    S3::State s = S3::solved();
    S3::Action last = S3::kNoAction;
    for (int i = 0; i < steps; ++i) {
        std::array<S3::Action, 4> acts{};
        const int n = S3::actions(s, last, true, acts);
        last = acts[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, n - 1)(rng))];
        s = S3::apply(s, last);
    }
    return s;
}

const std::unordered_map<S3::State, int, S3::Hash> &true_distances() {
    static const auto table = bfs_distances<S3>(S3::solved());
    return table;
}

// Naive abstract BFS for a blank-tracked tile pattern, written directly on
// tracked-position vectors with no shared code with the production builder.
std::map<std::vector<int>, int> naive_stp_blank_pdb(const std::vector<int> &pattern) {
    const int blank_at = static_cast<int>(std::find(pattern.begin(), pattern.end(), 0) -
                                          pattern.begin());
    std::vector<int> goal;
    for (int label : pattern)
        goal.push_back(label); // solved state: label sits in its own cell
    std::map<std::vector<int>, int> dist{{goal, 0}};
    std::vector<std::vector<int>> front{goal};
    int d = 0;
    auto neighbors = [](int cell, std::vector<int> &out) {
        out.clear();
        const int r = cell / 3, c = cell % 3;
        if (r > 0) out.push_back(cell - 3);
        if (r < 2) out.push_back(cell + 3);
        if (c > 0) out.push_back(cell - 1);
        if (c < 2) out.push_back(cell + 1);
    };
    std::vector<int> nb;
    while (!front.empty()) {
        std::vector<std::vector<int>> next;
        for (const auto &a : front) {
            neighbors(a[static_cast<std::size_t>(blank_at)], nb);
            for (int target : nb) {
                auto b = a;
                b[static_cast<std::size_t>(blank_at)] = target;
                for (std::size_t i = 0; i < b.size(); ++i)
                    if (static_cast<int>(i) != blank_at && a[i] == target)
                        b[i] = a[static_cast<std::size_t>(blank_at)];
                if (dist.emplace(b, d + 1).second)
                    next.push_back(std::move(b));
            }
        }
        front.swap(next);
        ++d;
    }
    return dist;
}

} // namespace

TEST_CASE("tile PDB matches a naive abstract BFS") {
    const std::vector<std::uint8_t> pattern{0, 1, 2, 3};
    const PdbTable<S3> pdb = PdbTable<S3>::build(pattern, S3::solved());
    CHECK(pdb.size() == 3024);

    const auto naive = naive_stp_blank_pdb({0, 1, 2, 3});
    CHECK(naive.size() == 3024);
    std::size_t checked = 0;
    for (const auto &[pos, d] : naive) {
        S3::Abstraction::AbsState a(pos.begin(), pos.end());
        CHECK(static_cast<int>(pdb.entries()[pdb.abstraction().rank(a)]) == d);
        ++checked;
    }
    CHECK(checked == 3024);
}

TEST_CASE("rubiks corner PDB matches a naive abstract BFS") {
    using D = RubiksCube;
    const std::vector<std::uint8_t> pattern{0, 1, 2, 3};
    const PdbTable<D> pdb = PdbTable<D>::build(pattern, D::solved());
    CHECK(pdb.size() == 1680ull * 81);

    // Independent BFS over (positions, orientations) of the tracked corners,
    // stepping through representative concrete states.
    D::Abstraction abs(pattern, D::solved());
    using Key = std::pair<std::array<int, 4>, std::array<int, 4>>;
    auto project = [](const D::State &s) {
        Key k{};
        for (int pos = 0; pos < 8; ++pos) {
            const int c = s.cp[static_cast<std::size_t>(pos)];
            if (c < 4) {
                k.first[static_cast<std::size_t>(c)] = pos;
                k.second[static_cast<std::size_t>(c)] = s.co[static_cast<std::size_t>(pos)];
            }
        }
        return k;
    };
    auto representative = [](const Key &k) {
        D::State s = D::solved();
        std::array<bool, 8> used{};
        for (int c = 0; c < 4; ++c)
            used[static_cast<std::size_t>(k.first[static_cast<std::size_t>(c)])] = true;
        std::vector<int> free;
        for (int p = 0; p < 8; ++p)
            if (!used[static_cast<std::size_t>(p)])
                free.push_back(p);
        for (int c = 0; c < 4; ++c) {
            s.cp[static_cast<std::size_t>(k.first[static_cast<std::size_t>(c)])] =
                static_cast<std::uint8_t>(c);
            s.co[static_cast<std::size_t>(k.first[static_cast<std::size_t>(c)])] =
                static_cast<std::uint8_t>(k.second[static_cast<std::size_t>(c)]);
        }
        for (std::size_t i = 0; i < free.size(); ++i) {
            s.cp[static_cast<std::size_t>(free[i])] = static_cast<std::uint8_t>(4 + i);
            s.co[static_cast<std::size_t>(free[i])] = 0;
        }
        return s;
    };

    std::map<Key, int> dist{{project(D::solved()), 0}};
    std::vector<Key> front{project(D::solved())};
    int d = 0;
    while (!front.empty()) {
        std::vector<Key> next;
        for (const Key &k : front) {
            const D::State rep = representative(k);
            for (D::Action a = 0; a < 18; ++a) {
                const Key nk = project(D::apply(rep, a));
                if (dist.emplace(nk, d + 1).second)
                    next.push_back(nk);
            }
        }
        front.swap(next);
        ++d;
    }
    CHECK(dist.size() == 1680ull * 81);

    std::size_t checked = 0;
    for (const auto &[k, dd] : dist) {
        D::Abstraction::AbsState a;
        for (int c = 0; c < 4; ++c)
            a.pos.push_back(static_cast<std::uint8_t>(k.first[static_cast<std::size_t>(c)]));
        for (int c = 0; c < 4; ++c)
            a.ori.push_back(static_cast<std::uint8_t>(k.second[static_cast<std::size_t>(c)]));
        CHECK(static_cast<int>(pdb.entries()[abs.rank(a)]) == dd);
        ++checked;
    }
    CHECK(checked == pdb.size());
}

TEST_CASE("PDB lookups are admissible and consistent") {
    const auto pdb = std::make_shared<const PdbTable<S3>>(
        PdbTable<S3>::build({0, 1, 2, 3}, S3::solved()));
    PdbHeuristic<S3> h(pdb);
    ManhattanHeuristic<3> mh;
    const auto &truth = true_distances();

    CHECK(h.lookup(S3::solved()) == 0);
    CHECK(mh.lookup(S3::solved()) == 0);

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        const S3::State s = random_state3(rng);
        const int d = truth.at(s);
        CHECK(h.lookup(s) <= d);
        CHECK(mh.lookup(s) <= d);
        std::array<S3::Action, 4> acts{};
        const int n = S3::actions(s, S3::kNoAction, false, acts);
        for (int i = 0; i < n; ++i) {
            const S3::State t = S3::apply(s, acts[static_cast<std::size_t>(i)]);
            CHECK(std::abs(h.lookup(s) - h.lookup(t)) <= 1);
        }
    }
}

TEST_CASE("additive disjoint PDBs stay admissible") {
    // blank excluded from both patterns so each move is charged at most once
    const auto p1 = std::make_shared<const PdbTable<S3>>(
        PdbTable<S3>::build({1, 2, 3}, S3::solved()));
    const auto p2 = std::make_shared<const PdbTable<S3>>(
        PdbTable<S3>::build({4, 5, 6, 7, 8}, S3::solved()));
    AdditiveHeuristic<S3> add({p1, p2});
    PdbHeuristic<S3> h1(p1), h2(p2);
    const auto &truth = true_distances();

    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 1000; ++trial) {
        const S3::State s = random_state3(rng);
        const int a = add.lookup(s);
        CHECK(a <= truth.at(s));
        CHECK(a >= h1.lookup(s));
        CHECK(a >= h2.lookup(s));
    }
    CHECK_THROWS_AS(AdditiveHeuristic<S3>({}), std::invalid_argument);
}

TEST_CASE("DIV and MOD compression never exceed the source") {
    const PdbTable<S3> pdb = PdbTable<S3>::build({0, 1, 2, 3}, S3::solved());
    std::mt19937_64 rng(13);
    std::vector<S3::State> states;
    for (int i = 0; i < 500; ++i)
        states.push_back(random_state3(rng));

    for (std::uint64_t k : {2ull, 4ull, 16ull}) {
        const CompressedPdb<S3> div = compress_div(pdb, k);
        const CompressedPdb<S3> mod = compress_mod(pdb, k);
        CHECK(div.entries().size() == (pdb.size() + k - 1) / k);
        CHECK(mod.entries().size() == (pdb.size() + k - 1) / k);
        for (const S3::State &s : states) {
            const int full = PdbHeuristic<S3>(std::make_shared<const PdbTable<S3>>(pdb)).lookup(s);
            CHECK(div.lookup(s) <= full);
            CHECK(mod.lookup(s) <= full);
            CHECK(div.lookup(s) >= 0);
            CHECK(mod.lookup(s) >= 0);
        }
    }
    CHECK_THROWS_AS(compress_div(pdb, 0), std::invalid_argument);
}

TEST_CASE("PDB files round trip") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "bida_test_pdb.bin";
    const PdbTable<S3> pdb = PdbTable<S3>::build({0, 1, 2}, S3::solved());
    pdb.save(path.string());
    const PdbTable<S3> back = PdbTable<S3>::load(path.string());
    CHECK(back.size() == pdb.size());
    CHECK(back.entries() == pdb.entries());
    CHECK(back.max_depth() == pdb.max_depth());

    // rebuilding writes an identical file
    const fs::path path2 = fs::temp_directory_path() / "bida_test_pdb2.bin";
    PdbTable<S3>::build({0, 1, 2}, S3::solved()).save(path2.string());
    std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
    std::string ca((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string cb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(ca == cb);

    CHECK_THROWS_AS(PdbTable<RubiksCube>::load(path.string()), std::runtime_error);
    CHECK_THROWS_AS(PdbTable<S3>::load("/nonexistent/pdb.bin"), std::runtime_error);
    fs::remove(path);
    fs::remove(path2);
}

TEST_CASE("quantile class selection") {
    ClassDistribution d{{0.2, 0.4, 0.4}};
    CHECK(quantile_class(d, 0.5) == 1);
    CHECK(quantile_class(d, 1.0) == 2);
    CHECK(quantile_class(d, 0.1) == 0);

    ClassDistribution point{{0.0, 0.0, 0.0, 1.0}};
    for (double q : {0.01, 0.5, 1.0})
        CHECK(quantile_class(point, q) == 3);

    // monotone in q
    ClassDistribution m{{0.1, 0.2, 0.3, 0.4}};
    int prev = 0;
    for (double q = 0.05; q <= 1.0; q += 0.05) {
        const int c = quantile_class(m, q);
        CHECK(c >= prev);
        prev = c;
    }

    CHECK_THROWS_AS(quantile_class(d, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(quantile_class(d, 1.1), std::invalid_argument);
    ClassDistribution bad{{0.5, 0.1}};
    CHECK_THROWS_AS(quantile_class(bad, 0.5), std::invalid_argument);
}

TEST_CASE("ensemble minimum") {
    const std::vector<int> v{3, 5, 4};
    CHECK(ensemble_min(v) == 3);
    const std::vector<int> one{7};
    CHECK(ensemble_min(one) == 7);
    CHECK_THROWS_AS(ensemble_min(std::span<const int>{}), std::invalid_argument);

    // min with an admissible member is admissible
    const auto pdb = std::make_shared<const PdbTable<S3>>(
        PdbTable<S3>::build({0, 1, 2, 3}, S3::solved()));
    PdbHeuristic<S3> h(pdb);
    const auto &truth = true_distances();
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 500; ++trial) {
        const S3::State s = random_state3(rng);
        const std::vector<int> est{h.lookup(s) + 10, h.lookup(s)};
        CHECK(ensemble_min(est) <= truth.at(s));
    }
}
