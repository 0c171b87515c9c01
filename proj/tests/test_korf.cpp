#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "bida/search.hpp"

using namespace bida;
using F = TilePuzzle<4>;

namespace {

std::string data_dir() {
    const char *d = std::getenv("BIDA_DATA_DIR");
    REQUIRE(d != nullptr);
    return d;
}

// Building the two six-tile tables takes ~10s each, so cache them across
// test runs.
std::shared_ptr<const PdbTable<F>> cached_pdb(const std::vector<std::uint8_t> &pattern) {
    namespace fs = std::filesystem;
    std::string name = "bida_korf";
    for (const std::uint8_t t : pattern)
        name += "_" + std::to_string(t);
    const fs::path path = fs::temp_directory_path() / (name + ".pdb");
    if (fs::exists(path))
        return std::make_shared<PdbTable<F>>(PdbTable<F>::load(path.string()));
    auto t = std::make_shared<PdbTable<F>>(PdbTable<F>::build(pattern, F::solved()));
    t->save(path.string());
    return t;
}

} // namespace

TEST_CASE("15-puzzle additive 6-6-3 pattern databases") {
    const auto p1 = cached_pdb({1, 2, 3, 4, 5, 6});
    const auto p2 = cached_pdb({7, 8, 9, 10, 11, 12});
    const auto p3 = cached_pdb({13, 14, 15});

    CHECK(p1->size() == 5765760); // P(16, 6)
    CHECK(p2->size() == 5765760);
    CHECK(p3->size() == 3360); // P(16, 3)
    CHECK(p1->max_depth() == 27);
    CHECK(p2->max_depth() == 26);
    CHECK(p3->max_depth() == 15);
    CHECK(p1->lookup(F::solved()) == 0);
    CHECK(p2->lookup(F::solved()) == 0);
    CHECK(p3->lookup(F::solved()) == 0);

    // the disjoint sum dominates Manhattan distance on every state
    AdditiveHeuristic<F> add({p1, p2, p3});
    ManhattanHeuristic<4> mh;
    std::mt19937_64 rng(1);
    F::State s = F::solved();
    F::Action last = F::kNoAction;
    for (int step = 0; step < 2000; ++step) {
        std::array<F::Action, 4> acts{};
        const int n = F::actions(s, last, true, acts);
        last = acts[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, n - 1)(rng))];
        s = F::apply(s, last);
        CHECK(add.lookup(s) >= mh.lookup(s));
    }
}

TEST_CASE("a Korf benchmark instance solves optimally") {
    const auto insts = load_instances<F>(data_dir() + "/korf10.txt");
    REQUIRE(insts.size() == 10);

    auto h = std::make_shared<AdditiveHeuristic<F>>(std::vector<std::shared_ptr<const PdbTable<F>>>{
        cached_pdb({1, 2, 3, 4, 5, 6}), cached_pdb({7, 8, 9, 10, 11, 12}),
        cached_pdb({13, 14, 15})});

    // instance 9, the cheapest of the ten under this heuristic
    const auto r = idastar<F>(insts[8], *h);
    REQUIRE(r.status == SearchStatus::Solved);
    CHECK(r.cost == 46);
    F::State s = insts[8].start;
    for (const auto a : r.solution)
        s = F::apply(s, a);
    CHECK(s == F::solved());

    SearchConfig cfg;
    cfg.threads = 2;
    cfg.work_num = 2;
    cfg.batch_size = 64;
    cfg.timeout_us = 2000;
    EvaluatorGroup<F> g = make_table_sim_group<F>(h, 1, cfg.batch_size, cfg.timeout_us);
    const auto rb = batch_idastar<F>(insts[8], g, cfg);
    g.close();
    CHECK(rb.cost == 46);
    CHECK(rb.threshold_history == r.threshold_history);
    CHECK(rb.stats.assertion_violations == 0);
}
