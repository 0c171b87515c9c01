#pragma once

// Complete search algorithms assembled from the cost-bounded DFS core and
// the batched evaluators: Batch IDA*, AIDA* (its zero-latency degenerate
// case), sequential IDA*, Batch A*, and a brute-force bidirectional BFS
// oracle.

#include <chrono>
#include <cstdint>
#include <memory>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "batch_eval.hpp"
#include "cbdfs.hpp"
#include "heuristic.hpp"
#include "instance.hpp"
#include "stats.hpp"

namespace bida {

enum class SearchStatus { Solved, TimedOut, BudgetExhausted };

template <class D>
struct SearchResult {
    SearchStatus status = SearchStatus::Solved;
    std::int64_t cost = -1;
    std::vector<typename D::Action> solution;
    SearchStats stats;
    std::vector<std::int64_t> threshold_history;
};

struct SearchConfig {
    int threads = 1;
    int work_num = 1;
    std::size_t batch_size = 64;
    std::int64_t timeout_us = 2000; // <0 disables the flush timeout
    int evaluators = 1;
    int d_init = -1; // <0 selects automatically
    bool prune = true;
    std::uint64_t seed = 0;
    double time_limit_s = 0.0;          // 0 = unlimited
    std::uint64_t expansion_budget = 0; // 0 = unlimited

    void validate() const {
        if (threads < 1 || work_num < 1 || batch_size < 1 || evaluators < 1)
            throw std::invalid_argument("SearchConfig: counts must be >= 1");
        if (evaluators > threads)
            throw std::invalid_argument("SearchConfig: evaluators must not exceed threads");
    }
};

// Smallest depth whose deduplicated frontier yields at least 4 * threads *
// workNum works, capped per domain.
template <class D>
int auto_d_init(const typename D::State &start, const typename D::State &goal, int threads,
                int work_num, bool prune) {
    const std::uint64_t target = 4ull * static_cast<std::uint64_t>(threads) *
                                 static_cast<std::uint64_t>(work_num);
    for (int d = 0; d <= D::kDInitCap; ++d) {
        WorkSet<D> ws;
        try {
            ws = generate_work<D>(start, goal, d, prune);
        } catch (const std::runtime_error &) {
            return d > 0 ? d - 1 : 0;
        }
        if (ws.seeds.empty())
            return d;
        if (ws.seeds.size() >= target)
            return d;
    }
    return D::kDInitCap;
}

namespace detail {

// Batch-side counters live in the (possibly reused) evaluator group; this
// attributes the delta between two snapshots to one search.
inline void add_batch_delta(SearchStats &dst, const SearchStats &before, const SearchStats &after) {
    dst.batches += after.batches - before.batches;
    dst.batch_items += after.batch_items - before.batch_items;
    for (std::size_t i = 0; i < dst.occupancy_hist.size(); ++i)
        dst.occupancy_hist[i] += after.occupancy_hist[i] - before.occupancy_hist[i];
    dst.forced_flushes += after.forced_flushes - before.forced_flushes;
    dst.sync_evaluations += after.sync_evaluations - before.sync_evaluations;
    if (after.max_batch_occupancy > dst.max_batch_occupancy)
        dst.max_batch_occupancy = after.max_batch_occupancy;
}

} // namespace detail

// Batch IDA*: initial bound from a synchronous root evaluation, then
// repeated parallel CB-DFS rounds with the bound raised to the minimum
// exceeded f until a goal within the bound appears.
template <class D>
SearchResult<D> batch_idastar(const Instance<D> &inst, EvaluatorGroup<D> &group,
                              const SearchConfig &cfg, const ExpandHook<D> *on_expand = nullptr) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const SearchStats group_before = group.stats_snapshot();

    SearchResult<D> res;
    std::int64_t bound = group.evaluate_single(inst.start);
    res.threshold_history.push_back(bound);

    auto finish = [&](SearchStatus st) {
        res.status = st;
        detail::add_batch_delta(res.stats, group_before, group.stats_snapshot());
        res.stats.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return res;
    };

    if (inst.start == inst.goal) {
        res.cost = 0;
        return finish(SearchStatus::Solved);
    }

    const int d_init = cfg.d_init >= 0
                           ? cfg.d_init
                           : auto_d_init<D>(inst.start, inst.goal, cfg.threads, cfg.work_num,
                                            cfg.prune);
    WorkSet<D> ws = generate_work<D>(inst.start, inst.goal, d_init, cfg.prune);
    res.stats.init_expanded = ws.init_expanded;
    res.stats.init_generated = ws.init_generated;

    // One synchronous pass over the interior nodes and the work roots: their
    // f-values must feed every threshold update, and caching the root h
    // avoids resubmitting it each round.
    std::vector<int> interior_h;
    if (!ws.interior.empty()) {
        std::vector<typename D::State> states;
        states.reserve(ws.interior.size());
        for (const auto &[s, g] : ws.interior)
            states.push_back(s);
        interior_h = group.evaluate_sync(states);
    }
    if (!ws.seeds.empty()) {
        std::vector<typename D::State> states;
        states.reserve(ws.seeds.size());
        for (const auto &seed : ws.seeds)
            states.push_back(seed.root);
        const std::vector<int> hs = group.evaluate_sync(states);
        for (std::size_t i = 0; i < ws.seeds.size(); ++i)
            ws.seeds[i].root_h = hs[i];
    }

    const auto deadline = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                   std::chrono::duration<double>(cfg.time_limit_s));

    for (;;) {
        if (ws.candidate_cost >= 0 && bound >= ws.candidate_cost) {
            res.cost = ws.candidate_cost;
            res.solution = ws.candidate_path;
            return finish(SearchStatus::Solved);
        }

        BoundCollector collector(cfg.threads + 1);
        for (std::size_t i = 0; i < ws.interior.size(); ++i) {
            const std::int64_t f = ws.interior[i].second + interior_h[i];
            if (f > bound)
                collector.record(cfg.threads, f);
        }
        if (ws.candidate_cost > bound)
            collector.record(cfg.threads, ws.candidate_cost);

        IterationShared<D> shared;
        shared.goal = &inst.goal;
        shared.expansion_budget = cfg.expansion_budget;
        shared.expanded_base = res.stats.expanded;
        if (cfg.time_limit_s > 0.0) {
            shared.has_deadline = true;
            shared.deadline = deadline;
        }

        WorkQueue<D> queue(ws.seeds);
        std::vector<SearchStats> thread_stats(static_cast<std::size_t>(cfg.threads));
        const SearchStats round_before = group.stats_snapshot();
        const std::uint64_t exp_before = res.stats.expanded;
        const std::uint64_t gen_before = res.stats.generated;

        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(cfg.threads));
        for (int t = 0; t < cfg.threads; ++t)
            threads.emplace_back([&, t] {
                cb_dfs<D>(t, cfg.work_num, bound, queue, group, collector, shared,
                          thread_stats[static_cast<std::size_t>(t)], on_expand);
            });
        for (auto &th : threads)
            th.join();

        for (const SearchStats &ts : thread_stats) {
            res.stats.expanded += ts.expanded;
            res.stats.generated += ts.generated;
            res.stats.assertion_violations += ts.assertion_violations;
            if (ts.peak_live_frames > res.stats.peak_live_frames)
                res.stats.peak_live_frames = ts.peak_live_frames;
        }
        const SearchStats round_after = group.stats_snapshot();
        IterationStats row;
        row.threshold = bound;
        row.expanded = res.stats.expanded - exp_before;
        row.generated = res.stats.generated - gen_before;
        row.batches = round_after.batches - round_before.batches;
        row.batch_items = round_after.batch_items - round_before.batch_items;
        res.stats.iterations.push_back(row);

        if (shared.solution_cost >= 0 &&
            (ws.candidate_cost < 0 || shared.solution_cost <= ws.candidate_cost)) {
            res.cost = shared.solution_cost;
            res.solution = shared.solution;
            return finish(SearchStatus::Solved);
        }
        if (shared.timed_out.load())
            return finish(SearchStatus::TimedOut);
        if (shared.budget_exhausted.load())
            return finish(SearchStatus::BudgetExhausted);

        try {
            bound = update_threshold(collector, bound);
        } catch (const std::runtime_error &) {
            if (ws.candidate_cost >= 0) {
                res.cost = ws.candidate_cost;
                res.solution = ws.candidate_path;
                return finish(SearchStatus::Solved);
            }
            throw;
        }
        res.threshold_history.push_back(bound);
    }
}

// AIDA*: the same engine with immediate, always-ready evaluators.
template <class D>
SearchResult<D> aidastar(const Instance<D> &inst, std::shared_ptr<const Heuristic<D>> h,
                         const SearchConfig &cfg, const ExpandHook<D> *on_expand = nullptr) {
    cfg.validate();
    EvaluatorGroup<D> group = make_table_sim_group<D>(std::move(h), 1, cfg.batch_size,
                                                      /*timeout_us=*/-1, 0, 0, /*immediate=*/true);
    return batch_idastar(inst, group, cfg, on_expand);
}

// Textbook sequential IDA*; the reference for threshold sequences and
// expansion sets. Goal test happens at generation, matching the engine.
template <class D>
SearchResult<D> idastar(const Instance<D> &inst, const Heuristic<D> &h,
                        double time_limit_s = 0.0, const ExpandHook<D> *on_expand = nullptr) {
    const auto t0 = std::chrono::steady_clock::now();
    SearchResult<D> res;
    std::int64_t bound = h.lookup(inst.start);
    res.threshold_history.push_back(bound);

    auto finish = [&](SearchStatus st) {
        res.status = st;
        res.stats.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return res;
    };

    if (inst.start == inst.goal) {
        res.cost = 0;
        return finish(SearchStatus::Solved);
    }

    const auto deadline = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                   std::chrono::duration<double>(time_limit_s));

    std::int64_t min_exceeded = kNoBound;
    std::vector<typename D::Action> path;
    bool timed_out = false;

    std::function<bool(const typename D::State &, int, typename D::Action)> dfs =
        [&](const typename D::State &s, int g, typename D::Action last) -> bool {
        ++res.stats.expanded;
        if (on_expand && *on_expand)
            (*on_expand)(s, g);
        if (time_limit_s > 0.0 && (res.stats.expanded & 1023) == 0 &&
            std::chrono::steady_clock::now() >= deadline) {
            timed_out = true;
            return false;
        }
        std::array<typename D::Action, D::kMaxBranching> acts{};
        const int n = D::actions(s, last, /*prune=*/true, acts);
        for (int i = 0; i < n; ++i) {
            const typename D::Action a = acts[static_cast<std::size_t>(i)];
            const typename D::State child = D::apply(s, a);
            ++res.stats.generated;
            if (child == inst.goal) {
                const std::int64_t cost = g + 1;
                if (cost <= bound) {
                    path.push_back(a);
                    res.cost = cost;
                    return true;
                }
                if (cost < min_exceeded)
                    min_exceeded = cost;
                continue;
            }
            const std::int64_t f = g + 1 + h.lookup(child);
            if (f > bound) {
                if (f < min_exceeded)
                    min_exceeded = f;
                continue;
            }
            path.push_back(a);
            if (dfs(child, g + 1, a))
                return true;
            if (timed_out)
                return false;
            path.pop_back();
        }
        return false;
    };

    for (;;) {
        min_exceeded = kNoBound;
        path.clear();
        const std::uint64_t exp_before = res.stats.expanded;
        const std::uint64_t gen_before = res.stats.generated;
        const bool found = dfs(inst.start, 0, D::kNoAction);
        IterationStats row;
        row.threshold = bound;
        row.expanded = res.stats.expanded - exp_before;
        row.generated = res.stats.generated - gen_before;
        res.stats.iterations.push_back(row);
        if (found) {
            res.solution = path;
            return finish(SearchStatus::Solved);
        }
        if (timed_out)
            return finish(SearchStatus::TimedOut);
        if (min_exceeded == kNoBound)
            throw std::runtime_error("idastar: search space exhausted with no solution");
        bound = min_exceeded;
        res.threshold_history.push_back(bound);
    }
}

// Batch A*: single search thread; generated nodes go to the evaluator
// instead of straight onto the open list and are inserted once their
// heuristic resolves. Duplicates are reconciled at insertion via a best-g
// map, with g-based reopening. Goal test at expansion, deferred until no
// evaluation is in flight.
template <class D>
SearchResult<D> batch_astar(const Instance<D> &inst, EvaluatorGroup<D> &group,
                            const SearchConfig &cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const SearchStats group_before = group.stats_snapshot();

    SearchResult<D> res;
    auto finish = [&](SearchStatus st) {
        res.status = st;
        detail::add_batch_delta(res.stats, group_before, group.stats_snapshot());
        res.stats.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return res;
    };

    if (inst.start == inst.goal) {
        res.cost = 0;
        return finish(SearchStatus::Solved);
    }

    struct Node {
        typename D::State s;
        int g;
        int h;
        std::int64_t parent;
        typename D::Action act;
    };
    std::vector<Node> nodes;
    std::unordered_map<typename D::State, int, typename D::Hash> best_g;
    std::unordered_map<typename D::State, int, typename D::Hash> closed_g;

    // (f, -g, seq) so smaller f wins, then larger g, then FIFO.
    using Entry = std::tuple<std::int64_t, std::int64_t, std::uint64_t, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
    std::uint64_t seq = 0;

    std::vector<std::pair<std::size_t, Ticket>> pending;

    auto push_open = [&](std::size_t idx) {
        const Node &n = nodes[idx];
        open.emplace(static_cast<std::int64_t>(n.g) + n.h, -static_cast<std::int64_t>(n.g), seq++,
                     idx);
    };

    nodes.push_back(Node{inst.start, 0, group.evaluate_single(inst.start), -1, D::kNoAction});
    best_g[inst.start] = 0;
    push_open(0);

    const auto deadline = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                   std::chrono::duration<double>(cfg.time_limit_s));

    for (;;) {
        // Move resolved evaluations into the open list, dropping entries a
        // cheaper regeneration has obsoleted. Unresolved entries contribute a
        // floor on their eventual f: for a consistent heuristic a child's f
        // never drops below its parent's.
        std::int64_t pending_floor = kNoBound;
        for (std::size_t i = 0; i < pending.size();) {
            const int v = poll(pending[i].second);
            if (v < 0) {
                const Node &p = nodes[static_cast<std::size_t>(nodes[pending[i].first].parent)];
                const std::int64_t pf = static_cast<std::int64_t>(p.g) + p.h;
                if (pf < pending_floor)
                    pending_floor = pf;
                ++i;
                continue;
            }
            const std::size_t idx = pending[i].first;
            nodes[idx].h = v;
            auto it = best_g.find(nodes[idx].s);
            if (it != best_g.end() && it->second >= nodes[idx].g)
                push_open(idx);
            pending[i] = pending.back();
            pending.pop_back();
        }

        if (open.empty()) {
            if (pending.empty())
                throw std::runtime_error("batch_astar: open and batch queue empty with no goal");
            group.kick_all();
            std::this_thread::yield();
            continue;
        }

        const auto [f, negg, s, idx] = open.top();
        const Node &n = nodes[idx];
        {
            auto it = best_g.find(n.s);
            if (it != best_g.end() && it->second < n.g) {
                open.pop();
                continue;
            }
            auto ct = closed_g.find(n.s);
            if (ct != closed_g.end() && ct->second <= n.g) {
                open.pop();
                continue;
            }
        }
        // Expanding past the pending floor could pick a node whose g a still
        // in-flight path undercuts; wait for the evaluator instead.
        if (f > pending_floor) {
            group.kick_all();
            std::this_thread::yield();
            continue;
        }
        if (n.s == inst.goal) {
            // Only accept once nothing cheaper can still be in flight.
            if (!pending.empty()) {
                group.kick_all();
                std::this_thread::yield();
                continue;
            }
            res.cost = n.g;
            std::vector<typename D::Action> sol;
            for (std::int64_t i = static_cast<std::int64_t>(idx); nodes[static_cast<std::size_t>(i)].parent >= 0;
                 i = nodes[static_cast<std::size_t>(i)].parent)
                sol.push_back(nodes[static_cast<std::size_t>(i)].act);
            std::reverse(sol.begin(), sol.end());
            res.solution = sol;
            return finish(SearchStatus::Solved);
        }
        open.pop();
        closed_g[n.s] = n.g;
        ++res.stats.expanded;
        if (cfg.expansion_budget > 0 && res.stats.expanded > cfg.expansion_budget)
            return finish(SearchStatus::BudgetExhausted);
        if (cfg.time_limit_s > 0.0 && (res.stats.expanded & 255) == 0 &&
            std::chrono::steady_clock::now() >= deadline)
            return finish(SearchStatus::TimedOut);

        std::array<typename D::Action, D::kMaxBranching> acts{};
        const int cnt = D::actions(n.s, D::kNoAction, /*prune=*/false, acts);
        const int ng = n.g + 1;
        const typename D::State parent_state = n.s;
        for (int i = 0; i < cnt; ++i) {
            const typename D::Action a = acts[static_cast<std::size_t>(i)];
            typename D::State child = D::apply(parent_state, a);
            ++res.stats.generated;
            auto it = best_g.find(child);
            if (it != best_g.end() && it->second <= ng)
                continue;
            best_g[child] = ng;
            const std::size_t cidx = nodes.size();
            if (child == inst.goal) {
                nodes.push_back(Node{std::move(child), ng, 0, static_cast<std::int64_t>(idx), a});
                push_open(cidx);
            } else {
                nodes.push_back(Node{child, ng, -1, static_cast<std::int64_t>(idx), a});
                pending.emplace_back(cidx, group.submit_state(0, nodes[cidx].s));
            }
        }
    }
}

// Exact optimal cost by uninformed bidirectional breadth-first search; both
// domains are undirected with unit costs.
template <class D>
int bfs_oracle(const typename D::State &start, const typename D::State &goal,
               std::uint64_t node_cap = 20'000'000) {
    if (start == goal)
        return 0;
    using Map = std::unordered_map<typename D::State, int, typename D::Hash>;
    Map da{{start, 0}}, db{{goal, 0}};
    std::vector<typename D::State> fa{start}, fb{goal};
    int known_a = 0, known_b = 0;
    int best = std::numeric_limits<int>::max();

    auto expand = [&](Map &own, Map &other, std::vector<typename D::State> &front, int &known) {
        std::vector<typename D::State> next;
        const int d = known;
        for (const typename D::State &s : front) {
            std::array<typename D::Action, D::kMaxBranching> acts{};
            const int n = D::actions(s, D::kNoAction, /*prune=*/false, acts);
            for (int i = 0; i < n; ++i) {
                typename D::State c = D::apply(s, acts[static_cast<std::size_t>(i)]);
                if (!own.emplace(c, d + 1).second)
                    continue;
                auto it = other.find(c);
                if (it != other.end() && d + 1 + it->second < best)
                    best = d + 1 + it->second;
                next.push_back(std::move(c));
            }
        }
        known = d + 1;
        front.swap(next);
        if (da.size() + db.size() > node_cap)
            throw std::runtime_error("bfs_oracle: node cap exceeded");
    };

    while (best > known_a + known_b + 1) {
        const bool a_side = !fa.empty() && (fb.empty() || fa.size() <= fb.size());
        if (a_side)
            expand(da, db, fa, known_a);
        else if (!fb.empty())
            expand(db, da, fb, known_b);
        else
            break;
    }
    if (best == std::numeric_limits<int>::max())
        throw std::runtime_error("bfs_oracle: no path exists");
    return best;
}

template <class D>
int bfs_oracle(const Instance<D> &inst, std::uint64_t node_cap = 20'000'000) {
    return bfs_oracle<D>(inst.start, inst.goal, node_cap);
}

// Full single-source distance table; feasible for exhaustively enumerable
// spaces like the 8-puzzle (181440 reachable states).
template <class D>
std::unordered_map<typename D::State, int, typename D::Hash>
bfs_distances(const typename D::State &goal, std::uint64_t node_cap = 20'000'000) {
    std::unordered_map<typename D::State, int, typename D::Hash> dist{{goal, 0}};
    std::vector<typename D::State> front{goal};
    int d = 0;
    while (!front.empty()) {
        std::vector<typename D::State> next;
        for (const typename D::State &s : front) {
            std::array<typename D::Action, D::kMaxBranching> acts{};
            const int n = D::actions(s, D::kNoAction, /*prune=*/false, acts);
            for (int i = 0; i < n; ++i) {
                typename D::State c = D::apply(s, acts[static_cast<std::size_t>(i)]);
                if (dist.emplace(c, d + 1).second)
                    next.push_back(std::move(c));
            }
        }
        if (dist.size() > node_cap)
            throw std::runtime_error("bfs_distances: node cap exceeded");
        front.swap(next);
        ++d;
    }
    return dist;
}

// One-line run record: algorithm, instance label, cost, expanded, generated,
// batches, mean batch occupancy, wall time.
template <class D>
std::string result_csv_row(const std::string &algo, const std::string &label,
                           const SearchResult<D> &r) {
    std::ostringstream os;
    os << algo << ',' << label << ',';
    if (r.status == SearchStatus::Solved)
        os << r.cost;
    else if (r.status == SearchStatus::TimedOut)
        os << "timeout";
    else
        os << "budget";
    os << ',' << r.stats.expanded << ',' << r.stats.generated << ',' << r.stats.batches << ','
       << r.stats.mean_batch() << ',' << r.stats.wall_seconds;
    return os.str();
}

} // namespace bida
