#pragma once

// Parallel cost-bounded DFS core: work generation to depth d_init, frontier
// deduplication, the shared work queue, per-thread stacks of workNum
// concurrent subtrees with round-robin switching, and deferred-heuristic
// subtree expansion against a cost bound.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <vector>

#include "batch_eval.hpp"
#include "stats.hpp"

namespace bida {

inline constexpr std::int64_t kNoBound = std::numeric_limits<std::int64_t>::max();

template <class D>
struct WorkSeed {
    typename D::State root;
    std::vector<typename D::Action> init_history;
    int root_h = -1; // filled by a synchronous pre-pass; -1 means unknown
};

template <class D>
struct Frame {
    typename D::State state;
    int g = 0;
    int h = -1; // -1 while the ticket is unresolved
    Ticket ticket;
    typename D::Action last = D::kNoAction;
    std::vector<typename D::Action> path; // actions from the work root
};

template <class D>
struct Work {
    const WorkSeed<D> *seed = nullptr;
    std::vector<Frame<D>> stack;
    std::uint64_t expanded = 0;
    std::uint64_t generated = 0;
    std::uint64_t peak_frames = 0;

    bool done() const { return stack.empty(); }
};

// Everything generate_work learns about the tree above the frontier: the
// deduplicated frontier seeds, the interior nodes (needed so threshold
// updates see their f-values), and the cheapest goal met on the way.
template <class D>
struct WorkSet {
    std::vector<WorkSeed<D>> seeds;
    std::vector<std::pair<typename D::State, int>> interior; // (state, g), g < d_init
    std::int64_t candidate_cost = -1;                        // goal found at depth <= d_init
    std::vector<typename D::Action> candidate_path;
    std::uint64_t init_expanded = 0;
    std::uint64_t init_generated = 0;
    int d_init = 0;
};

// Keeps the first Work per distinct root state; its init_history is the
// retained path.
template <class D>
std::vector<WorkSeed<D>> dedup_frontier(std::vector<WorkSeed<D>> works) {
    std::unordered_map<typename D::State, bool, typename D::Hash> seen;
    std::vector<WorkSeed<D>> out;
    out.reserve(works.size());
    for (WorkSeed<D> &w : works)
        if (seen.emplace(w.root, true).second)
            out.push_back(std::move(w));
    return out;
}

// Depth-first enumeration of all action histories of length d_init from
// start (operator pruning only, no heuristic pruning), one Work per leaf.
// Goals met at depth <= d_init become the candidate instead of being
// expanded further.
template <class D>
WorkSet<D> generate_work(const typename D::State &start, const typename D::State &goal, int d_init,
                         bool prune) {
    if (d_init < 0)
        throw std::invalid_argument("generate_work: negative d_init");
    WorkSet<D> ws;
    ws.d_init = d_init;

    std::vector<typename D::Action> history;
    history.reserve(static_cast<std::size_t>(d_init));

    auto note_goal = [&](int g) {
        if (ws.candidate_cost < 0 || g < ws.candidate_cost) {
            ws.candidate_cost = g;
            ws.candidate_path = history;
        }
    };

    std::function<void(const typename D::State &, typename D::Action)> dfs =
        [&](const typename D::State &s, typename D::Action last) {
            const int depth = static_cast<int>(history.size());
            if (s == goal) {
                note_goal(depth);
                return;
            }
            if (depth == d_init) {
                ws.seeds.push_back(WorkSeed<D>{s, history, -1});
                return;
            }
            ws.interior.emplace_back(s, depth);
            ++ws.init_expanded;
            std::array<typename D::Action, D::kMaxBranching> acts{};
            const int n = D::actions(s, last, prune, acts);
            for (int i = 0; i < n; ++i) {
                const typename D::Action a = acts[static_cast<std::size_t>(i)];
                ++ws.init_generated;
                history.push_back(a);
                dfs(D::apply(s, a), a);
                history.pop_back();
            }
        };
    dfs(start, D::kNoAction);

    ws.seeds = dedup_frontier<D>(std::move(ws.seeds));
    if (ws.seeds.empty() && ws.candidate_cost < 0)
        throw std::runtime_error("generate_work: zero works after dedup; d_init " +
                                 std::to_string(d_init) + " exceeds the reachable space");
    return ws;
}

// Each Work dispensed exactly once; pop on empty returns nullptr, never
// blocks.
template <class D>
class WorkQueue {
public:
    explicit WorkQueue(const std::vector<WorkSeed<D>> &seeds) : seeds_(seeds) {}

    const WorkSeed<D> *pop() {
        const std::size_t i = next_.fetch_add(1, std::memory_order_relaxed);
        return i < seeds_.size() ? &seeds_[i] : nullptr;
    }

    std::size_t size() const { return seeds_.size(); }

private:
    const std::vector<WorkSeed<D>> &seeds_;
    std::atomic<std::size_t> next_{0};
};

// Per-thread minimum f-value observed strictly above the current bound;
// slot threads is reserved for values known before the searchers start
// (interior nodes, the goal candidate).
class BoundCollector {
public:
    explicit BoundCollector(int slots)
        : mins_(static_cast<std::size_t>(slots), kNoBound) {}

    void record(int slot, std::int64_t f) {
        auto &m = mins_[static_cast<std::size_t>(slot)];
        if (f < m)
            m = f;
    }

    std::optional<std::int64_t> reduce() const {
        std::int64_t m = kNoBound;
        for (std::int64_t v : mins_)
            if (v < m)
                m = v;
        if (m == kNoBound)
            return std::nullopt;
        return m;
    }

private:
    std::vector<std::int64_t> mins_;
};

// Returns the global minimum exceeded f, which becomes the next bound.
inline std::int64_t update_threshold(const BoundCollector &collector, std::int64_t bound) {
    const auto m = collector.reduce();
    if (!m)
        throw std::runtime_error("update_threshold: search space exhausted below bound " +
                                 std::to_string(bound) + " with no solution");
    if (*m <= bound)
        throw std::logic_error("update_threshold: next bound not strictly greater");
    return *m;
}

// State shared by the searcher threads of one cb_dfs round.
template <class D>
struct IterationShared {
    const typename D::State *goal = nullptr;
    std::atomic<bool> stop{false};
    std::atomic<int> running{0};
    std::atomic<int> blocked{0};

    std::uint64_t expansion_budget = 0; // 0 = unlimited; counts from expanded_base
    std::uint64_t expanded_base = 0;
    std::atomic<std::uint64_t> expanded{0};
    std::atomic<bool> budget_exhausted{false};

    bool has_deadline = false;
    std::chrono::steady_clock::time_point deadline{};
    std::atomic<bool> timed_out{false};

    std::mutex solution_m;
    std::int64_t solution_cost = -1;
    std::vector<typename D::Action> solution; // full path from the global start

    void offer_solution(std::int64_t cost, const std::vector<typename D::Action> &path) {
        std::lock_guard<std::mutex> lk(solution_m);
        if (solution_cost < 0 || cost < solution_cost) {
            solution_cost = cost;
            solution = path;
        }
        stop.store(true, std::memory_order_release);
    }
};

template <class D>
using ExpandHook = std::function<void(const typename D::State &, int)>;

enum class StepStatus { Progress, Blocked, Done };

namespace detail {

template <class D>
void push_root_frame(Work<D> &work, EvaluatorGroup<D> &group, int tid, std::uint64_t &live,
                     SearchStats &stats) {
    Frame<D> f;
    f.state = work.seed->root;
    f.g = static_cast<int>(work.seed->init_history.size());
    f.h = work.seed->root_h;
    if (f.h < 0)
        f.ticket = group.submit_state(tid, f.state);
    f.last = work.seed->init_history.empty() ? D::kNoAction : work.seed->init_history.back();
    work.stack.push_back(std::move(f));
    work.peak_frames = 1;
    ++live;
    if (live > stats.peak_live_frames)
        stats.peak_live_frames = live;
}

} // namespace detail

// One unit of subtree expansion: resolve or prune frames at the top of the
// work's stack until one expansion happens, the top ticket is unresolved
// (Blocked), or the stack empties (Done).
template <class D>
StepStatus do_iteration(Work<D> &work, std::int64_t bound, EvaluatorGroup<D> &group, int tid,
                        BoundCollector &collector, IterationShared<D> &shared, SearchStats &stats,
                        std::uint64_t &live, const ExpandHook<D> *on_expand = nullptr) {
    for (;;) {
        if (work.stack.empty())
            return StepStatus::Done;
        Frame<D> &top = work.stack.back();
        if (top.h < 0) {
            const int v = poll(top.ticket);
            if (v < 0)
                return StepStatus::Blocked;
            top.h = v;
            top.ticket.reset();
        }
        const std::int64_t f = top.g + top.h;
        if (f > bound) {
            // Heuristic Evaluation Completeness: a frame is only discarded
            // with its heuristic resolved.
            if (top.h < 0)
                ++stats.assertion_violations;
            collector.record(tid, f);
            work.stack.pop_back();
            --live;
            continue;
        }

        // Expansion Condition Alignment: expand iff g + h <= bound, with the
        // heuristic resolved.
        if (top.h < 0 || f > bound)
            ++stats.assertion_violations;

        Frame<D> parent = std::move(top);
        work.stack.pop_back();
        --live;
        ++work.expanded;
        ++stats.expanded;
        shared.expanded.fetch_add(1, std::memory_order_relaxed);
        if (on_expand && *on_expand)
            (*on_expand)(parent.state, parent.g);

        std::array<typename D::Action, D::kMaxBranching> acts{};
        const int n = D::actions(parent.state, parent.last, /*prune=*/true, acts);
        for (int i = 0; i < n; ++i) {
            const typename D::Action a = acts[static_cast<std::size_t>(i)];
            typename D::State child = D::apply(parent.state, a);
            ++work.generated;
            ++stats.generated;
            if (child == *shared.goal) {
                const std::int64_t cost = parent.g + 1;
                if (cost <= bound) {
                    std::vector<typename D::Action> full = work.seed->init_history;
                    full.insert(full.end(), parent.path.begin(), parent.path.end());
                    full.push_back(a);
                    shared.offer_solution(cost, full);
                } else {
                    collector.record(tid, cost);
                }
                continue;
            }
            Frame<D> fr;
            fr.state = child;
            fr.g = parent.g + 1;
            fr.last = a;
            fr.path = parent.path;
            fr.path.push_back(a);
            fr.ticket = group.submit_state(tid, fr.state);
            work.stack.push_back(std::move(fr));
            ++live;
        }
        if (live > stats.peak_live_frames)
            stats.peak_live_frames = live;
        if (work.stack.size() > work.peak_frames)
            work.peak_frames = work.stack.size();
        return StepStatus::Progress;
    }
}

// One thread's share of a bounded search round (Alg. "Parallel CB-DFS"):
// round-robin over workNum slots, refilling done slots from the queue. When
// every live slot is blocked and every running thread reports the same, the
// last thread to notice forces the evaluators to flush so the round cannot
// stall with a partial batch.
template <class D>
void cb_dfs(int tid, int work_num, std::int64_t bound, WorkQueue<D> &queue,
            EvaluatorGroup<D> &group, BoundCollector &collector, IterationShared<D> &shared,
            SearchStats &stats, const ExpandHook<D> *on_expand = nullptr) {
    std::vector<Work<D>> slots(static_cast<std::size_t>(work_num));
    std::vector<char> terminated(static_cast<std::size_t>(work_num), 0);
    std::uint64_t live = 0;
    int miss = 0;

    shared.running.fetch_add(1, std::memory_order_acq_rel);

    for (int i = 0; i < work_num; ++i) {
        const WorkSeed<D> *seed = queue.pop();
        if (seed) {
            slots[static_cast<std::size_t>(i)].seed = seed;
            detail::push_root_frame(slots[static_cast<std::size_t>(i)], group, tid, live, stats);
        } else {
            terminated[static_cast<std::size_t>(i)] = 1;
            ++miss;
        }
    }

    int counter = 0;
    int blocked_in_cycle = 0;
    int idle_cycles = 0;
    while (miss < work_num && !shared.stop.load(std::memory_order_acquire)) {
        if (!terminated[static_cast<std::size_t>(counter)]) {
            Work<D> &w = slots[static_cast<std::size_t>(counter)];
            if (w.done()) {
                const WorkSeed<D> *seed = queue.pop();
                if (seed) {
                    w = Work<D>();
                    w.seed = seed;
                    detail::push_root_frame(w, group, tid, live, stats);
                } else {
                    terminated[static_cast<std::size_t>(counter)] = 1;
                    ++miss;
                }
            }
            if (!terminated[static_cast<std::size_t>(counter)]) {
                const StepStatus st =
                    do_iteration(w, bound, group, tid, collector, shared, stats, live, on_expand);
                if (st == StepStatus::Blocked)
                    ++blocked_in_cycle;
            }
        }
        ++counter;
        if (counter == work_num) {
            counter = 0;
            const int active = work_num - miss;
            if (active > 0 && blocked_in_cycle >= active) {
                const int b = shared.blocked.fetch_add(1, std::memory_order_acq_rel) + 1;
                if (b >= shared.running.load(std::memory_order_acquire))
                    group.kick_all();
                if (++idle_cycles > 64)
                    std::this_thread::sleep_for(std::chrono::microseconds(50));
                else
                    std::this_thread::yield();
                shared.blocked.fetch_sub(1, std::memory_order_acq_rel);
            } else {
                idle_cycles = 0;
            }
            blocked_in_cycle = 0;

            if (shared.expansion_budget > 0 &&
                shared.expanded_base + shared.expanded.load(std::memory_order_relaxed) >
                    shared.expansion_budget) {
                shared.budget_exhausted.store(true, std::memory_order_release);
                shared.stop.store(true, std::memory_order_release);
            }
            if (shared.has_deadline && std::chrono::steady_clock::now() >= shared.deadline) {
                shared.timed_out.store(true, std::memory_order_release);
                shared.stop.store(true, std::memory_order_release);
            }
        }
    }

    shared.running.fetch_sub(1, std::memory_order_acq_rel);
}

} // namespace bida
