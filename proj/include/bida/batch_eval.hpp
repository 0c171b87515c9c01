#pragma once

// Batched heuristic evaluation standing in for a GPU: search threads submit
// generated states and receive write-once tickets; one batch-processing
// agent per evaluator flushes the buffer when it fills, when the timeout
// expires, or when a searcher forces a drain. Submissions during an
// in-flight flush land in a fresh buffer, so searchers never block here.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "heuristic.hpp"
#include "stats.hpp"

namespace bida {

using FeatureVector = std::vector<float>;

struct TicketSlot {
    std::atomic<std::int32_t> value{-1};
};
using Ticket = std::shared_ptr<TicketSlot>;

// -1 while the batch holding this ticket has not been processed; the
// resolved heuristic value ever after. Never blocks.
inline int poll(const Ticket &t) { return t->value.load(std::memory_order_acquire); }

template <class D>
struct BatchItem {
    Ticket ticket;
    typename D::State state;
    FeatureVector features;
};

template <class D>
class EvaluatorBackend {
public:
    virtual ~EvaluatorBackend() = default;
    virtual void evaluate(std::span<const BatchItem<D>> batch, std::span<std::int32_t> out) = 0;
    virtual bool needs_features() const { return false; }
};

// Answers from an exact heuristic source, sleeping per_call + per_item*|batch|
// first to model the transfer-plus-inference cost of a device round trip.
template <class D>
class TableSimBackend final : public EvaluatorBackend<D> {
public:
    TableSimBackend(std::shared_ptr<const Heuristic<D>> source, std::int64_t per_call_us = 0,
                    std::int64_t per_item_ns = 0)
        : source_(std::move(source)), per_call_us_(per_call_us), per_item_ns_(per_item_ns) {}

    void evaluate(std::span<const BatchItem<D>> batch, std::span<std::int32_t> out) override {
        const std::int64_t ns = per_call_us_ * 1000 + per_item_ns_ * static_cast<std::int64_t>(batch.size());
        if (ns > 0)
            std::this_thread::sleep_for(std::chrono::nanoseconds(ns));
        for (std::size_t i = 0; i < batch.size(); ++i)
            out[i] = static_cast<std::int32_t>(source_->lookup(batch[i].state));
    }

    const Heuristic<D> &source() const { return *source_; }

private:
    std::shared_ptr<const Heuristic<D>> source_;
    std::int64_t per_call_us_;
    std::int64_t per_item_ns_;
};

// Batched linear scoring over feature vectors: each ensemble member maps a
// feature vector to class logits, softmax turns them into an ordered class
// distribution, and the final value is the ensemble minimum of quantile
// classes. Deterministic.
template <class D>
class LinearModelBackend final : public EvaluatorBackend<D> {
public:
    LinearModelBackend(std::vector<std::vector<float>> member_weights, int classes, double quantile)
        : weights_(std::move(member_weights)), classes_(classes), quantile_(quantile) {
        if (weights_.empty())
            throw std::invalid_argument("LinearModelBackend: empty ensemble");
        if (classes_ <= 0)
            throw std::invalid_argument("LinearModelBackend: need at least one class");
        for (const auto &w : weights_)
            if (static_cast<int>(w.size()) != classes_ * D::feature_length())
                throw std::invalid_argument("LinearModelBackend: weight matrix size mismatch");
    }

    bool needs_features() const override { return true; }

    void evaluate(std::span<const BatchItem<D>> batch, std::span<std::int32_t> out) override {
        std::vector<int> estimates(weights_.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            for (std::size_t m = 0; m < weights_.size(); ++m)
                estimates[m] = quantile_class(score(weights_[m], batch[i].features), quantile_);
            out[i] = static_cast<std::int32_t>(ensemble_min(estimates));
        }
    }

    // "BLIN1": magic, u32 feature length, u32 class count, u32 ensemble
    // size, then row-major f32 weights per member, all little-endian.
    static LinearModelBackend load(const std::string &path, double quantile) {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot open weights file: " + path);
        char magic[5];
        f.read(magic, 5);
        if (!f || std::memcmp(magic, "BLIN1", 5) != 0)
            throw std::runtime_error("not a BLIN1 file: " + path);
        const std::uint32_t flen = read_u32(f);
        const std::uint32_t classes = read_u32(f);
        const std::uint32_t ensemble = read_u32(f);
        if (!f || flen != static_cast<std::uint32_t>(D::feature_length()) || ensemble == 0)
            throw std::runtime_error("BLIN1 header does not match domain: " + path);
        std::vector<std::vector<float>> weights(ensemble);
        for (auto &w : weights) {
            w.resize(static_cast<std::size_t>(flen) * classes);
            f.read(reinterpret_cast<char *>(w.data()),
                   static_cast<std::streamsize>(w.size() * sizeof(float)));
        }
        if (!f)
            throw std::runtime_error("truncated BLIN1 file: " + path);
        return LinearModelBackend(std::move(weights), static_cast<int>(classes), quantile);
    }

    static void save(const std::string &path, const std::vector<std::vector<float>> &weights,
                     int classes) {
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot write weights file: " + path);
        f.write("BLIN1", 5);
        write_u32(f, static_cast<std::uint32_t>(D::feature_length()));
        write_u32(f, static_cast<std::uint32_t>(classes));
        write_u32(f, static_cast<std::uint32_t>(weights.size()));
        for (const auto &w : weights)
            f.write(reinterpret_cast<const char *>(w.data()),
                    static_cast<std::streamsize>(w.size() * sizeof(float)));
    }

private:
    ClassDistribution score(const std::vector<float> &w, const FeatureVector &x) const {
        if (static_cast<int>(x.size()) != D::feature_length())
            throw std::invalid_argument("LinearModelBackend: feature length mismatch");
        std::vector<double> logits(static_cast<std::size_t>(classes_), 0.0);
        for (int c = 0; c < classes_; ++c) {
            double dot = 0.0;
            const float *row = w.data() + static_cast<std::size_t>(c) * D::feature_length();
            for (int j = 0; j < D::feature_length(); ++j)
                dot += static_cast<double>(row[j]) * x[static_cast<std::size_t>(j)];
            logits[static_cast<std::size_t>(c)] = dot;
        }
        const double mx = *std::max_element(logits.begin(), logits.end());
        double z = 0.0;
        for (double &l : logits)
            z += (l = std::exp(l - mx));
        ClassDistribution dist;
        dist.p.resize(logits.size());
        for (std::size_t c = 0; c < logits.size(); ++c)
            dist.p[c] = logits[c] / z;
        return dist;
    }

    static std::uint32_t read_u32(std::istream &f) {
        std::uint8_t b[4];
        f.read(reinterpret_cast<char *>(b), 4);
        return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
               static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
    }
    static void write_u32(std::ostream &f, std::uint32_t v) {
        std::uint8_t b[4] = {static_cast<std::uint8_t>(v & 0xFF),
                             static_cast<std::uint8_t>((v >> 8) & 0xFF),
                             static_cast<std::uint8_t>((v >> 16) & 0xFF),
                             static_cast<std::uint8_t>((v >> 24) & 0xFF)};
        f.write(reinterpret_cast<const char *>(b), 4);
    }

    std::vector<std::vector<float>> weights_;
    int classes_;
    double quantile_;
};

// One buffer plus one batch-processing agent. timeout_us < 0 disables the
// timeout (flush on fullness or forced drain only); timeout_us == 0 flushes
// as soon as the buffer is nonempty; otherwise the clock starts at the first
// insertion into an empty buffer.
template <class D>
class Evaluator {
public:
    Evaluator(std::unique_ptr<EvaluatorBackend<D>> backend, std::size_t capacity,
              std::int64_t timeout_us, bool immediate = false)
        : backend_(std::move(backend)), capacity_(capacity), timeout_us_(timeout_us),
          immediate_(immediate) {
        if (capacity_ == 0)
            throw std::invalid_argument("Evaluator: capacity must be >= 1");
        if (!immediate_)
            agent_ = std::thread([this] { agent_loop(); });
    }

    ~Evaluator() { close(); }

    Evaluator(const Evaluator &) = delete;
    Evaluator &operator=(const Evaluator &) = delete;

    Ticket submit(const typename D::State &state, FeatureVector features) {
        Ticket t = std::make_shared<TicketSlot>();
        if (immediate_) {
            BatchItem<D> item{t, state, std::move(features)};
            std::int32_t v = 0;
            backend_->evaluate(std::span<const BatchItem<D>>(&item, 1), std::span<std::int32_t>(&v, 1));
            resolve(t, v);
            submitted_.fetch_add(1, std::memory_order_relaxed);
            return t;
        }
        {
            std::lock_guard<std::mutex> lk(m_);
            if (closed_)
                throw std::runtime_error("Evaluator: submission after shutdown");
            if (pending_.empty())
                first_insert_ = std::chrono::steady_clock::now();
            pending_.push_back(BatchItem<D>{t, state, std::move(features)});
            submitted_.fetch_add(1, std::memory_order_relaxed);
            if (pending_.size() >= capacity_ || timeout_us_ >= 0)
                cv_.notify_one();
        }
        return t;
    }

    bool needs_features() const { return backend_->needs_features(); }

    // Synchronous batch-of-one evaluation, used for root nodes.
    int evaluate_single(const typename D::State &state, FeatureVector features) {
        BatchItem<D> item{std::make_shared<TicketSlot>(), state, std::move(features)};
        std::int32_t v = 0;
        backend_->evaluate(std::span<const BatchItem<D>>(&item, 1), std::span<std::int32_t>(&v, 1));
        std::lock_guard<std::mutex> lk(stats_m_);
        stats_.record_batch(1);
        return static_cast<int>(v);
    }

    // One synchronous backend call over an arbitrary-size span; counted as a
    // sync evaluation, not a batch (it may exceed the batch capacity).
    std::vector<int> evaluate_sync(std::span<const typename D::State> states) {
        std::vector<BatchItem<D>> items(states.size());
        const bool feats = backend_->needs_features();
        for (std::size_t i = 0; i < states.size(); ++i) {
            items[i].state = states[i];
            if (feats) {
                items[i].features.resize(static_cast<std::size_t>(D::feature_length()));
                D::encode(states[i], items[i].features.data());
            }
        }
        std::vector<std::int32_t> vals(states.size());
        if (!states.empty())
            backend_->evaluate(items, vals);
        std::lock_guard<std::mutex> lk(stats_m_);
        ++stats_.sync_evaluations;
        return std::vector<int>(vals.begin(), vals.end());
    }

    // Ask the agent to flush whatever is pending even though the buffer is
    // not full; used when searchers are globally blocked on their tickets.
    void request_flush() {
        std::lock_guard<std::mutex> lk(m_);
        if (!pending_.empty() && !force_) {
            force_ = true;
            cv_.notify_one();
        }
    }

    // Drains pending tickets (resolving them) and joins the agent.
    void close() {
        {
            std::lock_guard<std::mutex> lk(m_);
            if (closed_)
                return;
            closed_ = true;
            cv_.notify_one();
        }
        if (agent_.joinable())
            agent_.join();
    }

    SearchStats stats_snapshot() const {
        std::lock_guard<std::mutex> lk(stats_m_);
        return stats_;
    }

    std::uint64_t submitted() const { return submitted_.load(std::memory_order_relaxed); }
    std::uint64_t resolved() const { return resolved_.load(std::memory_order_relaxed); }
    std::uint64_t double_resolutions() const {
        return double_resolved_.load(std::memory_order_relaxed);
    }

private:
    void resolve(const Ticket &t, std::int32_t v) {
        if (t->value.exchange(v, std::memory_order_release) != -1)
            double_resolved_.fetch_add(1, std::memory_order_relaxed);
        resolved_.fetch_add(1, std::memory_order_relaxed);
    }

    void agent_loop() {
        std::unique_lock<std::mutex> lk(m_);
        for (;;) {
            if (pending_.empty()) {
                if (closed_)
                    return;
                cv_.wait(lk);
                continue;
            }
            const bool full = pending_.size() >= capacity_;
            bool due = full || force_ || closed_ || timeout_us_ == 0;
            if (!due && timeout_us_ > 0) {
                const auto deadline = first_insert_ + std::chrono::microseconds(timeout_us_);
                if (std::chrono::steady_clock::now() >= deadline)
                    due = true;
                else {
                    cv_.wait_until(lk, deadline);
                    continue;
                }
            } else if (!due) {
                cv_.wait(lk);
                continue;
            }

            // Take at most one full batch; the rest waits for the next round.
            std::vector<BatchItem<D>> batch;
            if (pending_.size() <= capacity_) {
                batch.swap(pending_);
            } else {
                batch.assign(std::make_move_iterator(pending_.begin()),
                             std::make_move_iterator(pending_.begin() +
                                                     static_cast<std::ptrdiff_t>(capacity_)));
                pending_.erase(pending_.begin(),
                               pending_.begin() + static_cast<std::ptrdiff_t>(capacity_));
                first_insert_ = std::chrono::steady_clock::now();
            }
            const bool forced_partial = force_ && !full;
            force_ = false;
            lk.unlock();

            std::vector<std::int32_t> vals(batch.size());
            backend_->evaluate(batch, vals);
            for (std::size_t i = 0; i < batch.size(); ++i)
                resolve(batch[i].ticket, vals[i]);
            {
                std::lock_guard<std::mutex> slk(stats_m_);
                stats_.record_batch(batch.size());
                if (forced_partial)
                    ++stats_.forced_flushes;
            }
            lk.lock();
        }
    }

    std::unique_ptr<EvaluatorBackend<D>> backend_;
    std::size_t capacity_;
    std::int64_t timeout_us_;
    bool immediate_;

    mutable std::mutex m_;
    std::condition_variable cv_;
    std::vector<BatchItem<D>> pending_;
    std::chrono::steady_clock::time_point first_insert_{};
    bool force_ = false;
    bool closed_ = false;
    std::thread agent_;

    mutable std::mutex stats_m_;
    SearchStats stats_;

    std::atomic<std::uint64_t> submitted_{0};
    std::atomic<std::uint64_t> resolved_{0};
    std::atomic<std::uint64_t> double_resolved_{0};
};

// A set of evaluators with search threads assigned round-robin, so the
// assignment sizes differ by at most one.
template <class D>
class EvaluatorGroup {
public:
    EvaluatorGroup(std::vector<std::unique_ptr<EvaluatorBackend<D>>> backends,
                   std::size_t capacity, std::int64_t timeout_us, bool immediate = false) {
        if (backends.empty())
            throw std::invalid_argument("EvaluatorGroup: need at least one evaluator");
        for (auto &b : backends)
            evaluators_.push_back(
                std::make_unique<Evaluator<D>>(std::move(b), capacity, timeout_us, immediate));
    }

    std::size_t evaluator_count() const { return evaluators_.size(); }
    int evaluator_of(int thread_id) const {
        return thread_id % static_cast<int>(evaluators_.size());
    }

    Ticket submit(int thread_id, const typename D::State &state, FeatureVector features) {
        return evaluators_[static_cast<std::size_t>(evaluator_of(thread_id))]->submit(
            state, std::move(features));
    }

    // Encodes features only when some backend actually consumes them.
    Ticket submit_state(int thread_id, const typename D::State &state) {
        Evaluator<D> &e = *evaluators_[static_cast<std::size_t>(evaluator_of(thread_id))];
        FeatureVector x;
        if (e.needs_features()) {
            x.resize(static_cast<std::size_t>(D::feature_length()));
            D::encode(state, x.data());
        }
        return e.submit(state, std::move(x));
    }

    int evaluate_single(const typename D::State &state) {
        FeatureVector x(static_cast<std::size_t>(D::feature_length()));
        D::encode(state, x.data());
        return evaluators_[0]->evaluate_single(state, std::move(x));
    }

    std::vector<int> evaluate_sync(std::span<const typename D::State> states) {
        return evaluators_[0]->evaluate_sync(states);
    }

    void kick(int thread_id) {
        evaluators_[static_cast<std::size_t>(evaluator_of(thread_id))]->request_flush();
    }

    void kick_all() {
        for (auto &e : evaluators_)
            e->request_flush();
    }

    void close() {
        for (auto &e : evaluators_)
            e->close();
    }

    Evaluator<D> &evaluator(std::size_t i) { return *evaluators_[i]; }

    SearchStats stats_snapshot() const {
        SearchStats s;
        for (const auto &e : evaluators_)
            s.merge(e->stats_snapshot());
        s.iterations.clear();
        return s;
    }

    std::uint64_t submitted() const {
        std::uint64_t n = 0;
        for (const auto &e : evaluators_)
            n += e->submitted();
        return n;
    }
    std::uint64_t resolved() const {
        std::uint64_t n = 0;
        for (const auto &e : evaluators_)
            n += e->resolved();
        return n;
    }
    std::uint64_t double_resolutions() const {
        std::uint64_t n = 0;
        for (const auto &e : evaluators_)
            n += e->double_resolutions();
        return n;
    }

private:
    std::vector<std::unique_ptr<Evaluator<D>>> evaluators_;
};

// Convenience: a group of identical table-sim evaluators.
template <class D>
EvaluatorGroup<D> make_table_sim_group(std::shared_ptr<const Heuristic<D>> source,
                                       std::size_t evaluators, std::size_t capacity,
                                       std::int64_t timeout_us, std::int64_t per_call_us = 0,
                                       std::int64_t per_item_ns = 0, bool immediate = false) {
    std::vector<std::unique_ptr<EvaluatorBackend<D>>> backends;
    for (std::size_t i = 0; i < evaluators; ++i)
        backends.push_back(std::make_unique<TableSimBackend<D>>(source, per_call_us, per_item_ns));
    return EvaluatorGroup<D>(std::move(backends), capacity, timeout_us, immediate);
}

struct BalanceReport {
    double fill_us = 0.0;    // b_nn * t_pdb / n: time to fill the batch
    double process_us = 0.0; // t_nn + 2 * t_copy: time to process it
    double ratio = 0.0;      // fill / process; 1.0 is balanced
    bool fill_dominates = false;
};

// Cost-balance calculator for choosing the batch size: compares the time the
// CPU side needs to produce b_nn nodes against one device round trip.
inline BalanceReport predict_balance(std::uint64_t b_nn, std::uint64_t n, double t_pdb_us,
                                     double t_nn_us, double t_copy_us) {
    if (b_nn == 0 || n == 0 || t_pdb_us <= 0.0 || t_nn_us <= 0.0 || t_copy_us < 0.0)
        throw std::invalid_argument("predict_balance: parameters must be positive");
    BalanceReport r;
    r.fill_us = static_cast<double>(b_nn) * t_pdb_us / static_cast<double>(n);
    r.process_us = t_nn_us + 2.0 * t_copy_us;
    r.ratio = r.fill_us / r.process_us;
    r.fill_dominates = r.fill_us > r.process_us;
    return r;
}

} // namespace bida
