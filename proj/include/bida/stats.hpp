#pragma once

// Search instrumentation: expansion/generation counters, batch occupancy
// statistics, peak live-frame tracking, and per-iteration records.

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace bida {

struct IterationStats {
    std::int64_t threshold = 0;
    std::uint64_t expanded = 0;
    std::uint64_t generated = 0;
    std::uint64_t batches = 0;
    std::uint64_t batch_items = 0;

    double mean_batch() const {
        return batches == 0 ? 0.0 : static_cast<double>(batch_items) / static_cast<double>(batches);
    }
};

struct SearchStats {
    std::uint64_t expanded = 0;
    std::uint64_t generated = 0;

    // Redundant initial-phase (work generation) counters, kept separate so
    // the search counters stay comparable across d_init settings.
    std::uint64_t init_expanded = 0;
    std::uint64_t init_generated = 0;

    std::uint64_t batches = 0;
    std::uint64_t batch_items = 0;
    std::uint64_t max_batch_occupancy = 0;
    // Bucket b counts batches with occupancy in [2^(b-1), 2^b).
    std::array<std::uint64_t, 32> occupancy_hist{};

    std::uint64_t forced_flushes = 0;
    std::uint64_t sync_evaluations = 0;

    std::uint64_t peak_live_frames = 0;
    std::uint64_t assertion_violations = 0;

    double wall_seconds = 0.0;

    std::vector<IterationStats> iterations;

    void record_batch(std::uint64_t occupancy) {
        if (occupancy == 0)
            throw std::invalid_argument("record_batch: empty batch");
        ++batches;
        batch_items += occupancy;
        if (occupancy > max_batch_occupancy)
            max_batch_occupancy = occupancy;
        const unsigned bucket = static_cast<unsigned>(std::bit_width(occupancy));
        ++occupancy_hist[bucket < occupancy_hist.size() ? bucket : occupancy_hist.size() - 1];
    }

    // Counters sum, histograms merge, peaks max. Iteration rows concatenate.
    void merge(const SearchStats &o) {
        expanded += o.expanded;
        generated += o.generated;
        init_expanded += o.init_expanded;
        init_generated += o.init_generated;
        batches += o.batches;
        batch_items += o.batch_items;
        if (o.max_batch_occupancy > max_batch_occupancy)
            max_batch_occupancy = o.max_batch_occupancy;
        for (std::size_t i = 0; i < occupancy_hist.size(); ++i)
            occupancy_hist[i] += o.occupancy_hist[i];
        forced_flushes += o.forced_flushes;
        sync_evaluations += o.sync_evaluations;
        if (o.peak_live_frames > peak_live_frames)
            peak_live_frames = o.peak_live_frames;
        assertion_violations += o.assertion_violations;
        wall_seconds += o.wall_seconds;
        iterations.insert(iterations.end(), o.iterations.begin(), o.iterations.end());
    }

    double mean_batch() const {
        return batches == 0 ? 0.0 : static_cast<double>(batch_items) / static_cast<double>(batches);
    }

    std::uint64_t evaluator_invocations() const { return batches + sync_evaluations; }
};

} // namespace bida
