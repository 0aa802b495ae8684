/*
 * Copyright 2026 The ponsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file metrics.hpp
 * @brief Per-packet latency aggregation, split by ONU group and subcarrier.
 *
 * Means are kept as exact integer nanosecond sums, so a summary does not
 * depend on the order packets were recorded in. Percentiles use the
 * nearest-rank definition. Under full retention they are exact; under sketch
 * retention each percentile is within the configured relative error of the
 * exact value.
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "ponsim/model.hpp"

namespace ponsim {

struct LatencyStats {
    std::uint64_t count = 0;
    double mean_us = 0.0;
    double min_us = 0.0;
    double max_us = 0.0;
    double p50_us = 0.0;
    double p95_us = 0.0;
    double p99_us = 0.0;

    bool empty() const { return count == 0; }
};

/// departed_at - generated_at in microseconds. Throws InvariantError if the
/// packet has not departed.
double latency_of(const Packet& pkt);

/// Relative-error quantile sketch over positive integers (log-spaced buckets).
class LatencySketch {
public:
    explicit LatencySketch(double relative_error = 0.01);

    void add(TimeNs value);
    void merge(const LatencySketch& other);
    std::uint64_t count() const { return count_; }
    /// Nearest-rank quantile (rank is 1-based).
    TimeNs value_at_rank(std::uint64_t rank) const;
    double relative_error() const { return relative_error_; }

private:
    int bucket_of(TimeNs value) const;
    TimeNs representative(int bucket) const;

    double relative_error_;
    double log_gamma_;
    std::uint64_t zero_count_ = 0;
    std::uint64_t count_ = 0;
    std::map<int, std::uint64_t> buckets_;
};

class LatencyRecorder {
public:
    explicit LatencyRecorder(LatencyRetention retention = LatencyRetention::Full,
                             double sketch_relative_error = 0.01);

    void record(const Packet& pkt, std::uint32_t group_id, std::uint32_t subcarrier_id);
    void record_latency(TimeNs latency_ns, std::uint32_t group_id, std::uint32_t subcarrier_id);

    LatencyStats summarize_all() const;
    LatencyStats summarize_group(std::uint32_t group_id) const;
    LatencyStats summarize_subcarrier(std::uint32_t subcarrier_id) const;

    std::vector<std::uint32_t> group_ids() const;
    std::vector<std::uint32_t> subcarrier_ids() const;
    std::uint64_t count() const;

private:
    struct Cell {
        std::uint64_t count = 0;
        __int128 sum_ns = 0;
        TimeNs min_ns = 0;
        TimeNs max_ns = 0;
        std::vector<TimeNs> samples;
        std::optional<LatencySketch> sketch;
    };
    using Key = std::pair<std::uint32_t, std::uint32_t>;  // (group, subcarrier)

    template <typename Pred>
    LatencyStats summarize_if(Pred pred) const;

    LatencyRetention retention_;
    double sketch_relative_error_;
    std::map<Key, Cell> cells_;
};

/// Nearest-rank index (1-based) of the `percent` percentile among n samples.
std::uint64_t nearest_rank(std::uint64_t n, unsigned percent);

}  // namespace ponsim
