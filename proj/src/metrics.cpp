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

#include "ponsim/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace ponsim {

double latency_of(const Packet& pkt) {
    if (!pkt.departed_at) {
        throw InvariantError("latency requested for packet " + std::to_string(pkt.id) +
                             " that has not departed");
    }
    return ns_to_us(*pkt.departed_at - pkt.generated_at);
}

std::uint64_t nearest_rank(std::uint64_t n, unsigned percent) {
    if (n == 0) return 0;
    const std::uint64_t rank = (static_cast<std::uint64_t>(percent) * n + 99) / 100;
    return std::clamp<std::uint64_t>(rank, 1, n);
}

// ---------------------------------------------------------------------------
// LatencySketch

LatencySketch::LatencySketch(double relative_error)
    : relative_error_(relative_error),
      log_gamma_(std::log((1.0 + relative_error) / (1.0 - relative_error))) {}

int LatencySketch::bucket_of(TimeNs value) const {
    return static_cast<int>(std::ceil(std::log(static_cast<double>(value)) / log_gamma_));
}

TimeNs LatencySketch::representative(int bucket) const {
    // Midpoint (in relative terms) of (gamma^(i-1), gamma^i].
    const double gamma = std::exp(log_gamma_);
    const double upper = std::exp(log_gamma_ * bucket);
    return static_cast<TimeNs>(std::llround(2.0 * upper / (gamma + 1.0)));
}

void LatencySketch::add(TimeNs value) {
    ++count_;
    if (value <= 0) {
        ++zero_count_;
        return;
    }
    ++buckets_[bucket_of(value)];
}

void LatencySketch::merge(const LatencySketch& other) {
    count_ += other.count_;
    zero_count_ += other.zero_count_;
    for (const auto& [b, c] : other.buckets_) buckets_[b] += c;
}

TimeNs LatencySketch::value_at_rank(std::uint64_t rank) const {
    if (rank <= zero_count_) return 0;
    std::uint64_t seen = zero_count_;
    for (const auto& [b, c] : buckets_) {
        seen += c;
        if (seen >= rank) return representative(b);
    }
    return buckets_.empty() ? 0 : representative(buckets_.rbegin()->first);
}

// ---------------------------------------------------------------------------
// LatencyRecorder

LatencyRecorder::LatencyRecorder(LatencyRetention retention, double sketch_relative_error)
    : retention_(retention), sketch_relative_error_(sketch_relative_error) {}

void LatencyRecorder::record(const Packet& pkt, std::uint32_t group_id,
                             std::uint32_t subcarrier_id) {
    if (!pkt.departed_at) {
        throw InvariantError("cannot record packet " + std::to_string(pkt.id) +
                             ": not departed");
    }
    record_latency(*pkt.departed_at - pkt.generated_at, group_id, subcarrier_id);
}

void LatencyRecorder::record_latency(TimeNs latency_ns, std::uint32_t group_id,
                                     std::uint32_t subcarrier_id) {
    Cell& c = cells_[{group_id, subcarrier_id}];
    if (c.count == 0) {
        c.min_ns = c.max_ns = latency_ns;
    } else {
        c.min_ns = std::min(c.min_ns, latency_ns);
        c.max_ns = std::max(c.max_ns, latency_ns);
    }
    ++c.count;
    c.sum_ns += latency_ns;
    if (retention_ == LatencyRetention::Full) {
        c.samples.push_back(latency_ns);
    } else {
        if (!c.sketch) c.sketch.emplace(sketch_relative_error_);
        c.sketch->add(latency_ns);
    }
}

template <typename Pred>
LatencyStats LatencyRecorder::summarize_if(Pred pred) const {
    LatencyStats s;
    __int128 sum = 0;
    TimeNs lo = 0;
    TimeNs hi = 0;
    std::vector<TimeNs> pooled;
    LatencySketch sketch(sketch_relative_error_);
    for (const auto& [key, c] : cells_) {
        if (!pred(key) || c.count == 0) continue;
        if (s.count == 0) {
            lo = c.min_ns;
            hi = c.max_ns;
        } else {
            lo = std::min(lo, c.min_ns);
            hi = std::max(hi, c.max_ns);
        }
        s.count += c.count;
        sum += c.sum_ns;
        if (retention_ == LatencyRetention::Full) {
            pooled.insert(pooled.end(), c.samples.begin(), c.samples.end());
        } else if (c.sketch) {
            sketch.merge(*c.sketch);
        }
    }
    if (s.count == 0) {
        s.mean_us = s.min_us = s.max_us = s.p50_us = s.p95_us = s.p99_us = std::nan("");
        return s;
    }
    s.mean_us = static_cast<double>(static_cast<long double>(sum) / s.count / 1000.0L);
    s.min_us = ns_to_us(lo);
    s.max_us = ns_to_us(hi);

    auto pick = [&](unsigned pct) -> double {
        const std::uint64_t rank = nearest_rank(s.count, pct);
        TimeNs v = 0;
        if (retention_ == LatencyRetention::Full) {
            auto nth = pooled.begin() + static_cast<std::ptrdiff_t>(rank - 1);
            std::nth_element(pooled.begin(), nth, pooled.end());
            v = *nth;
        } else {
            v = std::clamp(sketch.value_at_rank(rank), lo, hi);
        }
        return ns_to_us(v);
    };
    s.p50_us = pick(50);
    s.p95_us = pick(95);
    s.p99_us = pick(99);
    return s;
}

LatencyStats LatencyRecorder::summarize_all() const {
    return summarize_if([](const Key&) { return true; });
}

LatencyStats LatencyRecorder::summarize_group(std::uint32_t group_id) const {
    return summarize_if([group_id](const Key& k) { return k.first == group_id; });
}

LatencyStats LatencyRecorder::summarize_subcarrier(std::uint32_t subcarrier_id) const {
    return summarize_if([subcarrier_id](const Key& k) { return k.second == subcarrier_id; });
}

std::vector<std::uint32_t> LatencyRecorder::group_ids() const {
    std::vector<std::uint32_t> out;
    for (const auto& [key, c] : cells_) out.push_back(key.first);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::uint32_t> LatencyRecorder::subcarrier_ids() const {
    std::vector<std::uint32_t> out;
    for (const auto& [key, c] : cells_) out.push_back(key.second);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::uint64_t LatencyRecorder::count() const {
    std::uint64_t n = 0;
    for (const auto& [key, c] : cells_) n += c.count;
    return n;
}

}  // namespace ponsim
