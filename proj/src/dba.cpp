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

#include "ponsim/dba.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace ponsim {

namespace {

using u128 = unsigned __int128;

void check_input(const SchedulerInput& in) {
    if (in.onu_order.empty()) throw DbaError("scheduler input has no ONUs");
    if (in.queue_bytes.size() != in.onu_order.size()) {
        throw DbaError("scheduler input needs exactly one report per ONU");
    }
    if (in.quantum_bytes == 0) throw DbaError("grant quantum must be positive");
}

std::size_t rotation(const SchedulerInput& in) {
    const auto n = static_cast<std::int64_t>(in.onu_order.size());
    return static_cast<std::size_t>(((in.cycle_index % n) + n) % n);
}

/// Lays grants out in onu_order rotated by cycle_index. Every nonzero grant is
/// preceded by guard + PSBu; zero grants sit at the cursor and take no room.
BWMap layout(const SchedulerInput& in, SchedulerMode mode, const std::vector<Bytes>& grant_of) {
    BWMap map;
    map.subcarrier_id = in.subcarrier_id;
    map.applies_to_cycle = in.cycle_index;
    map.mode_used = mode;
    map.grants.reserve(in.onu_order.size());
    const std::size_t n = in.onu_order.size();
    const std::size_t first = rotation(in);
    Bytes cursor = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = (first + k) % n;
        Grant g;
        g.onu_id = in.onu_order[i];
        g.grant_bytes = grant_of[i];
        if (g.grant_bytes > 0) cursor += in.overheads.per_burst();
        g.start_offset_bytes = cursor;
        cursor += g.grant_bytes;
        map.grants.push_back(g);
    }
    return map;
}

}  // namespace

Bytes SchedulerInput::total_reported() const {
    return std::accumulate(queue_bytes.begin(), queue_bytes.end(), Bytes{0});
}

Bytes payload_capacity(const SchedulerInput& in, std::size_t n_active_bursts) {
    const u128 overhead = static_cast<u128>(n_active_bursts) * in.overheads.per_burst();
    if (overhead > in.capacity_bytes) {
        throw DbaError("overhead exceeds capacity on subcarrier " +
                       std::to_string(in.subcarrier_id));
    }
    return in.capacity_bytes - static_cast<Bytes>(overhead);
}

BWMap rr_allocate(const SchedulerInput& in) {
    check_input(in);
    const std::size_t n = in.onu_order.size();
    const Bytes payload = payload_capacity(in, n);
    const Bytes quanta = payload / in.quantum_bytes;
    const Bytes share = quanta / n;
    const Bytes extra = quanta % n;

    // The `extra` leftover quanta go to the first ONUs of the rotated order.
    std::vector<Bytes> grant_of(n, share * in.quantum_bytes);
    const std::size_t first = rotation(in);
    for (Bytes k = 0; k < extra; ++k) grant_of[(first + k) % n] += in.quantum_bytes;
    return layout(in, SchedulerMode::RR, grant_of);
}

std::vector<std::uint64_t> largest_remainder(std::uint64_t total_quanta,
                                             const std::vector<Bytes>& weights) {
    std::vector<std::uint64_t> out(weights.size(), 0);
    u128 sum = 0;
    for (Bytes w : weights) sum += w;
    if (sum == 0) return out;

    std::vector<u128> remainder(weights.size(), 0);
    std::uint64_t given = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const u128 scaled = static_cast<u128>(total_quanta) * weights[i];
        out[i] = static_cast<std::uint64_t>(scaled / sum);
        remainder[i] = scaled % sum;
        given += out[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; given < total_quanta; ++k) {
        ++out[order[k]];
        ++given;
    }
    return out;
}

BWMap wf_allocate(const SchedulerInput& in) {
    check_input(in);
    const Bytes total = in.total_reported();
    if (total == 0) return rr_allocate(in);

    const std::size_t n = in.onu_order.size();
    const auto active = static_cast<std::size_t>(
        std::count_if(in.queue_bytes.begin(), in.queue_bytes.end(), [](Bytes q) { return q > 0; }));
    const Bytes payload = payload_capacity(in, active);
    const Bytes quanta = payload / in.quantum_bytes;
    const auto shares = largest_remainder(quanta, in.queue_bytes);

    std::vector<Bytes> grant_of(n);
    for (std::size_t i = 0; i < n; ++i) grant_of[i] = shares[i] * in.quantum_bytes;

    // Sub-quantum tail of the payload goes to the largest claimant so the
    // map is work conserving.
    const Bytes tail = payload - quanta * in.quantum_bytes;
    if (tail > 0) {
        const auto top = static_cast<std::size_t>(
            std::max_element(in.queue_bytes.begin(), in.queue_bytes.end()) - in.queue_bytes.begin());
        grant_of[top] += tail;
    }
    return layout(in, SchedulerMode::WF, grant_of);
}

double compute_threshold(double alpha, Bytes capacity_bytes, std::size_t n_onus) {
    if (n_onus == 0) throw DbaError("threshold needs at least one ONU");
    if (!(alpha > 0.0)) throw DbaError("threshold factor alpha must be positive");
    return alpha * static_cast<double>(capacity_bytes) / static_cast<double>(n_onus);
}

SchedulerMode hs_select(const SchedulerInput& in, double threshold) {
    return static_cast<double>(in.total_reported()) < threshold ? SchedulerMode::RR
                                                                : SchedulerMode::WF;
}

BWMap hs_allocate(const SchedulerInput& in, double threshold) {
    return hs_select(in, threshold) == SchedulerMode::RR ? rr_allocate(in) : wf_allocate(in);
}

BWMap allocate(Policy policy, const SchedulerInput& in, double threshold) {
    switch (policy) {
        case Policy::RR: return rr_allocate(in);
        case Policy::WF: return wf_allocate(in);
        case Policy::HS: return hs_allocate(in, threshold);
    }
    throw DbaError("unknown policy");
}

}  // namespace ponsim
