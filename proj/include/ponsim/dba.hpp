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
 * @file dba.hpp
 * @brief Upstream grant computation for one subcarrier and one cycle.
 *
 * The three schedulers are pure functions of a SchedulerInput:
 *
 *  - Round-Robin splits the payload evenly over every ONU on the subcarrier.
 *  - Weighted-Fair splits it in proportion to the reported queue bytes, using
 *    largest-remainder rounding on a fixed byte quantum. Grants are shares of
 *    capacity, not capped at the report, because the ONU fills its slot at
 *    transmission time with whatever it holds then.
 *  - Hybrid-Switch picks RR while the total reported backlog is below
 *    alpha * C / N and WF otherwise.
 *
 * Each ONU with a nonzero grant costs one burst of framing overhead
 * (PSBu + guard) in front of its payload.
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ponsim/model.hpp"

namespace ponsim {

class DbaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SchedulerInput {
    std::uint32_t subcarrier_id = 0;
    Bytes capacity_bytes = 0;
    std::vector<OnuId> onu_order;
    /// queue_bytes[i] is the latest report of onu_order[i].
    std::vector<Bytes> queue_bytes;
    std::int64_t cycle_index = 0;
    Overheads overheads;
    Bytes quantum_bytes = 4;

    Bytes total_reported() const;
};

/// C minus framing for `n_active_bursts` bursts. Throws DbaError when negative.
Bytes payload_capacity(const SchedulerInput& in, std::size_t n_active_bursts);

BWMap rr_allocate(const SchedulerInput& in);
BWMap wf_allocate(const SchedulerInput& in);

/// alpha * capacity / n_onus, unrounded.
double compute_threshold(double alpha, Bytes capacity_bytes, std::size_t n_onus);

SchedulerMode hs_select(const SchedulerInput& in, double threshold);
BWMap hs_allocate(const SchedulerInput& in, double threshold);

/// Dispatch on `policy`; `threshold` is only read for HS.
BWMap allocate(Policy policy, const SchedulerInput& in, double threshold);

/// Largest-remainder split of `total_quanta` in proportion to `weights`.
/// Ties in remainder go to the lower index. All-zero weights yield all zeros.
std::vector<std::uint64_t> largest_remainder(std::uint64_t total_quanta,
                                             const std::vector<Bytes>& weights);

}  // namespace ponsim
