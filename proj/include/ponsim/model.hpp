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
 * @file model.hpp
 * @brief Domain types shared by the traffic, scheduler and engine layers.
 *
 * Simulated time is an integer count of nanoseconds (TimeNs). Configuration
 * values are expressed in microseconds and Gb/s and converted once, when a
 * run starts. Byte quantities are unsigned 64-bit integers throughout.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ponsim {

using TimeNs = std::int64_t;
using OnuId = std::uint32_t;
using Bytes = std::uint64_t;

inline constexpr std::uint32_t kMinPacketBytes = 64;
inline constexpr std::uint32_t kMaxPacketBytes = 1518;

TimeNs us_to_ns(double us);
double ns_to_us(TimeNs ns);

/// Time needed to serialize `bytes` at `rate_gbps`, rounded to the nearest ns.
TimeNs serialization_ns(Bytes bytes, double rate_gbps);

enum class Policy { RR, WF, HS };
enum class SchedulerMode { RR, WF };

std::string_view to_string(Policy p);
std::string_view to_string(SchedulerMode m);
Policy parse_policy(std::string_view s);

struct Packet {
    std::uint64_t id = 0;
    OnuId onu_id = 0;
    std::uint32_t size_bytes = kMinPacketBytes;
    TimeNs generated_at = 0;
    std::optional<TimeNs> departed_at;
};

struct StatusReport {
    OnuId onu_id = 0;
    Bytes queue_bytes = 0;
    TimeNs snapshot_at = 0;
};

struct Grant {
    OnuId onu_id = 0;
    Bytes start_offset_bytes = 0;
    Bytes grant_bytes = 0;
};

struct BWMap {
    std::uint32_t subcarrier_id = 0;
    std::int64_t applies_to_cycle = 0;
    SchedulerMode mode_used = SchedulerMode::RR;
    std::vector<Grant> grants;
};

/// Per-burst framing (PSBu preamble, guard time) and per-packet XGEM header.
struct Overheads {
    Bytes psbu_bytes = 24;
    Bytes xgem_header_bytes = 8;
    Bytes guard_bytes = 8;

    Bytes per_burst() const { return psbu_bytes + guard_bytes; }
};

struct SubcarrierConfig {
    std::uint32_t subcarrier_id = 0;
    double rate_gbps = 100.0;
    std::vector<OnuId> onu_ids;
    Policy dba_policy = Policy::HS;
};

/// ONUs sharing a traffic profile and a statistics bucket.
struct OnuGroup {
    std::uint32_t group_id = 0;
    std::vector<OnuId> onu_ids;
    double base_rate_gbps = 0.0;
};

struct BusyHourConfig {
    double p_min_us = 2000.0;
    double p_max_us = 3000.0;
    double l_min_us = 500.0;
    double l_max_us = 1000.0;
    double ratio_b = 3.0;
    bool shared_per_group = false;
};

enum class LatencyRetention { Full, Sketch };

struct SimConfig {
    std::uint32_t n_onus = 1;
    std::vector<SubcarrierConfig> subcarriers;
    std::vector<OnuGroup> groups;
    double cycle_len_us = 125.0;
    double alpha = 1.5;
    Overheads overheads;
    Bytes grant_quantum_bytes = 4;
    double oltproc_us = 0.0;
    double rtt_min_us = 80.0;
    double rtt_max_us = 120.0;
    BusyHourConfig busy;
    std::uint64_t rng_seed = 1;
    double sim_duration_us = 1e6;
    std::uint32_t warmup_cycles = 10;
    LatencyRetention retention = LatencyRetention::Full;
    double sketch_relative_error = 0.01;
};

/// Thrown with the complete list of violations found in a configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Raised when a run observes a broken model invariant.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// floor(rate * 1e9 * cycle * 1e-6 / 8), exact for decimal inputs of
/// ordinary magnitude.
Bytes cycle_capacity_bytes(double rate_gbps, double cycle_len_us);

/// Returns every invariant violation in `cfg`; empty when the config is valid.
std::vector<std::string> config_problems(const SimConfig& cfg);

/// Returns `cfg` unchanged or throws ConfigError listing all violations.
const SimConfig& validate_config(const SimConfig& cfg);

/// Single carrier, single group topology: all ONUs on one subcarrier.
SimConfig make_single_carrier(std::uint32_t n_onus, double rate_gbps,
                              double base_rate_gbps, Policy policy);

}  // namespace ponsim
