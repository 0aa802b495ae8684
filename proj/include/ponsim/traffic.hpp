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
 * @file traffic.hpp
 * @brief Per-ONU Poisson packet sources modulated by busy-hour windows.
 *
 * Each source owns two random streams derived from (master seed, ONU id):
 * one for its busy-hour schedule and one for arrivals and sizes. A source
 * therefore produces the same sequence no matter which other ONUs exist.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "ponsim/model.hpp"

namespace ponsim {

struct BusyWindow {
    TimeNs start = 0;
    TimeNs end = 0;
};

/// Mean of the discrete uniform packet-size law on [64, 1518].
inline constexpr double kMeanPacketBytes = (kMinPacketBytes + kMaxPacketBytes) / 2.0;

/// splitmix64 finalizer over (master, stream, lane); used to derive independent
/// engine seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t lane = 0);

/// Busy windows recur start-to-start every U[p_min, p_max]; each lasts
/// U[l_min, l_max]. A window that would begin before its predecessor ends is
/// pushed back to that end. Windows are clipped at `horizon`.
std::vector<BusyWindow> schedule_busy_windows(const BusyHourConfig& cfg, TimeNs horizon,
                                              std::mt19937_64& rng);

/// base_rate * b inside any window, base_rate elsewhere.
double effective_rate(TimeNs t, double base_rate, std::span<const BusyWindow> windows, double b);

class TrafficSource {
public:
    /// `shared_windows` replaces the per-ONU schedule (group-shared busy hours).
    TrafficSource(OnuId onu, double base_rate_gbps, const BusyHourConfig& busy, TimeNs horizon,
                  std::uint64_t master_seed,
                  std::optional<std::vector<BusyWindow>> shared_windows = std::nullopt);

    /// Next packet after the previous one, or nullopt once the horizon is
    /// passed or the rate is zero. Returned packets carry id 0; the caller
    /// numbers them.
    std::optional<Packet> next_arrival();

    OnuId onu_id() const { return onu_; }
    double base_rate_gbps() const { return base_rate_gbps_; }
    const std::vector<BusyWindow>& windows() const { return windows_; }

private:
    double packets_per_ns(bool busy) const;

    OnuId onu_;
    double base_rate_gbps_;
    double ratio_b_;
    TimeNs horizon_;
    std::vector<BusyWindow> windows_;
    std::size_t window_cursor_ = 0;
    double clock_ns_ = 0.0;
    bool exhausted_ = false;
    std::mt19937_64 rng_;
    std::exponential_distribution<double> unit_exp_{1.0};
    std::uniform_int_distribution<std::uint32_t> size_dist_{kMinPacketBytes, kMaxPacketBytes};
};

/// Busy schedule shared by every ONU of `group_id` when shared_per_group is set.
std::vector<BusyWindow> group_busy_windows(const BusyHourConfig& busy, TimeNs horizon,
                                           std::uint64_t master_seed, std::uint32_t group_id);

/// CSV header for arrival traces: onu_id,generated_at_ns,size_bytes
void write_arrival_header(std::ostream& os);
void write_arrival_row(std::ostream& os, const Packet& p);

}  // namespace ponsim
