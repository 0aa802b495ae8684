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

#include "ponsim/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace ponsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t kWindowLane = 1;
constexpr std::uint64_t kArrivalLane = 2;
constexpr std::uint64_t kGroupStreamBase = 1ULL << 40;

TimeNs draw_us(std::mt19937_64& rng, double lo_us, double hi_us) {
    if (lo_us == hi_us) return us_to_ns(lo_us);
    std::uniform_real_distribution<double> d(lo_us, hi_us);
    return us_to_ns(d(rng));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t lane) {
    return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ (lane * 0xd1b54a32d192ed03ULL));
}

std::vector<BusyWindow> schedule_busy_windows(const BusyHourConfig& cfg, TimeNs horizon,
                                              std::mt19937_64& rng) {
    std::vector<BusyWindow> out;
    if (horizon <= 0) return out;
    TimeNs start = 0;
    TimeNs prev_end = 0;
    for (;;) {
        start += draw_us(rng, cfg.p_min_us, cfg.p_max_us);
        const TimeNs len = draw_us(rng, cfg.l_min_us, cfg.l_max_us);
        const TimeNs begin = std::max(start, prev_end);
        if (begin >= horizon) break;
        const TimeNs end = std::min(begin + len, horizon);
        if (end > begin) out.push_back({begin, end});
        prev_end = begin + len;
        if (cfg.p_max_us <= 0.0 && len <= 0) break;  // degenerate zero-period schedule
    }
    return out;
}

double effective_rate(TimeNs t, double base_rate, std::span<const BusyWindow> windows, double b) {
    auto it = std::upper_bound(windows.begin(), windows.end(), t,
                               [](TimeNs v, const BusyWindow& w) { return v < w.start; });
    if (it != windows.begin()) {
        const auto& w = *std::prev(it);
        if (t >= w.start && t < w.end) return base_rate * b;
    }
    return base_rate;
}

std::vector<BusyWindow> group_busy_windows(const BusyHourConfig& busy, TimeNs horizon,
                                           std::uint64_t master_seed, std::uint32_t group_id) {
    std::mt19937_64 rng(derive_seed(master_seed, kGroupStreamBase + group_id, kWindowLane));
    return schedule_busy_windows(busy, horizon, rng);
}

TrafficSource::TrafficSource(OnuId onu, double base_rate_gbps, const BusyHourConfig& busy,
                             TimeNs horizon, std::uint64_t master_seed,
                             std::optional<std::vector<BusyWindow>> shared_windows)
    : onu_(onu),
      base_rate_gbps_(base_rate_gbps),
      ratio_b_(busy.ratio_b),
      horizon_(horizon),
      rng_(derive_seed(master_seed, onu, kArrivalLane)) {
    if (shared_windows) {
        windows_ = std::move(*shared_windows);
    } else {
        std::mt19937_64 wrng(derive_seed(master_seed, onu, kWindowLane));
        windows_ = schedule_busy_windows(busy, horizon, wrng);
    }
    exhausted_ = !(base_rate_gbps_ > 0.0) || horizon_ <= 0;
}

double TrafficSource::packets_per_ns(bool busy) const {
    // Gb/s is bits per ns.
    const double bytes_per_ns = base_rate_gbps_ * (busy ? ratio_b_ : 1.0) / 8.0;
    return bytes_per_ns / kMeanPacketBytes;
}

std::optional<Packet> TrafficSource::next_arrival() {
    if (exhausted_) return std::nullopt;

    // Piecewise inversion: spend one Exp(1) variate across constant-rate segments.
    double need = unit_exp_(rng_);
    double t = clock_ns_;
    const double horizon = static_cast<double>(horizon_);
    for (;;) {
        while (window_cursor_ < windows_.size() &&
               static_cast<double>(windows_[window_cursor_].end) <= t) {
            ++window_cursor_;
        }
        bool busy = false;
        double seg_end = horizon;
        if (window_cursor_ < windows_.size()) {
            const auto& w = windows_[window_cursor_];
            if (t >= static_cast<double>(w.start)) {
                busy = true;
                seg_end = std::min(horizon, static_cast<double>(w.end));
            } else {
                seg_end = std::min(horizon, static_cast<double>(w.start));
            }
        }
        const double rate = packets_per_ns(busy);
        const double mass = rate * (seg_end - t);
        if (mass >= need) {
            t += need / rate;
            break;
        }
        need -= mass;
        t = seg_end;
        if (t >= horizon) {
            exhausted_ = true;
            clock_ns_ = horizon;
            return std::nullopt;
        }
    }
    clock_ns_ = t;
    const auto at = static_cast<TimeNs>(std::ceil(t));
    if (at > horizon_) {
        exhausted_ = true;
        return std::nullopt;
    }
    Packet p;
    p.onu_id = onu_;
    p.size_bytes = size_dist_(rng_);
    p.generated_at = at;
    return p;
}

void write_arrival_header(std::ostream& os) { os << "onu_id,generated_at_ns,size_bytes\n"; }

void write_arrival_row(std::ostream& os, const Packet& p) {
    os << p.onu_id << ',' << p.generated_at << ',' << p.size_bytes << '\n';
}

}  // namespace ponsim
