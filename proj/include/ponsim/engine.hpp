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
 * @file engine.hpp
 * @brief Discrete-event core: cycle pipeline, burst assembly, report timing.
 *
 * Timing model (all subcarriers share the cycle grid):
 *
 *   - Cycle c occupies OLT receive time [c*T, (c+1)*T). A grant at byte
 *     offset o arrives at the OLT at c*T + o*8/rate. ONUs are ranged, so ONU i
 *     starts transmitting rtt_i/2 earlier, at its own egress instant.
 *   - At each cycle boundary j*T the OLT runs the DBA on the reports that have
 *     reached it by then and emits the BWMap for cycle j + D, where
 *     D = pipeline_depth(max rtt, processing delay, T). Maps for cycles
 *     0..D are computed at t = 0 from empty reports.
 *   - Each burst carries a status report snapshotted at the end of the
 *     granted slot (ONU time); it reaches the OLT rtt/2 later. ONUs with a
 *     zero grant still send a report at their slot position at no cost.
 *   - A packet departs when its last byte leaves the ONU; latency is
 *     departure minus generation.
 */

#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "ponsim/dba.hpp"
#include "ponsim/metrics.hpp"
#include "ponsim/model.hpp"
#include "ponsim/traffic.hpp"

namespace ponsim {

struct OnuState {
    OnuId onu_id = 0;
    std::uint32_t group_id = 0;
    std::uint32_t subcarrier_id = 0;
    double rtt_us = 100.0;
    double base_rate_gbps = 0.0;
    std::deque<Packet> queue;
    Bytes queue_bytes = 0;

    void enqueue(Packet p);
};

struct UpstreamBurst {
    OnuId onu_id = 0;
    std::int64_t cycle_index = 0;
    Bytes granted_bytes = 0;
    std::vector<Packet> carried_packets;
    StatusReport report;
    Bytes wasted_bytes = 0;
};

/// D = max(1, ceil((max_rtt + olt_proc) / cycle)).
int pipeline_depth(double max_rtt_us, double olt_proc_us, double cycle_len_us);

/// Pops the longest FIFO prefix of `onu.queue` that fits the grant, charging
/// each packet its size plus `xgem_header_bytes`. `payload_start` is the ONU
/// egress instant of the first granted byte. The report reflects what is left
/// in the queue at the end of the granted slot.
UpstreamBurst assemble_burst(OnuState& onu, const Grant& grant, TimeNs payload_start,
                             double line_rate_gbps, Bytes xgem_header_bytes,
                             std::int64_t cycle_index = 0);

/// What the OLT saw and decided when it computed one BWMap.
struct CycleDecision {
    std::uint32_t subcarrier_id = 0;
    std::int64_t cycle = 0;
    Policy policy = Policy::HS;
    SchedulerMode mode = SchedulerMode::RR;
    Bytes reported_bytes = 0;
    double threshold = 0.0;
    Bytes capacity_bytes = 0;
    std::size_t n_onus = 0;
    TimeNs computed_at = 0;
    /// Latest snapshot_at among the reports used; nullopt if none has arrived.
    std::optional<TimeNs> newest_snapshot;
};

/// Hooks for tracing and for tests that audit a run independently.
class EngineObserver {
public:
    virtual ~EngineObserver() = default;
    virtual void on_arrival(const Packet&) {}
    virtual void on_bwmap(const BWMap&, const CycleDecision&) {}
    /// Called once per grant, including zero grants (report-only).
    virtual void on_burst(const UpstreamBurst&, std::uint32_t /*subcarrier_id*/,
                          TimeNs /*payload_start*/) {}
    /// The report the OLT will use, snapshotted at the end of the granted slot
    /// (so it includes packets that arrived while the burst was on the wire).
    virtual void on_report(const StatusReport&) {}
};

/// Writes `cycle,subcarrier,mode,onu,grant_bytes,carried,wasted_bytes` rows.
class EventTraceWriter : public EngineObserver {
public:
    explicit EventTraceWriter(std::ostream& os);
    void on_bwmap(const BWMap& map, const CycleDecision& d) override;
    void on_burst(const UpstreamBurst& b, std::uint32_t subcarrier_id, TimeNs) override;

private:
    std::ostream& os_;
    std::map<std::pair<std::uint32_t, std::int64_t>, SchedulerMode> modes_;
};

/// Writes every generated packet as `onu_id,generated_at_ns,size_bytes`.
class ArrivalTraceWriter : public EngineObserver {
public:
    explicit ArrivalTraceWriter(std::ostream& os);
    void on_arrival(const Packet& p) override;

private:
    std::ostream& os_;
};

/// Forwards every hook to each registered observer in order.
class ObserverFanout : public EngineObserver {
public:
    void add(EngineObserver* o) { if (o) targets_.push_back(o); }
    void on_arrival(const Packet& p) override;
    void on_bwmap(const BWMap& m, const CycleDecision& d) override;
    void on_burst(const UpstreamBurst& b, std::uint32_t sc, TimeNs t) override;
    void on_report(const StatusReport& r) override;

private:
    std::vector<EngineObserver*> targets_;
};

struct ModeSample {
    std::int64_t cycle = 0;
    SchedulerMode mode = SchedulerMode::RR;
    Bytes reported_bytes = 0;
};

struct SubcarrierSummary {
    std::uint32_t subcarrier_id = 0;
    Policy policy = Policy::HS;
    double rate_gbps = 0.0;
    Bytes capacity_bytes = 0;
    std::size_t n_onus = 0;
    double threshold = 0.0;
    std::vector<ModeSample> timeline;
    /// Carried packet bytes / capacity, per cycle.
    std::vector<double> utilization;
    Bytes carried_bytes = 0;
    Bytes wasted_bytes = 0;

    double rr_fraction() const;
};

struct Totals {
    std::uint64_t generated_packets = 0;
    std::uint64_t departed_packets = 0;
    std::uint64_t residual_packets = 0;
    Bytes generated_bytes = 0;
    Bytes departed_bytes = 0;
    Bytes residual_bytes = 0;
};

struct SimReport {
    LatencyStats global;
    std::map<std::uint32_t, LatencyStats> by_group;
    std::map<std::uint32_t, LatencyStats> by_subcarrier;
    std::vector<SubcarrierSummary> subcarriers;
    Totals totals;
    int pipeline_depth = 1;
    std::int64_t cycles = 0;
};

class Engine {
public:
    explicit Engine(SimConfig cfg, EngineObserver* observer = nullptr);

    /// Replace Poisson traffic with an explicit packet list (any order).
    void set_scripted_arrivals(std::vector<Packet> arrivals);
    /// Override the drawn round-trip times (one per ONU, microseconds).
    void set_rtts(std::vector<double> rtt_us);

    SimReport run();

    const std::vector<OnuState>& onus() const { return onus_; }

private:
    enum class EventKind : std::uint8_t { Burst = 0, Report = 1, Compute = 2 };
    struct Event {
        TimeNs at = 0;
        EventKind kind = EventKind::Burst;
        std::uint64_t seq = 0;
        std::uint32_t sc_index = 0;
        OnuId onu = 0;
        std::int64_t cycle = 0;
        Bytes grant_bytes = 0;
    };
    struct EventLater {
        bool operator()(const Event& a, const Event& b) const;
    };
    struct PendingArrival {
        TimeNs at;
        OnuId onu;
        bool operator>(const PendingArrival& o) const {
            return at != o.at ? at > o.at : onu > o.onu;
        }
    };
    struct PendingReport {
        TimeNs visible_at;
        StatusReport report;
    };
    struct Subcarrier {
        SubcarrierConfig cfg;
        Bytes capacity = 0;
        double threshold = 0.0;
        SubcarrierSummary summary;
    };

    void setup();
    void push(Event e);
    std::optional<Packet> pull_source(OnuId onu);
    void refill(OnuId onu);
    void deliver_until(TimeNs t);
    void compute_map(std::size_t sc_index, std::int64_t cycle, TimeNs now);
    void handle_burst(const Event& e);
    void handle_report(const Event& e);
    void finish(SimReport& report);

    SimConfig cfg_;
    EngineObserver* observer_;
    bool scripted_ = false;
    std::vector<std::deque<Packet>> script_;
    std::optional<std::vector<double>> rtt_override_;

    std::vector<OnuState> onus_;
    std::vector<TimeNs> rtt_half_ns_;
    std::vector<Subcarrier> subcarriers_;
    std::vector<TrafficSource> sources_;
    std::vector<std::optional<Packet>> next_packet_;
    std::priority_queue<PendingArrival, std::vector<PendingArrival>, std::greater<>> arrivals_;
    std::priority_queue<Event, std::vector<Event>, EventLater> events_;
    std::vector<std::deque<PendingReport>> in_flight_reports_;
    std::vector<StatusReport> visible_reports_;
    std::vector<bool> has_visible_report_;
    std::vector<TimeNs> last_departure_;
    std::vector<std::uint64_t> last_departed_id_;

    LatencyRecorder recorder_;
    Totals totals_;
    TimeNs horizon_ns_ = 0;
    TimeNs cycle_ns_ = 0;
    TimeNs warmup_ns_ = 0;
    std::int64_t n_cycles_ = 0;
    int depth_ = 1;
    std::uint64_t next_event_seq_ = 0;
    std::uint64_t next_packet_id_ = 0;
};

/// Validates `cfg`, runs one simulation and returns its report.
SimReport run(const SimConfig& cfg, EngineObserver* observer = nullptr);

}  // namespace ponsim
