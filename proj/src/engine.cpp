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

#include "ponsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>

namespace ponsim {

namespace {

constexpr std::uint64_t kRttLane = 3;

}  // namespace

void OnuState::enqueue(Packet p) {
    queue_bytes += p.size_bytes;
    queue.push_back(std::move(p));
}

int pipeline_depth(double max_rtt_us, double olt_proc_us, double cycle_len_us) {
    const double cycles = std::ceil((max_rtt_us + olt_proc_us) / cycle_len_us - 1e-12);
    return std::max(1, static_cast<int>(cycles));
}

UpstreamBurst assemble_burst(OnuState& onu, const Grant& grant, TimeNs payload_start,
                             double line_rate_gbps, Bytes xgem_header_bytes,
                             std::int64_t cycle_index) {
    if (grant.onu_id != onu.onu_id) {
        throw InvariantError("grant for ONU " + std::to_string(grant.onu_id) +
                             " handed to ONU " + std::to_string(onu.onu_id));
    }
    UpstreamBurst b;
    b.onu_id = onu.onu_id;
    b.cycle_index = cycle_index;
    b.granted_bytes = grant.grant_bytes;

    Bytes used = 0;
    while (!onu.queue.empty()) {
        Packet& p = onu.queue.front();
        const Bytes cost = p.size_bytes + xgem_header_bytes;
        if (used + cost > grant.grant_bytes) break;
        used += cost;
        p.departed_at = payload_start + serialization_ns(used, line_rate_gbps);
        onu.queue_bytes -= p.size_bytes;
        b.carried_packets.push_back(std::move(p));
        onu.queue.pop_front();
    }
    b.wasted_bytes = grant.grant_bytes - used;
    b.report.onu_id = onu.onu_id;
    b.report.queue_bytes = onu.queue_bytes;
    b.report.snapshot_at = payload_start + serialization_ns(grant.grant_bytes, line_rate_gbps);
    return b;
}

// ---------------------------------------------------------------------------
// Observers

EventTraceWriter::EventTraceWriter(std::ostream& os) : os_(os) {
    os_ << "cycle,subcarrier,mode,onu,grant_bytes,carried,wasted_bytes\n";
}

void EventTraceWriter::on_bwmap(const BWMap& map, const CycleDecision& d) {
    modes_[{d.subcarrier_id, map.applies_to_cycle}] = map.mode_used;
}

void EventTraceWriter::on_burst(const UpstreamBurst& b, std::uint32_t subcarrier_id, TimeNs) {
    const auto key = std::make_pair(subcarrier_id, b.cycle_index);
    auto it = modes_.find(key);
    const SchedulerMode mode = it != modes_.end() ? it->second : SchedulerMode::RR;
    os_ << b.cycle_index << ',' << subcarrier_id << ',' << to_string(mode) << ',' << b.onu_id
        << ',' << b.granted_bytes << ',' << b.carried_packets.size() << ',' << b.wasted_bytes
        << '\n';
    // Maps for older cycles on this subcarrier are no longer needed.
    modes_.erase(modes_.begin(), modes_.lower_bound({subcarrier_id, b.cycle_index - 1}));
}

ArrivalTraceWriter::ArrivalTraceWriter(std::ostream& os) : os_(os) { write_arrival_header(os_); }

void ArrivalTraceWriter::on_arrival(const Packet& p) { write_arrival_row(os_, p); }

void ObserverFanout::on_arrival(const Packet& p) {
    for (auto* t : targets_) t->on_arrival(p);
}

void ObserverFanout::on_bwmap(const BWMap& m, const CycleDecision& d) {
    for (auto* t : targets_) t->on_bwmap(m, d);
}

void ObserverFanout::on_burst(const UpstreamBurst& b, std::uint32_t sc, TimeNs t) {
    for (auto* x : targets_) x->on_burst(b, sc, t);
}

void ObserverFanout::on_report(const StatusReport& r) {
    for (auto* x : targets_) x->on_report(r);
}

double SubcarrierSummary::rr_fraction() const {
    if (timeline.empty()) return std::nan("");
    const auto rr = std::count_if(timeline.begin(), timeline.end(),
                                  [](const ModeSample& s) { return s.mode == SchedulerMode::RR; });
    return static_cast<double>(rr) / static_cast<double>(timeline.size());
}

// ---------------------------------------------------------------------------
// Engine

bool Engine::EventLater::operator()(const Event& a, const Event& b) const {
    if (a.at != b.at) return a.at > b.at;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
}

Engine::Engine(SimConfig cfg, EngineObserver* observer)
    : cfg_(std::move(cfg)),
      observer_(observer),
      recorder_(cfg_.retention, cfg_.sketch_relative_error) {}

void Engine::set_scripted_arrivals(std::vector<Packet> arrivals) {
    scripted_ = true;
    std::stable_sort(arrivals.begin(), arrivals.end(),
                     [](const Packet& a, const Packet& b) { return a.generated_at < b.generated_at; });
    script_.assign(cfg_.n_onus, {});
    for (auto& p : arrivals) {
        if (p.onu_id >= cfg_.n_onus) {
            throw ConfigError({"scripted packet for unknown ONU " + std::to_string(p.onu_id)});
        }
        if (p.size_bytes < kMinPacketBytes || p.size_bytes > kMaxPacketBytes) {
            throw ConfigError({"scripted packet size out of [64, 1518]"});
        }
        p.departed_at.reset();
        script_[p.onu_id].push_back(p);
    }
}

void Engine::set_rtts(std::vector<double> rtt_us) {
    if (rtt_us.size() != cfg_.n_onus) throw ConfigError({"rtt override needs one value per ONU"});
    for (double r : rtt_us) {
        if (!(r >= 0.0)) throw ConfigError({"rtt override must be non-negative"});
    }
    rtt_override_ = std::move(rtt_us);
}

void Engine::push(Event e) {
    e.seq = next_event_seq_++;
    events_.push(e);
}

std::optional<Packet> Engine::pull_source(OnuId onu) {
    if (scripted_) {
        auto& q = script_[onu];
        while (!q.empty()) {
            Packet p = q.front();
            q.pop_front();
            if (p.generated_at <= horizon_ns_) return p;
        }
        return std::nullopt;
    }
    return sources_[onu].next_arrival();
}

void Engine::refill(OnuId onu) {
    next_packet_[onu] = pull_source(onu);
    if (next_packet_[onu]) arrivals_.push({next_packet_[onu]->generated_at, onu});
}

void Engine::deliver_until(TimeNs t) {
    while (!arrivals_.empty() && arrivals_.top().at <= t) {
        const OnuId onu = arrivals_.top().onu;
        arrivals_.pop();
        Packet p = std::move(*next_packet_[onu]);
        p.id = next_packet_id_++;
        ++totals_.generated_packets;
        totals_.generated_bytes += p.size_bytes;
        if (observer_) observer_->on_arrival(p);
        onus_[onu].enqueue(std::move(p));
        refill(onu);
    }
}

void Engine::setup() {
    validate_config(cfg_);
    cycle_ns_ = us_to_ns(cfg_.cycle_len_us);
    horizon_ns_ = us_to_ns(cfg_.sim_duration_us);
    warmup_ns_ = static_cast<TimeNs>(cfg_.warmup_cycles) * cycle_ns_;
    n_cycles_ = (horizon_ns_ + cycle_ns_ - 1) / cycle_ns_;

    onus_.assign(cfg_.n_onus, {});
    for (OnuId i = 0; i < cfg_.n_onus; ++i) onus_[i].onu_id = i;
    for (const auto& g : cfg_.groups) {
        for (OnuId id : g.onu_ids) {
            onus_[id].group_id = g.group_id;
            onus_[id].base_rate_gbps = g.base_rate_gbps;
        }
    }
    for (const auto& sc : cfg_.subcarriers) {
        for (OnuId id : sc.onu_ids) onus_[id].subcarrier_id = sc.subcarrier_id;
    }

    rtt_half_ns_.assign(cfg_.n_onus, 0);
    double max_rtt = 0.0;
    for (OnuId i = 0; i < cfg_.n_onus; ++i) {
        double rtt = cfg_.rtt_min_us;
        if (rtt_override_) {
            rtt = (*rtt_override_)[i];
        } else if (cfg_.rtt_max_us > cfg_.rtt_min_us) {
            std::mt19937_64 rng(derive_seed(cfg_.rng_seed, i, kRttLane));
            rtt = std::uniform_real_distribution<double>(cfg_.rtt_min_us, cfg_.rtt_max_us)(rng);
        }
        onus_[i].rtt_us = rtt;
        rtt_half_ns_[i] = us_to_ns(rtt / 2.0);
        max_rtt = std::max(max_rtt, rtt);
    }
    depth_ = pipeline_depth(max_rtt, cfg_.oltproc_us, cfg_.cycle_len_us);

    subcarriers_.clear();
    for (const auto& sc : cfg_.subcarriers) {
        Subcarrier s;
        s.cfg = sc;
        s.capacity = cycle_capacity_bytes(sc.rate_gbps, cfg_.cycle_len_us);
        s.threshold = compute_threshold(cfg_.alpha, s.capacity, sc.onu_ids.size());
        s.summary.subcarrier_id = sc.subcarrier_id;
        s.summary.policy = sc.dba_policy;
        s.summary.rate_gbps = sc.rate_gbps;
        s.summary.capacity_bytes = s.capacity;
        s.summary.n_onus = sc.onu_ids.size();
        s.summary.threshold = s.threshold;
        s.summary.utilization.assign(static_cast<std::size_t>(n_cycles_), 0.0);
        s.summary.timeline.reserve(static_cast<std::size_t>(n_cycles_));
        subcarriers_.push_back(std::move(s));
    }

    in_flight_reports_.assign(cfg_.n_onus, {});
    visible_reports_.assign(cfg_.n_onus, {});
    for (OnuId i = 0; i < cfg_.n_onus; ++i) visible_reports_[i].onu_id = i;
    has_visible_report_.assign(cfg_.n_onus, false);
    last_departure_.assign(cfg_.n_onus, std::numeric_limits<TimeNs>::min());
    last_departed_id_.assign(cfg_.n_onus, 0);

    sources_.clear();
    if (!scripted_) {
        std::map<std::uint32_t, std::vector<BusyWindow>> shared;
        if (cfg_.busy.shared_per_group) {
            for (const auto& g : cfg_.groups) {
                shared[g.group_id] =
                    group_busy_windows(cfg_.busy, horizon_ns_, cfg_.rng_seed, g.group_id);
            }
        }
        sources_.reserve(cfg_.n_onus);
        for (OnuId i = 0; i < cfg_.n_onus; ++i) {
            std::optional<std::vector<BusyWindow>> windows;
            if (cfg_.busy.shared_per_group) windows = shared[onus_[i].group_id];
            sources_.emplace_back(i, onus_[i].base_rate_gbps, cfg_.busy, horizon_ns_,
                                  cfg_.rng_seed, std::move(windows));
        }
    }
    next_packet_.assign(cfg_.n_onus, std::nullopt);
    for (OnuId i = 0; i < cfg_.n_onus; ++i) refill(i);

    // Pipeline fill: maps for cycles 0..D come from the empty initial reports.
    for (std::int64_t c = 0; c <= depth_ && c < n_cycles_; ++c) {
        for (std::size_t s = 0; s < subcarriers_.size(); ++s) compute_map(s, c, 0);
    }
    for (std::int64_t j = 1; j + depth_ < n_cycles_; ++j) {
        for (std::size_t s = 0; s < subcarriers_.size(); ++s) {
            Event e;
            e.at = j * cycle_ns_;
            e.kind = EventKind::Compute;
            e.sc_index = static_cast<std::uint32_t>(s);
            e.cycle = j + depth_;
            push(e);
        }
    }
}

void Engine::compute_map(std::size_t sc_index, std::int64_t cycle, TimeNs now) {
    Subcarrier& sc = subcarriers_[sc_index];

    SchedulerInput in;
    in.subcarrier_id = sc.cfg.subcarrier_id;
    in.capacity_bytes = sc.capacity;
    in.onu_order = sc.cfg.onu_ids;
    in.queue_bytes.reserve(in.onu_order.size());
    in.cycle_index = cycle;
    in.overheads = cfg_.overheads;
    in.quantum_bytes = cfg_.grant_quantum_bytes;

    CycleDecision d;
    for (OnuId id : in.onu_order) {
        auto& flight = in_flight_reports_[id];
        while (!flight.empty() && flight.front().visible_at <= now) {
            visible_reports_[id] = flight.front().report;
            has_visible_report_[id] = true;
            flight.pop_front();
        }
        in.queue_bytes.push_back(visible_reports_[id].queue_bytes);
        if (has_visible_report_[id]) {
            const TimeNs snap = visible_reports_[id].snapshot_at;
            d.newest_snapshot = d.newest_snapshot ? std::max(*d.newest_snapshot, snap) : snap;
        }
    }

    BWMap map = allocate(sc.cfg.dba_policy, in, sc.threshold);
    map.applies_to_cycle = cycle;

    // Capacity and layout audit.
    if (map.grants.size() != in.onu_order.size()) {
        throw InvariantError("BWMap does not hold one grant per ONU");
    }
    Bytes used = 0;
    Bytes cursor = 0;
    for (const auto& g : map.grants) {
        if (g.start_offset_bytes < cursor) throw InvariantError("overlapping grants in BWMap");
        if (g.grant_bytes > 0) used += g.grant_bytes + cfg_.overheads.per_burst();
        cursor = g.start_offset_bytes + g.grant_bytes;
    }
    if (used > sc.capacity || cursor > sc.capacity) {
        throw InvariantError("BWMap for cycle " + std::to_string(cycle) + " exceeds capacity");
    }

    d.subcarrier_id = sc.cfg.subcarrier_id;
    d.cycle = cycle;
    d.policy = sc.cfg.dba_policy;
    d.mode = map.mode_used;
    d.reported_bytes = in.total_reported();
    d.threshold = sc.threshold;
    d.capacity_bytes = sc.capacity;
    d.n_onus = in.onu_order.size();
    d.computed_at = now;
    sc.summary.timeline.push_back({cycle, map.mode_used, d.reported_bytes});
    if (observer_) observer_->on_bwmap(map, d);

    const TimeNs cycle_start = cycle * cycle_ns_;
    for (const auto& g : map.grants) {
        Event e;
        e.at = cycle_start + serialization_ns(g.start_offset_bytes, sc.cfg.rate_gbps) -
               rtt_half_ns_[g.onu_id];
        e.kind = EventKind::Burst;
        e.sc_index = static_cast<std::uint32_t>(sc_index);
        e.onu = g.onu_id;
        e.cycle = cycle;
        e.grant_bytes = g.grant_bytes;
        push(e);
    }
}

void Engine::handle_burst(const Event& e) {
    deliver_until(e.at);
    Subcarrier& sc = subcarriers_[e.sc_index];
    OnuState& onu = onus_[e.onu];
    Grant g;
    g.onu_id = e.onu;
    g.grant_bytes = e.grant_bytes;
    UpstreamBurst burst =
        assemble_burst(onu, g, e.at, sc.cfg.rate_gbps, cfg_.overheads.xgem_header_bytes, e.cycle);

    Bytes carried = 0;
    for (const Packet& p : burst.carried_packets) {
        const TimeNs dep = *p.departed_at;
        if (dep < last_departure_[e.onu] || p.id < last_departed_id_[e.onu]) {
            throw InvariantError("FIFO order broken on ONU " + std::to_string(e.onu));
        }
        if (dep - p.generated_at < serialization_ns(p.size_bytes, sc.cfg.rate_gbps)) {
            throw InvariantError("packet " + std::to_string(p.id) +
                                 " departed faster than its serialization time");
        }
        last_departure_[e.onu] = dep;
        last_departed_id_[e.onu] = p.id;
        ++totals_.departed_packets;
        totals_.departed_bytes += p.size_bytes;
        carried += p.size_bytes;
        if (p.generated_at >= warmup_ns_) recorder_.record(p, onu.group_id, sc.cfg.subcarrier_id);
    }
    sc.summary.carried_bytes += carried;
    sc.summary.wasted_bytes += burst.wasted_bytes;
    if (e.cycle >= 0 && e.cycle < n_cycles_) {
        sc.summary.utilization[static_cast<std::size_t>(e.cycle)] +=
            static_cast<double>(carried) / static_cast<double>(sc.capacity);
    }
    if (observer_) observer_->on_burst(burst, sc.cfg.subcarrier_id, e.at);

    Event r = e;
    r.kind = EventKind::Report;
    r.at = burst.report.snapshot_at;
    push(r);
}

void Engine::handle_report(const Event& e) {
    deliver_until(e.at);
    StatusReport rep;
    rep.onu_id = e.onu;
    rep.queue_bytes = onus_[e.onu].queue_bytes;
    rep.snapshot_at = e.at;
    if (observer_) observer_->on_report(rep);
    in_flight_reports_[e.onu].push_back({e.at + rtt_half_ns_[e.onu], rep});
}

void Engine::finish(SimReport& report) {
    deliver_until(horizon_ns_);
    for (const auto& onu : onus_) {
        totals_.residual_packets += onu.queue.size();
        totals_.residual_bytes += onu.queue_bytes;
    }
    if (totals_.generated_packets != totals_.departed_packets + totals_.residual_packets ||
        totals_.generated_bytes != totals_.departed_bytes + totals_.residual_bytes) {
        throw InvariantError("packet conservation violated");
    }
    report.totals = totals_;
    report.global = recorder_.summarize_all();
    for (const auto& g : cfg_.groups) report.by_group[g.group_id] = recorder_.summarize_group(g.group_id);
    for (const auto& sc : cfg_.subcarriers) {
        report.by_subcarrier[sc.subcarrier_id] = recorder_.summarize_subcarrier(sc.subcarrier_id);
    }
    for (auto& sc : subcarriers_) report.subcarriers.push_back(std::move(sc.summary));
    report.pipeline_depth = depth_;
    report.cycles = n_cycles_;
}

SimReport Engine::run() {
    setup();
    while (!events_.empty()) {
        const Event e = events_.top();
        events_.pop();
        switch (e.kind) {
            case EventKind::Compute: compute_map(e.sc_index, e.cycle, e.at); break;
            case EventKind::Burst: handle_burst(e); break;
            case EventKind::Report: handle_report(e); break;
        }
    }
    SimReport report;
    finish(report);
    return report;
}

SimReport run(const SimConfig& cfg, EngineObserver* observer) {
    Engine engine(cfg, observer);
    return engine.run();
}

}  // namespace ponsim
