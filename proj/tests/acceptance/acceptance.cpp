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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Progress and measured tables go to stderr.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ponsim/dba.hpp"
#include "ponsim/engine.hpp"
#include "ponsim/report_io.hpp"
#include "ponsim/runner.hpp"
#include "ponsim/scenario.hpp"
#include "ponsim/traffic.hpp"

using namespace ponsim;

namespace {

// Simulated time per sweep point for the figure-shape criteria.
constexpr double kFigureDurationUs = 500000.0;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int prec = 1) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

// ---------------------------------------------------------------------------
// Independent run auditor. Recomputes capacity, threshold and the set of
// reports visible to each HS decision from raw observations, without reading
// the engine's own bookkeeping.

class Auditor : public EngineObserver {
public:
    explicit Auditor(const SimConfig& cfg) : cfg_(cfg) {
        for (const auto& sc : cfg.subcarriers) {
            capacity_[sc.subcarrier_id] = independent_capacity(sc.rate_gbps, cfg.cycle_len_us);
            rate_[sc.subcarrier_id] = sc.rate_gbps;
            members_[sc.subcarrier_id] = sc.onu_ids;
            policy_[sc.subcarrier_id] = sc.dba_policy;
        }
        reports_.assign(cfg.n_onus, {});
        last_id_.assign(cfg.n_onus, -1);
        last_dep_.assign(cfg.n_onus, std::numeric_limits<TimeNs>::min());
    }

    static Bytes independent_capacity(double rate_gbps, double cycle_us) {
        // Gb/s times us is kilobits; 125 bytes per Gb/s-us.
        return static_cast<Bytes>(std::floor(rate_gbps * cycle_us * 125.0 + 1e-6));
    }

    void on_arrival(const Packet& p) override {
        ++arrived_;
        arrived_bytes_ += p.size_bytes;
    }

    void on_bwmap(const BWMap& map, const CycleDecision& d) override {
        const Bytes cap = capacity_.at(map.subcarrier_id);
        const Bytes frame = cfg_.overheads.psbu_bytes + cfg_.overheads.guard_bytes;
        Bytes used = 0;
        Bytes cursor = 0;
        for (const auto& g : map.grants) {
            if (g.grant_bytes > 0) used += g.grant_bytes + frame;
            if (g.start_offset_bytes < cursor) ++layout_violations;
            cursor = g.start_offset_bytes + g.grant_bytes;
        }
        if (used > cap || cursor > cap) ++capacity_violations;
        ++maps;
        if (policy_.at(map.subcarrier_id) == Policy::HS) {
            decisions_.push_back({map.subcarrier_id, d.computed_at, map.mode_used});
        }
    }

    void on_burst(const UpstreamBurst& b, std::uint32_t sc, TimeNs) override {
        const double rate = rate_.at(sc);
        for (const auto& p : b.carried_packets) {
            ++departed_;
            departed_bytes_ += p.size_bytes;
            const TimeNs dep = *p.departed_at;
            if (static_cast<std::int64_t>(p.id) <= last_id_[p.onu_id] || dep < last_dep_[p.onu_id]) {
                ++fifo_violations;
            }
            last_id_[p.onu_id] = static_cast<std::int64_t>(p.id);
            last_dep_[p.onu_id] = dep;
            if (static_cast<double>(dep - p.generated_at) < p.size_bytes * 8.0 / rate - 0.5) {
                ++latency_violations;
            }
        }
    }

    void on_report(const StatusReport& r) override {
        reports_[r.onu_id].push_back({r.snapshot_at, r.queue_bytes});
    }

    /// Checks that need the finished engine (RTTs, residual queues).
    void finish(const Engine& eng) {
        std::uint64_t residual = 0;
        Bytes residual_bytes = 0;
        for (const auto& onu : eng.onus()) {
            residual += onu.queue.size();
            for (const auto& p : onu.queue) residual_bytes += p.size_bytes;
        }
        if (arrived_ != departed_ + residual || arrived_bytes_ != departed_bytes_ + residual_bytes) {
            ++conservation_violations;
        }

        std::vector<TimeNs> half(cfg_.n_onus);
        for (const auto& onu : eng.onus()) half[onu.onu_id] = std::llround(onu.rtt_us * 500.0);
        std::vector<std::size_t> cursor(cfg_.n_onus, 0);
        std::vector<Bytes> visible(cfg_.n_onus, 0);
        std::stable_sort(decisions_.begin(), decisions_.end(),
                         [](const Decision& a, const Decision& b) { return a.at < b.at; });
        for (const auto& d : decisions_) {
            const auto& ids = members_.at(d.subcarrier);
            Bytes total = 0;
            for (OnuId id : ids) {
                const auto& reps = reports_[id];
                while (cursor[id] < reps.size() && reps[cursor[id]].first + half[id] <= d.at) {
                    visible[id] = reps[cursor[id]].second;
                    ++cursor[id];
                }
                total += visible[id];
            }
            const double threshold = cfg_.alpha * static_cast<double>(capacity_.at(d.subcarrier)) /
                                     static_cast<double>(ids.size());
            const SchedulerMode expect =
                static_cast<double>(total) >= threshold ? SchedulerMode::WF : SchedulerMode::RR;
            ++hs_cycles;
            if (d.mode != expect) ++hs_violations;
        }
    }

    std::uint64_t maps = 0;
    std::uint64_t hs_cycles = 0;
    std::uint64_t hs_violations = 0;
    std::uint64_t capacity_violations = 0;
    std::uint64_t layout_violations = 0;
    std::uint64_t fifo_violations = 0;
    std::uint64_t latency_violations = 0;
    std::uint64_t conservation_violations = 0;

private:
    struct Decision {
        std::uint32_t subcarrier;
        TimeNs at;
        SchedulerMode mode;
    };

    SimConfig cfg_;
    std::map<std::uint32_t, Bytes> capacity_;
    std::map<std::uint32_t, double> rate_;
    std::map<std::uint32_t, std::vector<OnuId>> members_;
    std::map<std::uint32_t, Policy> policy_;
    std::vector<std::vector<std::pair<TimeNs, Bytes>>> reports_;
    std::vector<Decision> decisions_;
    std::vector<std::int64_t> last_id_;
    std::vector<TimeNs> last_dep_;
    std::uint64_t arrived_ = 0, departed_ = 0;
    Bytes arrived_bytes_ = 0, departed_bytes_ = 0;
};

// Running totals across every audited run, for the HS and property criteria.
struct AuditTotals {
    std::uint64_t runs = 0, maps = 0, hs_cycles = 0, hs_violations = 0;
    std::uint64_t capacity = 0, layout = 0, fifo = 0, latency = 0, conservation = 0;
    std::uint64_t failed_runs = 0;
    std::string first_error;

    void add(const Auditor& a) {
        ++runs;
        maps += a.maps;
        hs_cycles += a.hs_cycles;
        hs_violations += a.hs_violations;
        capacity += a.capacity_violations;
        layout += a.layout_violations;
        fifo += a.fifo_violations;
        latency += a.latency_violations;
        conservation += a.conservation_violations;
    }
};

AuditTotals g_hs_audit;  // every run of criteria 2, 3, 4 and 6

RunResult run_audited(const RunSpec& spec, AuditTotals& totals) {
    RunResult r;
    r.spec = spec;
    Auditor audit(spec.config);
    try {
        Engine eng(spec.config, &audit);
        r.report = eng.run();
        audit.finish(eng);
        totals.add(audit);
    } catch (const std::exception& e) {
        r.status = RunStatus::InvariantBreach;
        r.error = e.what();
        ++totals.failed_runs;
        if (totals.first_error.empty()) totals.first_error = e.what();
    }
    return r;
}

ResultSet run_scenario_audited(const Scenario& s) {
    ResultSet rs;
    rs.scenario = s.name;
    rs.sweep_param = s.sweep ? s.sweep->param : "";
    const auto specs = expand_runs(s);
    std::size_t done = 0;
    for (const auto& spec : specs) {
        rs.runs.push_back(run_audited(spec, g_hs_audit));
        std::cerr << "\r  " << s.name << ": " << ++done << "/" << specs.size() << " runs" << std::flush;
    }
    std::cerr << "\n";
    rs.rows = aggregate(s, rs.runs);
    return rs;
}

// (sweep value, policy) -> row for the given group.
std::map<std::pair<double, std::string>, AggregateRow> index_rows(const ResultSet& rs,
                                                                  const std::string& group) {
    std::map<std::pair<double, std::string>, AggregateRow> out;
    for (const auto& r : rs.rows) {
        if (r.group_id == group) out[{r.sweep_value.value_or(0.0), r.policy}] = r;
    }
    return out;
}

void print_table(const ResultSet& rs, const std::string& group, const std::vector<double>& points) {
    auto rows = index_rows(rs, group);
    std::cerr << "    " << rs.sweep_param << "   RR_us   WF_us   HS_us   HS_rr_fraction\n";
    for (double v : points) {
        std::cerr << "    " << v << "   " << fmt(rows[{v, "RR"}].mean_latency_us) << "   "
                  << fmt(rows[{v, "WF"}].mean_latency_us) << "   "
                  << fmt(rows[{v, "HS"}].mean_latency_us) << "   "
                  << fmt(rows[{v, "HS"}].mode_rr_fraction, 3) << "\n";
    }
}

// ---------------------------------------------------------------------------
// 1. Four-ONU two-slot walkthrough.

Verdict criterion_1() {
    // Packet slots of 1000 bytes, no framing, 8 slots per cycle.
    constexpr Bytes kSlot = 1000;
    const double rate = 0.512;  // 8000 bytes per 125 us
    SchedulerInput in;
    in.capacity_bytes = cycle_capacity_bytes(rate, 125.0);
    in.onu_order = {0, 1, 2, 3};
    in.overheads = {0, 0, 0};
    in.queue_bytes = {2 * kSlot, 0, 2 * kSlot, 0};  // reports from the earlier cycle

    // Queue contents when the grant is executed: the initial packets plus
    // 3, 1 and 4 packets that arrived at ONUs 2, 3 and 4 meanwhile.
    const std::vector<int> at_grant{2, 3, 3, 4};

    auto execute = [&](const BWMap& map, std::vector<std::size_t>& carried, Bytes& wasted) {
        carried.assign(4, 0);
        wasted = 0;
        std::uint64_t id = 0;
        for (const auto& g : map.grants) {
            OnuState onu;
            onu.onu_id = g.onu_id;
            for (int k = 0; k < at_grant[g.onu_id]; ++k) {
                Packet p;
                p.id = id++;
                p.onu_id = g.onu_id;
                p.size_bytes = kSlot;
                onu.enqueue(p);
            }
            const TimeNs start = serialization_ns(g.start_offset_bytes, rate);
            auto b = assemble_burst(onu, g, start, rate, 0);
            carried[g.onu_id] = b.carried_packets.size();
            wasted += b.wasted_bytes;
        }
    };

    const BWMap rr = rr_allocate(in);
    const BWMap wf = wf_allocate(in);
    std::vector<Bytes> rr_grants(4), wf_grants(4);
    for (const auto& g : rr.grants) rr_grants[g.onu_id] = g.grant_bytes / kSlot;
    for (const auto& g : wf.grants) wf_grants[g.onu_id] = g.grant_bytes / kSlot;
    std::vector<std::size_t> rr_carried, wf_carried;
    Bytes rr_wasted = 0, wf_wasted = 0;
    execute(rr, rr_carried, rr_wasted);
    execute(wf, wf_carried, wf_wasted);

    const bool ok = in.capacity_bytes == 8 * kSlot &&
                    rr_grants == std::vector<Bytes>{2, 2, 2, 2} &&
                    rr_carried == std::vector<std::size_t>{2, 2, 2, 2} && rr_wasted == 0 &&
                    wf_grants == std::vector<Bytes>{4, 0, 4, 0} &&
                    wf_carried == std::vector<std::size_t>{2, 0, 3, 0} && wf_wasted == 3 * kSlot;
    auto join = [](const auto& v) {
        std::string s;
        for (auto x : v) s += (s.empty() ? "" : "/") + std::to_string(x);
        return s;
    };
    return {ok, "RR grants " + join(rr_grants) + " carried " + join(rr_carried) + "; WF grants " +
                    join(wf_grants) + " carried " + join(wf_carried) + " wasted slots " +
                    std::to_string(wf_wasted / kSlot)};
}

// ---------------------------------------------------------------------------
// 2. Base-load sweep at 512 ONUs.

Verdict criterion_2() {
    Scenario s = *preset("fig5-tdm512");
    s.config.sim_duration_us = kFigureDurationUs;
    const auto& pts = s.sweep->values;
    auto rs = run_scenario_audited(s);
    if (!rs.ok()) return {false, "run failed: " + g_hs_audit.first_error};
    print_table(rs, "0", pts);
    auto rows = index_rows(rs, "0");
    auto mean = [&](double v, const char* p) { return rows[{v, p}].mean_latency_us; };

    std::vector<std::string> misses;
    for (std::size_t i = 0; i < 2; ++i) {
        const double v = pts[i];
        if (!(mean(v, "RR") < mean(v, "WF"))) misses.push_back("RR>=WF at " + fmt(v, 3));
    }
    for (std::size_t i = pts.size() - 2; i < pts.size(); ++i) {
        const double v = pts[i];
        if (!(mean(v, "WF") < mean(v, "RR"))) misses.push_back("WF>=RR at " + fmt(v, 3));
    }
    for (double v : pts) {
        const double best = std::min(mean(v, "RR"), mean(v, "WF"));
        if (!(mean(v, "HS") <= 1.10 * best)) {
            misses.push_back("HS " + fmt(mean(v, "HS")) + " > 1.10 x " + fmt(best) + " at " +
                             fmt(v, 3));
        }
    }
    std::string detail = std::to_string(pts.size()) + " points x 3 policies x " +
                         std::to_string(s.replications) + " seeds";
    for (const auto& m : misses) detail += "; " + m;
    return {misses.empty(), detail};
}

// ---------------------------------------------------------------------------
// 3. ONU-count sweep at 0.035 Gb/s per ONU.

Verdict criterion_3() {
    Scenario s = *preset("fig6-onu-sweep");
    s.config.sim_duration_us = kFigureDurationUs;
    auto rs = run_scenario_audited(s);
    if (!rs.ok()) return {false, "run failed: " + g_hs_audit.first_error};
    const std::vector<double> pts{64, 128, 256, 512};
    print_table(rs, "0", pts);
    auto rows = index_rows(rs, "0");
    auto mean = [&](double v, const char* p) { return rows[{v, p}].mean_latency_us; };

    std::vector<std::string> misses;
    for (double v : {64.0, 128.0}) {
        if (!(mean(v, "RR") < mean(v, "WF"))) misses.push_back("RR>=WF at N=" + fmt(v, 0));
    }
    if (!(mean(512, "WF") < mean(512, "RR"))) misses.push_back("WF>=RR at N=512");
    for (double v : pts) {
        const double best = std::min(mean(v, "RR"), mean(v, "WF"));
        if (!(mean(v, "HS") <= 1.10 * best)) {
            misses.push_back("HS " + fmt(mean(v, "HS")) + " > 1.10 x " + fmt(best) + " at N=" +
                             fmt(v, 0));
        }
    }
    std::string detail = "N in {64,128,256,512}";
    for (const auto& m : misses) detail += "; " + m;
    return {misses.empty(), detail};
}

// ---------------------------------------------------------------------------
// 4. Two-class TFDM.

Verdict criterion_4() {
    Scenario s = *preset("fig7-tfdm");
    s.config.sim_duration_us = kFigureDurationUs;
    auto rs = run_scenario_audited(s);
    if (!rs.ok()) return {false, "run failed: " + g_hs_audit.first_error};

    std::vector<std::string> misses;
    std::string detail;
    for (const char* p : {"RR", "WF", "HS"}) {
        double g1 = NAN, g2 = NAN;
        for (const auto& r : rs.rows) {
            if (r.policy != p) continue;
            if (r.group_id == "1") g1 = r.mean_latency_us;
            if (r.group_id == "2") g2 = r.mean_latency_us;
        }
        std::cerr << "    " << p << ": group1 " << fmt(g1) << " us, group2 " << fmt(g2) << " us\n";
        detail += std::string(p) + " g1/g2 " + fmt(g1) + "/" + fmt(g2) + "; ";
        if (!(g1 < g2)) misses.push_back(std::string("group1 >= group2 under ") + p);
    }

    // Per-subcarrier HS mode shares, pooled over seeds.
    std::map<std::uint32_t, std::pair<std::uint64_t, std::uint64_t>> rr_cycles;  // rr, total
    for (const auto& run : rs.runs) {
        if (run.spec.policy != Policy::HS || !run.report) continue;
        for (const auto& sc : run.report->subcarriers) {
            for (const auto& m : sc.timeline) {
                rr_cycles[sc.subcarrier_id].first += m.mode == SchedulerMode::RR;
                ++rr_cycles[sc.subcarrier_id].second;
            }
        }
    }
    for (const auto& [id, c] : rr_cycles) {
        const double frac = static_cast<double>(c.first) / static_cast<double>(c.second);
        detail += "Ch" + std::to_string(id) + " RR " + fmt(100 * frac) + "%; ";
        if (id == 1 && !(frac >= 0.90)) misses.push_back("Ch1 RR share below 90%");
        if (id != 1 && !(frac < 0.5)) misses.push_back("Ch" + std::to_string(id) + " not majority WF");
    }
    for (const auto& m : misses) detail += m + "; ";
    return {misses.empty(), detail};
}

// ---------------------------------------------------------------------------
// 6. Randomized conservation and capacity suite.

SimConfig random_config(std::mt19937_64& rng) {
    auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return lo + rng() % (hi - lo + 1); };

    SimConfig cfg;
    const auto n_sc = static_cast<std::uint32_t>(pick(1, 4));
    cfg.n_onus = static_cast<std::uint32_t>(pick(std::max<std::uint64_t>(4, n_sc), 512));
    std::vector<OnuId> ids(cfg.n_onus);
    std::iota(ids.begin(), ids.end(), OnuId{0});
    std::shuffle(ids.begin(), ids.end(), rng);

    // Split the shuffled ONUs into n_sc non-empty blocks.
    std::vector<std::uint32_t> cuts{0, cfg.n_onus};
    while (cuts.size() < n_sc + 1) {
        const auto c = static_cast<std::uint32_t>(pick(1, cfg.n_onus - 1));
        if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    const Policy policies[] = {Policy::RR, Policy::WF, Policy::HS};
    const double rates[] = {10.0, 25.0, 50.0, 100.0};
    double total_capacity_gbps = 0;
    for (std::uint32_t k = 0; k < n_sc; ++k) {
        SubcarrierConfig sc;
        sc.subcarrier_id = k + 1;
        sc.onu_ids.assign(ids.begin() + cuts[k], ids.begin() + cuts[k + 1]);
        std::sort(sc.onu_ids.begin(), sc.onu_ids.end());
        sc.rate_gbps = rates[pick(0, 3)];
        while (sc.onu_ids.size() * 32 * 4 > cycle_capacity_bytes(sc.rate_gbps, 125.0)) {
            sc.rate_gbps *= 2;
        }
        sc.dba_policy = policies[pick(0, 2)];
        total_capacity_gbps += sc.rate_gbps;
        cfg.subcarriers.push_back(std::move(sc));
    }

    // One to three traffic groups over a fresh shuffle; offered load between
    // 10% and 120% of the total upstream capacity (busy hours included).
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto n_groups = static_cast<std::uint32_t>(pick(1, std::min<std::uint64_t>(3, cfg.n_onus)));
    cfg.busy.ratio_b = uni(1.0, 6.0);
    const double load = uni(0.1, 1.2);
    const double busy_share = 750.0 / 2500.0;
    const double per_onu =
        load * total_capacity_gbps / cfg.n_onus / (1.0 + (cfg.busy.ratio_b - 1.0) * busy_share);
    for (std::uint32_t g = 0; g < n_groups; ++g) {
        OnuGroup grp;
        grp.group_id = g;
        for (std::size_t i = g; i < ids.size(); i += n_groups) grp.onu_ids.push_back(ids[i]);
        grp.base_rate_gbps = per_onu * uni(0.5, 1.5);
        cfg.groups.push_back(std::move(grp));
    }
    cfg.busy.shared_per_group = pick(0, 1) == 1;
    cfg.alpha = uni(0.5, 3.0);
    cfg.rtt_min_us = uni(10, 150);
    cfg.rtt_max_us = cfg.rtt_min_us + uni(0, 200);
    cfg.oltproc_us = uni(0, 100);
    cfg.warmup_cycles = static_cast<std::uint32_t>(pick(0, 20));
    cfg.rng_seed = rng();
    cfg.sim_duration_us = 1e4 * cfg.cycle_len_us;  // 10^4 cycles
    return cfg;
}

Verdict criterion_6() {
    std::mt19937_64 rng(20260101);
    AuditTotals totals;
    constexpr int kConfigs = 8;
    for (int i = 0; i < kConfigs; ++i) {
        RunSpec spec;
        spec.config = random_config(rng);
        const auto problems = config_problems(spec.config);
        if (!problems.empty()) return {false, "generator produced an invalid config: " + problems[0]};
        std::cerr << "\r  random config " << i + 1 << "/" << kConfigs << ": "
                  << spec.config.subcarriers.size() << " subcarriers, " << spec.config.n_onus
                  << " ONUs        " << std::flush;
        auto r = run_audited(spec, totals);
        if (r.status != RunStatus::Ok) break;
    }
    std::cerr << "\n";
    g_hs_audit.hs_cycles += totals.hs_cycles;
    g_hs_audit.hs_violations += totals.hs_violations;
    g_hs_audit.runs += totals.runs;

    // Also fold in the figure runs, which were audited the same way.
    const std::uint64_t violations = totals.capacity + totals.layout + totals.fifo +
                                     totals.latency + totals.conservation + g_hs_audit.capacity +
                                     g_hs_audit.layout + g_hs_audit.fifo + g_hs_audit.latency +
                                     g_hs_audit.conservation;
    std::string detail = std::to_string(totals.runs) + " random configs, " +
                         std::to_string(totals.maps + g_hs_audit.maps) + " maps audited; capacity " +
                         std::to_string(totals.capacity + g_hs_audit.capacity) + ", layout " +
                         std::to_string(totals.layout + g_hs_audit.layout) + ", FIFO " +
                         std::to_string(totals.fifo + g_hs_audit.fifo) + ", latency bound " +
                         std::to_string(totals.latency + g_hs_audit.latency) + ", conservation " +
                         std::to_string(totals.conservation + g_hs_audit.conservation) +
                         " violations";
    if (totals.failed_runs) detail += "; run aborted: " + totals.first_error;
    return {violations == 0 && totals.failed_runs == 0 && totals.runs == kConfigs, detail};
}

// ---------------------------------------------------------------------------
// 5. HS switching rule, over every audited run.

Verdict criterion_5() {
    const bool ok = g_hs_audit.hs_violations == 0 && g_hs_audit.hs_cycles > 0 &&
                    g_hs_audit.failed_runs == 0;
    return {ok, std::to_string(g_hs_audit.hs_cycles) + " HS decisions in " +
                    std::to_string(g_hs_audit.runs) + " runs, " +
                    std::to_string(g_hs_audit.hs_violations) + " violations"};
}

// ---------------------------------------------------------------------------
// 7. Determinism.

Verdict criterion_7() {
    std::vector<std::string> misses;
    for (const auto& name : preset_names()) {
        Scenario s = *preset(name);
        s.config.sim_duration_us = 20000;
        s.replications = 2;
        if (s.sweep && s.sweep->values.size() > 2) s.sweep->values.resize(2);
        auto csv = [](const ResultSet& rs) {
            std::ostringstream os;
            write_csv(rs.rows, os);
            return os.str();
        };
        const std::string a = csv(run_scenario_serial(s));
        const std::string b = csv(run_scenario_serial(s));
        const std::string c = csv(run_scenario(s, 3));
        if (a != b) misses.push_back(name + " repeat differs");
        if (a != c) misses.push_back(name + " parallel differs");
    }
    std::string detail = "3 presets, serial twice and parallel";
    for (const auto& m : misses) detail += "; " + m;
    return {misses.empty(), detail};
}

// ---------------------------------------------------------------------------
// 8. Scheduler micro-oracles.

// Exhaustive search over all quantum vectors summing to `total`: least max
// deviation from exact shares, then least summed deviation, then rounding up
// the larger remainders and lower indices. Exact integer arithmetic.
std::vector<std::uint64_t> enumerate_split(std::uint64_t total, const std::vector<Bytes>& w) {
    const std::size_t n = w.size();
    const std::uint64_t sum = std::accumulate(w.begin(), w.end(), std::uint64_t{0});
    std::vector<std::uint64_t> best, cur(n, 0);
    std::pair<std::uint64_t, std::uint64_t> best_dev{~std::uint64_t{0}, 0};
    auto up_key = [&](const std::vector<std::uint64_t>& v) {
        std::vector<std::pair<std::uint64_t, std::int64_t>> keys;
        for (std::size_t i = 0; i < n; ++i) {
            if (v[i] * sum > total * w[i]) keys.emplace_back(total * w[i] % sum, -static_cast<std::int64_t>(i));
        }
        std::sort(keys.rbegin(), keys.rend());
        return keys;
    };
    std::function<void(std::size_t, std::uint64_t)> rec = [&](std::size_t i, std::uint64_t left) {
        if (i + 1 == n) {
            cur[i] = left;
            std::pair<std::uint64_t, std::uint64_t> dev{0, 0};
            for (std::size_t k = 0; k < n; ++k) {
                const std::uint64_t a = cur[k] * sum, e = total * w[k];
                const std::uint64_t d = a > e ? a - e : e - a;
                dev.first = std::max(dev.first, d);
                dev.second += d;
            }
            if (dev < best_dev || (dev == best_dev && up_key(cur) > up_key(best))) {
                best_dev = dev;
                best = cur;
            }
            return;
        }
        for (std::uint64_t g = 0; g <= left; ++g) {
            cur[i] = g;
            rec(i + 1, left - g);
        }
    };
    rec(0, total);
    return best;
}

Verdict criterion_8() {
    std::uint64_t wf_cases = 0, wf_miss = 0;
    auto check_wf = [&](const std::vector<Bytes>& q, std::uint64_t quanta) {
        SchedulerInput in;
        in.capacity_bytes = quanta * 4;
        in.onu_order.resize(q.size());
        std::iota(in.onu_order.begin(), in.onu_order.end(), OnuId{0});
        in.queue_bytes = q;
        in.overheads = {0, 0, 0};
        const BWMap m = wf_allocate(in);
        std::vector<std::uint64_t> got(q.size(), 0);
        for (const auto& g : m.grants) got[g.onu_id] = g.grant_bytes / 4;
        ++wf_cases;
        if (got != enumerate_split(quanta, q)) ++wf_miss;
    };

    // Every weight vector over {0..3}^n with a nonzero sum, at assorted totals.
    for (std::size_t n = 1; n <= 4; ++n) {
        std::vector<Bytes> q(n, 0);
        for (;;) {
            if (std::accumulate(q.begin(), q.end(), Bytes{0}) > 0) {
                for (std::uint64_t quanta : {0, 1, 2, 3, 5, 7, 13, 31, 47, 64}) check_wf(q, quanta);
            }
            std::size_t k = 0;
            while (k < n && ++q[k] == 4) q[k++] = 0;
            if (k == n) break;
        }
    }
    // And random byte-sized reports.
    std::mt19937_64 rng(8);
    for (int t = 0; t < 3000; ++t) {
        std::vector<Bytes> q(1 + rng() % 4);
        for (auto& x : q) x = rng() % 3 ? rng() % 100000 : 0;
        if (std::accumulate(q.begin(), q.end(), Bytes{0}) == 0) q[0] = 1;
        check_wf(q, rng() % 65);
    }

    std::uint64_t rr_miss = 0;
    for (int t = 0; t < 100000; ++t) {
        SchedulerInput in;
        const std::size_t n = 1 + rng() % 512;
        in.onu_order.resize(n);
        std::iota(in.onu_order.begin(), in.onu_order.end(), OnuId{0});
        in.queue_bytes.assign(n, 0);
        for (auto& x : in.queue_bytes) x = rng() % 20000;
        in.cycle_index = static_cast<std::int64_t>(rng() % 100000);
        in.capacity_bytes = n * 32 + rng() % 2000000;
        const BWMap m = rr_allocate(in);
        Bytes lo = ~Bytes{0}, hi = 0;
        for (const auto& g : m.grants) {
            lo = std::min(lo, g.grant_bytes);
            hi = std::max(hi, g.grant_bytes);
        }
        if (hi - lo > in.quantum_bytes || m.grants.size() != n) ++rr_miss;
    }
    return {wf_miss == 0 && rr_miss == 0,
            "WF " + std::to_string(wf_cases) + " cases, " + std::to_string(wf_miss) +
                " mismatches; RR 100000 inputs, " + std::to_string(rr_miss) + " over one quantum"};
}

// ---------------------------------------------------------------------------
// 9. Traffic statistics.

Verdict criterion_9() {
    BusyHourConfig flat;
    flat.ratio_b = 1.0;
    const double rate_gbps = 10.0;
    // About 1.25 x 10^6 arrivals; bins hold about 10 arrivals each.
    const TimeNs horizon = us_to_ns(800000);
    TrafficSource src(0, rate_gbps, flat, horizon, 99);
    const TimeNs bin = 6400;
    std::vector<double> counts(static_cast<std::size_t>(horizon / bin), 0.0);
    double bytes = 0;
    std::uint64_t n = 0;
    while (auto p = src.next_arrival()) {
        bytes += p->size_bytes;
        ++n;
        const auto k = static_cast<std::size_t>(p->generated_at / bin);
        if (k < counts.size()) counts[k] += 1;
    }
    const double offered = bytes * 8.0 / static_cast<double>(horizon);  // Gb/s
    const double mean_size = bytes / static_cast<double>(n);
    double s = 0, s2 = 0;
    for (double c : counts) {
        s += c;
        s2 += c * c;
    }
    const double m = s / counts.size();
    const double ratio = (s2 / counts.size() - m * m) / m;

    const bool ok = n >= 1000000 && std::fabs(offered / rate_gbps - 1.0) <= 0.01 &&
                    std::fabs(mean_size / 791.0 - 1.0) <= 0.01 && ratio >= 0.95 && ratio <= 1.05;
    return {ok, std::to_string(n) + " arrivals; rate " + fmt(offered, 4) + " of " +
                    fmt(rate_gbps, 1) + " Gb/s; mean size " + fmt(mean_size, 2) +
                    " B; var/mean " + fmt(ratio, 4)};
}

}  // namespace

int main() {
    using Clock = std::chrono::steady_clock;
    struct Item {
        int id;
        const char* name;
        std::function<Verdict()> fn;
    };
    // 5 runs after the simulation criteria so it can pool their audits.
    const std::vector<Item> order{
        {1, "two-slot walkthrough", criterion_1},   {8, "scheduler oracles", criterion_8},
        {9, "traffic statistics", criterion_9},     {7, "determinism", criterion_7},
        {2, "base-load crossover", criterion_2},    {3, "ONU-count sweep", criterion_3},
        {4, "two-class TFDM", criterion_4},         {6, "conservation and capacity", criterion_6},
        {5, "HS switching rule", criterion_5},
    };
    std::map<int, std::pair<std::string, Verdict>> results;
    for (const auto& item : order) {
        std::cerr << "[criterion " << item.id << "] " << item.name << "\n";
        const auto t0 = Clock::now();
        Verdict v;
        try {
            v = item.fn();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        v.detail += " (" + fmt(secs, 1) + " s)";
        std::cerr << "  -> " << (v.pass ? "PASS" : "FAIL") << "\n";
        results[item.id] = {item.name, v};
    }

    int failed = 0;
    for (const auto& [id, r] : results) {
        std::cout << "criterion " << id << " [" << r.first << "]: " << (r.second.pass ? "PASS" : "FAIL")
                  << " - " << r.second.detail << "\n";
        failed += !r.second.pass;
    }
    std::cout << (failed ? std::to_string(failed) + " of 9 criteria failed" : "all 9 criteria passed")
              << std::endl;
    return failed ? 1 : 0;
}
