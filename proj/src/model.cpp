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

#include "ponsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ponsim {

TimeNs us_to_ns(double us) { return static_cast<TimeNs>(std::llround(us * 1000.0)); }

double ns_to_us(TimeNs ns) { return static_cast<double>(ns) / 1000.0; }

TimeNs serialization_ns(Bytes bytes, double rate_gbps) {
    // 1 Gb/s moves one bit per ns.
    return static_cast<TimeNs>(std::llround(static_cast<double>(bytes) * 8.0 / rate_gbps));
}

std::string_view to_string(Policy p) {
    switch (p) {
        case Policy::RR: return "RR";
        case Policy::WF: return "WF";
        case Policy::HS: return "HS";
    }
    return "?";
}

std::string_view to_string(SchedulerMode m) { return m == SchedulerMode::RR ? "RR" : "WF"; }

Policy parse_policy(std::string_view s) {
    if (s == "RR" || s == "rr") return Policy::RR;
    if (s == "WF" || s == "wf") return Policy::WF;
    if (s == "HS" || s == "hs") return Policy::HS;
    throw ConfigError({"unknown DBA policy '" + std::string(s) + "' (expected RR, WF or HS)"});
}

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
    std::ostringstream os;
    os << "invalid configuration";
    for (const auto& p : problems) os << "\n  - " << p;
    return os.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

Bytes cycle_capacity_bytes(double rate_gbps, double cycle_len_us) {
    if (!(rate_gbps > 0.0) || !(cycle_len_us > 0.0)) {
        throw ConfigError({"cycle capacity needs positive rate and cycle length"});
    }
    // Gb/s x us = 1e3 bits. The nudge absorbs representation error of
    // decimal inputs (e.g. 0.1 Gb/s) so exact products do not floor down.
    const long double bytes =
        static_cast<long double>(rate_gbps) * cycle_len_us * 1000.0L / 8.0L;
    return static_cast<Bytes>(std::floor(bytes * (1.0L + 1e-12L)));
}

std::vector<std::string> config_problems(const SimConfig& cfg) {
    std::vector<std::string> out;
    auto fail = [&out](std::string msg) { out.push_back(std::move(msg)); };

    if (cfg.n_onus < 1) fail("n_onus must be at least 1");
    if (!(cfg.alpha > 0.0)) fail("alpha must be positive");
    if (!(cfg.cycle_len_us > 0.0)) fail("cycle_len_us must be positive");
    if (!(cfg.sim_duration_us > 0.0)) fail("sim_duration_us must be positive");
    if (!(cfg.oltproc_us >= 0.0)) fail("oltproc_us must be non-negative");
    if (cfg.grant_quantum_bytes < 1) fail("grant_quantum_bytes must be at least 1");
    if (!(cfg.rtt_min_us > 0.0) || cfg.rtt_min_us > cfg.rtt_max_us) {
        fail("rtt range must satisfy 0 < rtt_min_us <= rtt_max_us");
    }
    if (!(cfg.sketch_relative_error > 0.0 && cfg.sketch_relative_error < 1.0)) {
        fail("sketch_relative_error must lie in (0, 1)");
    }

    const auto& b = cfg.busy;
    if (b.p_min_us > b.p_max_us) fail("busy hour p_min_us exceeds p_max_us");
    if (b.l_min_us > b.l_max_us) fail("busy hour l_min_us exceeds l_max_us");
    if (b.p_min_us < 0.0 || b.l_min_us < 0.0) fail("busy hour windows must be non-negative");
    if (!(b.ratio_b >= 1.0)) fail("busy hour ratio_b must be >= 1");

    if (cfg.subcarriers.empty()) fail("at least one subcarrier is required");

    // Partition checks: each ONU on exactly one subcarrier and in exactly one group.
    std::vector<int> sc_owner(cfg.n_onus, -1);
    std::vector<std::uint32_t> seen_sc_ids;
    for (const auto& sc : cfg.subcarriers) {
        const std::string tag = "subcarrier " + std::to_string(sc.subcarrier_id);
        if (std::find(seen_sc_ids.begin(), seen_sc_ids.end(), sc.subcarrier_id) != seen_sc_ids.end()) {
            fail(tag + ": duplicate subcarrier id");
        }
        seen_sc_ids.push_back(sc.subcarrier_id);
        if (!(sc.rate_gbps > 0.0)) fail(tag + ": rate_gbps must be positive");
        if (sc.onu_ids.empty()) fail(tag + ": no ONUs assigned");
        for (OnuId id : sc.onu_ids) {
            if (id >= cfg.n_onus) {
                fail(tag + ": ONU " + std::to_string(id) + " out of range");
                continue;
            }
            if (sc_owner[id] >= 0) {
                fail("overlapping assignment: ONU " + std::to_string(id) + " on subcarriers " +
                     std::to_string(sc_owner[id]) + " and " + std::to_string(sc.subcarrier_id));
            } else {
                sc_owner[id] = static_cast<int>(sc.subcarrier_id);
            }
        }
        if (sc.rate_gbps > 0.0 && cfg.cycle_len_us > 0.0) {
            const Bytes cap = cycle_capacity_bytes(sc.rate_gbps, cfg.cycle_len_us);
            const Bytes need = static_cast<Bytes>(sc.onu_ids.size()) * cfg.overheads.per_burst();
            if (need > cap) fail(tag + ": overhead exceeds capacity");
        }
    }
    std::size_t uncovered = std::count(sc_owner.begin(), sc_owner.end(), -1);
    if (uncovered > 0) {
        fail("uncovered ONUs: " + std::to_string(uncovered) + " ONU(s) on no subcarrier");
    }

    if (cfg.groups.empty()) fail("at least one ONU group is required");
    std::vector<int> group_owner(cfg.n_onus, -1);
    for (const auto& g : cfg.groups) {
        const std::string tag = "group " + std::to_string(g.group_id);
        if (!(g.base_rate_gbps >= 0.0)) fail(tag + ": base_rate_gbps must be non-negative");
        for (OnuId id : g.onu_ids) {
            if (id >= cfg.n_onus) {
                fail(tag + ": ONU " + std::to_string(id) + " out of range");
                continue;
            }
            if (group_owner[id] >= 0) {
                fail("overlapping group membership: ONU " + std::to_string(id));
            } else {
                group_owner[id] = static_cast<int>(g.group_id);
            }
        }
    }
    if (!cfg.groups.empty()) {
        std::size_t ungrouped = std::count(group_owner.begin(), group_owner.end(), -1);
        if (ungrouped > 0) fail("ungrouped ONUs: " + std::to_string(ungrouped) + " ONU(s) in no group");
    }
    return out;
}

const SimConfig& validate_config(const SimConfig& cfg) {
    auto problems = config_problems(cfg);
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return cfg;
}

SimConfig make_single_carrier(std::uint32_t n_onus, double rate_gbps, double base_rate_gbps,
                              Policy policy) {
    SimConfig cfg;
    cfg.n_onus = n_onus;
    SubcarrierConfig sc;
    sc.subcarrier_id = 0;
    sc.rate_gbps = rate_gbps;
    sc.dba_policy = policy;
    OnuGroup g;
    g.group_id = 0;
    g.base_rate_gbps = base_rate_gbps;
    for (OnuId i = 0; i < n_onus; ++i) {
        sc.onu_ids.push_back(i);
        g.onu_ids.push_back(i);
    }
    cfg.subcarriers.push_back(std::move(sc));
    cfg.groups.push_back(std::move(g));
    return cfg;
}

}  // namespace ponsim
