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

#include "ponsim/runner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <omp.h>

namespace ponsim {

std::string RunSpec::policy_label() const {
    if (policy) return std::string(to_string(*policy));
    std::set<Policy> used;
    for (const auto& sc : config.subcarriers) used.insert(sc.dba_policy);
    return used.size() == 1 ? std::string(to_string(*used.begin())) : "mixed";
}

bool ResultSet::ok() const { return status() == RunStatus::Ok; }

RunStatus ResultSet::status() const {
    RunStatus worst = RunStatus::Ok;
    for (const auto& r : runs) {
        if (static_cast<int>(r.status) > static_cast<int>(worst)) worst = r.status;
    }
    return worst;
}

std::vector<RunSpec> expand_runs(const Scenario& s) {
    std::vector<std::optional<double>> points;
    if (s.sweep) {
        for (double v : s.sweep->values) points.emplace_back(v);
    } else {
        points.emplace_back(std::nullopt);
    }
    std::vector<std::optional<Policy>> policies;
    if (s.policies.empty()) {
        policies.emplace_back(std::nullopt);
    } else {
        for (Policy p : s.policies) policies.emplace_back(p);
    }

    std::vector<RunSpec> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        SimConfig point_cfg = s.config;
        if (points[i]) point_cfg = apply_sweep(s.config, s.sweep->param, *points[i]);
        for (const auto& policy : policies) {
            for (std::uint32_t r = 0; r < s.replications; ++r) {
                RunSpec spec;
                spec.point_index = i;
                spec.sweep_value = points[i];
                spec.policy = policy;
                spec.replication = r;
                spec.seed = s.config.rng_seed + r;
                spec.config = point_cfg;
                spec.config.rng_seed = spec.seed;
                if (policy) {
                    for (auto& sc : spec.config.subcarriers) sc.dba_policy = *policy;
                }
                out.push_back(std::move(spec));
            }
        }
    }
    return out;
}

RunResult execute_run(const RunSpec& spec) {
    RunResult r;
    r.spec = spec;
    try {
        r.report = run(spec.config);
    } catch (const ConfigError& e) {
        r.status = RunStatus::ConfigError;
        r.error = e.what();
    } catch (const DbaError& e) {
        r.status = RunStatus::ConfigError;
        r.error = e.what();
    } catch (const std::exception& e) {
        r.status = RunStatus::InvariantBreach;
        r.error = e.what();
    }
    return r;
}

namespace {

struct Moments {
    double mean = std::nan("");
    double stddev = std::nan("");
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    if (xs.empty()) return m;
    double sum = 0.0;
    for (double x : xs) sum += x;
    m.mean = sum / static_cast<double>(xs.size());
    if (xs.size() < 2) {
        m.stddev = 0.0;
        return m;
    }
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    return m;
}

double rr_fraction_over(const SimReport& rep, const std::set<std::uint32_t>& subcarriers) {
    std::uint64_t rr = 0, total = 0;
    for (const auto& sc : rep.subcarriers) {
        if (!subcarriers.count(sc.subcarrier_id)) continue;
        for (const auto& m : sc.timeline) {
            ++total;
            if (m.mode == SchedulerMode::RR) ++rr;
        }
    }
    return total ? static_cast<double>(rr) / static_cast<double>(total) : std::nan("");
}

}  // namespace

std::vector<AggregateRow> aggregate(const Scenario& s, const std::vector<RunResult>& runs) {
    // (point, policy position) -> runs, in expansion order.
    std::map<std::pair<std::size_t, std::string>, std::vector<const RunResult*>> cells;
    std::vector<std::pair<std::size_t, std::string>> order;
    for (const auto& r : runs) {
        auto key = std::make_pair(r.spec.point_index, r.spec.policy_label());
        auto [it, fresh] = cells.try_emplace(key);
        if (fresh) order.push_back(key);
        it->second.push_back(&r);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<AggregateRow> rows;
    for (const auto& key : order) {
        const auto& members = cells[key];
        const RunResult& first = *members.front();
        const SimConfig& cfg = first.spec.config;

        // A single-group run has no separate "all" row: it would repeat the group.
        std::vector<std::string> group_labels;
        if (cfg.groups.size() != 1) group_labels.push_back("all");
        std::map<std::string, std::set<std::uint32_t>> group_subcarriers;
        std::map<OnuId, std::uint32_t> onu_sc;
        for (const auto& sc : cfg.subcarriers) {
            for (OnuId id : sc.onu_ids) onu_sc[id] = sc.subcarrier_id;
            group_subcarriers["all"].insert(sc.subcarrier_id);
        }
        std::vector<std::uint32_t> gids;
        for (const auto& g : cfg.groups) gids.push_back(g.group_id);
        std::sort(gids.begin(), gids.end());
        for (std::uint32_t gid : gids) {
            const std::string label = std::to_string(gid);
            group_labels.push_back(label);
            for (const auto& g : cfg.groups) {
                if (g.group_id != gid) continue;
                for (OnuId id : g.onu_ids) group_subcarriers[label].insert(onu_sc[id]);
            }
        }

        for (const auto& label : group_labels) {
            AggregateRow row;
            row.scenario = s.name;
            row.policy = key.second;
            row.sweep_param = s.sweep ? s.sweep->param : "";
            row.sweep_value = first.spec.sweep_value;
            row.group_id = label;
            std::vector<double> means, p99s, rr;
            for (const RunResult* r : members) {
                if (!r->report) continue;
                const LatencyStats* st = &r->report->global;
                if (label != "all") {
                    auto it = r->report->by_group.find(static_cast<std::uint32_t>(std::stoul(label)));
                    if (it == r->report->by_group.end()) continue;
                    st = &it->second;
                }
                ++row.seed_count;
                row.count += st->count;
                if (!st->empty()) {
                    means.push_back(st->mean_us);
                    p99s.push_back(st->p99_us);
                }
                rr.push_back(rr_fraction_over(*r->report, group_subcarriers[label]));
            }
            const Moments lat = moments(means);
            row.mean_latency_us = lat.mean;
            row.std_latency_us = lat.stddev;
            row.p99_us = moments(p99s).mean;
            row.mode_rr_fraction = moments(rr).mean;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

namespace {

ResultSet make_result_set(const Scenario& s, std::vector<RunResult> runs) {
    ResultSet rs;
    rs.scenario = s.name;
    rs.sweep_param = s.sweep ? s.sweep->param : "";
    rs.runs = std::move(runs);
    rs.rows = aggregate(s, rs.runs);
    return rs;
}

}  // namespace

ResultSet run_scenario_serial(const Scenario& s) {
    const auto specs = expand_runs(s);
    std::vector<RunResult> runs;
    runs.reserve(specs.size());
    for (const auto& spec : specs) runs.push_back(execute_run(spec));
    return make_result_set(s, std::move(runs));
}

ResultSet run_scenario(const Scenario& s, int jobs) {
    const auto specs = expand_runs(s);
    std::vector<RunResult> runs(specs.size());
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
    const auto n = static_cast<std::int64_t>(specs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) {
        runs[static_cast<std::size_t>(i)] = execute_run(specs[static_cast<std::size_t>(i)]);
    }
    return make_result_set(s, std::move(runs));
}

}  // namespace ponsim
