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

// Command-line front end: single runs, sweeps and preset listing.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime invariant breach.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ponsim/report_io.hpp"
#include "ponsim/runner.hpp"
#include "ponsim/scenario.hpp"

namespace {

using namespace ponsim;

struct CommonOptions {
    std::string scenario;
    std::string policies;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> replications;
    std::optional<double> duration_us;
    std::string out = "-";
    std::string format = "csv";
    int jobs = 0;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("scenario", o.scenario, "Scenario file or preset name")->required();
    cmd->add_option("--policies", o.policies, "Comma-separated subset of RR,WF,HS");
    cmd->add_option("--seed", o.seed, "Base RNG seed");
    cmd->add_option("--replications", o.replications, "Seeds per point");
    cmd->add_option("--duration-us", o.duration_us, "Simulated time per run");
    cmd->add_option("--out", o.out, "Output path, '-' for stdout");
    cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--jobs", o.jobs, "Parallel runs (0 = all cores)");
}

Scenario prepare(const CommonOptions& o) {
    Scenario s = load_scenario(o.scenario);
    if (!o.policies.empty()) {
        s.policies.clear();
        std::stringstream ss(o.policies);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) s.policies.push_back(parse_policy(item));
        }
    }
    if (o.seed) s.config.rng_seed = *o.seed;
    if (o.replications) {
        if (*o.replications < 1) throw ConfigError({"--replications must be at least 1"});
        s.replications = *o.replications;
    }
    if (o.duration_us) s.config.sim_duration_us = *o.duration_us;
    validate_config(s.config);
    return s;
}

int finish(const ResultSet& rs, const CommonOptions& o) {
    export_results(rs, parse_format(o.format), o.out);
    for (const auto& r : rs.runs) {
        if (r.status != RunStatus::Ok) {
            std::cerr << "run " << r.spec.policy_label() << " seed " << r.spec.seed
                      << " failed: " << r.error << '\n';
        }
    }
    return static_cast<int>(rs.status());
}

int cmd_run(const CommonOptions& o, const std::string& trace, const std::string& arrivals) {
    Scenario s = prepare(o);
    s.sweep.reset();
    if (trace.empty() && arrivals.empty()) return finish(run_scenario(s, o.jobs), o);

    const auto specs = expand_runs(s);
    if (specs.size() != 1) {
        throw ConfigError({"--trace/--arrivals need exactly one run (one policy, one replication)"});
    }
    std::ofstream trace_os, arrivals_os;
    ObserverFanout fan;
    std::optional<EventTraceWriter> tw;
    std::optional<ArrivalTraceWriter> aw;
    if (!trace.empty()) {
        trace_os.open(trace);
        if (!trace_os) throw std::runtime_error("cannot write '" + trace + "'");
        tw.emplace(trace_os);
        fan.add(&*tw);
    }
    if (!arrivals.empty()) {
        arrivals_os.open(arrivals);
        if (!arrivals_os) throw std::runtime_error("cannot write '" + arrivals + "'");
        aw.emplace(arrivals_os);
        fan.add(&*aw);
    }
    RunResult r;
    r.spec = specs.front();
    try {
        r.report = run(r.spec.config, &fan);
    } catch (const InvariantError& e) {
        r.status = RunStatus::InvariantBreach;
        r.error = e.what();
    }
    ResultSet rs;
    rs.scenario = s.name;
    rs.runs.push_back(std::move(r));
    rs.rows = aggregate(s, rs.runs);
    return finish(rs, o);
}

int cmd_sweep(const CommonOptions& o, const std::string& param, const std::string& values) {
    Scenario s = prepare(o);
    if (!param.empty() || !values.empty()) {
        if (param.empty() || values.empty()) {
            throw ConfigError({"--sweep-param and --sweep-values go together"});
        }
        SweepAxis axis{param, {}};
        std::stringstream ss(values);
        std::string item;
        while (std::getline(ss, item, ',')) axis.values.push_back(std::stod(item));
        for (double v : axis.values) validate_config(apply_sweep(s.config, param, v));
        s.sweep = axis;
    }
    if (!s.sweep) throw ConfigError({"scenario '" + s.name + "' has no sweep axis"});
    return finish(run_scenario(s, o.jobs), o);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ponsim: upstream DBA simulator for coherent TDM/TFDM PONs"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    std::string trace, arrivals;
    auto* run_cmd = app.add_subcommand("run", "Run one scenario point for each policy and seed");
    add_common(run_cmd, run_opts);
    run_cmd->add_option("--trace", trace, "Per-grant event trace CSV (single run only)");
    run_cmd->add_option("--arrivals", arrivals, "Arrival trace CSV (single run only)");

    CommonOptions sweep_opts;
    std::string sweep_param, sweep_values;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run the scenario's sweep axis");
    add_common(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--sweep-param", sweep_param, "Override the sweep parameter");
    sweep_cmd->add_option("--sweep-values", sweep_values, "Override the sweep values (comma list)");

    auto* presets_cmd = app.add_subcommand("presets", "List built-in scenario presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*presets_cmd) {
            for (const auto& name : ponsim::preset_names()) std::cout << name << '\n';
            return 0;
        }
        if (*run_cmd) return cmd_run(run_opts, trace, arrivals);
        return cmd_sweep(sweep_opts, sweep_param, sweep_values);
    } catch (const ponsim::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 1;
    } catch (const ponsim::InvariantError& e) {
        std::cerr << "invariant breach: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
