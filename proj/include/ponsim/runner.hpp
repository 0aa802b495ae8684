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
 * @file runner.hpp
 * @brief Expands a scenario into independent engine runs and aggregates them.
 *
 * Runs share nothing, so run_scenario() hands them to an OpenMP worker pool.
 * run_scenario_serial() executes the same list in order on the calling
 * thread; it is the reference the parallel path is tested against.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ponsim/engine.hpp"
#include "ponsim/scenario.hpp"

namespace ponsim {

struct RunSpec {
    std::size_t point_index = 0;
    std::optional<double> sweep_value;
    std::optional<Policy> policy;  // nullopt: subcarrier policies as configured
    std::uint32_t replication = 0;
    std::uint64_t seed = 0;
    SimConfig config;

    std::string policy_label() const;
};

enum class RunStatus { Ok = 0, ConfigError = 1, InvariantBreach = 2 };

struct RunResult {
    RunSpec spec;
    RunStatus status = RunStatus::Ok;
    std::string error;
    std::optional<SimReport> report;
};

struct AggregateRow {
    std::string scenario;
    std::string policy;
    std::string sweep_param;
    std::optional<double> sweep_value;
    std::string group_id;  // "all" or the numeric group id
    double mean_latency_us = 0.0;
    double std_latency_us = 0.0;
    double p99_us = 0.0;
    std::uint64_t count = 0;
    double mode_rr_fraction = 0.0;
    std::uint32_t seed_count = 0;
};

struct ResultSet {
    std::string scenario;
    std::string sweep_param;
    std::vector<RunResult> runs;
    std::vector<AggregateRow> rows;

    bool ok() const;
    /// Worst status across runs (exit-code order).
    RunStatus status() const;
};

/// One entry per (sweep point, policy, replication), in that nesting order.
/// Replication r uses seed base_seed + r.
std::vector<RunSpec> expand_runs(const Scenario& s);

RunResult execute_run(const RunSpec& spec);

/// Parallel over runs; `jobs` <= 0 means the OpenMP default.
ResultSet run_scenario(const Scenario& s, int jobs = 0);
ResultSet run_scenario_serial(const Scenario& s);

/// Replication means and sample standard deviations per (point, policy, group).
std::vector<AggregateRow> aggregate(const Scenario& s, const std::vector<RunResult>& runs);

}  // namespace ponsim
