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
 * @file scenario.hpp
 * @brief Scenario files and built-in experiment presets.
 *
 * A scenario is an INI-style file:
 *
 *     [scenario]
 *     name = my-run
 *     policies = RR,WF,HS
 *     replications = 4
 *     sweep_param = base_rate_gbps
 *     sweep_values = 0.01, 0.02, 0.04
 *
 *     [sim]
 *     n_onus = 64
 *     duration_us = 200000
 *
 *     [busy]
 *     ratio_b = 3
 *
 *     [subcarrier.1]
 *     rate_gbps = 100
 *     onus = 0-63
 *
 *     [group.1]
 *     onus = 0-63
 *     base_rate_gbps = 0.03
 *
 * Unlisted [sim] and [busy] keys keep their SimConfig defaults. Unknown keys
 * are rejected so typos do not silently fall back to defaults.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ponsim/model.hpp"

namespace ponsim {

struct SweepAxis {
    std::string param;
    std::vector<double> values;
};

struct Scenario {
    std::string name;
    SimConfig config;
    std::optional<SweepAxis> sweep;
    std::uint32_t replications = 1;
    /// Policies to compare. Empty means "run the subcarriers as configured".
    std::vector<Policy> policies;
};

/// Parameters accepted as sweep axes.
const std::vector<std::string>& sweep_parameters();

/// Copy of `base` with `param` set to `value`. Throws ConfigError for an
/// unknown parameter or a value that does not fit it.
SimConfig apply_sweep(const SimConfig& base, const std::string& param, double value);

/// Parses scenario text. `origin` names the source in error messages.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<scenario>");

/// Loads a built-in preset by name, or else a scenario file from disk.
Scenario load_scenario(const std::string& path_or_preset);

/// Busy-hour peak ratio used by the built-in presets.
inline constexpr double kPresetBusyRatio = 8.0;

std::vector<std::string> preset_names();
std::optional<Scenario> preset(std::string_view name);

/// Parses "0-31,40,42-44" into a sorted ONU list.
std::vector<OnuId> parse_onu_ranges(const std::string& text);

/// Four 25 Gb/s subcarriers: group 1 (32 ONUs) alone on Ch1, group 2
/// (480 ONUs) split evenly over Ch2-Ch4 in ONU-id order.
SimConfig make_tfdm_two_class(double base_rate_gbps, Policy policy);

}  // namespace ponsim
