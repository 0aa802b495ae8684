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
 * @file report_io.hpp
 * @brief CSV and JSON serialization of run results.
 *
 * CSV columns:
 *   scenario,policy,sweep_param,sweep_value,group_id,mean_latency_us,p99_us,
 *   count,mode_rr_fraction,seed_count
 *
 * Real numbers are written in shortest round-trip form; undefined values
 * (no packets) are empty cells in CSV and null in JSON.
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ponsim/engine.hpp"
#include "ponsim/runner.hpp"

namespace ponsim {

enum class ExportFormat { Csv, Json };

ExportFormat parse_format(const std::string& s);

void write_csv(const std::vector<AggregateRow>& rows, std::ostream& os);

nlohmann::json to_json(const LatencyStats& s);
nlohmann::json to_json(const SimReport& r);
nlohmann::json to_json(const AggregateRow& row);
nlohmann::json to_json(const ResultSet& rs);

AggregateRow row_from_json(const nlohmann::json& j);
std::vector<AggregateRow> rows_from_json(const nlohmann::json& j);

/// Writes `rs` to `path` ("-" for stdout). Throws std::runtime_error if the
/// path cannot be written.
void export_results(const ResultSet& rs, ExportFormat format, const std::string& path);

/// Field-wise equality with NaN == NaN.
bool same_row(const AggregateRow& a, const AggregateRow& b);

}  // namespace ponsim
