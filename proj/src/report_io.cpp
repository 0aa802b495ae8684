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

#include "ponsim/report_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace ponsim {

using nlohmann::json;

namespace {

std::string fmt_real(double v) {
    if (std::isnan(v)) return {};
    std::array<char, 64> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), p);
}

json real(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double real_from(const json& j) {
    return j.is_null() ? std::nan("") : j.get<double>();
}

bool same_real(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

ExportFormat parse_format(const std::string& s) {
    if (s == "csv") return ExportFormat::Csv;
    if (s == "json") return ExportFormat::Json;
    throw ConfigError({"unknown output format '" + s + "' (expected csv or json)"});
}

void write_csv(const std::vector<AggregateRow>& rows, std::ostream& os) {
    os << "scenario,policy,sweep_param,sweep_value,group_id,mean_latency_us,p99_us,count,"
          "mode_rr_fraction,seed_count\n";
    for (const auto& r : rows) {
        os << r.scenario << ',' << r.policy << ',' << r.sweep_param << ','
           << (r.sweep_value ? fmt_real(*r.sweep_value) : std::string()) << ',' << r.group_id
           << ',' << fmt_real(r.mean_latency_us) << ',' << fmt_real(r.p99_us) << ',' << r.count
           << ',' << fmt_real(r.mode_rr_fraction) << ',' << r.seed_count << '\n';
    }
}

json to_json(const LatencyStats& s) {
    return json{{"count", s.count},         {"mean_us", real(s.mean_us)},
                {"min_us", real(s.min_us)}, {"max_us", real(s.max_us)},
                {"p50_us", real(s.p50_us)}, {"p95_us", real(s.p95_us)},
                {"p99_us", real(s.p99_us)}};
}

json to_json(const SimReport& r) {
    json groups = json::object();
    for (const auto& [id, st] : r.by_group) groups[std::to_string(id)] = to_json(st);
    json subcarriers = json::array();
    for (const auto& sc : r.subcarriers) {
        const auto stats = r.by_subcarrier.find(sc.subcarrier_id);
        std::uint64_t wf_cycles = 0;
        for (const auto& m : sc.timeline) wf_cycles += m.mode == SchedulerMode::WF;
        subcarriers.push_back({
            {"subcarrier_id", sc.subcarrier_id},
            {"policy", std::string(to_string(sc.policy))},
            {"rate_gbps", sc.rate_gbps},
            {"capacity_bytes", sc.capacity_bytes},
            {"n_onus", sc.n_onus},
            {"threshold_bytes", sc.threshold},
            {"cycles", sc.timeline.size()},
            {"wf_cycles", wf_cycles},
            {"rr_fraction", real(sc.rr_fraction())},
            {"carried_bytes", sc.carried_bytes},
            {"wasted_bytes", sc.wasted_bytes},
            {"latency", stats != r.by_subcarrier.end() ? to_json(stats->second) : json(nullptr)},
        });
    }
    const auto& t = r.totals;
    return json{{"latency", to_json(r.global)},
                {"groups", groups},
                {"subcarriers", subcarriers},
                {"totals",
                 {{"generated_packets", t.generated_packets},
                  {"departed_packets", t.departed_packets},
                  {"residual_packets", t.residual_packets},
                  {"generated_bytes", t.generated_bytes},
                  {"departed_bytes", t.departed_bytes},
                  {"residual_bytes", t.residual_bytes}}},
                {"pipeline_depth", r.pipeline_depth},
                {"cycles", r.cycles}};
}

json to_json(const AggregateRow& row) {
    return json{{"scenario", row.scenario},
                {"policy", row.policy},
                {"sweep_param", row.sweep_param},
                {"sweep_value", row.sweep_value ? json(*row.sweep_value) : json(nullptr)},
                {"group_id", row.group_id},
                {"mean_latency_us", real(row.mean_latency_us)},
                {"std_latency_us", real(row.std_latency_us)},
                {"p99_us", real(row.p99_us)},
                {"count", row.count},
                {"mode_rr_fraction", real(row.mode_rr_fraction)},
                {"seed_count", row.seed_count}};
}

json to_json(const ResultSet& rs) {
    json rows = json::array();
    for (const auto& r : rs.rows) rows.push_back(to_json(r));
    json runs = json::array();
    for (const auto& r : rs.runs) {
        runs.push_back({
            {"policy", r.spec.policy_label()},
            {"sweep_value", r.spec.sweep_value ? json(*r.spec.sweep_value) : json(nullptr)},
            {"replication", r.spec.replication},
            {"seed", r.spec.seed},
            {"status", static_cast<int>(r.status)},
            {"error", r.error},
            {"report", r.report ? to_json(*r.report) : json(nullptr)},
        });
    }
    return json{{"scenario", rs.scenario}, {"sweep_param", rs.sweep_param}, {"rows", rows},
                {"runs", runs}};
}

AggregateRow row_from_json(const json& j) {
    AggregateRow r;
    r.scenario = j.at("scenario").get<std::string>();
    r.policy = j.at("policy").get<std::string>();
    r.sweep_param = j.at("sweep_param").get<std::string>();
    if (!j.at("sweep_value").is_null()) r.sweep_value = j.at("sweep_value").get<double>();
    r.group_id = j.at("group_id").get<std::string>();
    r.mean_latency_us = real_from(j.at("mean_latency_us"));
    r.std_latency_us = real_from(j.at("std_latency_us"));
    r.p99_us = real_from(j.at("p99_us"));
    r.count = j.at("count").get<std::uint64_t>();
    r.mode_rr_fraction = real_from(j.at("mode_rr_fraction"));
    r.seed_count = j.at("seed_count").get<std::uint32_t>();
    return r;
}

std::vector<AggregateRow> rows_from_json(const json& j) {
    std::vector<AggregateRow> out;
    for (const auto& row : j.at("rows")) out.push_back(row_from_json(row));
    return out;
}

bool same_row(const AggregateRow& a, const AggregateRow& b) {
    return a.scenario == b.scenario && a.policy == b.policy && a.sweep_param == b.sweep_param &&
           a.sweep_value == b.sweep_value && a.group_id == b.group_id &&
           same_real(a.mean_latency_us, b.mean_latency_us) &&
           same_real(a.std_latency_us, b.std_latency_us) && same_real(a.p99_us, b.p99_us) &&
           a.count == b.count && same_real(a.mode_rr_fraction, b.mode_rr_fraction) &&
           a.seed_count == b.seed_count;
}

void export_results(const ResultSet& rs, ExportFormat format, const std::string& path) {
    auto write = [&](std::ostream& os) {
        if (format == ExportFormat::Csv) {
            write_csv(rs.rows, os);
        } else {
            os << to_json(rs).dump(2) << '\n';
        }
    };
    if (path == "-") {
        write(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write(out);
    out.flush();
    if (!out) throw std::runtime_error("error while writing '" + path + "'");
}

}  // namespace ponsim
