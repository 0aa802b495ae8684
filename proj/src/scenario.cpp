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

#include "ponsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace ponsim {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

/// Reads typed keys out of one INI section and collects every problem.
class SectionReader {
public:
    SectionReader(const pt::ptree& tree, std::string section, std::vector<std::string>& errors)
        : tree_(tree), section_(std::move(section)), errors_(errors) {}

    template <typename T>
    void optional(const std::string& key, T& target) {
        used_.insert(key);
        auto v = tree_.get_optional<std::string>(key);
        if (!v) return;
        convert(key, trim(*v), target);
    }

    template <typename T>
    void required(const std::string& key, T& target) {
        used_.insert(key);
        auto v = tree_.get_optional<std::string>(key);
        if (!v) {
            errors_.push_back("[" + section_ + "]: missing required field '" + key + "'");
            return;
        }
        convert(key, trim(*v), target);
    }

    void reject_unknown() {
        for (const auto& [k, v] : tree_) {
            if (!used_.count(k)) errors_.push_back("[" + section_ + "]: unknown key '" + k + "'");
        }
    }

private:
    void bad(const std::string& key, const std::string& value, const char* what) {
        errors_.push_back("[" + section_ + "] " + key + " = '" + value + "': expected " + what);
    }

    void convert(const std::string& key, const std::string& v, double& out) {
        try {
            std::size_t pos = 0;
            out = std::stod(v, &pos);
            if (pos != v.size()) bad(key, v, "a number");
        } catch (const std::exception&) {
            bad(key, v, "a number");
        }
    }

    template <typename U>
        requires std::is_unsigned_v<U>
    void convert(const std::string& key, const std::string& v, U& out) {
        U tmp{};
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), tmp);
        if (ec != std::errc() || p != v.data() + v.size()) {
            bad(key, v, "a non-negative integer");
            return;
        }
        out = tmp;
    }

    void convert(const std::string& key, const std::string& v, bool& out) {
        if (v == "true" || v == "1" || v == "yes") out = true;
        else if (v == "false" || v == "0" || v == "no") out = false;
        else bad(key, v, "true or false");
    }

    void convert(const std::string&, const std::string& v, std::string& out) { out = v; }

    void convert(const std::string& key, const std::string& v, Policy& out) {
        try {
            out = parse_policy(v);
        } catch (const ConfigError&) {
            bad(key, v, "RR, WF or HS");
        }
    }

    void convert(const std::string& key, const std::string& v, std::vector<OnuId>& out) {
        try {
            out = parse_onu_ranges(v);
        } catch (const ConfigError&) {
            bad(key, v, "ONU ranges like 0-31,40");
        }
    }

    const pt::ptree& tree_;
    std::string section_;
    std::vector<std::string>& errors_;
    std::set<std::string> used_;
};

bool section_id(const std::string& name, const std::string& prefix, std::uint32_t& id) {
    if (name.rfind(prefix, 0) != 0) return false;
    const std::string rest = name.substr(prefix.size());
    auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), id);
    return ec == std::errc() && p == rest.data() + rest.size() && !rest.empty();
}

std::vector<OnuId> iota_onus(OnuId first, OnuId count) {
    std::vector<OnuId> out(count);
    for (OnuId i = 0; i < count; ++i) out[i] = first + i;
    return out;
}

}  // namespace

std::vector<OnuId> parse_onu_ranges(const std::string& text) {
    std::vector<OnuId> out;
    for (const auto& item : split_list(text)) {
        const auto dash = item.find('-');
        auto num = [&](const std::string& s) {
            OnuId v{};
            const auto t = trim(s);
            auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (ec != std::errc() || p != t.data() + t.size() || t.empty()) {
                throw ConfigError({"bad ONU range '" + item + "'"});
            }
            return v;
        };
        if (dash == std::string::npos) {
            out.push_back(num(item));
        } else {
            const OnuId lo = num(item.substr(0, dash));
            const OnuId hi = num(item.substr(dash + 1));
            if (hi < lo) throw ConfigError({"bad ONU range '" + item + "'"});
            for (OnuId i = lo; i <= hi; ++i) out.push_back(i);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

const std::vector<std::string>& sweep_parameters() {
    static const std::vector<std::string> params{"base_rate_gbps", "n_onus", "alpha", "ratio_b",
                                                 "oltproc_us"};
    return params;
}

SimConfig apply_sweep(const SimConfig& base, const std::string& param, double value) {
    SimConfig cfg = base;
    if (param == "base_rate_gbps") {
        for (auto& g : cfg.groups) g.base_rate_gbps = value;
    } else if (param == "alpha") {
        cfg.alpha = value;
    } else if (param == "ratio_b") {
        cfg.busy.ratio_b = value;
    } else if (param == "oltproc_us") {
        cfg.oltproc_us = value;
    } else if (param == "n_onus") {
        if (cfg.subcarriers.size() != 1 || cfg.groups.size() != 1) {
            throw ConfigError({"sweeping n_onus needs exactly one subcarrier and one group"});
        }
        if (!(value >= 1.0) || value != std::floor(value)) {
            throw ConfigError({"n_onus sweep value must be a positive integer"});
        }
        const auto n = static_cast<OnuId>(value);
        cfg.n_onus = n;
        cfg.subcarriers[0].onu_ids = iota_onus(0, n);
        cfg.groups[0].onu_ids = iota_onus(0, n);
    } else {
        throw ConfigError({"unknown sweep parameter '" + param + "'"});
    }
    return cfg;
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError({origin + ":" + std::to_string(e.line()) + ": " + e.message()});
    }

    Scenario s;
    std::vector<std::string> errors;
    SimConfig& cfg = s.config;
    bool saw_sim = false;

    for (const auto& [name, section] : tree) {
        if (section.empty() && !section.data().empty()) {
            errors.push_back("key '" + name + "' outside of any section");
            continue;
        }
        std::uint32_t id = 0;
        if (name == "scenario") {
            SectionReader r(section, name, errors);
            std::string policies, sweep_param, sweep_values;
            r.optional("name", s.name);
            r.optional("policies", policies);
            r.optional("replications", s.replications);
            r.optional("sweep_param", sweep_param);
            r.optional("sweep_values", sweep_values);
            r.reject_unknown();
            for (const auto& p : split_list(policies)) {
                try {
                    s.policies.push_back(parse_policy(p));
                } catch (const ConfigError& e) {
                    errors.push_back("[scenario] policies: " + e.problems().front());
                }
            }
            if (!sweep_param.empty()) {
                SweepAxis axis{sweep_param, {}};
                for (const auto& v : split_list(sweep_values)) {
                    try {
                        std::size_t pos = 0;
                        axis.values.push_back(std::stod(v, &pos));
                        if (pos != v.size()) throw std::invalid_argument(v);
                    } catch (const std::exception&) {
                        errors.push_back("[scenario] sweep_values: '" + v + "' is not a number");
                    }
                }
                if (axis.values.empty()) errors.push_back("[scenario]: sweep_param given without sweep_values");
                if (std::find(sweep_parameters().begin(), sweep_parameters().end(), sweep_param) ==
                    sweep_parameters().end()) {
                    errors.push_back("[scenario]: unknown sweep_param '" + sweep_param + "'");
                }
                s.sweep = std::move(axis);
            } else if (!sweep_values.empty()) {
                errors.push_back("[scenario]: sweep_values given without sweep_param");
            }
        } else if (name == "sim") {
            saw_sim = true;
            SectionReader r(section, name, errors);
            std::string retention = "full";
            r.required("n_onus", cfg.n_onus);
            r.required("duration_us", cfg.sim_duration_us);
            r.optional("cycle_len_us", cfg.cycle_len_us);
            r.optional("alpha", cfg.alpha);
            r.optional("psbu_bytes", cfg.overheads.psbu_bytes);
            r.optional("xgem_header_bytes", cfg.overheads.xgem_header_bytes);
            r.optional("guard_bytes", cfg.overheads.guard_bytes);
            r.optional("grant_quantum_bytes", cfg.grant_quantum_bytes);
            r.optional("oltproc_us", cfg.oltproc_us);
            r.optional("rtt_min_us", cfg.rtt_min_us);
            r.optional("rtt_max_us", cfg.rtt_max_us);
            r.optional("seed", cfg.rng_seed);
            r.optional("warmup_cycles", cfg.warmup_cycles);
            r.optional("latency_retention", retention);
            r.optional("sketch_relative_error", cfg.sketch_relative_error);
            r.reject_unknown();
            if (retention == "full") cfg.retention = LatencyRetention::Full;
            else if (retention == "sketch") cfg.retention = LatencyRetention::Sketch;
            else errors.push_back("[sim] latency_retention must be 'full' or 'sketch'");
        } else if (name == "busy") {
            SectionReader r(section, name, errors);
            r.optional("p_min_us", cfg.busy.p_min_us);
            r.optional("p_max_us", cfg.busy.p_max_us);
            r.optional("l_min_us", cfg.busy.l_min_us);
            r.optional("l_max_us", cfg.busy.l_max_us);
            r.optional("ratio_b", cfg.busy.ratio_b);
            r.optional("shared_per_group", cfg.busy.shared_per_group);
            r.reject_unknown();
        } else if (section_id(name, "subcarrier.", id)) {
            SectionReader r(section, name, errors);
            SubcarrierConfig sc;
            sc.subcarrier_id = id;
            r.required("rate_gbps", sc.rate_gbps);
            r.required("onus", sc.onu_ids);
            r.optional("policy", sc.dba_policy);
            r.reject_unknown();
            cfg.subcarriers.push_back(std::move(sc));
        } else if (section_id(name, "group.", id)) {
            SectionReader r(section, name, errors);
            OnuGroup g;
            g.group_id = id;
            r.required("onus", g.onu_ids);
            r.required("base_rate_gbps", g.base_rate_gbps);
            r.reject_unknown();
            cfg.groups.push_back(std::move(g));
        } else {
            errors.push_back("unknown section [" + name + "]");
        }
    }
    if (!saw_sim) errors.push_back("missing required section [sim]");
    if (s.replications < 1) errors.push_back("[scenario] replications must be at least 1");
    if (s.name.empty()) s.name = "scenario";

    if (errors.empty()) {
        for (auto& e : config_problems(cfg)) errors.push_back(std::move(e));
    }
    if (errors.empty() && s.sweep) {
        for (double v : s.sweep->values) {
            try {
                validate_config(apply_sweep(cfg, s.sweep->param, v));
            } catch (const ConfigError& e) {
                for (const auto& p : e.problems()) {
                    errors.push_back("sweep " + s.sweep->param + "=" + std::to_string(v) + ": " + p);
                }
            }
        }
    }
    if (!errors.empty()) {
        for (auto& e : errors) e = origin + ": " + e;
        throw ConfigError(std::move(errors));
    }
    return s;
}

SimConfig make_tfdm_two_class(double base_rate_gbps, Policy policy) {
    SimConfig cfg;
    cfg.n_onus = 512;
    SubcarrierConfig ch1{1, 25.0, iota_onus(0, 32), policy};
    cfg.subcarriers.push_back(ch1);
    for (std::uint32_t k = 0; k < 3; ++k) {
        cfg.subcarriers.push_back({2 + k, 25.0, iota_onus(32 + 160 * k, 160), policy});
    }
    cfg.groups.push_back({1, iota_onus(0, 32), base_rate_gbps});
    cfg.groups.push_back({2, iota_onus(32, 480), base_rate_gbps});
    return cfg;
}

std::vector<std::string> preset_names() { return {"fig5-tdm512", "fig6-onu-sweep", "fig7-tfdm"}; }

std::optional<Scenario> preset(std::string_view name) {
    Scenario s;
    s.name = std::string(name);
    s.replications = 4;
    s.policies = {Policy::RR, Policy::WF, Policy::HS};
    if (name == "fig5-tdm512") {
        s.config = make_single_carrier(512, 100.0, 0.03, Policy::HS);
        s.sweep = SweepAxis{"base_rate_gbps", {0.005, 0.01, 0.02, 0.03, 0.04, 0.05}};
    } else if (name == "fig6-onu-sweep") {
        s.config = make_single_carrier(512, 100.0, 0.035, Policy::HS);
        s.sweep = SweepAxis{"n_onus", {64, 128, 256, 512}};
    } else if (name == "fig7-tfdm") {
        s.config = make_tfdm_two_class(0.03, Policy::HS);
    } else {
        return std::nullopt;
    }
    // Busier peaks than the library default: with b = 3 a 512-ONU channel at
    // 0.035 Gb/s per ONU is still lightly loaded and RR wins everywhere.
    s.config.busy.ratio_b = kPresetBusyRatio;
    s.config.sim_duration_us = 1e6;
    return s;
}

Scenario load_scenario(const std::string& path_or_preset) {
    if (auto p = preset(path_or_preset)) return *p;
    std::ifstream in(path_or_preset);
    if (!in) {
        throw ConfigError({"cannot open scenario '" + path_or_preset +
                           "' (not a file and not a preset)"});
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path_or_preset);
}

}  // namespace ponsim
