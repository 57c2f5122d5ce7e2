// SPDX-License-Identifier: Apache-2.0
//
// risopt - joint precoder / RIS phase-shift optimization library
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "risopt/scenario.hpp"
#include "risopt/toml.hpp"

namespace risopt {

namespace detail {

// Typed access into a parsed table with field-path error messages and
// unknown-key detection.
class ConfigReader {
  public:
    explicit ConfigReader(const toml::Table& table) : table_(table) {}

    bool has(const std::string& key) const { return table_.count(key) != 0; }

    double number(const std::string& key, double fallback) {
        const auto* v = fetch(key);
        if (v == nullptr) return fallback;
        return wrap(key, [&] { return v->as_double(); });
    }
    std::int64_t integer(const std::string& key, std::int64_t fallback) {
        const auto* v = fetch(key);
        if (v == nullptr) return fallback;
        return wrap(key, [&] { return v->as_int(); });
    }
    bool boolean(const std::string& key, bool fallback) {
        const auto* v = fetch(key);
        if (v == nullptr) return fallback;
        return wrap(key, [&] { return v->as_bool(); });
    }
    std::string str(const std::string& key, const std::string& fallback) {
        const auto* v = fetch(key);
        if (v == nullptr) return fallback;
        return wrap(key, [&] { return v->as_string(); });
    }
    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
        const auto* v = fetch(key);
        if (v == nullptr) return fallback;
        return wrap(key, [&] {
            std::vector<double> out;
            for (const auto& e : v->as_array()) out.push_back(e.as_double());
            return out;
        });
    }
    std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback) {
        const auto* v = fetch(key);
        if (v == nullptr) return fallback;
        return wrap(key, [&] {
            std::vector<std::string> out;
            for (const auto& e : v->as_array()) out.push_back(e.as_string());
            return out;
        });
    }
    Vec3 position(const std::string& key, const Vec3& fallback) {
        const auto* v = fetch(key);
        if (v == nullptr) return fallback;
        return wrap(key, [&] { return to_vec3(v->as_array(), key); });
    }
    std::vector<Vec3> positions(const std::string& key, std::vector<Vec3> fallback) {
        const auto* v = fetch(key);
        if (v == nullptr) return fallback;
        return wrap(key, [&] {
            std::vector<Vec3> out;
            for (const auto& e : v->as_array()) out.push_back(to_vec3(e.as_array(), key));
            return out;
        });
    }

    // Every key must have been consumed by now; leftovers are typos.
    void finish() const {
        std::string unknown;
        for (const auto& [key, value] : table_) {
            if (used_.count(key) == 0) unknown += (unknown.empty() ? "" : ", ") + key;
        }
        if (!unknown.empty()) throw ValidationError("unknown config keys: " + unknown);
    }

  private:
    static Vec3 to_vec3(const toml::Array& arr, const std::string& key) {
        if (arr.size() != 2 && arr.size() != 3)
            throw ValidationError(key + ": positions need 2 or 3 coordinates");
        Vec3 p = Vec3::Zero();
        for (std::size_t i = 0; i < arr.size(); ++i) p(static_cast<int>(i)) = arr[i].as_double();
        return p;
    }
    const toml::Value* fetch(const std::string& key) {
        const auto it = table_.find(key);
        if (it == table_.end()) return nullptr;
        used_.insert(key);
        return &it->second;
    }
    template <typename Fn>
    auto wrap(const std::string& key, Fn&& fn) -> decltype(fn()) {
        try {
            return fn();
        } catch (const ValidationError& e) {
            throw ValidationError(key + ": " + e.what());
        }
    }

    const toml::Table& table_;
    std::set<std::string> used_;
};

inline LinkClassConfig read_link_class(ConfigReader& r, const std::string& prefix,
                                       const LinkClassConfig& defaults) {
    LinkClassConfig lc;
    lc.rician_factor = r.number(prefix + ".rician_factor", defaults.rician_factor);
    lc.pl_exp_los = r.number(prefix + ".pl_exp_los", defaults.pl_exp_los);
    lc.pl_exp_nlos = r.number(prefix + ".pl_exp_nlos", defaults.pl_exp_nlos);
    lc.n_rays = static_cast<int>(r.integer(prefix + ".n_rays", defaults.n_rays));
    return lc;
}

// Shortest representation that parses back to the same double.
inline std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string fmt_position(const Vec3& p) {
    return "[" + fmt_double(p.x()) + ", " + fmt_double(p.y()) + ", " + fmt_double(p.z()) + "]";
}

} // namespace detail

// Builds a fully validated ScenarioConfig; every omitted field takes its
// documented default (e.g. trials -> 500). Unknown keys are rejected.
inline ScenarioConfig parse_config(std::string_view text) {
    const toml::Table table = toml::parse(text);
    detail::ConfigReader r(table);
    ScenarioConfig cfg;

    cfg.topology = topology_from_string(r.str("topology", "parallel"));
    cfg.trials = static_cast<int>(r.integer("trials", 500));
    cfg.master_seed = static_cast<std::uint64_t>(r.integer("master_seed", 1));
    std::vector<std::string> algs = r.strings("algorithms", {"jpr_mapg"});
    cfg.algorithms.clear();
    for (const auto& a : algs) cfg.algorithms.push_back(algorithm_from_string(a));

    auto& g = cfg.geometry;
    g.bs_position = r.position("geometry.bs_position", g.bs_position);
    g.user_position = r.position("geometry.user_position", g.user_position);
    g.panel_positions = r.positions("geometry.panel_positions", g.panel_positions);
    g.n_tx = static_cast<int>(r.integer("geometry.n_tx", g.n_tx));
    g.n_rx = static_cast<int>(r.integer("geometry.n_rx", g.n_rx));
    g.n_ris = static_cast<int>(r.integer("geometry.n_ris", g.n_ris));
    g.element_spacing_factor =
        r.number("geometry.element_spacing_factor", g.element_spacing_factor);
    g.ris_element_size_factor =
        r.number("geometry.ris_element_size_factor", g.ris_element_size_factor);
    g.user_path_y = r.number("geometry.user_path_y", g.user_path_y);

    auto& ph = cfg.physics;
    ph.carrier_frequency_hz = r.number("physics.carrier_frequency_hz", ph.carrier_frequency_hz);
    ph.tx_gain = r.number("physics.tx_gain", ph.tx_gain);
    ph.rx_gain = r.number("physics.rx_gain", ph.rx_gain);
    ph.k_abs = r.number("physics.k_abs", ph.k_abs);
    ph.scatter_margin_factor = r.number("physics.scatter_margin_factor", ph.scatter_margin_factor);
    ph.complex_ray_gain = r.boolean("physics.complex_ray_gain", ph.complex_ray_gain);
    ph.direct_blocked = r.boolean("physics.direct_blocked", ph.direct_blocked);
    ph.ris_amplitude = r.number("physics.ris_amplitude", ph.ris_amplitude);
    ph.direct = detail::read_link_class(r, "physics.direct", ph.direct);
    ph.tx_ris = detail::read_link_class(r, "physics.tx_ris", ph.tx_ris);
    ph.ris_rx = detail::read_link_class(r, "physics.ris_rx", ph.ris_rx);
    ph.ris_ris = detail::read_link_class(r, "physics.ris_ris", ph.ris_ris);

    auto& lbc = cfg.link_budget;
    lbc.p_tx_dbm = r.number("link_budget.p_tx_dbm", lbc.p_tx_dbm);
    if (r.has("link_budget.p_tx_watts"))
        lbc.p_tx_watts = r.number("link_budget.p_tx_watts", 0.0);
    if (r.has("link_budget.noise_power_w"))
        lbc.noise_power_w = r.number("link_budget.noise_power_w", 0.0);
    lbc.bandwidth_hz = r.number("link_budget.bandwidth_hz", lbc.bandwidth_hz);
    lbc.noise_figure_db = r.number("link_budget.noise_figure_db", lbc.noise_figure_db);
    lbc.n_streams = static_cast<int>(r.integer("link_budget.n_streams", lbc.n_streams));

    auto& oc = cfg.optimizer;
    oc.max_iterations = static_cast<int>(r.integer("optimizer.max_iterations", oc.max_iterations));
    oc.step_scale = r.number("optimizer.step_scale", oc.step_scale);
    oc.stop_tol = r.number("optimizer.stop_tol", oc.stop_tol);
    const auto qb = r.integer("optimizer.quant_bits", 0); // 0 disables
    if (qb != 0) oc.quant_bits = static_cast<int>(qb);

    if (r.has("sweep.parameter") || r.has("sweep.values")) {
        SweepConfig sw;
        sw.parameter = r.str("sweep.parameter", "");
        sw.values = r.numbers("sweep.values", {});
        cfg.sweep = sw;
    }

    r.finish();
    cfg.validate();
    return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const ConfigError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

// Round-trippable dump with every field explicit (including defaults).
inline std::string dump_config(const ScenarioConfig& cfg) {
    using detail::fmt_double;
    using detail::fmt_position;
    std::ostringstream out;
    out << "topology = \"" << to_string(cfg.topology) << "\"\n";
    out << "trials = " << cfg.trials << "\n";
    out << "master_seed = " << cfg.master_seed << "\n";
    out << "algorithms = [";
    for (std::size_t i = 0; i < cfg.algorithms.size(); ++i)
        out << (i ? ", " : "") << "\"" << to_string(cfg.algorithms[i]) << "\"";
    out << "]\n\n";

    const auto& g = cfg.geometry;
    out << "[geometry]\n";
    out << "bs_position = " << fmt_position(g.bs_position) << "\n";
    out << "user_position = " << fmt_position(g.user_position) << "\n";
    out << "panel_positions = [";
    for (std::size_t i = 0; i < g.panel_positions.size(); ++i)
        out << (i ? ", " : "") << fmt_position(g.panel_positions[i]);
    out << "]\n";
    out << "n_tx = " << g.n_tx << "\n";
    out << "n_rx = " << g.n_rx << "\n";
    out << "n_ris = " << g.n_ris << "\n";
    out << "element_spacing_factor = " << fmt_double(g.element_spacing_factor) << "\n";
    out << "ris_element_size_factor = " << fmt_double(g.ris_element_size_factor) << "\n";
    out << "user_path_y = " << fmt_double(g.user_path_y) << "\n\n";

    const auto& ph = cfg.physics;
    out << "[physics]\n";
    out << "carrier_frequency_hz = " << fmt_double(ph.carrier_frequency_hz) << "\n";
    out << "tx_gain = " << fmt_double(ph.tx_gain) << "\n";
    out << "rx_gain = " << fmt_double(ph.rx_gain) << "\n";
    out << "k_abs = " << fmt_double(ph.k_abs) << "\n";
    out << "scatter_margin_factor = " << fmt_double(ph.scatter_margin_factor) << "\n";
    out << "complex_ray_gain = " << (ph.complex_ray_gain ? "true" : "false") << "\n";
    out << "direct_blocked = " << (ph.direct_blocked ? "true" : "false") << "\n";
    out << "ris_amplitude = " << fmt_double(ph.ris_amplitude) << "\n";
    const auto dump_link_class = [&](const char* name, const LinkClassConfig& lc) {
        out << "\n[physics." << name << "]\n";
        out << "rician_factor = " << fmt_double(lc.rician_factor) << "\n";
        out << "pl_exp_los = " << fmt_double(lc.pl_exp_los) << "\n";
        out << "pl_exp_nlos = " << fmt_double(lc.pl_exp_nlos) << "\n";
        out << "n_rays = " << lc.n_rays << "\n";
    };
    dump_link_class("direct", ph.direct);
    dump_link_class("tx_ris", ph.tx_ris);
    dump_link_class("ris_rx", ph.ris_rx);
    dump_link_class("ris_ris", ph.ris_ris);

    const auto& lbc = cfg.link_budget;
    out << "\n[link_budget]\n";
    out << "p_tx_dbm = " << fmt_double(lbc.p_tx_dbm) << "\n";
    if (lbc.p_tx_watts) out << "p_tx_watts = " << fmt_double(*lbc.p_tx_watts) << "\n";
    if (lbc.noise_power_w) out << "noise_power_w = " << fmt_double(*lbc.noise_power_w) << "\n";
    out << "bandwidth_hz = " << fmt_double(lbc.bandwidth_hz) << "\n";
    out << "noise_figure_db = " << fmt_double(lbc.noise_figure_db) << "\n";
    out << "n_streams = " << lbc.n_streams << "\n";
    out << "# resolved: total " << fmt_double(lbc.transmit_power_watts())
        << " W, per-stream rho " << fmt_double(lbc.to_link_budget().rho) << " W, noise "
        << fmt_double(lbc.noise_watts()) << " W\n";

    const auto& oc = cfg.optimizer;
    out << "\n[optimizer]\n";
    out << "max_iterations = " << oc.max_iterations << "\n";
    out << "step_scale = " << fmt_double(oc.step_scale) << "\n";
    out << "stop_tol = " << fmt_double(oc.stop_tol) << "\n";
    out << "quant_bits = " << (oc.quant_bits ? *oc.quant_bits : 0) << "\n";

    if (cfg.sweep) {
        out << "\n[sweep]\n";
        out << "parameter = \"" << cfg.sweep->parameter << "\"\n";
        out << "values = [";
        for (std::size_t i = 0; i < cfg.sweep->values.size(); ++i)
            out << (i ? ", " : "") << fmt_double(cfg.sweep->values[i]);
        out << "]\n";
    }
    return out.str();
}

} // namespace risopt
