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

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "risopt/config.hpp"
#include "risopt/optimizer.hpp"
#include "risopt/scenario.hpp"

namespace risopt {

inline constexpr const char* kVersion = "0.1.0";

// One CSV line: a (sweep value, trial, algorithm) cell of a run.
struct ResultRow {
    std::string sweep_param = "none";
    double sweep_value = 0.0;
    int trial = 0;
    std::string algorithm;
    double rate = 0.0; // bits/s/Hz
    std::optional<double> rate_quantized;
    int iterations = 0;
    double lipschitz = 0.0;
    double alpha = 0.0;
    double wall_ms = 0.0;
    std::string status = "ok";
};

struct RunOptions {
    // Measured wall time goes into the CSV only when set; by default the
    // column is zero so output bytes stay a pure function of config + seed.
    bool timing = false;
    int workers = 0; // 0: RIS_OPT_WORKERS env, else hardware concurrency
};

inline int worker_count(const RunOptions& opt) {
    if (opt.workers > 0) return opt.workers;
    if (const char* env = std::getenv("RIS_OPT_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

namespace detail {

// Fixed-size index-addressed work queue; results land in caller-owned slots
// so output order never depends on scheduling.
template <typename Fn>
inline void parallel_for(int n, int workers, Fn&& fn) {
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline std::string sanitize_status(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

inline std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace detail

// ----------------------------------------------------------------------
// Execution
// ----------------------------------------------------------------------

namespace detail {

// All trials of one parameter point. The channel stream of trial t is
// mix64(mix64(master_seed, channel_ordinal), t); parameters that do not
// change the channel distribution share ordinal 0 so their trials see
// identical realizations across sweep values.
inline std::vector<ResultRow> run_point(const ScenarioConfig& cfg, const std::string& param,
                                        double value, std::uint64_t channel_ordinal,
                                        const RunOptions& opt) {
    const int nalg = static_cast<int>(cfg.algorithms.size());
    std::vector<ResultRow> rows(static_cast<std::size_t>(cfg.trials) * nalg);
    const LinkBudget lb = cfg.link_budget.to_link_budget();
    const int ns = cfg.link_budget.n_streams;
    const double amplitude = cfg.physics.ris_amplitude;
    const bool needs_iterations =
        std::any_of(cfg.algorithms.begin(), cfg.algorithms.end(), [](Algorithm a) {
            return a == Algorithm::jpr_mapg || a == Algorithm::jpr_pg || a == Algorithm::ris_only;
        });

    parallel_for(cfg.trials, worker_count(opt), [&](int trial) {
        for (int k = 0; k < nalg; ++k) {
            auto& row = rows[static_cast<std::size_t>(trial) * nalg + k];
            row.sweep_param = param;
            row.sweep_value = value;
            row.trial = trial;
            row.algorithm = to_string(cfg.algorithms[k]);
        }

        ChannelSet ch;
        double lip = 0.0;
        InitialPoint init;
        try {
            RandomStream rng(mix64(mix64(cfg.master_seed, channel_ordinal),
                                   static_cast<std::uint64_t>(trial)));
            ch = generate_scenario_channels(cfg, rng);
            if (needs_iterations) {
                lip = lipschitz_bound(ch, lb, ns, amplitude).L;
                init = default_initial_point(ch, ns, amplitude);
            }
        } catch (const std::exception& e) {
            for (int k = 0; k < nalg; ++k)
                rows[static_cast<std::size_t>(trial) * nalg + k].status =
                    sanitize_status(std::string("error: ") + e.what());
            return;
        }

        for (int k = 0; k < nalg; ++k) {
            auto& row = rows[static_cast<std::size_t>(trial) * nalg + k];
            try {
                RunReport rep;
                switch (cfg.algorithms[k]) {
                    case Algorithm::jpr_mapg:
                        rep = jpr_mapg(ch, lb, cfg.optimizer, init, lip, amplitude);
                        break;
                    case Algorithm::jpr_pg:
                        rep = jpr_pg(ch, lb, cfg.optimizer, init, lip, amplitude);
                        break;
                    case Algorithm::ris_only:
                        rep = ris_only(ch, lb, cfg.optimizer, init, lip, amplitude);
                        break;
                    case Algorithm::static_ris:
                        rep = static_ris(ch, lb, ns, amplitude, cfg.optimizer.quant_bits);
                        break;
                    case Algorithm::no_ris:
                        rep = no_ris(ch, lb, ns, cfg.optimizer.quant_bits);
                        break;
                }
                row.rate = rep.final_rate();
                row.rate_quantized = rep.quantized_rate;
                row.iterations = rep.iterations;
                row.lipschitz = rep.lipschitz;
                row.alpha = rep.alpha;
                row.wall_ms = opt.timing ? rep.wall_ms : 0.0;
                row.status = rep.rank_warning ? "ok;rank_deficient" : "ok";
            } catch (const std::exception& e) {
                row.status = sanitize_status(std::string("error: ") + e.what());
            }
        }
    });
    return rows;
}

} // namespace detail

inline std::vector<ResultRow> run_monte_carlo(const ScenarioConfig& cfg,
                                              const RunOptions& opt = {}) {
    cfg.validate();
    return detail::run_point(cfg, "none", 0.0, 0, opt);
}

inline bool sweep_affects_channel(const std::string& param) {
    return param == "n_ris" || param == "user_distance" || param == "n_panels";
}

// Returns the configuration at one sweep value.
inline ScenarioConfig apply_sweep_value(ScenarioConfig cfg, const std::string& param,
                                        double value) {
    if (param == "p_tx_dbm") {
        cfg.link_budget.p_tx_dbm = value;
        cfg.link_budget.p_tx_watts.reset();
    } else if (param == "n_ris") {
        if (value < 1.0 || value != std::floor(value))
            throw ValidationError("sweep n_ris values must be positive integers");
        cfg.geometry.n_ris = static_cast<int>(value);
    } else if (param == "user_distance") {
        if (!(value > 0.0)) throw ValidationError("sweep user_distance values must be > 0");
        cfg.geometry.user_position =
            cfg.geometry.bs_position + Vec3(value, cfg.geometry.user_path_y, 0.0);
    } else if (param == "quant_bits") {
        // Non-finite or sub-1 values mean "unquantized".
        if (std::isfinite(value) && value >= 1.0)
            cfg.optimizer.quant_bits = static_cast<int>(value);
        else
            cfg.optimizer.quant_bits.reset();
    } else if (param == "n_panels") {
        const int k = static_cast<int>(value);
        if (value != std::floor(value) || k < 1 ||
            k > static_cast<int>(cfg.geometry.panel_positions.size()))
            throw ValidationError(
                "sweep n_panels values must be integers in [1, #panel_positions]");
        cfg.geometry.panel_positions.resize(static_cast<std::size_t>(k));
    } else {
        throw ValidationError("unknown sweep parameter '" + param + "'");
    }
    cfg.validate();
    return cfg;
}

inline std::vector<ResultRow> run_sweep(const ScenarioConfig& cfg, const std::string& param,
                                        const std::vector<double>& values,
                                        const RunOptions& opt = {}) {
    if (values.empty()) throw ValidationError("sweep needs at least one value");
    std::vector<ResultRow> rows;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const ScenarioConfig at_value = apply_sweep_value(cfg, param, values[i]);
        const std::uint64_t ordinal = sweep_affects_channel(param) ? i + 1 : 0;
        auto part = detail::run_point(at_value, param, values[i], ordinal, opt);
        rows.insert(rows.end(), std::make_move_iterator(part.begin()),
                    std::make_move_iterator(part.end()));
    }
    return rows;
}

// ----------------------------------------------------------------------
// CSV
// ----------------------------------------------------------------------

inline constexpr const char* kCsvHeader =
    "sweep_param,sweep_value,trial,algorithm,rate_bps_hz,rate_quantized_bps_hz,iterations,"
    "lipschitz_L,alpha,wall_ms,status";

inline std::string csv_to_string(const std::vector<ResultRow>& rows) {
    std::string out = kCsvHeader;
    out.push_back('\n');
    char buf[64];
    for (const auto& r : rows) {
        out += r.sweep_param;
        out.push_back(',');
        out += detail::fmt_g(r.sweep_value);
        out.push_back(',');
        out += std::to_string(r.trial);
        out.push_back(',');
        out += r.algorithm;
        out.push_back(',');
        out += detail::fmt_g(r.rate);
        out.push_back(',');
        if (r.rate_quantized) out += detail::fmt_g(*r.rate_quantized);
        out.push_back(',');
        out += std::to_string(r.iterations);
        out.push_back(',');
        out += detail::fmt_g(r.lipschitz);
        out.push_back(',');
        out += detail::fmt_g(r.alpha);
        out.push_back(',');
        std::snprintf(buf, sizeof buf, "%.3f", r.wall_ms);
        out += buf;
        out.push_back(',');
        out += r.status;
        out.push_back('\n');
    }
    return out;
}

inline void write_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file '" + path + "'");
    out << csv_to_string(rows);
}

inline std::vector<ResultRow> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open CSV file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw ParseError(path + ": unexpected CSV header");

    std::vector<ResultRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (line.back() == ',') fields.push_back("");
        if (fields.size() != 11)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 11 fields");
        ResultRow r;
        try {
            r.sweep_param = fields[0];
            r.sweep_value = std::stod(fields[1]);
            r.trial = std::stoi(fields[2]);
            r.algorithm = fields[3];
            r.rate = std::stod(fields[4]);
            if (!fields[5].empty()) r.rate_quantized = std::stod(fields[5]);
            r.iterations = std::stoi(fields[6]);
            r.lipschitz = std::stod(fields[7]);
            r.alpha = std::stod(fields[8]);
            r.wall_ms = std::stod(fields[9]);
            r.status = fields[10];
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": malformed row");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

// ----------------------------------------------------------------------
// Aggregation
// ----------------------------------------------------------------------

struct SummaryRow {
    std::string sweep_param;
    double sweep_value = 0.0;
    std::string algorithm;
    int n_ok = 0;
    int n_error = 0;
    double mean_rate = 0.0;
    double stddev_rate = 0.0; // sample standard deviation
};

inline std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
    std::vector<SummaryRow> out;
    auto slot = [&](const ResultRow& r) -> SummaryRow& {
        for (auto& s : out)
            if (s.sweep_value == r.sweep_value && s.algorithm == r.algorithm &&
                s.sweep_param == r.sweep_param)
                return s;
        SummaryRow s;
        s.sweep_param = r.sweep_param;
        s.sweep_value = r.sweep_value;
        s.algorithm = r.algorithm;
        out.push_back(s);
        return out.back();
    };
    for (const auto& r : rows) {
        auto& s = slot(r);
        if (r.status.rfind("ok", 0) == 0) {
            ++s.n_ok;
            s.mean_rate += r.rate;
        } else {
            ++s.n_error;
        }
    }
    for (auto& s : out)
        if (s.n_ok > 0) s.mean_rate /= s.n_ok;
    for (const auto& r : rows) {
        if (r.status.rfind("ok", 0) != 0) continue;
        auto& s = slot(r);
        const double d = r.rate - s.mean_rate;
        s.stddev_rate += d * d;
    }
    for (auto& s : out)
        s.stddev_rate = s.n_ok > 1 ? std::sqrt(s.stddev_rate / (s.n_ok - 1)) : 0.0;
    return out;
}

inline std::string summary_to_string(const std::vector<SummaryRow>& summary) {
    std::ostringstream os;
    os << "sweep_param sweep_value algorithm n_ok n_error mean_rate stddev_rate\n";
    for (const auto& s : summary) {
        os << s.sweep_param << " " << detail::fmt_g(s.sweep_value) << " " << s.algorithm << " "
           << s.n_ok << " " << s.n_error << " " << detail::fmt_g(s.mean_rate) << " "
           << detail::fmt_g(s.stddev_rate) << "\n";
    }
    return os.str();
}

// ----------------------------------------------------------------------
// Run metadata sidecar
// ----------------------------------------------------------------------

// Deterministic JSON with the resolved config, versions, and seeds.
inline std::string run_metadata_json(const ScenarioConfig& cfg, const std::string& command) {
    nlohmann::json j;
    j["tool"] = "risopt";
    j["version"] = kVersion;
    j["command"] = command;
    j["master_seed"] = cfg.master_seed;
    j["trials"] = cfg.trials;
    j["csv_schema"] = kCsvHeader;
    j["config"] = dump_config(cfg);
    return j.dump(2) + "\n";
}

} // namespace risopt
