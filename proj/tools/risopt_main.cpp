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

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "risopt/risopt.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    int trials = -1;
    long long seed = -1;
    std::string algorithms; // comma separated
    std::string out = "results.csv";
    bool timing = false;
    bool dump_config = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    cmd->add_option("--config", args.config_path, "scenario config (TOML)")
        ->required(config_required);
    cmd->add_option("--trials", args.trials, "override trial count");
    cmd->add_option("--seed", args.seed, "override master seed");
    cmd->add_option("--algorithms", args.algorithms, "comma-separated algorithm list");
    cmd->add_option("--out", args.out, "output CSV path");
    cmd->add_flag("--timing", args.timing,
                  "emit measured wall_ms (makes output timing-dependent)");
    cmd->add_flag("--dump-config", args.dump_config,
                  "print the fully resolved config and exit");
}

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

risopt::ScenarioConfig load_with_overrides(const CommonArgs& args) {
    risopt::ScenarioConfig cfg = risopt::load_config(args.config_path);
    if (args.trials >= 0) cfg.trials = args.trials;
    if (args.seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(args.seed);
    if (!args.algorithms.empty()) {
        cfg.algorithms.clear();
        for (const auto& name : split_csv_list(args.algorithms))
            cfg.algorithms.push_back(risopt::algorithm_from_string(name));
    }
    cfg.validate();
    return cfg;
}

void write_outputs(const risopt::ScenarioConfig& cfg, const std::vector<risopt::ResultRow>& rows,
                   const std::string& out, const std::string& command) {
    risopt::write_csv(out, rows);
    std::ofstream meta(out + ".meta.json", std::ios::binary);
    meta << risopt::run_metadata_json(cfg, command);
    std::cout << "wrote " << rows.size() << " rows to " << out << "\n";
}

// Small scenario used when `audit` is run without a config. A blocked direct
// path and a small panel keep the problem well conditioned so the residual
// check converges within the audit's iteration budget.
risopt::ScenarioConfig builtin_audit_config() {
    risopt::ScenarioConfig cfg;
    cfg.topology = risopt::Topology::parallel;
    cfg.geometry.n_tx = 8;
    cfg.geometry.n_rx = 4;
    cfg.geometry.n_ris = 16;
    cfg.geometry.bs_position = risopt::Vec3(0.0, 0.0, 0.0);
    cfg.geometry.user_position = risopt::Vec3(3.0, 0.0, 0.0);
    cfg.geometry.panel_positions = {risopt::Vec3(1.0, 1.0, 0.0)};
    cfg.physics.direct_blocked = true;
    cfg.link_budget.p_tx_dbm = -10.0;
    cfg.link_budget.n_streams = 2;
    cfg.trials = 10;
    cfg.master_seed = 7;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"joint precoder / RIS phase-shift optimization harness"};
    app.require_subcommand(1);

    CommonArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo run over channel realizations");
    add_common(sim, sim_args, true);

    CommonArgs sweep_args;
    std::string sweep_param;
    std::string sweep_values;
    auto* sweep = app.add_subcommand("sweep", "re-run the Monte Carlo over a parameter grid");
    add_common(sweep, sweep_args, true);
    sweep->add_option("--param", sweep_param,
                      "p_tx_dbm | n_ris | user_distance | quant_bits | n_panels");
    sweep->add_option("--values", sweep_values, "comma-separated value list");

    int gc_instances = 50;
    long long gc_seed = 1;
    auto* gc = app.add_subcommand("check-gradients",
                                  "finite-difference check of the closed-form gradients");
    gc->add_option("--instances", gc_instances, "instances per topology");
    gc->add_option("--seed", gc_seed, "random seed");

    std::string audit_config;
    long long audit_seed = -1;
    auto* audit = app.add_subcommand("audit", "run the property audit suite");
    audit->add_option("--config", audit_config, "scenario config (TOML)");
    audit->add_option("--seed", audit_seed, "override master seed");

    std::string summarize_in;
    std::string summarize_out;
    auto* sum = app.add_subcommand("summarize", "aggregate a results CSV");
    sum->add_option("--in", summarize_in, "input CSV")->required();
    sum->add_option("--out", summarize_out,
                    "also write the table as a gnuplot-compatible data file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            const auto cfg = load_with_overrides(sim_args);
            if (sim_args.dump_config) {
                std::cout << risopt::dump_config(cfg);
                return 0;
            }
            risopt::RunOptions opt;
            opt.timing = sim_args.timing;
            const auto rows = cfg.sweep ? risopt::run_sweep(cfg, cfg.sweep->parameter,
                                                            cfg.sweep->values, opt)
                                        : risopt::run_monte_carlo(cfg, opt);
            write_outputs(cfg, rows, sim_args.out, "simulate");
            return 0;
        }
        if (sweep->parsed()) {
            auto cfg = load_with_overrides(sweep_args);
            std::string param = sweep_param;
            std::vector<double> values;
            if (!sweep_values.empty())
                for (const auto& v : split_csv_list(sweep_values)) values.push_back(std::stod(v));
            if (param.empty() && cfg.sweep) param = cfg.sweep->parameter;
            if (values.empty() && cfg.sweep) values = cfg.sweep->values;
            if (param.empty() || values.empty())
                throw risopt::ValidationError(
                    "sweep needs --param/--values or a [sweep] config section");
            if (sweep_args.dump_config) {
                auto dumped = cfg;
                dumped.sweep = risopt::SweepConfig{param, values};
                std::cout << risopt::dump_config(dumped);
                return 0;
            }
            risopt::RunOptions opt;
            opt.timing = sweep_args.timing;
            const auto rows = risopt::run_sweep(cfg, param, values, opt);
            write_outputs(cfg, rows, sweep_args.out, "sweep");
            return 0;
        }
        if (gc->parsed()) {
            const auto rep =
                risopt::check_gradients(static_cast<std::uint64_t>(gc_seed), gc_instances);
            std::printf("instances: %d per topology\n", gc_instances);
            std::printf("max relative error: %.3e (worst on %s, analytic %.6e vs numeric %.6e)\n",
                        rep.max_rel_error, rep.worst_topology.c_str(), rep.worst_analytic,
                        rep.worst_numeric);
            const bool pass = rep.max_rel_error <= 1e-5;
            std::printf("%s\n", pass ? "PASS" : "FAIL");
            return pass ? 0 : 1;
        }
        if (audit->parsed()) {
            risopt::ScenarioConfig cfg = audit_config.empty() ? builtin_audit_config()
                                                              : risopt::load_config(audit_config);
            if (audit_seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(audit_seed);
            const auto rep = risopt::audit_properties(cfg);
            for (const auto& check : rep.checks)
                std::printf("[%s] %-24s %s\n", check.pass ? "PASS" : "FAIL", check.name.c_str(),
                            check.detail.c_str());
            return rep.all_pass() ? 0 : 1;
        }
        if (sum->parsed()) {
            const auto rows = risopt::read_csv(summarize_in);
            const std::string table = risopt::summary_to_string(risopt::summarize(rows));
            std::cout << table;
            if (!summarize_out.empty()) {
                std::ofstream out(summarize_out, std::ios::binary);
                if (!out) throw risopt::Error("cannot open '" + summarize_out + "'");
                out << "# " << table; // comment the header row for gnuplot
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
