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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "risopt/channel.hpp"
#include "risopt/core.hpp"
#include "risopt/geometry.hpp"
#include "risopt/objective.hpp"
#include "risopt/optimizer.hpp"

namespace risopt {

enum class Topology { parallel, multihop };

inline const char* to_string(Topology t) {
    return t == Topology::parallel ? "parallel" : "multihop";
}

inline Topology topology_from_string(const std::string& s) {
    if (s == "parallel") return Topology::parallel;
    if (s == "multihop") return Topology::multihop;
    throw ValidationError("topology: expected 'parallel' or 'multihop', got '" + s + "'");
}

// Per-link-class propagation parameters (the geometry-independent part).
struct LinkClassConfig {
    double rician_factor = 10.0;
    double pl_exp_los = 2.0;
    double pl_exp_nlos = 2.0;
    int n_rays = 10;
};

struct GeometryConfig {
    Vec3 bs_position = Vec3::Zero();
    Vec3 user_position = Vec3(30.0, 0.0, 0.0);
    std::vector<Vec3> panel_positions = {Vec3(10.0, 10.0, 0.0)};
    int n_tx = 64;
    int n_rx = 16;
    int n_ris = 256;
    double element_spacing_factor = 0.5;  // x lambda, antennas and panels
    double ris_element_size_factor = 0.5; // x lambda, square elements
    double user_path_y = 0.0;             // lateral offset for distance sweeps
};

struct PhysicsConfig {
    double carrier_frequency_hz = 28e9;
    double tx_gain = 1.0; // linear
    double rx_gain = 1.0;
    double k_abs = 0.0; // 1/m
    double scatter_margin_factor = 0.5;
    bool complex_ray_gain = false;
    bool direct_blocked = false;
    double ris_amplitude = 1.0; // reflection coefficient magnitude
    LinkClassConfig direct{0.0, 1.90, 4.39, 10};
    LinkClassConfig tx_ris{10.0, 1.90, 4.39, 10};
    LinkClassConfig ris_rx{10.0, 1.90, 4.39, 10};
    LinkClassConfig ris_ris{10.0, 2.05, 2.05, 3};

    double wavelength() const { return kSpeedOfLight / carrier_frequency_hz; }
};

struct LinkBudgetConfig {
    double p_tx_dbm = 30.0;
    std::optional<double> p_tx_watts;     // overrides p_tx_dbm when present
    std::optional<double> noise_power_w;  // overrides bandwidth/noise figure
    double bandwidth_hz = 800e6;
    double noise_figure_db = 0.0;
    int n_streams = 1;

    double transmit_power_watts() const {
        return p_tx_watts ? *p_tx_watts : std::pow(10.0, (p_tx_dbm - 30.0) / 10.0);
    }
    // Thermal noise at 290 K times the noise figure, unless given explicitly.
    double noise_watts() const {
        if (noise_power_w) return *noise_power_w;
        return kBoltzmann * 290.0 * bandwidth_hz * std::pow(10.0, noise_figure_db / 10.0);
    }
    // Total power split evenly across streams.
    LinkBudget to_link_budget() const {
        return LinkBudget{transmit_power_watts() / n_streams, noise_watts()};
    }
};

struct SweepConfig {
    std::string parameter;
    std::vector<double> values;
};

struct ScenarioConfig {
    Topology topology = Topology::parallel;
    GeometryConfig geometry;
    PhysicsConfig physics;
    LinkBudgetConfig link_budget;
    OptimizerConfig optimizer;
    std::vector<Algorithm> algorithms = {Algorithm::jpr_mapg};
    int trials = 500;
    std::uint64_t master_seed = 1;
    std::optional<SweepConfig> sweep;

    void validate() const;
};

inline const std::vector<std::string>& sweep_parameter_names() {
    static const std::vector<std::string> names = {"p_tx_dbm", "n_ris", "user_distance",
                                                   "quant_bits", "n_panels"};
    return names;
}

inline void ScenarioConfig::validate() const {
    optimizer.validate();
    if (trials < 1) throw ValidationError("trials: must be >= 1");
    if (geometry.n_tx < 1 || geometry.n_rx < 1 || geometry.n_ris < 1)
        throw ValidationError("geometry: array element counts must be >= 1");
    if (!(geometry.element_spacing_factor > 0.0))
        throw ValidationError("geometry.element_spacing_factor: must be > 0");
    if (!(geometry.ris_element_size_factor > 0.0))
        throw ValidationError("geometry.ris_element_size_factor: must be > 0");
    if (link_budget.n_streams < 1 ||
        link_budget.n_streams > std::min(geometry.n_tx, geometry.n_rx))
        throw ValidationError("link_budget.n_streams: must lie in [1, min(n_tx, n_rx)]");
    if (!(link_budget.transmit_power_watts() > 0.0))
        throw ValidationError("link_budget.p_tx_watts: must be > 0");
    if (!(link_budget.noise_watts() > 0.0))
        throw ValidationError("link_budget.noise_power_w: must be > 0");
    if (!(link_budget.bandwidth_hz > 0.0))
        throw ValidationError("link_budget.bandwidth_hz: must be > 0");
    if (!(physics.carrier_frequency_hz > 0.0))
        throw ValidationError("physics.carrier_frequency_hz: must be > 0");
    if (physics.k_abs < 0.0) throw ValidationError("physics.k_abs: must be >= 0");
    if (!(physics.tx_gain > 0.0) || !(physics.rx_gain > 0.0))
        throw ValidationError("physics.tx_gain/rx_gain: must be > 0");
    if (!(physics.ris_amplitude > 0.0))
        throw ValidationError("physics.ris_amplitude: must be > 0");
    for (const auto* lc : {&physics.direct, &physics.tx_ris, &physics.ris_rx, &physics.ris_ris}) {
        if (lc->n_rays < 1) throw ValidationError("physics.*.n_rays: must be >= 1");
        if (lc->rician_factor < 0.0)
            throw ValidationError("physics.*.rician_factor: must be >= 0");
    }
    if (topology == Topology::multihop && geometry.panel_positions.empty())
        throw ValidationError("geometry.panel_positions: multihop needs at least one panel");
    if (algorithms.empty()) throw ValidationError("algorithms: must not be empty");

    // All node positions must be pairwise distinct.
    std::vector<Vec3> nodes{geometry.bs_position, geometry.user_position};
    nodes.insert(nodes.end(), geometry.panel_positions.begin(), geometry.panel_positions.end());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = i + 1; j < nodes.size(); ++j)
            if ((nodes[i] - nodes[j]).norm() == 0.0)
                throw ValidationError("geometry: node positions must be pairwise distinct");
    if (sweep) {
        const auto& names = sweep_parameter_names();
        if (std::find(names.begin(), names.end(), sweep->parameter) == names.end())
            throw ValidationError("sweep.parameter: unknown parameter '" + sweep->parameter +
                                  "'");
        if (sweep->values.empty()) throw ValidationError("sweep.values: must not be empty");
    }
}

// ----------------------------------------------------------------------
// Derived geometry and physics
// ----------------------------------------------------------------------

namespace detail {

inline ArrayGeometry make_array(int count, double spacing, double element_size,
                                const Vec3& center, const Vec3& facing) {
    ArrayGeometry g;
    const auto [p, q] = grid_from_count(count);
    g.rows_p = p;
    g.cols_q = q;
    g.spacing = spacing;
    g.element_width = element_size;
    g.element_height = element_size;
    g.center = center;
    g.orient_toward(facing);
    return g;
}

} // namespace detail

inline ArrayGeometry bs_array(const ScenarioConfig& cfg) {
    const double lambda = cfg.physics.wavelength();
    return detail::make_array(cfg.geometry.n_tx, cfg.geometry.element_spacing_factor * lambda,
                              0.0, cfg.geometry.bs_position, cfg.geometry.user_position);
}

inline ArrayGeometry user_array(const ScenarioConfig& cfg) {
    const double lambda = cfg.physics.wavelength();
    return detail::make_array(cfg.geometry.n_rx, cfg.geometry.element_spacing_factor * lambda,
                              0.0, cfg.geometry.user_position, cfg.geometry.bs_position);
}

// Parallel panels face the midpoint of BS and user; chained panels face the
// midpoint of their neighbors along the hop sequence.
inline ArrayGeometry panel_array(const ScenarioConfig& cfg, int panel) {
    const double lambda = cfg.physics.wavelength();
    const auto& gp = cfg.geometry;
    Vec3 facing;
    if (cfg.topology == Topology::parallel) {
        facing = 0.5 * (gp.bs_position + gp.user_position);
    } else {
        const Vec3 prev = panel == 0 ? gp.bs_position : gp.panel_positions[panel - 1];
        const Vec3 next = panel + 1 < static_cast<int>(gp.panel_positions.size())
                              ? gp.panel_positions[panel + 1]
                              : gp.user_position;
        facing = 0.5 * (prev + next);
    }
    return detail::make_array(gp.n_ris, gp.element_spacing_factor * lambda,
                              gp.ris_element_size_factor * lambda, gp.panel_positions[panel],
                              facing);
}

// Resolves the combined gain-aperture factor for one link class:
//   tx -> panel : G_tx * A_element
//   panel -> rx : G_rx * A_element
//   tx -> rx    : G_tx * (lambda^2 G_rx / 4 pi)      (antenna aperture)
//   panel chain : (4 pi A_element / lambda^2) * A_element
inline PropagationPhysics resolved_physics(const ScenarioConfig& cfg, LinkKind kind) {
    const double lambda = cfg.physics.wavelength();
    const double a_elem = std::pow(cfg.geometry.ris_element_size_factor * lambda, 2);
    PropagationPhysics p;
    p.carrier_frequency = cfg.physics.carrier_frequency_hz;
    p.k_abs = cfg.physics.k_abs;
    p.complex_ray_gain = cfg.physics.complex_ray_gain;

    const LinkClassConfig* lc = nullptr;
    switch (kind) {
        case LinkKind::tx_to_ris:
            lc = &cfg.physics.tx_ris;
            p.gain_times_aperture = cfg.physics.tx_gain * a_elem;
            break;
        case LinkKind::ris_to_rx:
            lc = &cfg.physics.ris_rx;
            p.gain_times_aperture = cfg.physics.rx_gain * a_elem;
            break;
        case LinkKind::tx_to_rx:
            lc = &cfg.physics.direct;
            p.gain_times_aperture =
                cfg.physics.tx_gain * (lambda * lambda * cfg.physics.rx_gain / (4.0 * kPi));
            break;
        case LinkKind::ris_to_ris:
            lc = &cfg.physics.ris_ris;
            p.gain_times_aperture = (4.0 * kPi * a_elem / (lambda * lambda)) * a_elem;
            break;
    }
    p.rician_factor = lc->rician_factor;
    p.pl_exp_los = lc->pl_exp_los;
    p.pl_exp_nlos = lc->pl_exp_nlos;
    p.n_rays = lc->n_rays;
    return p;
}

// ----------------------------------------------------------------------
// Scenario-level channel generation
// ----------------------------------------------------------------------

// Deterministic in (cfg, rng stream). Link draw order is part of the stream
// contract: direct link first, then panel links in panel order (tx side
// before rx side for parallel; hop order for chains).
inline ChannelSet generate_scenario_channels(const ScenarioConfig& cfg, RandomStream& rng) {
    const int n_panels = static_cast<int>(cfg.geometry.panel_positions.size());
    const ArrayGeometry bs = bs_array(cfg);
    const ArrayGeometry user = user_array(cfg);
    const double margin = cfg.physics.scatter_margin_factor;

    auto direct_matrix = [&]() -> CMat {
        if (cfg.physics.direct_blocked)
            return CMat::Zero(cfg.geometry.n_rx, cfg.geometry.n_tx);
        return generate_link(bs, user, resolved_physics(cfg, LinkKind::tx_to_rx), rng,
                             LinkKind::tx_to_rx, margin)
            .matrix;
    };

    if (cfg.topology == Topology::parallel) {
        ParallelChannels ch;
        ch.direct = direct_matrix();
        const auto phys_in = resolved_physics(cfg, LinkKind::tx_to_ris);
        const auto phys_out = resolved_physics(cfg, LinkKind::ris_to_rx);
        for (int i = 0; i < n_panels; ++i) {
            const ArrayGeometry panel = panel_array(cfg, i);
            ch.tx_to_ris.push_back(
                generate_link(bs, panel, phys_in, rng, LinkKind::tx_to_ris, margin).matrix);
            ch.ris_to_rx.push_back(
                generate_link(panel, user, phys_out, rng, LinkKind::ris_to_rx, margin).matrix);
        }
        return ch;
    }

    MultiHopChannels ch;
    ch.direct = direct_matrix();
    std::vector<ArrayGeometry> panels;
    panels.reserve(n_panels);
    for (int i = 0; i < n_panels; ++i) panels.push_back(panel_array(cfg, i));
    ch.hops.push_back(generate_link(bs, panels[0], resolved_physics(cfg, LinkKind::tx_to_ris),
                                    rng, LinkKind::tx_to_ris, margin)
                          .matrix);
    const auto phys_mid = resolved_physics(cfg, LinkKind::ris_to_ris);
    for (int i = 1; i < n_panels; ++i)
        ch.hops.push_back(
            generate_link(panels[i - 1], panels[i], phys_mid, rng, LinkKind::ris_to_ris, margin)
                .matrix);
    ch.hops.push_back(generate_link(panels.back(), user,
                                    resolved_physics(cfg, LinkKind::ris_to_rx), rng,
                                    LinkKind::ris_to_rx, margin)
                          .matrix);
    return ch;
}

} // namespace risopt
