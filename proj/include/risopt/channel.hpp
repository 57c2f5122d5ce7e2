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

#include <cmath>
#include <span>
#include <vector>

#include "risopt/core.hpp"
#include "risopt/geometry.hpp"
#include "risopt/rng.hpp"

namespace risopt {

// Clustered geometric channel generation. Links switch between an exact
// per-element spherical model and a planar (far-field) cluster model at the
// Fraunhofer distance of the larger endpoint array.

// Physics of one link, fully resolved: gain_times_aperture already combines
// the radiating end's gain with the receiving end's effective aperture, so
// the per-path amplitude is sqrt(gain_times_aperture / (4*pi*d^2)).
struct PropagationPhysics {
    double carrier_frequency = 28e9; // f [Hz]
    double k_abs = 0.0;              // molecular absorption [1/m]
    double pl_exp_los = 2.0;         // path loss exponent, direct path
    double pl_exp_nlos = 2.0;        // path loss exponent, scattered paths
    double rician_factor = 0.0;      // power ratio of the two components
    int n_rays = 1;
    double gain_times_aperture = 1.0; // G * A [m^2]
    bool complex_ray_gain = false;    // spherical model: carry full complex gain

    double wavelength() const { return kSpeedOfLight / carrier_frequency; }

    void validate() const {
        if (!(carrier_frequency > 0.0)) throw ValidationError("carrier_frequency must be > 0");
        if (k_abs < 0.0) throw ValidationError("k_abs must be >= 0");
        if (n_rays < 1) throw ValidationError("n_rays must be >= 1");
        if (!(gain_times_aperture > 0.0))
            throw ValidationError("gains and apertures must be > 0");
        if (rician_factor < 0.0) throw ValidationError("rician_factor must be >= 0");
    }
};

enum class WaveModel { spherical, planar };

enum class LinkKind { tx_to_rx, tx_to_ris, ris_to_rx, ris_to_ris };

struct LinkChannel {
    CMat matrix;
    WaveModel model_used = WaveModel::planar;
    LinkKind kind = LinkKind::tx_to_rx;
};

// ----------------------------------------------------------------------
// Spherical (near-field) model
// ----------------------------------------------------------------------

// Exact line-of-sight entries: entry (n, m) connects transmit element m to
// receive element n over their true distance d with amplitude
// sqrt(GA / (4 pi d^2)) * exp(-k_abs d) and phase -2 pi d / lambda.
inline CMat los_spherical(const ArrayGeometry& tx, const ArrayGeometry& rx,
                          const PropagationPhysics& phys) {
    const double lambda = phys.wavelength();
    const double wavenumber = 2.0 * kPi / lambda;
    CMat h(rx.count(), tx.count());
    for (int n = 0; n < rx.count(); ++n) {
        const Vec3 pr = rx.element_position(n);
        for (int m = 0; m < tx.count(); ++m) {
            const double d = (pr - tx.element_position(m)).norm();
            if (d <= 0.0) throw CoincidentElements("transmit/receive elements coincide");
            const double amp =
                std::sqrt(phys.gain_times_aperture / (4.0 * kPi * d * d)) *
                std::exp(-phys.k_abs * d);
            const double phase = -wavenumber * d;
            h(n, m) = amp * cdouble(std::cos(phase), std::sin(phase));
        }
    }
    return h;
}

// One scattered path: a single bounce point shared by all element pairs and
// a complex gain with E[|gain|^2] = 1 / n_rays so the per-entry gains sum to
// unit expected power.
struct ScatterRay {
    Vec3 point;
    cdouble gain;
};

// Axis-aligned sampling volume for bounce points, spanning the two endpoint
// centers inflated by margin_factor times their separation on every axis.
struct ScatterVolume {
    Vec3 lo, hi;

    static ScatterVolume between(const Vec3& a, const Vec3& b, double margin_factor = 0.5) {
        const double margin = margin_factor * (b - a).norm();
        ScatterVolume v;
        v.lo = a.cwiseMin(b).array() - margin;
        v.hi = a.cwiseMax(b).array() + margin;
        return v;
    }
};

// Draw order per ray: x, y, z, then the complex gain (two normals).
inline std::vector<ScatterRay> draw_scatter_rays(int n_rays, const ScatterVolume& vol,
                                                 RandomStream& rng) {
    std::vector<ScatterRay> rays(static_cast<std::size_t>(n_rays));
    const double inv = 1.0 / static_cast<double>(n_rays);
    for (auto& ray : rays) {
        for (int axis = 0; axis < 3; ++axis)
            ray.point(axis) = rng.uniform(vol.lo(axis), vol.hi(axis));
        ray.gain = rng.complex_normal(inv);
    }
    return rays;
}

// Scattered entries with per-element-pair bounce distances. The Rician
// factor scales the total scattered power by 1/K; callers handle K = 0 by
// substituting K = 1 (no line-of-sight, unit scattered power). As typeset in
// the underlying model the ray gain enters through its magnitude with the
// phase carried wholly by the distance term; set complex_ray_gain to keep
// the gain's own phase as well.
inline CMat nlos_spherical(const ArrayGeometry& tx, const ArrayGeometry& rx,
                           const PropagationPhysics& phys, std::span<const ScatterRay> rays) {
    if (!(phys.rician_factor > 0.0))
        throw InvalidRicianFactor("nlos_spherical needs rician_factor > 0");
    const double lambda = phys.wavelength();
    const double wavenumber = 2.0 * kPi / lambda;
    const double scale = 1.0 / std::sqrt(phys.rician_factor);

    CMat h = CMat::Zero(rx.count(), tx.count());
    for (int n = 0; n < rx.count(); ++n) {
        const Vec3 pr = rx.element_position(n);
        for (int m = 0; m < tx.count(); ++m) {
            const Vec3 pt = tx.element_position(m);
            cdouble acc(0.0, 0.0);
            for (const auto& ray : rays) {
                const double d = (ray.point - pt).norm() + (pr - ray.point).norm();
                if (d <= 0.0) throw CoincidentElements("bounce point coincides with elements");
                const double amp =
                    std::sqrt(phys.gain_times_aperture / (4.0 * kPi * d * d)) *
                    std::exp(-phys.k_abs * d);
                const cdouble ph(std::cos(-wavenumber * d), std::sin(-wavenumber * d));
                const cdouble g = phys.complex_ray_gain ? ray.gain : cdouble(std::abs(ray.gain), 0.0);
                acc += amp * g * ph;
            }
            h(n, m) = scale * acc;
        }
    }
    return h;
}

// ----------------------------------------------------------------------
// Planar (far-field) cluster model
// ----------------------------------------------------------------------

struct ClusterRay {
    double aod_az = 0.0, aod_el = 0.0; // departure angles at the tx array
    double aoa_az = 0.0, aoa_el = 0.0; // arrival angles at the rx array
    cdouble gain{0.0, 0.0};            // E[|gain|^2] = 1 / n_rays
};

// Draw order per ray: aod_az, aod_el, aoa_az, aoa_el, gain (two normals).
// Azimuths are uniform over (-pi, pi), elevations over (-pi/2, pi/2).
inline std::vector<ClusterRay> draw_cluster_rays(int n_rays, RandomStream& rng) {
    std::vector<ClusterRay> rays(static_cast<std::size_t>(n_rays));
    const double inv = 1.0 / static_cast<double>(n_rays);
    for (auto& ray : rays) {
        ray.aod_az = rng.uniform(-kPi, kPi);
        ray.aod_el = rng.uniform(-0.5 * kPi, 0.5 * kPi);
        ray.aoa_az = rng.uniform(-kPi, kPi);
        ray.aoa_el = rng.uniform(-0.5 * kPi, 0.5 * kPi);
        ray.gain = rng.complex_normal(inv);
    }
    return rays;
}

// Distance-dependent power scale: GA / (4 pi d^gamma) * exp(-k_abs d),
// evaluated at the center-to-center distance.
inline double path_loss(const PropagationPhysics& phys, double distance, bool los) {
    if (!(distance > 0.0)) throw CoincidentElements("path_loss: distance must be > 0");
    const double gamma = los ? phys.pl_exp_los : phys.pl_exp_nlos;
    return phys.gain_times_aperture / (4.0 * kPi * std::pow(distance, gamma)) *
           std::exp(-phys.k_abs * distance);
}

// Sum of rank-one ray terms sqrt(beta_nlos / K) * gain * a_rx a_tx^H, plus an
// unscaled line-of-sight term sqrt(beta_los) * a_rx a_tx^H at the geometric
// angles when include_los is set (the K = 0 convention is the caller's job,
// as for the spherical model).
inline CMat planar_cluster_channel(const ArrayGeometry& tx, const ArrayGeometry& rx,
                                   const PropagationPhysics& phys,
                                   std::span<const ClusterRay> rays, bool include_los) {
    if (!(phys.rician_factor > 0.0))
        throw InvalidRicianFactor("planar_cluster_channel needs rician_factor > 0");
    const double lambda = phys.wavelength();
    const double dist = (rx.center - tx.center).norm();

    const double nlos_scale = std::sqrt(path_loss(phys, dist, false) / phys.rician_factor);
    CMat h = CMat::Zero(rx.count(), tx.count());
    for (const auto& ray : rays) {
        const CVec a_rx = steering_vector(ray.aoa_az, ray.aoa_el, rx, lambda);
        const CVec a_tx = steering_vector(ray.aod_az, ray.aod_el, tx, lambda);
        h.noalias() += (nlos_scale * ray.gain) * (a_rx * a_tx.adjoint());
    }
    if (include_los) {
        const auto [az_d, el_d] = direction_angles(tx, rx.center);
        const auto [az_a, el_a] = direction_angles(rx, tx.center);
        const CVec a_rx = steering_vector(az_a, el_a, rx, lambda);
        const CVec a_tx = steering_vector(az_d, el_d, tx, lambda);
        h.noalias() += std::sqrt(path_loss(phys, dist, true)) * (a_rx * a_tx.adjoint());
    }
    return h;
}

// ----------------------------------------------------------------------
// Link composition
// ----------------------------------------------------------------------

// Spherical below the larger endpoint Fraunhofer distance, planar at or
// above it. A zero Rician factor means no line-of-sight component and unit
// scattered-power scaling.
inline LinkChannel generate_link(const ArrayGeometry& tx, const ArrayGeometry& rx,
                                 const PropagationPhysics& phys, RandomStream& rng,
                                 LinkKind kind = LinkKind::tx_to_rx,
                                 double scatter_margin_factor = 0.5) {
    phys.validate();
    const double lambda = phys.wavelength();
    const double dist = (rx.center - tx.center).norm();
    if (dist <= 0.0) throw CoincidentElements("link endpoints coincide");

    double df = 0.0;
    if (tx.extent() > 0.0) df = std::max(df, fraunhofer_distance(tx.extent(), lambda));
    if (rx.extent() > 0.0) df = std::max(df, fraunhofer_distance(rx.extent(), lambda));
    const bool spherical = dist < df;

    const bool has_los = phys.rician_factor > 0.0;
    PropagationPhysics nlos_phys = phys;
    if (!has_los) nlos_phys.rician_factor = 1.0;

    LinkChannel link;
    link.kind = kind;
    link.model_used = spherical ? WaveModel::spherical : WaveModel::planar;
    if (spherical) {
        const auto vol = ScatterVolume::between(tx.center, rx.center, scatter_margin_factor);
        const auto rays = draw_scatter_rays(phys.n_rays, vol, rng);
        link.matrix = nlos_spherical(tx, rx, nlos_phys, rays);
        if (has_los) link.matrix += los_spherical(tx, rx, phys);
    } else {
        const auto rays = draw_cluster_rays(phys.n_rays, rng);
        link.matrix = planar_cluster_channel(tx, rx, nlos_phys, rays, has_los);
    }
    if (!link.matrix.allFinite())
        throw Error("generated link contains non-finite entries");
    return link;
}

} // namespace risopt
