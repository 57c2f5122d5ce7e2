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
#include <utility>

#include "risopt/core.hpp"

namespace risopt {

// Near-square factorization p x q (p <= q, p*q = n) used when an element
// count is given without an explicit grid.
inline std::pair<int, int> grid_from_count(int n) {
    if (n < 1) throw ValidationError("array element count must be >= 1");
    int p = static_cast<int>(std::sqrt(static_cast<double>(n)));
    while (p > 1 && n % p != 0) --p;
    return {p, n / p};
}

// Uniform planar array. Elements are indexed k = p * cols_q + q with
// p in [0, rows_p) stepping along axis_p and q in [0, cols_q) along axis_q;
// the same (p, q) convention is used by steering_vector so near-field and
// far-field entries agree on element ordering.
struct ArrayGeometry {
    int rows_p = 1;
    int cols_q = 1;
    double spacing = 0.0;        // center-to-center element spacing [m]
    double element_width = 0.0;  // physical element size along axis_p [m]
    double element_height = 0.0; // physical element size along axis_q [m]
    Vec3 center = Vec3::Zero();
    Vec3 normal = Vec3::UnitX();
    Vec3 axis_p = Vec3::UnitY();
    Vec3 axis_q = Vec3::UnitZ();

    int count() const { return rows_p * cols_q; }

    Vec3 element_position(int k) const {
        const int p = k / cols_q;
        const int q = k % cols_q;
        const double op = (p - 0.5 * (rows_p - 1)) * spacing;
        const double oq = (q - 0.5 * (cols_q - 1)) * spacing;
        return center + op * axis_p + oq * axis_q;
    }

    // Maximum overall dimension: diagonal across the element centers plus
    // the physical element size (zero for point antennas).
    double extent() const {
        const double dp = (rows_p - 1) * spacing + element_width;
        const double dq = (cols_q - 1) * spacing + element_height;
        return std::hypot(dp, dq);
    }

    // Area of a single element (reflective surfaces only).
    double element_area() const { return element_width * element_height; }

    // Points the boresight at `target` and rebuilds a deterministic in-plane
    // basis (axis_p roughly horizontal, axis_q roughly vertical).
    void orient_toward(const Vec3& target) {
        const Vec3 d = target - center;
        const double n = d.norm();
        if (n == 0.0) throw ValidationError("array cannot be oriented toward its own center");
        normal = d / n;
        const Vec3 up = std::abs(normal.z()) < 0.99 ? Vec3::UnitZ() : Vec3::UnitX();
        axis_p = up.cross(normal).normalized();
        axis_q = normal.cross(axis_p);
    }
};

// Boundary between spherical and planar wavefront modeling: 2 L^2 / lambda.
inline double fraunhofer_distance(double array_extent, double wavelength) {
    if (!(array_extent > 0.0) || !(wavelength > 0.0))
        throw ValidationError("fraunhofer_distance: extent and wavelength must be > 0");
    return 2.0 * array_extent * array_extent / wavelength;
}

// Plane-wave array response at (azimuth, elevation). Entry (p, q) carries
// phase (2*pi/lambda) * spacing * (p sin(az) sin(el) + q cos(el)); every
// entry is unit modulus, with (p, q) = (0, 0) as phase reference.
inline CVec steering_vector(double az, double el, const ArrayGeometry& g, double wavelength) {
    const double k = 2.0 * kPi / wavelength * g.spacing;
    const double u = std::sin(az) * std::sin(el);
    const double w = std::cos(el);
    CVec v(g.count());
    for (int idx = 0; idx < g.count(); ++idx) {
        const int p = idx / g.cols_q;
        const int q = idx % g.cols_q;
        const double phase = k * (p * u + q * w);
        v(idx) = cdouble(std::cos(phase), std::sin(phase));
    }
    return v;
}

// Azimuth/elevation of `point` as seen from the array, in the local frame
// used by steering_vector: elevation from axis_q, azimuth from the normal in
// the normal/axis_p plane. steering_vector(az, el, ...) then reproduces the
// exact plane-wave phases for a wave arriving from that direction.
inline std::pair<double, double> direction_angles(const ArrayGeometry& g, const Vec3& point) {
    const Vec3 d = (point - g.center).normalized();
    const double yp = d.dot(g.axis_p);
    const double zq = std::clamp(d.dot(g.axis_q), -1.0, 1.0);
    const double xn = d.dot(g.normal);
    return {std::atan2(yp, xn), std::acos(zq)};
}

} // namespace risopt
