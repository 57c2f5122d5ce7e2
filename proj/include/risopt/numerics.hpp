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

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <cmath>

#include "risopt/core.hpp"

namespace risopt {

// Complex-matrix kernels shared by every other module. All results are double
// precision; all functions are pure and safe to call concurrently.

namespace detail {

// Hermitian within relative tolerance. Gradient/objective formulas produce
// analytically Hermitian matrices polluted by roundoff, hence the tolerance.
inline void require_hermitian(const CMat& a, double rel_tol = 1e-10) {
    if (a.rows() != a.cols())
        throw NotHermitian("matrix is not square: " + std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()));
    const double asym = (a - a.adjoint()).norm();
    if (asym > rel_tol * std::max(a.norm(), 1.0))
        throw NotHermitian("matrix is not Hermitian (asymmetry " + std::to_string(asym) + ")");
}

inline Eigen::LLT<CMat> hpd_factorize(const CMat& a) {
    require_hermitian(a);
    // Symmetrize before factorizing so roundoff asymmetry cannot leak into
    // the pivots.
    const CMat sym = 0.5 * (a + a.adjoint());
    Eigen::LLT<CMat> llt(sym);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("Cholesky factorization failed: non-positive pivot");
    return llt;
}

inline double svd_largest_singular_value(const CMat& a) {
    if (a.rows() >= 32 && a.cols() >= 32) {
        Eigen::BDCSVD<CMat> svd(a);
        return svd.singularValues()(0);
    }
    Eigen::JacobiSVD<CMat> svd(a);
    return svd.singularValues()(0);
}

} // namespace detail

// ln det(A) for Hermitian positive-definite A, via Cholesky.
inline double logdet_hpd(const CMat& a) {
    const auto llt = detail::hpd_factorize(a);
    return 2.0 * llt.matrixLLT().diagonal().real().array().log().sum();
}

// Inverse of a Hermitian positive-definite matrix. Intended for the small
// (stream-count sized) matrices appearing in the objective; never call this
// on transmit-array-sized operators.
inline CMat hpd_inverse(const CMat& a) {
    const auto llt = detail::hpd_factorize(a);
    return llt.solve(CMat::Identity(a.rows(), a.cols()));
}

// Largest singular value, by power iteration on A^H A with a deterministic
// all-ones start vector (bit-reproducible runs). Falls back to a full SVD if
// the iteration cap is hit or the start vector lies in the null space.
inline double spectral_norm(const CMat& a, double tol = 1e-10) {
    if (a.rows() == 0 || a.cols() == 0)
        throw DimensionMismatch("spectral_norm: empty matrix");
    if (!(tol > 0.0)) throw Error("spectral_norm: tol must be > 0");
    if (a.norm() == 0.0) return 0.0;

    constexpr int kMaxIterations = 10000;
    CVec v = CVec::Ones(a.cols());
    v /= v.norm();
    double sigma = 0.0;
    for (int it = 0; it < kMaxIterations; ++it) {
        const CVec w = a * v;
        const double s = w.norm();
        if (s == 0.0) break; // start vector in the null space
        const CVec u = a.adjoint() * w;
        const double un = u.norm();
        if (un == 0.0) break;
        v = u / un;
        const double prev = sigma;
        sigma = s;
        if (it > 0 && std::abs(sigma - prev) <= tol * sigma) return sigma;
    }
    return detail::svd_largest_singular_value(a);
}

} // namespace risopt
