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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "risopt/numerics.hpp"
#include "risopt/rng.hpp"

using namespace risopt;

namespace {

// Independent oracle: cofactor-expansion determinant, fine for n <= 4.
cdouble cofactor_det(const CMat& a) {
    const Eigen::Index n = a.rows();
    if (n == 1) return a(0, 0);
    cdouble det(0.0, 0.0);
    double sign = 1.0;
    for (Eigen::Index col = 0; col < n; ++col) {
        CMat minor(n - 1, n - 1);
        for (Eigen::Index r = 1; r < n; ++r) {
            Eigen::Index mc = 0;
            for (Eigen::Index c = 0; c < n; ++c) {
                if (c == col) continue;
                minor(r - 1, mc++) = a(r, c);
            }
        }
        det += sign * a(0, col) * cofactor_det(minor);
        sign = -sign;
    }
    return det;
}

CMat random_hpd(int n, RandomStream& rng) {
    const CMat b = random_complex_matrix(n, n, rng);
    return CMat::Identity(n, n) + b.adjoint() * b;
}

} // namespace

TEST_CASE("logdet of the identity is zero") {
    CHECK(logdet_hpd(CMat::Identity(3, 3)) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("logdet of a diagonal matrix is the sum of logs") {
    CMat a = CMat::Zero(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = 2.0;
    CHECK(logdet_hpd(a) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("logdet matches an eigenvalue oracle on random HPD matrices") {
    RandomStream rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const CMat a = random_hpd(4, rng);
        Eigen::SelfAdjointEigenSolver<CMat> es(a);
        const double expected = es.eigenvalues().array().log().sum();
        CHECK(logdet_hpd(a) == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("logdet rejects non-Hermitian and non-positive-definite input") {
    CMat a(2, 2);
    a << cdouble(1, 0), cdouble(2, 1), cdouble(0, 0), cdouble(1, 0);
    CHECK_THROWS_AS(logdet_hpd(a), NotHermitian);

    CMat neg = CMat::Identity(2, 2);
    neg(1, 1) = -1.0;
    CHECK_THROWS_AS(logdet_hpd(neg), NotPositiveDefinite);
}

TEST_CASE("exp(logdet) equals the cofactor determinant for sizes up to 4") {
    RandomStream rng(12);
    for (int n = 2; n <= 4; ++n) {
        for (int rep = 0; rep < 10; ++rep) {
            const CMat a = random_hpd(n, rng);
            const double det = cofactor_det(a).real();
            CHECK(std::exp(logdet_hpd(a)) == doctest::Approx(det).epsilon(1e-9));
        }
    }
}

TEST_CASE("hpd_inverse on trivial matrices") {
    CHECK((hpd_inverse(CMat::Identity(3, 3)) - CMat::Identity(3, 3)).norm() < 1e-14);
    CMat d = CMat::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 4.0;
    const CMat inv = hpd_inverse(d);
    CHECK(std::abs(inv(0, 0) - cdouble(0.5, 0)) < 1e-14);
    CHECK(std::abs(inv(1, 1) - cdouble(0.25, 0)) < 1e-14);
}

TEST_CASE("hpd_inverse multiplies back to the identity") {
    RandomStream rng(13);
    for (int rep = 0; rep < 10; ++rep) {
        const CMat a = random_hpd(3, rng);
        const CMat prod = a * hpd_inverse(a);
        CHECK((prod - CMat::Identity(3, 3)).norm() < 1e-9);
    }
}

TEST_CASE("spectral norm of simple matrices") {
    CMat d = CMat::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    CHECK(spectral_norm(d) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(spectral_norm(CMat::Zero(3, 2)) == 0.0);
}

TEST_CASE("spectral norm matches a dense SVD oracle") {
    RandomStream rng(14);
    for (int rep = 0; rep < 20; ++rep) {
        const CMat a = random_complex_matrix(5, 3, rng);
        Eigen::JacobiSVD<CMat> svd(a);
        const double expected = svd.singularValues()(0);
        CHECK(spectral_norm(a, 1e-12) == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("spectral norm survives an all-ones start in the null space") {
    // ones is in the null space of this row, so the power iteration cannot
    // make progress and the SVD fallback must kick in.
    CMat a(1, 2);
    a << cdouble(1, 0), cdouble(-1, 0);
    CHECK(spectral_norm(a) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("norm inequalities hold on random matrices") {
    RandomStream rng(15);
    for (int rep = 0; rep < 25; ++rep) {
        const CMat a = random_complex_matrix(4, 3, rng);
        const CMat b = random_complex_matrix(3, 5, rng);
        const double sa = spectral_norm(a);
        const double sb = spectral_norm(b);
        const double slack = 1e-9;
        // submultiplicativity
        CHECK(spectral_norm(a * b) <= sa * sb + slack);
        // spectral <= Frobenius
        CHECK(sa <= a.norm() + slack);
        // mixed product bound
        CHECK((a * b).norm() <= sa * b.norm() + slack);
    }
}
