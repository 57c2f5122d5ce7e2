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

#include <cmath>

#include "risopt/audit.hpp"
#include "risopt/objective.hpp"
#include "risopt/rng.hpp"

using namespace risopt;

namespace {

CMat scalar(double re) {
    CMat m(1, 1);
    m(0, 0) = re;
    return m;
}

// 1x1 system: direct = 0, one panel with unit links.
ParallelChannels scalar_parallel() {
    ParallelChannels ch;
    ch.direct = CMat::Zero(1, 1);
    ch.tx_to_ris = {scalar(1.0)};
    ch.ris_to_rx = {scalar(1.0)};
    return ch;
}

} // namespace

TEST_CASE("composite channel with identity phases is exactly the link product") {
    RandomStream rng(31);
    ParallelChannels ch;
    ch.direct = CMat::Zero(2, 3);
    ch.tx_to_ris = {random_complex_matrix(4, 3, rng)};
    ch.ris_to_rx = {random_complex_matrix(2, 4, rng)};
    const CVec ones = CVec::Ones(4);
    const CMat h = composite_channel(ChannelSet{ch}, ones);
    CHECK((h - ch.ris_to_rx[0] * ch.tx_to_ris[0]).norm() < 1e-14);
}

TEST_CASE("a global phase on the panel scales the composite channel") {
    RandomStream rng(32);
    ParallelChannels ch;
    ch.direct = CMat::Zero(2, 3);
    ch.tx_to_ris = {random_complex_matrix(4, 3, rng)};
    ch.ris_to_rx = {random_complex_matrix(2, 4, rng)};
    const cdouble rot = std::polar(1.0, 0.7);
    const CVec base = CVec::Ones(4);
    const CMat h0 = composite_channel(ChannelSet{ch}, base);
    const CMat h1 = composite_channel(ChannelSet{ch}, CVec(rot * base));
    CHECK((h1 - rot * h0).norm() < 1e-12);
}

TEST_CASE("single-panel chain equals the parallel topology structurally") {
    RandomStream rng(33);
    const CMat h_in = random_complex_matrix(4, 3, rng);
    const CMat h_out = random_complex_matrix(2, 4, rng);
    const CMat direct = random_complex_matrix(2, 3, rng);
    const CVec phases = random_unit_modulus(4, 1.0, rng);

    ParallelChannels par;
    par.direct = direct;
    par.tx_to_ris = {h_in};
    par.ris_to_rx = {h_out};
    MultiHopChannels hop;
    hop.direct = direct;
    hop.hops = {h_in, h_out};

    const CMat hp = composite_channel(ChannelSet{par}, phases);
    const CMat hm = composite_channel(ChannelSet{hop}, phases);
    CHECK((hp - hm).norm() < 1e-12 * std::max(1.0, hp.norm()));
}

TEST_CASE("rate is zero for a zero precoder and matches the scalar closed form") {
    const ChannelSet ch{scalar_parallel()};
    const LinkBudget lb{1.0, 1.0};
    CHECK(achievable_rate(composite_channel(ch, CVec::Ones(1)), CMat::Zero(1, 1), lb) == 0.0);

    // (rho/P_n) |h f|^2 = 3  ->  log2(4) = 2
    const CMat h = scalar(std::sqrt(3.0));
    CHECK(achievable_rate(h, scalar(1.0), lb) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("objective equals minus rate times ln 2") {
    RandomStream rng(34);
    ParallelChannels ch;
    ch.direct = random_complex_matrix(2, 3, rng);
    ch.tx_to_ris = {random_complex_matrix(4, 3, rng)};
    ch.ris_to_rx = {random_complex_matrix(2, 4, rng)};
    const ChannelSet chs{ch};
    const LinkBudget lb{1.3, 0.7};
    const CVec phases = random_unit_modulus(4, 1.0, rng);
    CMat f = random_complex_matrix(3, 2, rng);
    f *= std::sqrt(2.0) / f.norm();

    const double fval = objective_f(chs, phases, f, lb);
    const double rate = achievable_rate(composite_channel(chs, phases), f, lb);
    CHECK(fval == doctest::Approx(-rate * std::log(2.0)).epsilon(1e-12));
    CHECK(fval <= 0.0);
}

TEST_CASE("scalar gradient values from direct substitution") {
    const ChannelSet ch{scalar_parallel()};
    const LinkBudget lb{1.0, 1.0};
    const CVec phases = CVec::Ones(1);
    const CMat f = scalar(1.0);

    const CMat gf = grad_precoder(ch, phases, f, lb);
    CHECK(std::abs(gf(0, 0) - cdouble(-0.5, 0)) < 1e-12);

    const CVec gp = grad_phases_parallel(ch, phases, f, lb, 0);
    CHECK(std::abs(gp(0) - cdouble(-0.5, 0)) < 1e-12);
}

TEST_CASE("gradient with a zero precoder is zero") {
    const ChannelSet ch{scalar_parallel()};
    const LinkBudget lb{1.0, 1.0};
    const CMat gf = grad_precoder(ch, CVec::Ones(1), CMat::Zero(1, 1), lb);
    CHECK(gf.norm() == 0.0);
}

TEST_CASE("panel with a dead receive link has zero phase gradient") {
    RandomStream rng(35);
    ParallelChannels ch;
    ch.direct = random_complex_matrix(2, 3, rng);
    ch.tx_to_ris = {random_complex_matrix(4, 3, rng), random_complex_matrix(4, 3, rng)};
    ch.ris_to_rx = {random_complex_matrix(2, 4, rng), CMat::Zero(2, 4)};
    const ChannelSet chs{ch};
    const CVec phases = random_unit_modulus(8, 1.0, rng);
    CMat f = random_complex_matrix(3, 2, rng);
    f *= 1.0 / f.norm();
    const CVec g = grad_phases_parallel(chs, phases, f, LinkBudget{1, 1}, 1);
    CHECK(g.norm() == 0.0);
}

TEST_CASE("middle chain panel with a dead final hop has zero gradient") {
    RandomStream rng(36);
    MultiHopChannels ch;
    ch.direct = CMat::Zero(2, 3);
    ch.hops = {random_complex_matrix(4, 3, rng), random_complex_matrix(4, 4, rng),
               CMat::Zero(2, 4)};
    const ChannelSet chs{ch};
    const CVec phases = random_unit_modulus(8, 1.0, rng);
    CMat f = random_complex_matrix(3, 2, rng);
    f *= 1.0 / f.norm();
    CHECK(grad_phases_multihop(chs, phases, f, LinkBudget{1, 1}, 0).norm() == 0.0);
    CHECK(grad_phases_multihop(chs, phases, f, LinkBudget{1, 1}, 1).norm() == 0.0);
}

TEST_CASE("topology-specific gradients reject the wrong channel set") {
    const ChannelSet par{scalar_parallel()};
    MultiHopChannels mh;
    mh.direct = CMat::Zero(1, 1);
    mh.hops = {scalar(1.0), scalar(1.0)};
    const ChannelSet hop{mh};
    const LinkBudget lb{1, 1};
    CHECK_THROWS_AS(grad_phases_multihop(par, CVec::Ones(1), scalar(1.0), lb, 0), WrongTopology);
    CHECK_THROWS_AS(grad_phases_parallel(hop, CVec::Ones(1), scalar(1.0), lb, 0), WrongTopology);
}

TEST_CASE("single-panel chain gradients equal the parallel ones") {
    RandomStream rng(37);
    for (int rep = 0; rep < 50; ++rep) {
        const CMat h_in = random_complex_matrix(4, 3, rng);
        const CMat h_out = random_complex_matrix(2, 4, rng);
        const CMat direct = random_complex_matrix(2, 3, rng);
        const CVec phases = random_unit_modulus(4, 1.0, rng);
        CMat f = random_complex_matrix(3, 2, rng);
        f *= std::sqrt(2.0) * rng.uniform() / f.norm();
        const LinkBudget lb{rng.uniform(0.5, 2.0), 1.0};

        ParallelChannels par;
        par.direct = direct;
        par.tx_to_ris = {h_in};
        par.ris_to_rx = {h_out};
        MultiHopChannels hop;
        hop.direct = direct;
        hop.hops = {h_in, h_out};
        const ChannelSet cp{par}, cm{hop};

        const double fp = objective_f(cp, phases, f, lb);
        const double fm = objective_f(cm, phases, f, lb);
        CHECK(fp == doctest::Approx(fm).epsilon(1e-12));

        const CMat gfp = grad_precoder(cp, phases, f, lb);
        const CMat gfm = grad_precoder(cm, phases, f, lb);
        CHECK((gfp - gfm).norm() <= 1e-12 * std::max(1.0, gfp.norm()));

        const CVec gpp = grad_phases_parallel(cp, phases, f, lb, 0);
        const CVec gpm = grad_phases_multihop(cm, phases, f, lb, 0);
        CHECK((gpp - gpm).norm() <= 1e-12 * std::max(1.0, gpp.norm()));
    }
}

TEST_CASE("joint gradient stacks the per-panel gradients in order") {
    RandomStream rng(38);
    ParallelChannels ch;
    ch.direct = random_complex_matrix(2, 3, rng);
    for (int i = 0; i < 2; ++i) {
        ch.tx_to_ris.push_back(random_complex_matrix(4, 3, rng));
        ch.ris_to_rx.push_back(random_complex_matrix(2, 4, rng));
    }
    const ChannelSet chs{ch};
    const CVec phases = random_unit_modulus(8, 1.0, rng);
    CMat f = random_complex_matrix(3, 2, rng);
    f *= 1.0 / f.norm();
    const LinkBudget lb{1, 1};

    const JointGradient g = grad_joint(chs, phases, f, lb);
    CHECK(g.phases.size() == 8);
    const CVec g0 = grad_phases_parallel(chs, phases, f, lb, 0);
    const CVec g1 = grad_phases_parallel(chs, phases, f, lb, 1);
    CHECK((g.phases.segment(0, 4) - g0).norm() < 1e-12);
    CHECK((g.phases.segment(4, 4) - g1).norm() < 1e-12);
    // Pythagorean stacking
    CHECK(g.phases.squaredNorm() ==
          doctest::Approx(g0.squaredNorm() + g1.squaredNorm()).epsilon(1e-12));
    CHECK((g.precoder - grad_precoder(chs, phases, f, lb)).norm() < 1e-12);

    // multihop stacking too
    MultiHopChannels mh;
    mh.direct = CMat::Zero(2, 3);
    mh.hops = {random_complex_matrix(4, 3, rng), random_complex_matrix(4, 4, rng),
               random_complex_matrix(2, 4, rng)};
    const ChannelSet chm{mh};
    const JointGradient gm = grad_joint(chm, phases, f, lb);
    CHECK((gm.phases.segment(0, 4) - grad_phases_multihop(chm, phases, f, lb, 0)).norm() < 1e-12);
    CHECK((gm.phases.segment(4, 4) - grad_phases_multihop(chm, phases, f, lb, 1)).norm() < 1e-12);
}

TEST_CASE("gradients agree with central finite differences") {
    RandomStream rng(39);
    double worst = 0.0;
    for (int topo = 0; topo < 2; ++topo) {
        for (int rep = 0; rep < 15; ++rep) {
            const RandomInstance inst = random_instance(rng, topo == 1);
            const int ntx = n_tx(inst.channels);
            const CMat df = random_complex_matrix(ntx, inst.n_streams, rng);
            const CVec dp = random_complex_matrix(phase_count(inst.channels), 1, rng).col(0);
            const auto check = directional_gradient_check(inst.channels, inst.budget, inst.phases,
                                                          inst.precoder, df, dp);
            worst = std::max(worst, check.rel_error);
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("rate is nondecreasing in the transmit power") {
    RandomStream rng(40);
    ParallelChannels ch;
    ch.direct = random_complex_matrix(2, 3, rng);
    ch.tx_to_ris = {random_complex_matrix(4, 3, rng)};
    ch.ris_to_rx = {random_complex_matrix(2, 4, rng)};
    const CMat h = composite_channel(ChannelSet{ch}, random_unit_modulus(4, 1.0, rng));
    CMat f = random_complex_matrix(3, 2, rng);
    f *= std::sqrt(2.0) / f.norm();

    double prev = -1.0;
    for (double rho : {0.5, 1.0, 2.0}) {
        const double r = achievable_rate(h, f, LinkBudget{rho, 1.0});
        CHECK(r >= prev);
        prev = r;
    }
}

TEST_CASE("dimension mismatches are rejected") {
    ParallelChannels ch;
    ch.direct = CMat::Zero(2, 3);
    ch.tx_to_ris = {CMat::Zero(4, 3)};
    ch.ris_to_rx = {CMat::Zero(2, 5)}; // wrong inner dimension
    CHECK_THROWS_AS(composite_channel(ChannelSet{ch}, CVec::Ones(4)), DimensionMismatch);

    ParallelChannels ok;
    ok.direct = CMat::Zero(2, 3);
    ok.tx_to_ris = {CMat::Zero(4, 3)};
    ok.ris_to_rx = {CMat::Zero(2, 4)};
    CHECK_THROWS_AS(composite_channel(ChannelSet{ok}, CVec::Ones(3)), DimensionMismatch);
}
