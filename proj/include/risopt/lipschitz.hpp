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
#include <vector>

#include "risopt/core.hpp"
#include "risopt/numerics.hpp"
#include "risopt/objective.hpp"
#include "risopt/rng.hpp"

namespace risopt {

// Closed-form bound on the joint gradient's Lipschitz constant over the
// feasible set. Step sizes below 1/L guarantee monotone descent of the
// optimizer. The intermediates are kept so the recombination can be audited.

struct LipschitzBound {
    double L = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double e = 0.0; // parallel topology only
    double zeta = 0.0;
    int panels = 0;
    bool multihop = false;
    std::vector<double> singular_values; // the largest singular values used

    // Re-applies the closed form to the stored intermediates.
    double recombine() const {
        if (multihop) {
            const double np = static_cast<double>(panels);
            return std::sqrt((np + 1.0) *
                             std::max(b * b + np * c * c, c * c + np * d * d));
        }
        return std::sqrt(std::max(b * b + b * c + d * d + d * e, c * c + b * c + e * e + d * e));
    }
};

// Parallel topology. The cross terms use the largest singular values of the
// horizontally / vertically concatenated panel link matrices, which bound
// the stacked single-bounce operator tighter than per-panel sums would.
inline LipschitzBound lipschitz_parallel(const ParallelChannels& ch, const LinkBudget& lb,
                                         int n_streams, double amplitude,
                                         double sv_tol = 1e-10) {
    const double s = lb.snr_scale();
    const double ns = static_cast<double>(n_streams);
    const int np = ch.n_panels();

    const double sv_direct = spectral_norm(ch.direct, sv_tol);
    double panel_sum = 0.0;
    std::vector<double> svs{sv_direct};
    for (int i = 0; i < np; ++i) {
        const double sv_in = spectral_norm(ch.tx_to_ris[i], sv_tol);
        const double sv_out = spectral_norm(ch.ris_to_rx[i], sv_tol);
        panel_sum += sv_in * sv_out;
        svs.push_back(sv_in);
        svs.push_back(sv_out);
    }

    // Concatenations: all panel->rx blocks side by side, all tx->panel
    // blocks stacked.
    double sv_concat_out = 0.0;
    double sv_concat_in = 0.0;
    if (np > 0) {
        const int m = ch.n_ris();
        CMat concat_out(ch.n_rx(), np * m);
        CMat concat_in(np * m, ch.n_tx());
        for (int i = 0; i < np; ++i) {
            concat_out.middleCols(i * m, m) = ch.ris_to_rx[i];
            concat_in.middleRows(i * m, m) = ch.tx_to_ris[i];
        }
        sv_concat_out = spectral_norm(concat_out, sv_tol);
        sv_concat_in = spectral_norm(concat_in, sv_tol);
    }
    svs.push_back(sv_concat_out);
    svs.push_back(sv_concat_in);

    LipschitzBound out;
    out.zeta = sv_direct + amplitude * panel_sum;
    const double z2 = out.zeta * out.zeta;
    out.b = s * z2 * (1.0 + 2.0 * ns * s * z2);
    out.c = 2.0 * std::sqrt(ns) * s * out.zeta * sv_concat_out * sv_concat_in *
            (1.0 + ns * s * z2);
    out.d = 2.0 * std::sqrt(ns) * s * out.zeta * (1.0 + ns * s * z2) * panel_sum;
    out.e = ns * s * (1.0 + 2.0 * ns * s * z2) * sv_concat_out * sv_concat_in * panel_sum;
    out.panels = np;
    out.multihop = false;
    out.singular_values = std::move(svs);
    out.L = out.recombine();
    return out;
}

// Multi-hop topology.
inline LipschitzBound lipschitz_multihop(const MultiHopChannels& ch, const LinkBudget& lb,
                                         int n_streams, double amplitude,
                                         double sv_tol = 1e-10) {
    const double s = lb.snr_scale();
    const double ns = static_cast<double>(n_streams);
    const int np = ch.n_panels();

    const double sv_direct = spectral_norm(ch.direct, sv_tol);
    std::vector<double> svs{sv_direct};
    double hop_product = 1.0;
    for (const auto& hop : ch.hops) {
        const double sv = spectral_norm(hop, sv_tol);
        hop_product *= sv;
        svs.push_back(sv);
    }

    LipschitzBound out;
    out.zeta = sv_direct + std::pow(amplitude, np) * hop_product;
    const double z2 = out.zeta * out.zeta;
    out.b = s * z2 * (1.0 + 2.0 * ns * s * z2);
    out.c = 2.0 * std::sqrt(ns) * s * out.zeta * std::pow(amplitude, np - 1) * hop_product *
            (1.0 + ns * s * z2);
    out.d = ns * s * std::pow(amplitude, 2 * np - 2) * hop_product * hop_product *
            (1.0 + 2.0 * ns * s * z2);
    out.e = 0.0;
    out.panels = np;
    out.multihop = true;
    out.singular_values = std::move(svs);
    out.L = out.recombine();
    return out;
}

inline LipschitzBound lipschitz_bound(const ChannelSet& ch, const LinkBudget& lb, int n_streams,
                                      double amplitude, double sv_tol = 1e-10) {
    if (const auto* p = std::get_if<ParallelChannels>(&ch))
        return lipschitz_parallel(*p, lb, n_streams, amplitude, sv_tol);
    return lipschitz_multihop(std::get<MultiHopChannels>(ch), lb, n_streams, amplitude, sv_tol);
}

// ----------------------------------------------------------------------
// Test instruments
// ----------------------------------------------------------------------

enum class ChainNorm { frobenius, spectral };

// For two equal-length matrix chains, returns the norm of the difference of
// their products (applied right to left: chain[N-1] * ... * chain[0]) and
// the telescoping upper bound
//   sum_l (prod_{m>l} ||A_m||_2) * ||B_l - A_l|| * (prod_{k<l} ||B_k||_2).
// The middle factor and the left-hand side use `norm`; the outer factors are
// always spectral. Test helper; the optimizer never calls this.
inline std::pair<double, double> chain_product_gap(const std::vector<CMat>& chain_a,
                                                   const std::vector<CMat>& chain_b,
                                                   ChainNorm norm = ChainNorm::frobenius) {
    const std::size_t n = chain_a.size();
    if (n != chain_b.size() || n < 2)
        throw DimensionMismatch("chain_product_gap: chains must have equal length >= 2");
    for (std::size_t i = 0; i < n; ++i) {
        if (chain_a[i].rows() != chain_b[i].rows() || chain_a[i].cols() != chain_b[i].cols())
            throw DimensionMismatch("chain_product_gap: element " + std::to_string(i) +
                                    " shape mismatch");
        if (i > 0 && chain_a[i].cols() != chain_a[i - 1].rows())
            throw DimensionMismatch("chain_product_gap: chain does not multiply at " +
                                    std::to_string(i));
    }

    CMat prod_a = chain_a[0];
    CMat prod_b = chain_b[0];
    for (std::size_t i = 1; i < n; ++i) {
        prod_a = chain_a[i] * prod_a;
        prod_b = chain_b[i] * prod_b;
    }
    const CMat diff = prod_b - prod_a;
    const double lhs = norm == ChainNorm::frobenius ? diff.norm() : spectral_norm(diff);

    double rhs = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        double before = 1.0; // factors of chain_b below l
        for (std::size_t k = 0; k < l; ++k) before *= spectral_norm(chain_b[k]);
        double after = 1.0; // factors of chain_a above l
        for (std::size_t m = l + 1; m < n; ++m) after *= spectral_norm(chain_a[m]);
        const CMat d = chain_b[l] - chain_a[l];
        const double mid = norm == ChainNorm::frobenius ? d.norm() : spectral_norm(d);
        rhs += after * mid * before;
    }
    return {lhs, rhs};
}

// Largest observed ratio between stacked-gradient distance and point
// distance over random feasible pairs; by the bounds above it never exceeds
// L. Instrument for audits, not used by the optimizer.
inline double empirical_lipschitz_ratio(const ChannelSet& ch, const LinkBudget& lb,
                                        int n_streams, double amplitude, RandomStream& rng,
                                        int n_pairs) {
    if (n_pairs < 1) throw Error("empirical_lipschitz_ratio: n_pairs must be >= 1");
    const int ntx = n_tx(ch);
    const int pc = phase_count(ch);

    auto random_feasible_precoder = [&]() {
        CMat f = random_complex_matrix(ntx, n_streams, rng);
        const double radius = std::sqrt(static_cast<double>(n_streams)) * rng.uniform();
        const double nrm = f.norm();
        if (nrm > 0.0) f *= radius / nrm;
        return f;
    };

    double worst = 0.0;
    for (int i = 0; i < n_pairs; ++i) {
        const CMat f1 = random_feasible_precoder();
        const CMat f2 = random_feasible_precoder();
        const CVec p1 = random_unit_modulus(pc, amplitude, rng);
        const CVec p2 = random_unit_modulus(pc, amplitude, rng);

        const double dist =
            std::sqrt((f2 - f1).squaredNorm() + (p2 - p1).squaredNorm());
        if (dist == 0.0) continue; // identical pair; excluded by contract

        const JointGradient g1 = grad_joint(ch, p1, f1, lb);
        const JointGradient g2 = grad_joint(ch, p2, f2, lb);
        const double gdist = std::sqrt((g2.precoder - g1.precoder).squaredNorm() +
                                       (g2.phases - g1.phases).squaredNorm());
        worst = std::max(worst, gdist / dist);
    }
    return worst;
}

} // namespace risopt
