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
#include <variant>
#include <vector>

#include "risopt/core.hpp"
#include "risopt/numerics.hpp"

namespace risopt {

// ----------------------------------------------------------------------
// Domain types
// ----------------------------------------------------------------------

// Per-stream transmit power and receiver noise power, both in watts.
struct LinkBudget {
    double rho = 1.0;
    double noise_power = 1.0;

    double snr_scale() const { return rho / noise_power; }
};

// Reflection panels operating side by side: the end-to-end channel is the
// direct matrix plus one single-bounce term per panel.
struct ParallelChannels {
    CMat direct;                 // n_rx x n_tx (zero matrix when blocked)
    std::vector<CMat> tx_to_ris; // each n_ris x n_tx
    std::vector<CMat> ris_to_rx; // each n_rx x n_ris

    int n_panels() const { return static_cast<int>(tx_to_ris.size()); }
    int n_tx() const { return static_cast<int>(direct.cols()); }
    int n_rx() const { return static_cast<int>(direct.rows()); }
    int n_ris() const { return tx_to_ris.empty() ? 0 : static_cast<int>(tx_to_ris[0].rows()); }
};

// Panels chained in sequence: hops[0] is tx -> panel 1, hops[i] connects
// panel i to panel i+1, hops[n_panels] is the last panel -> rx.
struct MultiHopChannels {
    CMat direct;            // n_rx x n_tx (often zero: blocked)
    std::vector<CMat> hops; // n_panels + 1 matrices

    int n_panels() const { return static_cast<int>(hops.size()) - 1; }
    int n_tx() const { return static_cast<int>(direct.cols()); }
    int n_rx() const { return static_cast<int>(direct.rows()); }
    int n_ris() const { return hops.empty() ? 0 : static_cast<int>(hops[0].rows()); }
};

using ChannelSet = std::variant<ParallelChannels, MultiHopChannels>;

inline int n_panels(const ChannelSet& ch) {
    return std::visit([](const auto& c) { return c.n_panels(); }, ch);
}
inline int n_tx(const ChannelSet& ch) {
    return std::visit([](const auto& c) { return c.n_tx(); }, ch);
}
inline int n_rx(const ChannelSet& ch) {
    return std::visit([](const auto& c) { return c.n_rx(); }, ch);
}
inline int n_ris(const ChannelSet& ch) {
    return std::visit([](const auto& c) { return c.n_ris(); }, ch);
}
// Length of the concatenated phase vector.
inline int phase_count(const ChannelSet& ch) { return n_panels(ch) * n_ris(ch); }

// Feasibility of the two variable blocks. The objective and gradient
// functions below accept arbitrary points because the algorithm evaluates
// them at extrapolated, possibly infeasible ones; the projections in
// optimizer.hpp restore feasibility and these predicates verify it.

// Transmit precoder: squared Frobenius norm at most the stream count.
inline bool precoder_feasible(const CMat& f, int n_streams, double tol = 1e-9) {
    return f.squaredNorm() <= static_cast<double>(n_streams) + tol;
}

// Reflection coefficients (concatenated in panel order): every entry on the
// circle of radius `amplitude`.
inline bool phases_feasible(const CVec& phases, double amplitude, double tol = 1e-12) {
    for (Eigen::Index i = 0; i < phases.size(); ++i)
        if (std::abs(std::abs(phases(i)) - amplitude) > tol) return false;
    return true;
}

namespace detail {

inline void check_phase_length(const ChannelSet& ch, const CVec& phases) {
    if (phases.size() != phase_count(ch))
        throw DimensionMismatch("phase vector length " + std::to_string(phases.size()) +
                                " does not match panels*elements = " +
                                std::to_string(phase_count(ch)));
}

inline void check_channel_dims(const ParallelChannels& ch) {
    if (ch.tx_to_ris.size() != ch.ris_to_rx.size())
        throw DimensionMismatch("parallel channel set: mismatched panel link counts");
    for (std::size_t i = 0; i < ch.tx_to_ris.size(); ++i) {
        if (ch.tx_to_ris[i].cols() != ch.direct.cols() ||
            ch.ris_to_rx[i].rows() != ch.direct.rows() ||
            ch.ris_to_rx[i].cols() != ch.tx_to_ris[i].rows())
            throw DimensionMismatch("parallel channel set: inconsistent dimensions at panel " +
                                    std::to_string(i));
    }
}

inline void check_channel_dims(const MultiHopChannels& ch) {
    if (ch.hops.size() < 2) throw DimensionMismatch("multi-hop channel set needs >= 2 hops");
    if (ch.hops.front().cols() != ch.direct.cols() || ch.hops.back().rows() != ch.direct.rows())
        throw DimensionMismatch("multi-hop channel set: endpoint dimensions inconsistent");
    for (std::size_t i = 1; i < ch.hops.size(); ++i) {
        if (ch.hops[i].cols() != ch.hops[i - 1].rows())
            throw DimensionMismatch("multi-hop channel set: hop " + std::to_string(i) +
                                    " does not chain");
    }
}

} // namespace detail

// ----------------------------------------------------------------------
// Composite channel
// ----------------------------------------------------------------------

// direct + sum_i ris_to_rx[i] * diag(phi_i) * tx_to_ris[i]
inline CMat composite_channel(const ParallelChannels& ch, const CVec& phases) {
    detail::check_channel_dims(ch);
    const int m = ch.n_ris();
    CMat h = ch.direct;
    for (int i = 0; i < ch.n_panels(); ++i) {
        const auto phi = phases.segment(i * m, m);
        h.noalias() += ch.ris_to_rx[i] * (phi.asDiagonal() * ch.tx_to_ris[i]);
    }
    return h;
}

// direct + hops[n] * diag(phi_n) * hops[n-1] * ... * diag(phi_1) * hops[0]
inline CMat composite_channel(const MultiHopChannels& ch, const CVec& phases) {
    detail::check_channel_dims(ch);
    const int m = ch.n_ris();
    CMat cascade = ch.hops[0];
    for (int i = 0; i < ch.n_panels(); ++i) {
        const auto phi = phases.segment(i * m, m);
        cascade = ch.hops[i + 1] * (phi.asDiagonal() * cascade);
    }
    CMat h = ch.direct;
    h.noalias() += cascade;
    return h;
}

inline CMat composite_channel(const ChannelSet& ch, const CVec& phases) {
    detail::check_phase_length(ch, phases);
    return std::visit([&](const auto& c) { return composite_channel(c, phases); }, ch);
}

// H * F without materializing H; used for objective-only evaluations where
// the stream count is much smaller than the receive array.
inline CMat composite_apply(const ChannelSet& ch, const CVec& phases, const CMat& f) {
    detail::check_phase_length(ch, phases);
    if (n_tx(ch) != f.rows())
        throw DimensionMismatch("precoder rows do not match transmit array size");
    return std::visit(
        [&](const auto& c) -> CMat {
            using T = std::decay_t<decltype(c)>;
            const int m = c.n_ris();
            if constexpr (std::is_same_v<T, ParallelChannels>) {
                CMat hf = c.direct * f;
                for (int i = 0; i < c.n_panels(); ++i) {
                    const auto phi = phases.segment(i * m, m);
                    hf.noalias() += c.ris_to_rx[i] * (phi.asDiagonal() * (c.tx_to_ris[i] * f));
                }
                return hf;
            } else {
                CMat cascade = c.hops[0] * f;
                for (int i = 0; i < c.n_panels(); ++i) {
                    const auto phi = phases.segment(i * m, m);
                    cascade = c.hops[i + 1] * (phi.asDiagonal() * cascade);
                }
                CMat hf = c.direct * f;
                hf.noalias() += cascade;
                return hf;
            }
        },
        ch);
}

// ----------------------------------------------------------------------
// Rate and objective
// ----------------------------------------------------------------------

// log2 det(I + (rho/P_n) F^H H^H H F), in bits/s/Hz.
inline double achievable_rate(const CMat& h, const CMat& f, const LinkBudget& lb) {
    const CMat hf = h * f;
    const CMat m = CMat::Identity(f.cols(), f.cols()) + lb.snr_scale() * (hf.adjoint() * hf);
    return logdet_hpd(m) / std::log(2.0);
}

// The minimized objective: -ln det(I + (rho/P_n) F^H H^H H F). Always <= 0;
// equals -achievable_rate * ln(2).
inline double objective_f(const ChannelSet& ch, const CVec& phases, const CMat& f,
                          const LinkBudget& lb) {
    const CMat hf = composite_apply(ch, phases, f);
    const CMat m = CMat::Identity(f.cols(), f.cols()) + lb.snr_scale() * (hf.adjoint() * hf);
    return -logdet_hpd(m);
}

namespace detail {

// (I + s F^H H^H H F)^{-1}; the inverse lives in stream space (small).
inline CMat stream_space_inverse(const CMat& hf, double snr_scale) {
    const CMat m = CMat::Identity(hf.cols(), hf.cols()) + snr_scale * (hf.adjoint() * hf);
    return hpd_inverse(m);
}

// diag(A * B^H) where A and B are both m x k: entry i is <row_i(A), row_i(B)>.
inline CVec rowwise_inner(const CMat& a, const CMat& b) {
    return (a.array() * b.conjugate().array()).rowwise().sum();
}

} // namespace detail

// ----------------------------------------------------------------------
// Gradients (with respect to the conjugated variables)
// ----------------------------------------------------------------------

// -s H^H H F (I + s F^H H^H H F)^{-1}
inline CMat grad_precoder(const ChannelSet& ch, const CVec& phases, const CMat& f,
                          const LinkBudget& lb) {
    const double s = lb.snr_scale();
    const CMat h = composite_channel(ch, phases);
    const CMat hf = h * f;
    const CMat k = detail::stream_space_inverse(hf, s);
    return -s * (h.adjoint() * (hf * k));
}

// -s diag[ris_to_rx[i]^H H F K F^H tx_to_ris[i]^H]
inline CVec grad_phases_parallel(const ChannelSet& chs, const CVec& phases, const CMat& f,
                                 const LinkBudget& lb, int panel) {
    const auto* ch = std::get_if<ParallelChannels>(&chs);
    if (ch == nullptr)
        throw WrongTopology("grad_phases_parallel called on a multi-hop channel set");
    detail::check_phase_length(chs, phases);
    if (panel < 0 || panel >= ch->n_panels())
        throw DimensionMismatch("panel index out of range");
    const double s = lb.snr_scale();
    const CMat h = composite_channel(*ch, phases);
    const CMat hf = h * f;
    const CMat k = detail::stream_space_inverse(hf, s);
    const CMat left = ch->ris_to_rx[panel].adjoint() * (hf * k); // n_ris x n_s
    const CMat right = ch->tx_to_ris[panel] * f;                 // n_ris x n_s
    return -s * detail::rowwise_inner(left, right);
}

// Same as the parallel form with the panel's upstream/downstream cascades in
// place of the single-bounce link matrices.
inline CVec grad_phases_multihop(const ChannelSet& chs, const CVec& phases, const CMat& f,
                                 const LinkBudget& lb, int panel) {
    const auto* ch = std::get_if<MultiHopChannels>(&chs);
    if (ch == nullptr)
        throw WrongTopology("grad_phases_multihop called on a parallel channel set");
    detail::check_phase_length(chs, phases);
    if (panel < 0 || panel >= ch->n_panels())
        throw DimensionMismatch("panel index out of range");
    const double s = lb.snr_scale();
    const int m = ch->n_ris();
    const int np = ch->n_panels();

    // upstream(i) = hops[i] * diag(phi_{i-1}) * ... * hops[0]
    CMat upstream = ch->hops[0];
    for (int j = 0; j < panel; ++j)
        upstream = ch->hops[j + 1] * (phases.segment(j * m, m).asDiagonal() * upstream);
    // downstream(i) = hops[np] * diag(phi_{np-1}) ... diag(phi_{i+1}) hops[i+1]
    CMat downstream = ch->hops[np];
    for (int l = np - 1; l > panel; --l)
        downstream = downstream * (phases.segment(l * m, m).asDiagonal() * ch->hops[l]);

    const CMat h = composite_channel(*ch, phases);
    const CMat hf = h * f;
    const CMat k = detail::stream_space_inverse(hf, s);
    const CMat left = downstream.adjoint() * (hf * k);
    const CMat right = upstream * f;
    return -s * detail::rowwise_inner(left, right);
}

struct JointGradient {
    CMat precoder; // n_tx x n_s
    CVec phases;   // concatenated, panel order
};

// Both gradients at once, sharing the composite channel and the stream-space
// inverse across all panels.
inline JointGradient grad_joint(const ChannelSet& chs, const CVec& phases, const CMat& f,
                                const LinkBudget& lb) {
    detail::check_phase_length(chs, phases);
    const double s = lb.snr_scale();
    const CMat h = composite_channel(chs, phases);
    const CMat hf = h * f;
    const CMat k = detail::stream_space_inverse(hf, s);
    const CMat hfk = hf * k;

    JointGradient g;
    g.precoder = -s * (h.adjoint() * hfk);
    g.phases.resize(phase_count(chs));

    if (const auto* ch = std::get_if<ParallelChannels>(&chs)) {
        const int m = ch->n_ris();
        for (int i = 0; i < ch->n_panels(); ++i) {
            const CMat left = ch->ris_to_rx[i].adjoint() * hfk;
            const CMat right = ch->tx_to_ris[i] * f;
            g.phases.segment(i * m, m) = -s * detail::rowwise_inner(left, right);
        }
    } else {
        const auto& mh = std::get<MultiHopChannels>(chs);
        const int m = mh.n_ris();
        const int np = mh.n_panels();
        // up[i] ends with hops[i]; down[i] starts with hops[np].
        std::vector<CMat> up(np);
        CMat acc = mh.hops[0];
        for (int i = 0; i < np; ++i) {
            up[i] = acc;
            if (i + 1 < np)
                acc = mh.hops[i + 1] * (phases.segment(i * m, m).asDiagonal() * acc);
        }
        std::vector<CMat> down(np);
        CMat dacc = mh.hops[np];
        for (int i = np - 1; i >= 0; --i) {
            down[i] = dacc;
            if (i > 0) dacc = dacc * (phases.segment(i * m, m).asDiagonal() * mh.hops[i]);
        }
        for (int i = 0; i < np; ++i) {
            const CMat left = down[i].adjoint() * hfk;
            const CMat right = up[i] * f;
            g.phases.segment(i * m, m) = -s * detail::rowwise_inner(left, right);
        }
    }
    return g;
}

// Dispatch on topology for a single panel.
inline CVec grad_phases(const ChannelSet& chs, const CVec& phases, const CMat& f,
                        const LinkBudget& lb, int panel) {
    if (std::holds_alternative<ParallelChannels>(chs))
        return grad_phases_parallel(chs, phases, f, lb, panel);
    return grad_phases_multihop(chs, phases, f, lb, panel);
}

} // namespace risopt
