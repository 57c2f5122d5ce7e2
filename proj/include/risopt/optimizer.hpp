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

#include <Eigen/SVD>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "risopt/core.hpp"
#include "risopt/lipschitz.hpp"
#include "risopt/objective.hpp"

namespace risopt {

// Joint precoder + phase optimization by a monotone accelerated proximal
// gradient scheme: an extrapolated prox-gradient candidate is computed next
// to a plain (monitoring) prox-gradient candidate each iteration and the one
// with the lower objective is kept, which makes the objective sequence
// provably nonincreasing for step sizes below 1/L.

enum class Algorithm { jpr_mapg, jpr_pg, ris_only, static_ris, no_ris };

inline const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::jpr_mapg: return "jpr_mapg";
        case Algorithm::jpr_pg: return "jpr_pg";
        case Algorithm::ris_only: return "ris_only";
        case Algorithm::static_ris: return "static_ris";
        case Algorithm::no_ris: return "no_ris";
    }
    return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
    if (s == "jpr_mapg") return Algorithm::jpr_mapg;
    if (s == "jpr_pg") return Algorithm::jpr_pg;
    if (s == "ris_only") return Algorithm::ris_only;
    if (s == "static_ris") return Algorithm::static_ris;
    if (s == "no_ris") return Algorithm::no_ris;
    throw ValidationError("unknown algorithm '" + s + "'");
}

struct OptimizerConfig {
    int max_iterations = 500;
    double step_scale = 0.99; // alpha = step_scale / L, must stay below 1
    double stop_tol = 1e-8;   // relative objective change; 0 disables
    std::optional<int> quant_bits;
    Algorithm algorithm = Algorithm::jpr_mapg;

    void validate() const {
        if (max_iterations < 1) throw ValidationError("optimizer.max_iterations must be >= 1");
        if (!(step_scale > 0.0) || !(step_scale < 1.0))
            throw ValidationError("optimizer.step_scale must lie in (0, 1)");
        if (stop_tol < 0.0) throw ValidationError("optimizer.stop_tol must be >= 0");
        if (quant_bits && (*quant_bits < 1 || *quant_bits > 30))
            throw ValidationError("optimizer.quant_bits must lie in [1, 30]");
    }
};

struct RunReport {
    std::vector<double> objective_trajectory; // index 0 = initial point
    std::vector<double> rate_trajectory;
    std::vector<double> residual_precoder; // ||U - F||_F per iteration
    std::vector<double> residual_phases;   // ||v - phi||_2 per iteration
    std::vector<char> accelerated_branch;  // 1 if the extrapolated candidate won
    std::vector<double> objective_accelerated; // candidate objectives per iteration
    std::vector<double> objective_monitored;
    CMat precoder;
    CVec phases;
    double lipschitz = 0.0;
    double alpha = 0.0;
    int iterations = 0;
    double wall_ms = 0.0;
    std::optional<double> quantized_rate;
    bool rank_warning = false;

    double initial_rate() const { return rate_trajectory.front(); }
    double final_rate() const { return rate_trajectory.back(); }
};

// ----------------------------------------------------------------------
// Projections and precoder construction
// ----------------------------------------------------------------------

// Euclidean projection onto {X : ||X||_F^2 <= n_streams}.
inline CMat project_precoder(const CMat& x, int n_streams) {
    const double ns = static_cast<double>(n_streams);
    const double norm2 = x.squaredNorm();
    if (norm2 <= ns) return x;
    return x * (std::sqrt(ns) / std::sqrt(norm2));
}

// Entrywise projection onto the circle of radius `amplitude`; zeros map to
// the deterministic representative `amplitude` (phase 0), which is a valid
// nearest point.
inline CVec project_phases(const CVec& x, double amplitude) {
    CVec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double mag = std::abs(x(i));
        out(i) = mag > 0.0 ? cdouble(amplitude * x(i).real() / mag, amplitude * x(i).imag() / mag)
                           : cdouble(amplitude, 0.0);
    }
    return out;
}

// Snaps each phase to the nearest of the 2^n_bits points {2*pi*k / 2^n_bits}
// in wrapped distance, ties toward the smaller grid index; magnitudes are
// reset to `amplitude`.
inline CVec quantize_phases(const CVec& phases, int n_bits, double amplitude) {
    if (n_bits < 1 || n_bits > 30) throw ValidationError("quant_bits must lie in [1, 30]");
    const long levels = 1L << n_bits;
    const double step = 2.0 * kPi / static_cast<double>(levels);
    CVec out(phases.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) {
        double theta = std::arg(phases(i));
        if (theta < 0.0) theta += 2.0 * kPi;
        const double t = theta / step;
        const double base = std::floor(t);
        const double frac = t - base;
        long k = static_cast<long>(base) + (frac > 0.5 ? 1 : 0);
        k %= levels;
        if (k < 0) k += levels;
        const double snapped = static_cast<double>(k) * step;
        out(i) = amplitude * cdouble(std::cos(snapped), std::sin(snapped));
    }
    return out;
}

// Eigenbeamforming precoder: the top right singular vectors of the channel,
// one per stream. Columns are orthonormal so ||F||_F^2 = n_streams exactly.
// If the channel has fewer than n_streams significant singular values the
// remaining columns still come from the (orthonormal) tail of V and
// *rank_deficient is set.
inline CMat svd_precoder(const CMat& h, int n_streams, bool* rank_deficient = nullptr) {
    if (h.rows() == 0 || h.cols() == 0) throw DimensionMismatch("svd_precoder: empty channel");
    if (n_streams < 1 || n_streams > std::min(h.rows(), h.cols()))
        throw DimensionMismatch("svd_precoder: n_streams must lie in [1, min(dims)]");

    Eigen::JacobiSVD<CMat> svd(h, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double thresh =
        sv(0) * static_cast<double>(std::max(h.rows(), h.cols())) *
        std::numeric_limits<double>::epsilon();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > thresh) ++rank;
    if (rank_deficient != nullptr) *rank_deficient = rank < n_streams;
    return svd.matrixV().leftCols(n_streams);
}

struct InitialPoint {
    CMat precoder;
    CVec phases;
    bool rank_warning = false;
};

// Static-mirror phases plus the matched eigenbeamforming precoder; with this
// start every descent iteration keeps the rate at or above the static-mirror
// baseline.
inline InitialPoint default_initial_point(const ChannelSet& ch, int n_streams,
                                          double amplitude) {
    InitialPoint init;
    init.phases = amplitude * CVec::Ones(phase_count(ch));
    const CMat h = composite_channel(ch, init.phases);
    init.precoder = svd_precoder(h, n_streams, &init.rank_warning);
    return init;
}

// ----------------------------------------------------------------------
// Iterative schemes
// ----------------------------------------------------------------------

namespace detail {

constexpr double kDescentSlack = 1e-9;

inline double rate_from_objective(double f) { return -f / std::log(2.0); }

inline void record_point(RunReport& rep, double f) {
    rep.objective_trajectory.push_back(f);
    rep.rate_trajectory.push_back(rate_from_objective(f));
}

inline bool should_stop(double f_prev, double f_next, double stop_tol) {
    return std::abs(f_next - f_prev) < stop_tol * std::max(std::abs(f_prev), 1e-12);
}

class StopWatch {
  public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace detail

// Accelerated scheme with monitoring. `lipschitz` must be a valid gradient
// Lipschitz bound for the topology (see lipschitz.hpp); the step size is
// cfg.step_scale / lipschitz.
inline RunReport jpr_mapg(const ChannelSet& ch, const LinkBudget& lb, const OptimizerConfig& cfg,
                          const InitialPoint& init, double lipschitz, double amplitude) {
    cfg.validate();
    const detail::StopWatch watch;
    const int ns = static_cast<int>(init.precoder.cols());
    const double alpha = lipschitz > 0.0 ? cfg.step_scale / lipschitz : 0.0;

    RunReport rep;
    rep.lipschitz = lipschitz;
    rep.alpha = alpha;
    rep.rank_warning = init.rank_warning;

    CMat f_prev = init.precoder, f_cur = init.precoder, w = init.precoder;
    CVec p_prev = init.phases, p_cur = init.phases, z = init.phases;
    double t_prev = 0.0, t_cur = 1.0;

    double f_val = objective_f(ch, p_cur, f_cur, lb);
    detail::record_point(rep, f_val);

    for (int q = 1; q <= cfg.max_iterations; ++q) {
        // Extrapolation. At q = 1 the coefficients and the differences are
        // all zero, so the first iteration reduces to a plain prox step.
        const CMat extr_f =
            f_cur + (t_prev / t_cur) * (w - f_cur) + ((t_prev - 1.0) / t_cur) * (f_cur - f_prev);
        const CVec extr_p =
            p_cur + (t_prev / t_cur) * (z - p_cur) + ((t_prev - 1.0) / t_cur) * (p_cur - p_prev);

        // Accelerated candidate from the extrapolated point.
        const JointGradient g_extr = grad_joint(ch, extr_p, extr_f, lb);
        const CMat w_next = project_precoder(extr_f - alpha * g_extr.precoder, ns);
        const CVec z_next = project_phases(extr_p - alpha * g_extr.phases, amplitude);

        // Monitoring candidate from the current iterate.
        const JointGradient g_cur = grad_joint(ch, p_cur, f_cur, lb);
        const CMat u = project_precoder(f_cur - alpha * g_cur.precoder, ns);
        const CVec v = project_phases(p_cur - alpha * g_cur.phases, amplitude);

        const double f_acc = objective_f(ch, z_next, w_next, lb);
        const double f_mon = objective_f(ch, v, u, lb);

        if (f_mon > f_val + detail::kDescentSlack)
            throw NonmonotoneDetected("monitoring candidate increased the objective: " +
                                      std::to_string(f_mon) + " > " + std::to_string(f_val));

        rep.residual_precoder.push_back((u - f_cur).norm());
        rep.residual_phases.push_back((v - p_cur).norm());
        rep.objective_accelerated.push_back(f_acc);
        rep.objective_monitored.push_back(f_mon);

        // Keep the candidate with the lower objective; ties go to the
        // accelerated one to preserve momentum.
        const bool accelerated = f_acc <= f_mon;
        rep.accelerated_branch.push_back(accelerated ? 1 : 0);
        f_prev = f_cur;
        p_prev = p_cur;
        if (accelerated) {
            f_cur = w_next;
            p_cur = z_next;
        } else {
            f_cur = u;
            p_cur = v;
        }
        w = w_next;
        z = z_next;

        const double f_next = accelerated ? f_acc : f_mon;
        if (f_next > f_val + detail::kDescentSlack)
            throw NonmonotoneDetected("objective increased across iterations");
        detail::record_point(rep, f_next);
        rep.iterations = q;

        const bool stop = detail::should_stop(f_val, f_next, cfg.stop_tol);
        f_val = f_next;
        if (stop) break;

        t_prev = t_cur;
        t_cur = 0.5 * (std::sqrt(4.0 * t_cur * t_cur + 1.0) + 1.0);
    }

    rep.precoder = f_cur;
    rep.phases = p_cur;
    if (cfg.quant_bits) {
        const CVec qp = quantize_phases(p_cur, *cfg.quant_bits, amplitude);
        rep.quantized_rate = achievable_rate(composite_channel(ch, qp), f_cur, lb);
    }
    rep.wall_ms = watch.elapsed_ms();
    return rep;
}

// Plain proximal gradient: the monitoring update only, no extrapolation.
inline RunReport jpr_pg(const ChannelSet& ch, const LinkBudget& lb, const OptimizerConfig& cfg,
                        const InitialPoint& init, double lipschitz, double amplitude) {
    cfg.validate();
    const detail::StopWatch watch;
    const int ns = static_cast<int>(init.precoder.cols());
    const double alpha = lipschitz > 0.0 ? cfg.step_scale / lipschitz : 0.0;

    RunReport rep;
    rep.lipschitz = lipschitz;
    rep.alpha = alpha;
    rep.rank_warning = init.rank_warning;

    CMat f_cur = init.precoder;
    CVec p_cur = init.phases;
    double f_val = objective_f(ch, p_cur, f_cur, lb);
    detail::record_point(rep, f_val);

    for (int q = 1; q <= cfg.max_iterations; ++q) {
        const JointGradient g = grad_joint(ch, p_cur, f_cur, lb);
        const CMat u = project_precoder(f_cur - alpha * g.precoder, ns);
        const CVec v = project_phases(p_cur - alpha * g.phases, amplitude);
        const double f_next = objective_f(ch, v, u, lb);
        if (f_next > f_val + detail::kDescentSlack)
            throw NonmonotoneDetected("proximal gradient step increased the objective");

        rep.residual_precoder.push_back((u - f_cur).norm());
        rep.residual_phases.push_back((v - p_cur).norm());
        f_cur = u;
        p_cur = v;
        detail::record_point(rep, f_next);
        rep.iterations = q;
        const bool stop = detail::should_stop(f_val, f_next, cfg.stop_tol);
        f_val = f_next;
        if (stop) break;
    }

    rep.precoder = f_cur;
    rep.phases = p_cur;
    if (cfg.quant_bits) {
        const CVec qp = quantize_phases(p_cur, *cfg.quant_bits, amplitude);
        rep.quantized_rate = achievable_rate(composite_channel(ch, qp), f_cur, lb);
    }
    rep.wall_ms = watch.elapsed_ms();
    return rep;
}

// Projected gradient on the phases only; the precoder stays fixed at the
// initial eigenbeamforming solution. Reuses the joint Lipschitz bound for
// the step size (conservative but always safe).
inline RunReport ris_only(const ChannelSet& ch, const LinkBudget& lb, const OptimizerConfig& cfg,
                          const InitialPoint& init, double lipschitz, double amplitude) {
    cfg.validate();
    const detail::StopWatch watch;
    const double alpha = lipschitz > 0.0 ? cfg.step_scale / lipschitz : 0.0;

    RunReport rep;
    rep.lipschitz = lipschitz;
    rep.alpha = alpha;
    rep.rank_warning = init.rank_warning;

    const CMat f_fixed = init.precoder;
    CVec p_cur = init.phases;
    double f_val = objective_f(ch, p_cur, f_fixed, lb);
    detail::record_point(rep, f_val);

    for (int q = 1; q <= cfg.max_iterations; ++q) {
        const JointGradient g = grad_joint(ch, p_cur, f_fixed, lb);
        const CVec v = project_phases(p_cur - alpha * g.phases, amplitude);
        const double f_next = objective_f(ch, v, f_fixed, lb);
        if (f_next > f_val + detail::kDescentSlack)
            throw NonmonotoneDetected("phase-only step increased the objective");

        rep.residual_precoder.push_back(0.0);
        rep.residual_phases.push_back((v - p_cur).norm());
        p_cur = v;
        detail::record_point(rep, f_next);
        rep.iterations = q;
        const bool stop = detail::should_stop(f_val, f_next, cfg.stop_tol);
        f_val = f_next;
        if (stop) break;
    }

    rep.precoder = f_fixed;
    rep.phases = p_cur;
    if (cfg.quant_bits) {
        const CVec qp = quantize_phases(p_cur, *cfg.quant_bits, amplitude);
        rep.quantized_rate = achievable_rate(composite_channel(ch, qp), f_fixed, lb);
    }
    rep.wall_ms = watch.elapsed_ms();
    return rep;
}

// Mirror panels (all phases at the reference point) with a matched
// eigenbeamforming precoder; single evaluation.
inline RunReport static_ris(const ChannelSet& ch, const LinkBudget& lb, int n_streams,
                            double amplitude, std::optional<int> quant_bits = std::nullopt) {
    const detail::StopWatch watch;
    RunReport rep;
    const InitialPoint init = default_initial_point(ch, n_streams, amplitude);
    rep.rank_warning = init.rank_warning;
    rep.precoder = init.precoder;
    rep.phases = init.phases;
    const double f_val = objective_f(ch, init.phases, init.precoder, lb);
    detail::record_point(rep, f_val);
    if (quant_bits) {
        const CVec qp = quantize_phases(init.phases, *quant_bits, amplitude);
        rep.quantized_rate = achievable_rate(composite_channel(ch, qp), init.precoder, lb);
    }
    rep.wall_ms = watch.elapsed_ms();
    return rep;
}

// Direct link only.
inline RunReport no_ris(const ChannelSet& ch, const LinkBudget& lb, int n_streams,
                        std::optional<int> quant_bits = std::nullopt) {
    const detail::StopWatch watch;
    RunReport rep;
    const CMat direct = std::visit([](const auto& c) { return c.direct; }, ch);
    bool rank_warn = false;
    CMat f;
    if (direct.norm() == 0.0) {
        // Blocked direct path: any feasible precoder gives zero rate.
        f = CMat::Zero(direct.cols(), n_streams);
        for (int i = 0; i < n_streams; ++i) f(i % direct.cols(), i) = 1.0;
        rank_warn = true;
    } else {
        f = svd_precoder(direct, n_streams, &rank_warn);
    }
    rep.rank_warning = rank_warn;
    rep.precoder = f;
    rep.phases = CVec::Zero(0);
    const double rate = achievable_rate(direct, f, lb);
    rep.objective_trajectory.push_back(-rate * std::log(2.0));
    rep.rate_trajectory.push_back(rate);
    if (quant_bits) rep.quantized_rate = rate;
    rep.wall_ms = watch.elapsed_ms();
    return rep;
}

// Runs the configured algorithm from the default initial point, computing
// the Lipschitz bound when the algorithm needs one.
inline RunReport optimize(const ChannelSet& ch, const LinkBudget& lb, const OptimizerConfig& cfg,
                          int n_streams, double amplitude) {
    switch (cfg.algorithm) {
        case Algorithm::static_ris: return static_ris(ch, lb, n_streams, amplitude, cfg.quant_bits);
        case Algorithm::no_ris: return no_ris(ch, lb, n_streams, cfg.quant_bits);
        default: break;
    }
    const InitialPoint init = default_initial_point(ch, n_streams, amplitude);
    const double lip = lipschitz_bound(ch, lb, n_streams, amplitude).L;
    switch (cfg.algorithm) {
        case Algorithm::jpr_mapg: return jpr_mapg(ch, lb, cfg, init, lip, amplitude);
        case Algorithm::jpr_pg: return jpr_pg(ch, lb, cfg, init, lip, amplitude);
        case Algorithm::ris_only: return ris_only(ch, lb, cfg, init, lip, amplitude);
        default: throw Error("unreachable algorithm case");
    }
}

} // namespace risopt
