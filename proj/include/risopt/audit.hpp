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

// Self-check instruments: a finite-difference oracle for the closed-form
// gradients and a property audit (Lipschitz soundness, chain bound, descent,
// residual decay). These evaluate the objective only; they are independent
// of the gradient formulas they verify.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "risopt/lipschitz.hpp"
#include "risopt/objective.hpp"
#include "risopt/optimizer.hpp"
#include "risopt/rng.hpp"
#include "risopt/scenario.hpp"

namespace risopt {

// ----------------------------------------------------------------------
// Finite-difference gradient checking
// ----------------------------------------------------------------------

struct DirectionalCheck {
    double analytic = 0.0; // 2 Re<grad, direction>
    double numeric = 0.0;  // central difference of the objective
    double rel_error = 0.0;
};

// Central-difference directional derivative against the Wirtinger identity
// df = 2 Re<grad, direction>. The direction is normalized jointly over both
// blocks; epsilon scales with the point's magnitude.
inline DirectionalCheck directional_gradient_check(const ChannelSet& ch, const LinkBudget& lb,
                                                   const CVec& phases, const CMat& f,
                                                   const CMat& dir_f, const CVec& dir_p,
                                                   double epsilon_factor = 1e-5) {
    const double dn = std::sqrt(dir_f.squaredNorm() + dir_p.squaredNorm());
    const CMat df = dir_f / dn;
    const CVec dp = dir_p / dn;
    const double scale = std::max(1.0, std::sqrt(f.squaredNorm() + phases.squaredNorm()));
    const double eps = epsilon_factor * scale;

    const double fp = objective_f(ch, phases + eps * dp, f + eps * df, lb);
    const double fm = objective_f(ch, phases - eps * dp, f - eps * df, lb);

    const JointGradient g = grad_joint(ch, phases, f, lb);
    const cdouble inner = g.precoder.conjugate().cwiseProduct(df).sum() +
                          g.phases.conjugate().cwiseProduct(dp).sum();

    DirectionalCheck out;
    out.numeric = (fp - fm) / (2.0 * eps);
    out.analytic = 2.0 * inner.real();
    out.rel_error = std::abs(out.numeric - out.analytic) /
                    std::max({std::abs(out.analytic), std::abs(out.numeric), 1e-8});
    return out;
}

// A random problem of either topology with Gaussian channel matrices and a
// feasible evaluation point; small dimensions by default.
struct RandomInstance {
    ChannelSet channels;
    LinkBudget budget;
    CMat precoder;
    CVec phases;
    int n_streams = 1;
    double amplitude = 1.0;
};

struct InstanceCaps {
    int max_tx = 8;
    int max_rx = 4;
    int max_ris = 16;
    int max_panels = 3;
};

inline RandomInstance random_instance(RandomStream& rng, bool multihop,
                                      const InstanceCaps& caps = {}) {
    RandomInstance inst;
    const int ntx = rng.uniform_int(2, caps.max_tx);
    const int nrx = rng.uniform_int(1, caps.max_rx);
    const int nris = rng.uniform_int(2, caps.max_ris);
    const int npan = rng.uniform_int(1, caps.max_panels);
    inst.n_streams = rng.uniform_int(1, std::min(ntx, nrx));
    inst.amplitude = rng.uniform(0.5, 1.5);
    inst.budget = LinkBudget{rng.uniform(0.5, 2.0), 1.0};

    if (multihop) {
        MultiHopChannels ch;
        ch.direct = random_complex_matrix(nrx, ntx, rng);
        ch.hops.push_back(random_complex_matrix(nris, ntx, rng));
        for (int i = 1; i < npan; ++i) ch.hops.push_back(random_complex_matrix(nris, nris, rng));
        ch.hops.push_back(random_complex_matrix(nrx, nris, rng));
        inst.channels = ch;
    } else {
        ParallelChannels ch;
        ch.direct = random_complex_matrix(nrx, ntx, rng);
        for (int i = 0; i < npan; ++i) {
            ch.tx_to_ris.push_back(random_complex_matrix(nris, ntx, rng));
            ch.ris_to_rx.push_back(random_complex_matrix(nrx, nris, rng));
        }
        inst.channels = ch;
    }

    CMat f = random_complex_matrix(ntx, inst.n_streams, rng);
    const double radius = std::sqrt(static_cast<double>(inst.n_streams)) * rng.uniform();
    if (f.norm() > 0.0) f *= radius / f.norm();
    inst.precoder = f;
    inst.phases = random_unit_modulus(npan * nris, inst.amplitude, rng);
    return inst;
}

struct GradientCheckReport {
    int instances = 0;
    double max_rel_error = 0.0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::string worst_topology;
};

// Runs the oracle over `per_topology` random instances of each topology,
// one joint random direction plus per-block directions per instance.
inline GradientCheckReport check_gradients(std::uint64_t seed, int per_topology,
                                           const InstanceCaps& caps = {}) {
    GradientCheckReport rep;
    RandomStream rng(mix64(seed, 0xC0));
    for (int topo = 0; topo < 2; ++topo) {
        const bool multihop = topo == 1;
        for (int i = 0; i < per_topology; ++i) {
            const RandomInstance inst = random_instance(rng, multihop, caps);
            const int ntx = n_tx(inst.channels);
            const int pc = phase_count(inst.channels);
            for (int mode = 0; mode < 3; ++mode) {
                const CMat df = mode == 1 ? CMat(CMat::Zero(ntx, inst.n_streams))
                                          : random_complex_matrix(ntx, inst.n_streams, rng);
                const CVec dp = mode == 2 ? CVec(CVec::Zero(pc))
                                          : CVec(random_complex_matrix(pc, 1, rng).col(0));
                const auto check = directional_gradient_check(inst.channels, inst.budget,
                                                              inst.phases, inst.precoder, df, dp);
                if (check.rel_error > rep.max_rel_error) {
                    rep.max_rel_error = check.rel_error;
                    rep.worst_analytic = check.analytic;
                    rep.worst_numeric = check.numeric;
                    rep.worst_topology = multihop ? "multihop" : "parallel";
                }
            }
            ++rep.instances;
        }
    }
    return rep;
}

// ----------------------------------------------------------------------
// Property audit
// ----------------------------------------------------------------------

struct AuditCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct AuditReport {
    std::vector<AuditCheck> checks;
    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
    }
};

// Lipschitz soundness on random instances: the sampled gradient-difference
// ratio must never exceed the closed-form bound.
inline AuditCheck audit_lipschitz(std::uint64_t seed, bool multihop, int instances, int pairs) {
    RandomStream rng(mix64(seed, multihop ? 11 : 10));
    double worst_gap = std::numeric_limits<double>::infinity();
    int violations = 0;
    for (int i = 0; i < instances; ++i) {
        const RandomInstance inst = random_instance(rng, multihop);
        const double bound =
            lipschitz_bound(inst.channels, inst.budget, inst.n_streams, inst.amplitude).L;
        const double ratio = empirical_lipschitz_ratio(inst.channels, inst.budget,
                                                       inst.n_streams, inst.amplitude, rng, pairs);
        if (ratio > bound + 1e-9) ++violations;
        worst_gap = std::min(worst_gap, bound - ratio);
    }
    AuditCheck c;
    c.name = std::string("lipschitz_ratio_") + (multihop ? "multihop" : "parallel");
    c.pass = violations == 0;
    std::ostringstream os;
    os << instances << " instances x " << pairs << " pairs, min(L - ratio) = " << worst_gap;
    c.detail = os.str();
    return c;
}

// Product-chain perturbation bound on random chains, both norm flavors.
inline AuditCheck audit_chain_bound(std::uint64_t seed, int n_chains) {
    RandomStream rng(mix64(seed, 12));
    int violations = 0;
    for (int i = 0; i < n_chains; ++i) {
        const int len = rng.uniform_int(2, 4);
        std::vector<CMat> a, b;
        int rows = rng.uniform_int(1, 4);
        for (int k = 0; k < len; ++k) {
            const int cols = rows;
            const int next = rng.uniform_int(1, 4);
            a.push_back(random_complex_matrix(next, cols, rng));
            b.push_back(random_complex_matrix(next, cols, rng));
            rows = next;
        }
        const auto norm = i % 2 == 0 ? ChainNorm::frobenius : ChainNorm::spectral;
        const auto [lhs, rhs] = chain_product_gap(a, b, norm);
        if (lhs > rhs + 1e-12 * std::max(1.0, rhs)) ++violations;
    }
    AuditCheck c;
    c.name = "chain_product_bound";
    c.pass = violations == 0;
    c.detail = std::to_string(n_chains) + " chains, " + std::to_string(violations) + " violations";
    return c;
}

// Monotone descent plus the per-iteration monitoring inequality on generated
// channels; also residual decay relative to the first iteration.
inline AuditReport audit_descent_and_residuals(const ScenarioConfig& cfg, int runs,
                                               int iterations) {
    AuditReport rep;
    int descent_violations = 0;
    int monitor_violations = 0;
    int decayed = 0;
    int usable = 0;
    OptimizerConfig oc = cfg.optimizer;
    oc.max_iterations = iterations;
    oc.stop_tol = 0.0;

    const LinkBudget lb = cfg.link_budget.to_link_budget();
    const int ns = cfg.link_budget.n_streams;
    const double a = cfg.physics.ris_amplitude;
    for (int run = 0; run < runs; ++run) {
        RandomStream rng(mix64(cfg.master_seed, 0x5000 + run));
        const ChannelSet ch = generate_scenario_channels(cfg, rng);
        const double lip = lipschitz_bound(ch, lb, ns, a).L;
        const InitialPoint init = default_initial_point(ch, ns, a);
        RunReport r;
        try {
            r = jpr_mapg(ch, lb, oc, init, lip, a);
        } catch (const NonmonotoneDetected&) {
            ++descent_violations;
            continue;
        }
        for (std::size_t q = 1; q < r.objective_trajectory.size(); ++q)
            if (r.objective_trajectory[q] > r.objective_trajectory[q - 1] + 1e-9)
                ++descent_violations;
        for (std::size_t q = 0; q < r.objective_monitored.size(); ++q)
            if (r.objective_monitored[q] > r.objective_trajectory[q] + 1e-9)
                ++monitor_violations;

        double first = 0.0, best = 0.0;
        for (std::size_t q = 0; q < r.residual_precoder.size(); ++q) {
            const double sum = r.residual_precoder[q] * r.residual_precoder[q] +
                               r.residual_phases[q] * r.residual_phases[q];
            if (q == 0)
                first = best = sum;
            else
                best = std::min(best, sum);
        }
        if (first > 0.0) {
            ++usable;
            if (best <= 1e-6 * first) ++decayed;
        }
    }

    AuditCheck descent;
    descent.name = "monotone_descent";
    descent.pass = descent_violations == 0;
    descent.detail =
        std::to_string(runs) + " runs, " + std::to_string(descent_violations) + " violations";
    rep.checks.push_back(descent);

    AuditCheck monitor;
    monitor.name = "monitor_descent";
    monitor.pass = monitor_violations == 0;
    monitor.detail =
        std::to_string(runs) + " runs, " + std::to_string(monitor_violations) + " violations";
    rep.checks.push_back(monitor);

    AuditCheck residual;
    residual.name = "residual_decay";
    residual.pass = usable > 0 && decayed * 100 >= usable * 95;
    residual.detail = std::to_string(decayed) + "/" + std::to_string(usable) +
                      " runs reached 1e-6 of the initial residual";
    rep.checks.push_back(residual);
    return rep;
}

inline AuditReport audit_properties(const ScenarioConfig& cfg, int lip_instances = 20,
                                    int lip_pairs = 100, int chains = 500, int descent_runs = 20,
                                    int descent_iters = 500) {
    AuditReport rep;
    rep.checks.push_back(audit_lipschitz(cfg.master_seed, false, lip_instances, lip_pairs));
    rep.checks.push_back(audit_lipschitz(cfg.master_seed, true, lip_instances, lip_pairs));
    rep.checks.push_back(audit_chain_bound(cfg.master_seed, chains));
    const AuditReport dr = audit_descent_and_residuals(cfg, descent_runs, descent_iters);
    rep.checks.insert(rep.checks.end(), dr.checks.begin(), dr.checks.end());
    return rep;
}

} // namespace risopt
