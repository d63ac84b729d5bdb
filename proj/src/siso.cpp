// SPDX-License-Identifier: Apache-2.0
#include "irsnoma/siso.hpp"

#include <chrono>
#include <cmath>

#include "irsnoma/lifting.hpp"
#include "irsnoma/numerics.hpp"
#include "irsnoma/ordering.hpp"
#include "irsnoma/rng.hpp"
#include "irsnoma/sdp.hpp"

namespace irsnoma {

namespace {

// Interference-free upper bound on any achievable SINR.
double sinr_upper_bound(const ChannelSet& ch, double power) {
    double best = 0.0;
    for (int j = 0; j < ch.users(); ++j) {
        double amp = ch.v[j].norm();
        for (int i = 0; i < ch.elements(); ++i)
            amp += std::abs(ch.g[j](i)) * ch.F.row(i).norm();
        best = std::max(best, amp * amp);
    }
    return power * best / ch.noise_power;
}

}  // namespace

double sinr_siso(const RVector& strengths, const RVector& alpha, double power, double noise,
                 int k) {
    const Eigen::Index n = strengths.size();
    if (alpha.size() != n) throw std::invalid_argument("sinr_siso: allocation size mismatch");
    if (k < 0 || k >= n) throw std::out_of_range("sinr_siso: flow index out of range");
    if (noise <= 0.0) throw std::invalid_argument("sinr_siso: noise must be positive");
    double interf = 0.0;
    for (Eigen::Index i = k + 1; i < n; ++i) interf += alpha(i);
    return alpha(k) * power * strengths(k) / (interf * power * strengths(k) + noise);
}

PowerAllocation optimal_power_allocation(const RVector& strengths, double power, double noise) {
    const Eigen::Index k = strengths.size();
    if (k < 1) throw std::invalid_argument("optimal_power_allocation: empty strengths");
    if ((strengths.array() <= 0.0).any())
        throw std::invalid_argument("optimal_power_allocation: strengths must be positive");
    if (power <= 0.0 || noise <= 0.0)
        throw std::invalid_argument("optimal_power_allocation: power and noise must be positive");

    // Balance matrix: the equal-SINR system alpha/Q = U alpha + n_vec, with U
    // strictly upper all-ones and n_vec the per-user noise-to-signal ratios,
    // has its solution in the Perron eigenpair of the bordered matrix below.
    RMatrix pi = RMatrix::Zero(k + 1, k + 1);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i + 1; j < k; ++j) pi(i, j) = 1.0;
    for (Eigen::Index i = 0; i < k; ++i) pi(i, k) = noise / (power * strengths(i));
    for (Eigen::Index j = 0; j < k + 1; ++j)
        pi(k, j) = pi.topRows(k).col(j).sum();

    DominantEigpair dom = dominant_eigpair(pi);
    if (std::abs(dom.vector(k) - 1.0) > 1e-9)
        throw NumericalError("optimal_power_allocation: Perron vector not normalizable");
    PowerAllocation out;
    out.q = 1.0 / dom.value;
    out.alpha = dom.vector.head(k).cwiseMax(0.0);

    // Newton polish of the eigenvalue on the balance recursion; the recursion
    // then reproduces alpha with all SINRs equal to q at machine precision.
    RVector a(k);
    auto sum_and_slope = [&](double qv, double& slope) {
        double tail = 0.0, dtail = 0.0;
        for (Eigen::Index i = k - 1; i >= 0; --i) {
            double base = tail + noise / (power * strengths(i));
            a(i) = qv * base;
            dtail += base + qv * dtail;
            tail += a(i);
        }
        slope = dtail;
        return tail;
    };
    double qv = out.q;
    for (int it = 0; it < 4; ++it) {
        double slope = 0.0;
        double f = sum_and_slope(qv, slope) - 1.0;
        if (std::abs(f) < 1e-15 || !(slope > 0.0)) break;
        double next = qv - f / slope;
        if (!(next > 0.0)) break;
        qv = next;
    }
    double slope = 0.0;
    if (std::abs(sum_and_slope(qv, slope) - 1.0) <= 1e-10) {
        out.q = qv;
        out.alpha = a;
    }
    return out;
}

PhaseConfig closed_form_phases_two_user(const ChannelSet& ch) {
    if (ch.users() != 2)
        throw std::invalid_argument("closed_form_phases_two_user: needs exactly two users");
    if (ch.antennas() != 1)
        throw std::invalid_argument("closed_form_phases_two_user: single-antenna only");
    const int m = ch.elements();
    RVector theta(m);
    Complex w = std::conj(ch.v[1](0));
    double xi = (std::abs(w) > 0.0) ? std::arg(w) : 0.0;
    for (int i = 0; i < m; ++i) {
        double phi = std::arg(std::conj(ch.g[1](i)));
        double psi = std::arg(ch.F(i, 0));
        theta(i) = wrap_two_pi(xi - phi - psi);
    }
    PhaseConfig out(theta);
    CVector ebar(m + 1);
    for (int i = 0; i < m; ++i) ebar(i) = std::polar(1.0, theta(i));
    ebar(m) = 1.0;
    out.lifted = ebar * ebar.adjoint();
    return out;
}

PhaseOptResult phase_opt_siso(const ChannelSet& ch, const RVector& alpha,
                              const SolverConfig& cfg, const PhaseConfig& incumbent,
                              double incumbent_q) {
    const int m = ch.elements();
    const int k = ch.users();
    if (alpha.size() != k) throw std::invalid_argument("phase_opt_siso: allocation size mismatch");
    if (ch.antennas() != 1) throw std::invalid_argument("phase_opt_siso: single-antenna only");
    const double power = cfg.power;
    const double noise = ch.noise_power;

    PhaseOptResult out;
    out.phases = incumbent;
    out.q = incumbent_q;
    if (m == 0) {
        out.q = maxmin_sinr_siso(combined_strengths(ch, PhaseConfig(RVector())), alpha, power,
                                 noise);
        out.phases = PhaseConfig(RVector());
        out.feasible_found = true;
        return out;
    }

    std::vector<CMatrix> links(k);
    RVector direct(k);
    for (int j = 0; j < k; ++j) {
        CVector l = irs_cascade(ch.g[j], ch.F).col(0);
        Complex w = std::conj(ch.v[j](0));
        links[j] = lifted_link_matrix(l, w);
        direct(j) = std::norm(w);
    }
    RVector suffix(k + 1);
    suffix(k) = 0.0;
    for (int i = k - 1; i >= 0; --i) suffix(i) = suffix(i + 1) + alpha(i);

    auto build = [&](double q) -> std::optional<sdp::Problem> {
        sdp::Problem p;
        int blk = p.add_block(m + 1);
        for (int j = 0; j < k; ++j) {
            double coeff = alpha(j) - suffix(j + 1) * q;
            if (coeff <= 0.0) {
                if (q > 0.0) return std::nullopt;
                continue;
            }
            p.add_trace_constraint(blk, links[j], sdp::Relation::GreaterEq,
                                   q * noise / (power * coeff) - direct(j));
        }
        for (int j = 0; j + 1 < k; ++j)
            p.add_trace_constraint(blk, CMatrix(links[j + 1] - links[j]),
                                   sdp::Relation::GreaterEq, direct(j) - direct(j + 1));
        for (int i = 0; i <= m; ++i) p.fix_diagonal(blk, i, 1.0);
        return p;
    };

    CMatrix e_best;
    bool have_e = false;
    auto feasible = [&](double q) {
        auto p = build(q);
        if (!p) return false;
        sdp::Solution sol = sdp::solve_feasibility(*p);
        if (sol.status != sdp::Status::Feasible) return false;
        e_best = sol.blocks[0];
        have_e = true;
        return true;
    };

    double q_hi = sinr_upper_bound(ch, power);
    double q_lo = 0.0;
    if (incumbent.theta.size() == m && incumbent_q > 0.0 &&
        ordering_ok(combined_strengths(ch, incumbent)) && feasible(incumbent_q * (1.0 - 1e-9)))
        q_lo = incumbent_q * (1.0 - 1e-9);
    BisectOutcome bis = bisect_max_feasible(q_lo, std::max(q_hi, q_lo), cfg.eps_bisect,
                                            feasible);
    out.bisect_probes = bis.probes;

    // Candidate extraction: deterministic seeds, index-ordered tie-break.
    double best_q = -1.0;
    RVector best_theta;
    auto consider = [&](const RVector& theta) {
        RVector s = combined_strengths(ch, PhaseConfig(theta));
        if (!ordering_ok(s)) return;
        double q = maxmin_sinr_siso(s, alpha, power, noise);
        if (q > best_q) {
            best_q = q;
            best_theta = theta;
        }
    };
    consider(RVector::Zero(m));
    consider(cophase_heuristic(ch, k - 1));
    if (incumbent.theta.size() == m) consider(incumbent.theta);
    if (have_e) {
        EigenDecomposition ed = hermitian_eig(e_best);
        CMatrix half = ed.eigenvectors * ed.eigenvalues.cwiseMax(0.0).cwiseSqrt().asDiagonal();
        Rng rng(cfg.seed);
        for (int d = 0; d < cfg.randomization_trials; ++d) {
            CVector z = half * rng.cgauss_vector(m + 1);
            if (std::abs(z(m)) < 1e-14 * z.cwiseAbs().maxCoeff()) continue;
            consider(phases_from_lifted(z));
        }
    }

    if (best_q < 0.0) {
        out.feasible_found = false;  // keep incumbent untouched
        return out;
    }
    out.feasible_found = true;
    if (best_q >= incumbent_q || incumbent.theta.size() != m) {
        out.q = best_q;
        out.phases = PhaseConfig(best_theta);
        CVector ebar(m + 1);
        for (int i = 0; i < m; ++i) ebar(i) = std::polar(1.0, best_theta(i));
        ebar(m) = 1.0;
        out.phases.lifted = ebar * ebar.adjoint();
    }
    return out;
}

SolveResult solve_siso(const ChannelSet& ch_in, const OrderingResult& ordering,
                       const SolverConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    if (ch_in.antennas() != 1) throw std::invalid_argument("solve_siso: single-antenna only");
    ChannelSet ch = reorder_users(ch_in, ordering.permutation);
    const int m = ch.elements();
    const double power = cfg.power;
    const double noise = ch.noise_power;

    SolveResult res;
    res.user_order = ordering.permutation;
    PhaseConfig phases(RVector::Zero(m));
    RVector s = combined_strengths(ch, phases);
    RVector alpha = optimal_power_allocation(s, power, noise).alpha;
    double q = maxmin_sinr_siso(s, alpha, power, noise);
    res.q_trace.push_back(q);

    for (int iter = 0; iter < cfg.iteration_cap; ++iter) {
        res.iterations = iter + 1;
        SolverConfig step_cfg = cfg;
        step_cfg.seed = derive_seed(cfg.seed, {0xa1, static_cast<std::uint64_t>(iter)});
        PhaseOptResult ph = phase_opt_siso(ch, alpha, step_cfg, phases, q);
        if (!ph.feasible_found) res.phase_flag = true;
        phases = ph.phases;
        double q_phase = ph.q;

        RVector s_new = combined_strengths(ch, phases);
        PowerAllocation pa = optimal_power_allocation(s_new, power, noise);
        double q_power = maxmin_sinr_siso(s_new, pa.alpha, power, noise);
        double q_new;
        if (q_power >= q_phase) {
            alpha = pa.alpha;
            q_new = q_power;
        } else {
            q_new = q_phase;  // keep previous allocation
        }
        double gain = q_new - q;
        q = q_new;
        res.q_trace.push_back(q);
        if (gain < std::max(cfg.eps, cfg.eps_rel * q)) {
            // Restart probe at convergence: the alternation is initialization
            // sensitive, so try each per-user co-phasing profile with a
            // rebalanced allocation and resume from a strictly better one.
            // Candidates are fixed profiles, so this fires at most once.
            double q_c = q;
            RVector theta_c;
            RVector alpha_c;
            bool restart = false;
            for (int j = 0; j < ch.users(); ++j) {
                RVector th = cophase_heuristic(ch, j);
                RVector sc = combined_strengths(ch, PhaseConfig(th));
                if (!ordering_ok(sc)) continue;
                PowerAllocation pc = optimal_power_allocation(sc, power, noise);
                double qc = maxmin_sinr_siso(sc, pc.alpha, power, noise);
                if (qc > q_c + std::max(cfg.eps, cfg.eps_rel * q_c)) {
                    q_c = qc;
                    theta_c = th;
                    alpha_c = pc.alpha;
                    restart = true;
                }
            }
            if (!restart) break;
            phases = PhaseConfig(theta_c);
            CVector ebar(m + 1);
            for (int i = 0; i < m; ++i) ebar(i) = std::polar(1.0, theta_c(i));
            ebar(m) = 1.0;
            phases.lifted = ebar * ebar.adjoint();
            alpha = alpha_c;
            q = q_c;
            res.q_trace.push_back(q);
        }
        if (iter + 1 == cfg.iteration_cap) res.cap_hit = true;
    }

    res.q = q;
    res.alpha = alpha;
    res.phases = phases;
    RVector s_fin = combined_strengths(ch, phases);
    res.rates = rates_from_sinrs(target_sinrs_siso(s_fin, alpha, power, noise));
    res.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace irsnoma
