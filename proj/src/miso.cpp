// SPDX-License-Identifier: Apache-2.0
#include "irsnoma/miso.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "irsnoma/lifting.hpp"
#include "irsnoma/numerics.hpp"
#include "irsnoma/rng.hpp"
#include "irsnoma/sdp.hpp"

namespace irsnoma {

namespace {

std::vector<CRowVector> effective_rows(const ChannelSet& ch, const PhaseConfig& phases) {
    std::vector<CRowVector> rows(ch.users());
    for (int j = 0; j < ch.users(); ++j) rows[j] = combined_channel(ch, phases, j);
    return rows;
}

double max_beam_power(const std::vector<CVector>& beams) {
    double p = 0.0;
    for (const auto& b : beams) p = std::max(p, b.squaredNorm());
    return p;
}

// Interference-free bound on the amplitude of any effective row of user j.
double row_amplitude_bound(const ChannelSet& ch, int j) {
    double amp = ch.v[j].norm();
    for (int i = 0; i < ch.elements(); ++i)
        amp += std::abs(ch.g[j](i)) * ch.F.row(i).norm();
    return amp;
}

CVector unit_lift(const RVector& theta) {
    CVector ebar(theta.size() + 1);
    for (Eigen::Index i = 0; i < theta.size(); ++i) ebar(i) = std::polar(1.0, theta(i));
    ebar(theta.size()) = 1.0;
    return ebar;
}

}  // namespace

double sinr_miso(const ChannelSet& ch, const PhaseConfig& phases,
                 const std::vector<CVector>& beams, int t, int k) {
    const int users = ch.users();
    if (k < 0 || k >= users) throw std::out_of_range("sinr_miso: user index out of range");
    if (t < 0 || t > k) throw std::invalid_argument("sinr_miso: flow must precede its decoder");
    if (static_cast<int>(beams.size()) != users)
        throw std::invalid_argument("sinr_miso: one beam per user required");
    CRowVector row = combined_channel(ch, phases, k);
    double interf = 0.0;
    for (int i = t + 1; i < users; ++i) interf += std::norm((row * beams[i]).value());
    return std::norm((row * beams[t]).value()) / (interf + ch.noise_power);
}

PhaseOptResult phase_opt_miso(const ChannelSet& ch, const std::vector<CVector>& beams,
                              const SolverConfig& cfg, const PhaseConfig& incumbent,
                              double incumbent_q) {
    const int m = ch.elements();
    const int k = ch.users();
    if (static_cast<int>(beams.size()) != k)
        throw std::invalid_argument("phase_opt_miso: one beam per user required");
    const double noise = ch.noise_power;

    PhaseOptResult out;
    out.phases = incumbent;
    out.q = incumbent_q;
    if (m == 0) {
        out.q = maxmin_sinr_miso(effective_rows(ch, PhaseConfig(RVector())), beams, noise);
        out.phases = PhaseConfig(RVector());
        out.feasible_found = true;
        return out;
    }

    // Lifted link matrices per decode pair and the strength matrices backing
    // the decode-order chain.
    std::vector<std::vector<CMatrix>> link(k);
    std::vector<RVector> direct(k);
    std::vector<CMatrix> strength(k);
    RVector vsq(k);
    for (int u = 0; u < k; ++u) {
        CMatrix cascade = irs_cascade(ch.g[u], ch.F);
        link[u].resize(k);
        direct[u] = RVector(k);
        for (int t = 0; t < k; ++t) {
            CVector l = cascade * beams[t];
            Complex w = (ch.v[u].adjoint() * beams[t]).value();
            link[u][t] = lifted_link_matrix(l, w);
            direct[u](t) = std::norm(w);
        }
        strength[u] = lifted_strength_matrix(cascade, ch.v[u]);
        vsq(u) = ch.v[u].squaredNorm();
    }

    auto build = [&](double q) {
        sdp::Problem p;
        int blk = p.add_block(m + 1);
        for (int u = 0; u < k; ++u) {
            for (int t = 0; t <= u; ++t) {
                CMatrix a = link[u][t];
                double tail = 0.0;
                for (int i = t + 1; i < k; ++i) {
                    a -= q * link[u][i];
                    tail += direct[u](i);
                }
                p.add_trace_constraint(blk, a, sdp::Relation::GreaterEq,
                                       q * (tail + noise) - direct[u](t));
            }
        }
        for (int u = 0; u + 1 < k; ++u)
            p.add_trace_constraint(blk, CMatrix(strength[u + 1] - strength[u]),
                                   sdp::Relation::GreaterEq, vsq(u) - vsq(u + 1));
        for (int i = 0; i <= m; ++i) p.fix_diagonal(blk, i, 1.0);
        return p;
    };

    CMatrix e_best;
    bool have_e = false;
    auto feasible = [&](double q) {
        sdp::Solution sol = sdp::solve_feasibility(build(q));
        if (sol.status != sdp::Status::Feasible) return false;
        e_best = sol.blocks[0];
        have_e = true;
        return true;
    };

    double amp = 0.0;
    for (int u = 0; u < k; ++u) amp = std::max(amp, row_amplitude_bound(ch, u));
    double q_hi = amp * amp * max_beam_power(beams) / noise;
    double q_lo = 0.0;
    if (incumbent.theta.size() == m && incumbent_q > 0.0 &&
        ordering_ok(combined_strengths(ch, incumbent)) && feasible(incumbent_q * (1.0 - 1e-9)))
        q_lo = incumbent_q * (1.0 - 1e-9);
    BisectOutcome bis = bisect_max_feasible(q_lo, std::max(q_hi, q_lo), cfg.eps_bisect,
                                            feasible);
    out.bisect_probes = bis.probes;

    double best_q = -1.0;
    RVector best_theta;
    auto consider = [&](const RVector& theta) {
        PhaseConfig cand(theta);
        if (!ordering_ok(combined_strengths(ch, cand))) return;
        double q = maxmin_sinr_miso(effective_rows(ch, cand), beams, noise);
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
        out.feasible_found = false;
        return out;
    }
    out.feasible_found = true;
    if (best_q >= incumbent_q || incumbent.theta.size() != m) {
        out.q = best_q;
        out.phases = PhaseConfig(best_theta);
        CVector ebar = unit_lift(best_theta);
        out.phases.lifted = ebar * ebar.adjoint();
    }
    return out;
}

BeamformingOutcome beamforming_opt(const ChannelSet& ch, const PhaseConfig& phases,
                                   const SolverConfig& cfg) {
    const int k = ch.users();
    const int n = ch.antennas();
    const double power = cfg.power;
    const double noise = ch.noise_power;
    std::vector<CRowVector> rows = effective_rows(ch, phases);

    // Normalized channels absorb the budget, so the trace cap is 1 and the
    // SINR rows carry q alone on the right-hand side.
    std::vector<CMatrix> hhat(k);
    double q_hi = 0.0;
    for (int u = 0; u < k; ++u) {
        hhat[u] = (power / noise) * (rows[u].adjoint() * rows[u]);
        q_hi = std::max(q_hi, power * rows[u].squaredNorm() / noise);
    }

    auto build = [&](double q) {
        sdp::Problem p;
        for (int u = 0; u < k; ++u) p.add_block(n);
        for (int u = 0; u < k; ++u) {
            for (int t = 0; t <= u; ++t) {
                sdp::Constraint c;
                c.terms.push_back({t, hhat[u]});
                for (int i = t + 1; i < k; ++i) c.terms.push_back({i, CMatrix(-q * hhat[u])});
                c.rel = sdp::Relation::GreaterEq;
                c.rhs = q;
                p.add_constraint(std::move(c));
            }
        }
        sdp::Constraint cap;
        for (int u = 0; u < k; ++u) cap.terms.push_back({u, CMatrix::Identity(n, n)});
        cap.rel = sdp::Relation::LessEq;
        cap.rhs = 1.0;
        p.add_constraint(std::move(cap));
        return p;
    };

    // A strictly positive margin keeps the bisection boundary sharp; the
    // default acceptance band would smear the returned q by its tolerance.
    std::vector<CMatrix> margin_blocks;
    auto feasible = [&](double q) {
        sdp::Solution sol = sdp::solve_feasibility(build(q));
        if (sol.status != sdp::Status::Feasible || !(sol.feasibility_margin >= 0.0))
            return false;
        margin_blocks = sol.blocks;
        return true;
    };

    BisectOutcome bis = bisect_max_feasible(0.0, q_hi, cfg.eps_bisect, feasible);
    if (!bis.any_feasible)
        throw NumericalError("beamforming_opt: relaxation infeasible at q = 0");

    // Budget-minimizing re-solve lands on an extreme point of the constraint
    // set, which keeps the covariance ranks low.
    BeamformingOutcome out;
    out.q = bis.q;
    out.bisect_probes = bis.probes;
    sdp::Problem trim = build(bis.q);
    trim.sense = sdp::Sense::Min;
    for (int u = 0; u < k; ++u) trim.add_objective(u, CMatrix::Identity(n, n));
    sdp::Solution sol = sdp::solve(trim);
    const std::vector<CMatrix>& pick =
        (sol.status == sdp::Status::Optimal || sol.status == sdp::Status::Feasible)
            ? sol.blocks
            : margin_blocks;

    // The interior point noise floor is shared across blocks, so a weak
    // user's covariance can carry phantom eigenvalues far above its own
    // scale.  Drop spectrum below a common floor before reporting.
    std::vector<EigenDecomposition> eds(k);
    double top = 0.0;
    for (int u = 0; u < k; ++u) {
        eds[u] = hermitian_eig(pick[u]);
        if (eds[u].eigenvalues.size() > 0) top = std::max(top, eds[u].eigenvalues(0));
    }
    const double spectral_floor = 1e-5 * top;
    out.beams.lifted.resize(k);
    for (int u = 0; u < k; ++u) {
        CMatrix blk = CMatrix::Zero(n, n);
        for (Eigen::Index i = 0; i < eds[u].eigenvalues.size(); ++i) {
            if (eds[u].eigenvalues(i) <= spectral_floor) break;
            blk += eds[u].eigenvalues(i) * eds[u].eigenvectors.col(i) *
                   eds[u].eigenvectors.col(i).adjoint();
        }
        out.beams.lifted[u] = power * blk;
    }
    return out;
}

std::vector<int> rank_profile(const BeamSet& beams, double tol) {
    std::vector<int> ranks;
    ranks.reserve(beams.lifted.size());
    for (const auto& blk : beams.lifted) ranks.push_back(numerical_rank(blk, tol));
    return ranks;
}

BeamSet extract_beams(const BeamSet& lifted, const ChannelSet& ch, const PhaseConfig& phases,
                      double power, int randomization_trials, std::uint64_t seed) {
    const int k = static_cast<int>(lifted.lifted.size());
    if (k != ch.users())
        throw std::invalid_argument("extract_beams: one covariance per user required");
    BeamSet out = lifted;
    out.omegas.resize(k);

    std::vector<EigenDecomposition> eds(k);
    bool all_rank_one = true;
    for (int u = 0; u < k; ++u) {
        eds[u] = hermitian_eig(lifted.lifted[u]);
        if (numerical_rank(lifted.lifted[u], 1e-6) > 1) all_rank_one = false;
    }

    std::vector<CVector> principal(k);
    for (int u = 0; u < k; ++u)
        principal[u] =
            std::sqrt(std::max(eds[u].eigenvalues(0), 0.0)) * eds[u].eigenvectors.col(0);
    double ptot = 0.0;
    for (int u = 0; u < k; ++u) ptot += principal[u].squaredNorm();
    if (ptot > power) {
        double scale = std::sqrt(power / ptot);
        for (int u = 0; u < k; ++u) principal[u] *= scale;
    }
    if (all_rank_one) {
        out.omegas = principal;
        return out;
    }

    std::vector<CRowVector> rows = effective_rows(ch, phases);
    double best = maxmin_sinr_miso(rows, principal, ch.noise_power);
    out.omegas = principal;

    std::vector<CMatrix> half(k);
    for (int u = 0; u < k; ++u)
        half[u] = eds[u].eigenvectors *
                  eds[u].eigenvalues.cwiseMax(0.0).cwiseSqrt().asDiagonal();
    Rng rng(seed);
    std::vector<CVector> cand(k);
    const int n = ch.antennas();
    for (int d = 0; d < randomization_trials; ++d) {
        double total = 0.0;
        for (int u = 0; u < k; ++u) {
            cand[u] = half[u] * rng.cgauss_vector(n);
            total += cand[u].squaredNorm();
        }
        if (total <= 0.0) continue;
        double scale = std::sqrt(power / total);
        for (int u = 0; u < k; ++u) cand[u] *= scale;
        double q = maxmin_sinr_miso(rows, cand, ch.noise_power);
        if (q > best) {
            best = q;
            out.omegas = cand;
        }
    }
    return out;
}

SolveResult solve_miso(const ChannelSet& ch_in, const OrderingResult& ordering,
                       const SolverConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    ChannelSet ch = reorder_users(ch_in, ordering.permutation);
    const int m = ch.elements();
    const int k = ch.users();
    const double power = cfg.power;
    const double noise = ch.noise_power;

    SolveResult res;
    res.user_order = ordering.permutation;
    PhaseConfig phases(RVector::Zero(m));
    std::vector<CRowVector> rows = effective_rows(ch, phases);
    std::vector<CVector> beams(k);
    for (int u = 0; u < k; ++u) {
        double nrm = rows[u].norm();
        if (nrm <= 0.0) throw NumericalError("solve_miso: vanishing channel row");
        beams[u] = std::sqrt(power / k) * rows[u].adjoint() / nrm;
    }
    double q = maxmin_sinr_miso(rows, beams, noise);
    res.q_trace.push_back(q);

    for (int iter = 0; iter < cfg.iteration_cap; ++iter) {
        res.iterations = iter + 1;
        SolverConfig step_cfg = cfg;
        step_cfg.seed = derive_seed(cfg.seed, {0xb1, static_cast<std::uint64_t>(iter)});
        PhaseOptResult ph = phase_opt_miso(ch, beams, step_cfg, phases, q);
        if (!ph.feasible_found) res.phase_flag = true;
        phases = ph.phases;
        double q_phase = ph.q;

        BeamformingOutcome bo = beamforming_opt(ch, phases, cfg);
        BeamSet ext = extract_beams(bo.beams, ch, phases, power, cfg.randomization_trials,
                                    derive_seed(cfg.seed, {0xb2, static_cast<std::uint64_t>(iter)}));
        rows = effective_rows(ch, phases);
        double q_beam = maxmin_sinr_miso(rows, ext.omegas, noise);
        double q_new;
        if (q_beam >= q_phase) {
            beams = ext.omegas;
            q_new = q_beam;
        } else {
            q_new = q_phase;  // keep previous beams
        }
        double gain = q_new - q;
        q = q_new;
        res.q_trace.push_back(q);
        if (gain < std::max(cfg.eps, cfg.eps_rel * q)) break;
        if (iter + 1 == cfg.iteration_cap) res.cap_hit = true;
    }

    res.q = q;
    res.beams = beams;
    res.phases = phases;
    rows = effective_rows(ch, phases);
    res.rates = rates_from_sinrs(target_sinrs_miso(rows, beams, noise));
    res.alpha = RVector(k);
    for (int u = 0; u < k; ++u) res.alpha(u) = beams[u].squaredNorm() / power;
    res.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace irsnoma
