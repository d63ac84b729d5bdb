// SPDX-License-Identifier: Apache-2.0
#include "irsnoma/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "irsnoma/lifting.hpp"
#include "irsnoma/miso.hpp"
#include "irsnoma/numerics.hpp"
#include "irsnoma/ordering.hpp"
#include "irsnoma/rng.hpp"
#include "irsnoma/sdp.hpp"
#include "irsnoma/siso.hpp"

namespace irsnoma {

namespace {

constexpr double kLn2 = 0.69314718055994531;

// Energy tau * p of one slot hitting rate r over inverse gain noise/s.
double slot_energy(double tau, double r, double inv_gain) {
    if (r <= 0.0) return 0.0;
    return tau * inv_gain * (std::exp2(r / tau) - 1.0);
}

// d(slot_energy)/d(tau); rises monotonically from -inf toward 0.
double slot_energy_slope(double tau, double r, double inv_gain) {
    double x = r / tau;
    return inv_gain * (std::exp2(x) * (1.0 - x * kLn2) - 1.0);
}

double tau_for_slope(double lambda, double r, double inv_gain) {
    double lo = 1e-9;
    double hi = 1.0;
    while (slot_energy_slope(hi, r, inv_gain) < -lambda && hi < 1e9) hi *= 2.0;
    while (slot_energy_slope(lo, r, inv_gain) > -lambda && lo > 1e-300) lo *= 0.5;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (slot_energy_slope(mid, r, inv_gain) < -lambda)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Least total energy achieving rate r for every user within unit time,
// through the multiplier on the time budget.
double min_energy(double r, const RVector& inv_gain, RVector* tau_out) {
    const Eigen::Index k = inv_gain.size();
    auto total_tau = [&](double lambda) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) s += tau_for_slope(lambda, r, inv_gain(j));
        return s;
    };
    double lam_lo = 1e-12;
    double lam_hi = 1.0;
    while (total_tau(lam_hi) > 1.0 && lam_hi < 1e300) lam_hi *= 4.0;
    while (total_tau(lam_lo) < 1.0 && lam_lo > 1e-300) lam_lo *= 0.25;
    for (int it = 0; it < 60; ++it) {
        double mid = std::sqrt(lam_lo * lam_hi);
        if (total_tau(mid) > 1.0)
            lam_lo = mid;
        else
            lam_hi = mid;
    }
    double lambda = std::sqrt(lam_lo * lam_hi);
    RVector tau(k);
    for (Eigen::Index j = 0; j < k; ++j) tau(j) = tau_for_slope(lambda, r, inv_gain(j));
    tau /= tau.sum();
    double energy = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) energy += slot_energy(tau(j), r, inv_gain(j));
    if (tau_out) *tau_out = tau;
    return energy;
}

double row_amplitude_bound(const ChannelSet& ch, int j) {
    double amp = ch.v[j].norm();
    for (int i = 0; i < ch.elements(); ++i)
        amp += std::abs(ch.g[j](i)) * ch.F.row(i).norm();
    return amp;
}

// One reflection profile for every slot: bisection on the common strength
// floor over the relaxation, then randomized extraction scored by the
// weakest user's gain.
PhaseConfig shared_phase_profile(const ChannelSet& ch, const SolverConfig& cfg) {
    const int m = ch.elements();
    const int k = ch.users();
    std::vector<CMatrix> strength(k);
    RVector vsq(k);
    double floor_hi = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
        strength[j] = lifted_strength_matrix(irs_cascade(ch.g[j], ch.F), ch.v[j]);
        vsq(j) = ch.v[j].squaredNorm();
        double amp = row_amplitude_bound(ch, j);
        floor_hi = std::min(floor_hi, amp * amp);
    }

    CMatrix e_best;
    bool have_e = false;
    auto feasible = [&](double floor) {
        sdp::Problem p;
        int blk = p.add_block(m + 1);
        for (int j = 0; j < k; ++j)
            p.add_trace_constraint(blk, strength[j], sdp::Relation::GreaterEq,
                                   floor - vsq(j));
        for (int i = 0; i <= m; ++i) p.fix_diagonal(blk, i, 1.0);
        sdp::Solution sol = sdp::solve_feasibility(p);
        if (sol.status != sdp::Status::Feasible) return false;
        e_best = sol.blocks[0];
        have_e = true;
        return true;
    };
    bisect_max_feasible(0.0, floor_hi, cfg.eps_bisect, feasible);

    double best = -1.0;
    RVector best_theta = RVector::Zero(m);
    auto consider = [&](const RVector& theta) {
        double worst = combined_strengths(ch, PhaseConfig(theta)).minCoeff();
        if (worst > best) {
            best = worst;
            best_theta = theta;
        }
    };
    consider(RVector::Zero(m));
    for (int j = 0; j < k; ++j) consider(cophase_heuristic(ch, j));
    if (have_e) {
        EigenDecomposition ed = hermitian_eig(e_best);
        CMatrix half = ed.eigenvectors * ed.eigenvalues.cwiseMax(0.0).cwiseSqrt().asDiagonal();
        Rng rng(derive_seed(cfg.seed, {0xc2}));
        for (int d = 0; d < cfg.randomization_trials; ++d) {
            CVector z = half * rng.cgauss_vector(m + 1);
            if (std::abs(z(m)) < 1e-14 * z.cwiseAbs().maxCoeff()) continue;
            consider(phases_from_lifted(z));
        }
    }
    return PhaseConfig(best_theta);
}

}  // namespace

RVector quantize_phases(const RVector& theta, int bits) {
    if (bits < 1) throw std::invalid_argument("quantize_phases: bits must be at least 1");
    if (bits > 30) throw std::invalid_argument("quantize_phases: bits out of range");
    const long levels = 1L << bits;
    const double step = kTwoPi / static_cast<double>(levels);
    RVector out(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        long idx = std::lround(wrap_two_pi(theta(i)) / step) % levels;
        out(i) = static_cast<double>(idx) * step;
    }
    return out;
}

ChannelSet without_irs(const ChannelSet& ch) {
    ChannelSet bare;
    bare.F = CMatrix::Zero(0, ch.antennas());
    bare.g.assign(ch.users(), CVector::Zero(0));
    bare.v = ch.v;
    bare.noise_power = ch.noise_power;
    return bare;
}

SolveResult noma_no_irs(const ChannelSet& ch, const SolverConfig& cfg) {
    ChannelSet bare = without_irs(ch);
    OrderingResult ord =
        order_users(bare, cfg.randomization_trials, derive_seed(cfg.seed, {0xc0}));
    return ch.antennas() == 1 ? solve_siso(bare, ord, cfg) : solve_miso(bare, ord, cfg);
}

OmaResult oma_maxmin(const RVector& strengths, double power, double noise) {
    const Eigen::Index k = strengths.size();
    if (k < 1) throw std::invalid_argument("oma_maxmin: empty strengths");
    if ((strengths.array() <= 0.0).any())
        throw std::invalid_argument("oma_maxmin: strengths must be positive");
    if (power <= 0.0 || noise <= 0.0)
        throw std::invalid_argument("oma_maxmin: power and noise must be positive");

    OmaResult out;
    out.strengths = strengths;
    if (k == 1) {
        out.rate = std::log2(1.0 + power * strengths(0) / noise);
        out.tau = RVector::Ones(1);
        out.slot_powers = RVector::Constant(1, power);
        return out;
    }

    RVector inv_gain = noise / strengths.array();
    double r_hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < k; ++j)
        r_hi = std::min(r_hi, std::log2(1.0 + power * strengths(j) / noise));
    double r_lo = 0.0;
    RVector tau;
    for (int it = 0; it < 64; ++it) {
        double mid = 0.5 * (r_lo + r_hi);
        if (min_energy(mid, inv_gain, nullptr) <= power)
            r_lo = mid;
        else
            r_hi = mid;
    }
    out.rate = r_lo;
    min_energy(r_lo, inv_gain, &tau);
    out.tau = tau;
    out.slot_powers = RVector(k);
    for (Eigen::Index j = 0; j < k; ++j)
        out.slot_powers(j) = inv_gain(j) * (std::exp2(out.rate / tau(j)) - 1.0);
    return out;
}

OmaResult oma_maxmin(const ChannelSet& ch, const SolverConfig& cfg, bool with_irs,
                     bool per_slot_phases) {
    const int k = ch.users();
    RVector strengths(k);
    PhaseConfig phases;
    if (!with_irs || ch.elements() == 0) {
        for (int j = 0; j < k; ++j) strengths(j) = ch.v[j].squaredNorm();
    } else if (per_slot_phases) {
        for (int j = 0; j < k; ++j)
            strengths(j) = max_combined_strength(ch, j, cfg.randomization_trials,
                                                 derive_seed(cfg.seed, {0xc1,
                                                                        static_cast<std::uint64_t>(j)}))
                               .first;
    } else {
        phases = shared_phase_profile(ch, cfg);
        strengths = combined_strengths(ch, phases);
    }
    OmaResult out = oma_maxmin(strengths, cfg.power, ch.noise_power);
    out.phases = phases;
    return out;
}

}  // namespace irsnoma
