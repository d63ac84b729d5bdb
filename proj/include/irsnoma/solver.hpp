// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "irsnoma/channels.hpp"
#include "irsnoma/core.hpp"

namespace irsnoma {

struct SolverConfig {
    double power = 1.0;           // transmit budget, watts
    double eps = 0.01;            // absolute objective-improvement stop
    double eps_rel = 1e-3;        // relative objective-improvement stop
    double eps_bisect = 1e-4;     // relative bisection width
    int randomization_trials = 400;
    int iteration_cap = 50;
    std::uint64_t seed = 0;
};

struct SolveResult {
    double q = 0.0;                  // achieved max-min SINR (linear)
    RVector rates;                   // per role, weakest first, bits/s/Hz
    RVector alpha;                   // power fractions (single-antenna path)
    std::vector<CVector> beams;      // beamforming path
    PhaseConfig phases;
    std::vector<int> user_order;     // role -> original user index
    std::vector<double> q_trace;     // objective after each outer iteration
    int iterations = 0;
    double wall_time_s = 0.0;
    bool phase_flag = false;         // a phase step found no feasible candidate
    bool cap_hit = false;
};

struct BisectOutcome {
    double q = 0.0;
    bool any_feasible = false;
    int probes = 0;
};

// Largest feasible q in [q_lo, q_hi] for a monotone feasibility predicate.
// The predicate is probed at q_lo first; payload capture is the caller's job.
template <class Feasible>
BisectOutcome bisect_max_feasible(double q_lo, double q_hi, double eps_rel, Feasible&& feasible) {
    BisectOutcome out;
    out.probes = 1;
    if (!feasible(q_lo)) return out;
    out.any_feasible = true;
    while (q_hi - q_lo > eps_rel * std::max(q_hi, 1e-30) && out.probes < 64) {
        double mid = 0.5 * (q_lo + q_hi);
        ++out.probes;
        if (feasible(mid))
            q_lo = mid;
        else
            q_hi = mid;
    }
    out.q = q_lo;
    return out;
}

// Copies a channel set with users relabeled so that role i is original user
// perm[i] (weakest first).  The BS-IRS link is shared and unchanged.
ChannelSet reorder_users(const ChannelSet& ch, const std::vector<int>& perm);

// True when the strengths respect the decode chain (ascending within slack).
bool ordering_ok(const RVector& strengths, double rel_slack = 1e-9);

// Worst-case SINR of the single-antenna superposition system: minimum over
// decode pairs (t <= k) of flow t's SINR at user k.
double maxmin_sinr_siso(const RVector& strengths, const RVector& alpha, double power,
                        double noise);

// Per-flow target SINRs gamma_t = min_{k >= t} gamma_{t->k}.
RVector target_sinrs_siso(const RVector& strengths, const RVector& alpha, double power,
                          double noise);

// Beamforming counterparts evaluated on precomputed effective rows.
double maxmin_sinr_miso(const std::vector<CRowVector>& rows, const std::vector<CVector>& beams,
                        double noise);
RVector target_sinrs_miso(const std::vector<CRowVector>& rows, const std::vector<CVector>& beams,
                          double noise);

// log2(1 + q) per entry.
RVector rates_from_sinrs(const RVector& sinrs);

}  // namespace irsnoma
