// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsnoma/channels.hpp"
#include "irsnoma/core.hpp"
#include "irsnoma/ordering.hpp"
#include "irsnoma/solver.hpp"

namespace irsnoma {

struct PowerAllocation {
    RVector alpha;  // fractions of the budget, sums to 1
    double q = 0.0;  // balanced per-user SINR
};

// SINR of flow k at its own user for the single-antenna system; strengths are
// in decode order (weakest first), alpha are budget fractions.
double sinr_siso(const RVector& strengths, const RVector& alpha, double power, double noise,
                 int k);

// Equal-SINR optimal split: Q = 1 / (Perron root of the balance matrix), and
// the allocation is the Perron vector scaled by its last component.
PowerAllocation optimal_power_allocation(const RVector& strengths, double power, double noise);

// Two-user single-antenna co-phasing: every reflected term and the direct
// term of the stronger user are phase-aligned, so |h_2| hits its maximum.
PhaseConfig closed_form_phases_two_user(const ChannelSet& ch_role_ordered);

struct PhaseOptResult {
    PhaseConfig phases;
    double q = 0.0;
    bool feasible_found = false;
    int bisect_probes = 0;
};

// Phase step at a fixed allocation: bisection on Q over the semidefinite
// relaxation, then randomized extraction filtered by the decode-order chain.
// Never returns a point worse than the incumbent.
PhaseOptResult phase_opt_siso(const ChannelSet& ch_role_ordered, const RVector& alpha,
                              const SolverConfig& cfg, const PhaseConfig& incumbent,
                              double incumbent_q);

// Alternating phase / power optimization of the single-antenna downlink.
SolveResult solve_siso(const ChannelSet& ch, const OrderingResult& ordering,
                       const SolverConfig& cfg);

}  // namespace irsnoma
