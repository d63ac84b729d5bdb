// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsnoma/channels.hpp"
#include "irsnoma/core.hpp"
#include "irsnoma/ordering.hpp"
#include "irsnoma/siso.hpp"
#include "irsnoma/solver.hpp"

namespace irsnoma {

// Transmit covariances of the relaxed beamforming problem, one PSD block per
// flow, plus the extracted beams.
struct BeamSet {
    std::vector<CVector> omegas;
    std::vector<CMatrix> lifted;
};

// SINR of flow t decoded at user k (t <= k required by the SIC chain).
double sinr_miso(const ChannelSet& ch, const PhaseConfig& phases,
                 const std::vector<CVector>& beams, int t, int k);

// Phase step at fixed beams: bisection on Q over the relaxation with SIC and
// decode-order constraints, randomized extraction, incumbent retention.
PhaseOptResult phase_opt_miso(const ChannelSet& ch_role_ordered,
                              const std::vector<CVector>& beams, const SolverConfig& cfg,
                              const PhaseConfig& incumbent, double incumbent_q);

struct BeamformingOutcome {
    BeamSet beams;   // lifted blocks filled; omegas empty until extraction
    double q = 0.0;  // highest feasible relaxed target
    int bisect_probes = 0;
};

// Beam step at fixed phases: bisection on Q over the covariance relaxation;
// the returned blocks solve the budget-minimizing program at the final Q, so
// they sit on an extreme point of the feasible region.
BeamformingOutcome beamforming_opt(const ChannelSet& ch_role_ordered, const PhaseConfig& phases,
                                   const SolverConfig& cfg);

// Beams from covariance blocks: exact factor when every block is rank one,
// otherwise Gaussian randomization with joint rescaling to the power budget.
BeamSet extract_beams(const BeamSet& lifted, const ChannelSet& ch_role_ordered,
                      const PhaseConfig& phases, double power, int randomization_trials,
                      std::uint64_t seed);

// Numerical rank of each covariance block at the given relative tolerance.
std::vector<int> rank_profile(const BeamSet& beams, double tol);

// Alternating phase / beamforming optimization of the multi-antenna downlink.
SolveResult solve_miso(const ChannelSet& ch, const OrderingResult& ordering,
                       const SolverConfig& cfg);

}  // namespace irsnoma
