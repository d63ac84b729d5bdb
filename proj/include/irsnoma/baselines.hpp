// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsnoma/channels.hpp"
#include "irsnoma/core.hpp"
#include "irsnoma/solver.hpp"

namespace irsnoma {

// Nearest-level quantization of each phase onto 2^bits uniform points of the
// circle.  bits must be at least 1.
RVector quantize_phases(const RVector& theta, int bits);

// Copy of the channel with the surface removed; only direct links remain.
ChannelSet without_irs(const ChannelSet& ch);

// Superposition baseline without the reflecting surface: the direct links
// alone feed the standard solver (single- or multi-antenna by channel shape).
SolveResult noma_no_irs(const ChannelSet& ch, const SolverConfig& cfg);

struct OmaResult {
    double rate = 0.0;     // balanced per-user spectral efficiency
    RVector tau;           // slot durations, sums to 1
    RVector slot_powers;   // per-slot transmit powers
    RVector strengths;     // effective channel gains per user
    PhaseConfig phases;    // shared reflection profile when one is used
};

// Time-division baseline on fixed effective gains: the balanced point of
// max min_k tau_k log2(1 + p_k s_k / noise) subject to sum(tau) = 1 and
// sum(tau_k p_k) <= power.
OmaResult oma_maxmin(const RVector& strengths, double power, double noise);

// Time-division baseline on a channel realization.  with_irs turns the
// surface on, with either one profile shared by every slot or a dedicated
// profile per slot; otherwise the direct links are used alone.
OmaResult oma_maxmin(const ChannelSet& ch, const SolverConfig& cfg, bool with_irs,
                     bool per_slot_phases);

}  // namespace irsnoma
