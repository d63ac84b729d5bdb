// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "irsnoma/channels.hpp"
#include "irsnoma/core.hpp"

namespace irsnoma {

// Decoding order, weakest user first, with the per-user achievable strengths
// (indexed by original user) and the phases achieving them.
struct OrderingResult {
    std::vector<int> permutation;
    RVector strengths;
    std::vector<RVector> best_phases;
};

// Best achievable combined strength ||g^H diag(e^{j theta}) F + v^H||^2 for
// one user: semidefinite relaxation with unit-modulus diagonal pins, then
// Gaussian randomization plus deterministic co-phasing candidates.
std::pair<double, RVector> max_combined_strength(const ChannelSet& ch, int user,
                                                 int randomization_trials, std::uint64_t seed);

// Orders all users by their max_combined_strength, ties broken by index.
OrderingResult order_users(const ChannelSet& ch, int randomization_trials, std::uint64_t seed);

// Per-element co-phasing against the direct link: each cascade term is
// rotated onto the phase of the direct term (first antenna column).
RVector cophase_heuristic(const ChannelSet& ch, int user);

}  // namespace irsnoma
