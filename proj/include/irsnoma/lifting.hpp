// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsnoma/channels.hpp"
#include "irsnoma/core.hpp"

namespace irsnoma {

// Cascade channel through the IRS: diag(g^H) F, one row per element.
CMatrix irs_cascade(const CVector& g, const CMatrix& f);

// Hermitian (M+1)x(M+1) matrix S with e_bar^H S e_bar + ||v||^2 equal to the
// squared norm of the effective row, where e_bar = lifted_phase_vector(theta).
CMatrix lifted_strength_matrix(const CMatrix& cascade, const CVector& v);

// Scalar-link version: e_bar^H R e_bar + |w|^2 equals
// |sum_m e^{j theta_m} l_m + w|^2 for the additive scalar w.
CMatrix lifted_link_matrix(const CVector& l, Complex w);

// (M+1) x N stack [diag(g^H) F; v^H]; the effective row equals
// lifted_phase_vector(theta)^H * stack.
CMatrix lifted_channel_stack(const CVector& g, const CMatrix& f, const CVector& v);

// [conj(e^{j theta}); 1], the vector feeding the quadratic lifts above.
CVector lifted_phase_vector(const RVector& theta);

// Inverse of the lift for a Gaussian-randomization draw z: phases recovered
// from the first M entries after normalizing by the last.
RVector phases_from_lifted(const CVector& z);

}  // namespace irsnoma
