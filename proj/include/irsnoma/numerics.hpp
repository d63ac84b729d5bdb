// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsnoma/core.hpp"

namespace irsnoma {

struct EigenDecomposition {
    RVector eigenvalues;   // sorted descending; ties keep ascending index order
    CMatrix eigenvectors;  // columns, unit norm, aligned with eigenvalues
};

// Full eigendecomposition of a Hermitian matrix.  Throws std::invalid_argument
// if the input is not square or not Hermitian within 1e-10 relative tolerance.
EigenDecomposition hermitian_eig(const CMatrix& a);

struct DominantEigpair {
    double value;
    RVector vector;  // entrywise nonnegative; last component scaled to 1 when nonzero
};

// Dominant (Perron) eigenpair of an entrywise nonnegative real matrix.
// Throws std::invalid_argument on negative entries, NumericalError when the
// iteration fails to reach residual 1e-9 * value * ||v||_inf.
DominantEigpair dominant_eigpair(const RMatrix& a);

// Number of eigenvalues of a Hermitian PSD matrix above tol * lambda_max.
// Throws NumericalError when an eigenvalue lies below -tol * lambda_max.
int numerical_rank(const CMatrix& a, double tol);

}  // namespace irsnoma
