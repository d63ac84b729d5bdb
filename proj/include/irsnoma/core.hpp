// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace irsnoma {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Raised when an iterative routine fails to reach its tolerance.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Maps x to the canonical interval [0, 2*pi).
double wrap_two_pi(double x);

// Unit conversions, used only at the configuration boundary.
double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);
double db_to_linear(double db);

}  // namespace irsnoma
