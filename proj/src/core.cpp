// SPDX-License-Identifier: Apache-2.0
#include "irsnoma/core.hpp"

#include <cmath>

namespace irsnoma {

double wrap_two_pi(double x) {
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watt_to_dbm(double watt) {
    if (watt <= 0.0) throw std::invalid_argument("watt_to_dbm: power must be positive");
    return 10.0 * std::log10(watt) + 30.0;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace irsnoma
