// SPDX-License-Identifier: Apache-2.0
#include "irsnoma/rng.hpp"

#include <cmath>

namespace irsnoma {

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    SplitMix64 g{master};
    std::uint64_t s = g.next();
    for (std::uint64_t id : path) {
        SplitMix64 h{s ^ (id * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL)};
        s = h.next();
    }
    return s;
}

double Rng::gauss() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

Complex Rng::cgauss() {
    double u1 = uniform_pos();
    double u2 = uniform();
    double r = std::sqrt(-std::log(u1));
    return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
}

CVector Rng::cgauss_vector(Eigen::Index n) {
    CVector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = cgauss();
    return out;
}

}  // namespace irsnoma
