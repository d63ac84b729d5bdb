// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>

#include "irsnoma/core.hpp"

namespace irsnoma {

// splitmix64 step; the generator behind all simulation randomness.  Chosen so
// that identical seeds reproduce identical streams on any IEEE-754 platform,
// independent of the standard library's distribution implementations.
struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

// Counter-scheme substream derivation: each path element is mixed into the
// master seed in order.  derive_seed(s, {a, b}) != derive_seed(s, {b, a}).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_{seed} {}

    std::uint64_t next_u64() { return gen_.next(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_.next() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a logarithm argument.
    double uniform_pos() { return static_cast<double>((gen_.next() >> 11) + 1) * 0x1.0p-53; }

    // Standard normal via Box-Muller.
    double gauss();

    // Circularly-symmetric complex normal CN(0, 1).
    Complex cgauss();

    CVector cgauss_vector(Eigen::Index n);

  private:
    SplitMix64 gen_;
};

}  // namespace irsnoma
