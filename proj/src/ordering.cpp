// SPDX-License-Identifier: Apache-2.0
#include "irsnoma/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "irsnoma/lifting.hpp"
#include "irsnoma/numerics.hpp"
#include "irsnoma/rng.hpp"
#include "irsnoma/sdp.hpp"

namespace irsnoma {

RVector cophase_heuristic(const ChannelSet& ch, int user) {
    const int m = ch.elements();
    RVector theta(m);
    Complex v0 = (ch.v[user].size() > 0) ? std::conj(ch.v[user](0)) : Complex(0.0);
    double xi = (std::abs(v0) > 0.0) ? std::arg(v0) : 0.0;
    for (int i = 0; i < m; ++i) {
        double phi = std::arg(std::conj(ch.g[user](i)));
        double psi = std::arg(ch.F(i, 0));
        theta(i) = wrap_two_pi(xi - phi - psi);
    }
    return theta;
}

std::pair<double, RVector> max_combined_strength(const ChannelSet& ch, int user,
                                                 int randomization_trials, std::uint64_t seed) {
    if (user < 0 || user >= ch.users())
        throw std::out_of_range("max_combined_strength: user index out of range");
    const int m = ch.elements();
    if (m == 0) return {ch.v[user].squaredNorm(), RVector()};

    CMatrix cascade = irs_cascade(ch.g[user], ch.F);
    CMatrix s = lifted_strength_matrix(cascade, ch.v[user]);

    sdp::Problem p;
    int blk = p.add_block(m + 1);
    p.sense = sdp::Sense::Max;
    p.add_objective(blk, s);
    for (int i = 0; i <= m; ++i) p.fix_diagonal(blk, i, 1.0);
    sdp::Solution sol = sdp::solve(p);
    if (sol.status != sdp::Status::Optimal && sol.status != sdp::Status::Feasible)
        throw NumericalError("max_combined_strength: relaxation solve failed");

    EigenDecomposition ed = hermitian_eig(sol.blocks[0]);
    CMatrix half = ed.eigenvectors * ed.eigenvalues.cwiseMax(0.0).cwiseSqrt().asDiagonal();

    double best = -1.0;
    RVector best_theta;
    auto consider = [&](const RVector& theta) {
        double val = combined_channel(ch, PhaseConfig(theta), user).squaredNorm();
        if (val > best) {
            best = val;
            best_theta = theta;
        }
    };
    consider(RVector::Zero(m));
    consider(cophase_heuristic(ch, user));
    Rng rng(seed);
    for (int d = 0; d < randomization_trials; ++d) {
        CVector z = half * rng.cgauss_vector(m + 1);
        if (std::abs(z(m)) < 1e-14 * z.cwiseAbs().maxCoeff()) continue;
        consider(phases_from_lifted(z));
    }
    return {best, best_theta};
}

OrderingResult order_users(const ChannelSet& ch, int randomization_trials, std::uint64_t seed) {
    const int k = ch.users();
    if (k < 2) throw std::invalid_argument("order_users: need at least two users");
    OrderingResult out;
    out.strengths.resize(k);
    out.best_phases.resize(k);
    for (int j = 0; j < k; ++j) {
        auto [val, theta] =
            max_combined_strength(ch, j, randomization_trials,
                                  derive_seed(seed, {static_cast<std::uint64_t>(j)}));
        out.strengths(j) = val;
        out.best_phases[j] = std::move(theta);
    }
    out.permutation.resize(k);
    std::iota(out.permutation.begin(), out.permutation.end(), 0);
    std::stable_sort(out.permutation.begin(), out.permutation.end(),
                     [&](int a, int b) { return out.strengths(a) < out.strengths(b); });
    return out;
}

}  // namespace irsnoma
