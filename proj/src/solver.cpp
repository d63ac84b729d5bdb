// SPDX-License-Identifier: Apache-2.0
#include "irsnoma/solver.hpp"

#include <cmath>
#include <limits>

namespace irsnoma {

ChannelSet reorder_users(const ChannelSet& ch, const std::vector<int>& perm) {
    if (static_cast<int>(perm.size()) != ch.users())
        throw std::invalid_argument("reorder_users: permutation size mismatch");
    ChannelSet out;
    out.F = ch.F;
    out.noise_power = ch.noise_power;
    out.g.resize(perm.size());
    out.v.resize(perm.size());
    for (size_t i = 0; i < perm.size(); ++i) {
        int j = perm[i];
        if (j < 0 || j >= ch.users())
            throw std::invalid_argument("reorder_users: permutation entry out of range");
        out.g[i] = ch.g[j];
        out.v[i] = ch.v[j];
    }
    return out;
}

bool ordering_ok(const RVector& strengths, double rel_slack) {
    for (Eigen::Index k = 0; k + 1 < strengths.size(); ++k)
        if (strengths(k + 1) < strengths(k) * (1.0 - rel_slack)) return false;
    return true;
}

RVector target_sinrs_siso(const RVector& strengths, const RVector& alpha, double power,
                          double noise) {
    const Eigen::Index k = strengths.size();
    if (alpha.size() != k)
        throw std::invalid_argument("target_sinrs_siso: allocation size mismatch");
    RVector suffix(k + 1);
    suffix(k) = 0.0;
    for (Eigen::Index i = k - 1; i >= 0; --i) suffix(i) = suffix(i + 1) + alpha(i);
    RVector out(k);
    for (Eigen::Index t = 0; t < k; ++t) {
        double worst = std::numeric_limits<double>::infinity();
        for (Eigen::Index u = t; u < k; ++u) {
            double sig = alpha(t) * power * strengths(u);
            double interf = suffix(t + 1) * power * strengths(u);
            worst = std::min(worst, sig / (interf + noise));
        }
        out(t) = worst;
    }
    return out;
}

double maxmin_sinr_siso(const RVector& strengths, const RVector& alpha, double power,
                        double noise) {
    return target_sinrs_siso(strengths, alpha, power, noise).minCoeff();
}

RVector target_sinrs_miso(const std::vector<CRowVector>& rows, const std::vector<CVector>& beams,
                          double noise) {
    const int k = static_cast<int>(rows.size());
    if (static_cast<int>(beams.size()) != k)
        throw std::invalid_argument("target_sinrs_miso: beam count mismatch");
    RMatrix gain(k, k);
    for (int u = 0; u < k; ++u)
        for (int t = 0; t < k; ++t) gain(u, t) = std::norm((rows[u] * beams[t]).value());
    RVector out(k);
    for (int t = 0; t < k; ++t) {
        double worst = std::numeric_limits<double>::infinity();
        for (int u = t; u < k; ++u) {
            double interf = 0.0;
            for (int i = t + 1; i < k; ++i) interf += gain(u, i);
            worst = std::min(worst, gain(u, t) / (interf + noise));
        }
        out(t) = worst;
    }
    return out;
}

double maxmin_sinr_miso(const std::vector<CRowVector>& rows, const std::vector<CVector>& beams,
                        double noise) {
    return target_sinrs_miso(rows, beams, noise).minCoeff();
}

RVector rates_from_sinrs(const RVector& sinrs) {
    return (sinrs.array() + 1.0).log() / std::log(2.0);
}

}  // namespace irsnoma
