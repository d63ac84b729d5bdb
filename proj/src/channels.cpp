// SPDX-License-Identifier: Apache-2.0
#include "irsnoma/channels.hpp"

#include <cmath>

#include "irsnoma/rng.hpp"

namespace irsnoma {

namespace {

struct LinkAngles {
    double azimuth;
    double elevation;
};

// Azimuth in the ground plane, elevation from it, both seen from `from`.
LinkAngles link_angles(const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
    Eigen::Vector3d d = to - from;
    double horiz = std::hypot(d.x(), d.y());
    return {std::atan2(d.y(), d.x()), std::atan2(d.z(), horiz)};
}

}  // namespace

double pathloss(double distance, double exponent, double ref_gain) {
    if (!(distance > 0.0)) throw std::invalid_argument("pathloss: distance must be positive");
    if (ref_gain <= 0.0) throw std::invalid_argument("pathloss: ref_gain must be positive");
    return ref_gain * std::pow(distance, -exponent);
}

CVector steering_ula(double angle, int n, double spacing) {
    if (n < 1) throw std::invalid_argument("steering_ula: n must be >= 1");
    CVector a(n);
    double step = kTwoPi * spacing * std::sin(angle);
    for (int i = 0; i < n; ++i) a(i) = std::polar(1.0, step * i);
    return a;
}

CVector steering_ura(double azimuth, double elevation, UraGrid grid, double spacing) {
    if (grid.rows < 1 || grid.cols < 1)
        throw std::invalid_argument("steering_ura: grid dimensions must be >= 1");
    CVector ar = steering_ula(azimuth, grid.rows, spacing);
    CVector ac = steering_ula(elevation, grid.cols, spacing);
    CVector a(grid.elements());
    for (int p = 0; p < grid.rows; ++p)
        for (int q = 0; q < grid.cols; ++q) a(p * grid.cols + q) = ar(p) * ac(q);
    return a;
}

ChannelSet sample_channels(const Geometry& geo, const ChannelParams& par, int k_users,
                           int n_antennas, std::uint64_t seed) {
    if (k_users < 1) throw std::invalid_argument("sample_channels: k_users must be >= 1");
    if (n_antennas < 1) throw std::invalid_argument("sample_channels: n_antennas must be >= 1");
    if (static_cast<int>(geo.user_positions.size()) != k_users)
        throw std::invalid_argument("sample_channels: geometry has wrong number of user positions");
    if (par.noise_power <= 0.0)
        throw std::invalid_argument("sample_channels: noise power must be positive");
    if (par.rician_k1 < 0.0 || par.rician_k2 < 0.0)
        throw std::invalid_argument("sample_channels: Rician factors must be nonnegative");

    const int m = geo.irs_grid.elements();
    ChannelSet ch;
    ch.noise_power = par.noise_power;
    ch.g.resize(k_users);
    ch.v.resize(k_users);

    // Direct BS-user links: Rayleigh with per-entry power rho_j.
    for (int j = 0; j < k_users; ++j) {
        double d = (geo.user_positions[j] - geo.bs_position).norm();
        double rho = pathloss(d, par.exponent_bs_user, par.pathloss_ref_gain);
        Rng rng(derive_seed(seed, {0x5eed, 1, static_cast<std::uint64_t>(j)}));
        ch.v[j] = std::sqrt(rho) * rng.cgauss_vector(n_antennas);
    }

    // BS-IRS link: Rician around the steering outer product.
    {
        double d = (geo.irs_position - geo.bs_position).norm();
        double kappa = pathloss(d, par.exponent_bs_irs, par.pathloss_ref_gain);
        LinkAngles at_irs = link_angles(geo.irs_position, geo.bs_position);
        LinkAngles at_bs = link_angles(geo.bs_position, geo.irs_position);
        CVector a_irs = steering_ura(at_irs.azimuth, at_irs.elevation, geo.irs_grid,
                                     geo.irs_element_spacing);
        CVector a_bs = steering_ula(at_bs.azimuth, n_antennas, geo.bs_antenna_spacing);
        CMatrix los = a_irs * a_bs.adjoint();
        Rng rng(derive_seed(seed, {0x5eed, 2}));
        CMatrix nlos(m, n_antennas);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < n_antennas; ++c) nlos(r, c) = rng.cgauss();
        double k1 = par.rician_k1;
        ch.F = std::sqrt(kappa * k1 / (k1 + 1.0)) * los + std::sqrt(kappa / (k1 + 1.0)) * nlos;
    }

    // IRS-user links: Rician around the IRS steering vector toward the user.
    for (int j = 0; j < k_users; ++j) {
        double d = (geo.user_positions[j] - geo.irs_position).norm();
        double beta = pathloss(d, par.exponent_irs_user, par.pathloss_ref_gain);
        LinkAngles at_irs = link_angles(geo.irs_position, geo.user_positions[j]);
        CVector los = steering_ura(at_irs.azimuth, at_irs.elevation, geo.irs_grid,
                                   geo.irs_element_spacing);
        Rng rng(derive_seed(seed, {0x5eed, 3, static_cast<std::uint64_t>(j)}));
        double k2 = par.rician_k2;
        ch.g[j] = std::sqrt(beta * k2 / (k2 + 1.0)) * los +
                  std::sqrt(beta / (k2 + 1.0)) * rng.cgauss_vector(m);
    }
    return ch;
}

CRowVector combined_channel(const ChannelSet& ch, const PhaseConfig& phases, int user) {
    if (user < 0 || user >= ch.users())
        throw std::out_of_range("combined_channel: user index out of range");
    if (phases.theta.size() != ch.elements())
        throw std::invalid_argument("combined_channel: phase count does not match IRS elements");
    CRowVector row = ch.v[user].adjoint();
    if (ch.elements() > 0) {
        CVector u(ch.elements());
        for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = std::polar(1.0, phases.theta(i));
        row += (ch.g[user].conjugate().cwiseProduct(u)).transpose() * ch.F;
    }
    return row;
}

RVector combined_strengths(const ChannelSet& ch, const PhaseConfig& phases) {
    RVector s(ch.users());
    for (int j = 0; j < ch.users(); ++j) s(j) = combined_channel(ch, phases, j).squaredNorm();
    return s;
}

}  // namespace irsnoma
