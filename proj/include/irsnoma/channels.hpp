// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "irsnoma/core.hpp"

namespace irsnoma {

struct UraGrid {
    int rows = 1;
    int cols = 1;
    int elements() const { return rows * cols; }
};

struct Geometry {
    Eigen::Vector3d bs_position{0.0, 0.0, 0.0};
    Eigen::Vector3d irs_position{0.0, 0.0, 0.0};
    std::vector<Eigen::Vector3d> user_positions;
    double carrier_frequency_hz = 2.5e9;
    double bs_antenna_spacing = 0.5;   // in wavelengths
    double irs_element_spacing = 0.125;  // in wavelengths
    UraGrid irs_grid;
};

struct ChannelParams {
    double pathloss_ref_gain = 1e-3;  // gain at 1 m
    double exponent_bs_user = 4.0;
    double exponent_bs_irs = 2.0;
    double exponent_irs_user = 2.5;
    double rician_k1 = 10.0;  // BS-IRS Rician factor
    double rician_k2 = 10.0;  // IRS-user Rician factor
    double noise_power = 3.9810717055349725e-15;  // watts, -114 dBm
};

// One fading realization.  g[j] and v[j] are the IRS-user and BS-user links
// of user j; F is the BS-IRS matrix (elements x antennas).
struct ChannelSet {
    CMatrix F;                  // M x N
    std::vector<CVector> g;     // K vectors of length M
    std::vector<CVector> v;     // K vectors of length N
    double noise_power = 0.0;
    int elements() const { return static_cast<int>(F.rows()); }
    int antennas() const { return static_cast<int>(F.cols()); }
    int users() const { return static_cast<int>(v.size()); }
};

// IRS phase profile.  lifted, when present, is the rank-1 lift of theta used
// by the semidefinite relaxations.
struct PhaseConfig {
    RVector theta;  // each in [0, 2*pi)
    std::optional<CMatrix> lifted;
    PhaseConfig() = default;
    explicit PhaseConfig(RVector t) : theta(std::move(t)) {}
};

// Distance-power-law channel gain.  Throws std::invalid_argument for d <= 0.
double pathloss(double distance, double exponent, double ref_gain);

// Far-field uniform linear array response; element i carries phase
// 2*pi*spacing*i*sin(angle), spacing in wavelengths.
CVector steering_ula(double angle, int n, double spacing);

// Uniform rectangular array response: Kronecker product of the row-axis ULA
// response at the azimuth and the column-axis ULA response at the elevation,
// flattened row-major.
CVector steering_ura(double azimuth, double elevation, UraGrid grid, double spacing);

// Draws one Rician/Rayleigh channel realization.  Deterministic in seed.
ChannelSet sample_channels(const Geometry& geo, const ChannelParams& par, int k_users,
                           int n_antennas, std::uint64_t seed);

// Effective downlink row h_k^H = g_k^H diag(e^{j theta}) F + v_k^H.
CRowVector combined_channel(const ChannelSet& ch, const PhaseConfig& phases, int user);

// Squared norm of the effective row for each user at the given phases.
RVector combined_strengths(const ChannelSet& ch, const PhaseConfig& phases);

}  // namespace irsnoma
