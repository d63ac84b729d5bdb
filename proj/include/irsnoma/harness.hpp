// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "irsnoma/channels.hpp"
#include "irsnoma/core.hpp"
#include "irsnoma/solver.hpp"

namespace irsnoma {

// Reference deployment: base station at the origin, surface 50 m away along
// the diagonal, both 10 m high.
Geometry default_geometry();

// Reference user pair for the two-user scenario.
std::vector<Eigen::Vector3d> preset_user_pair();

struct SweepSpec {
    std::string parameter;  // "power_dbm", "elements" or "bits"; empty: none
    std::vector<double> values;
};

// One experiment description.  Defaults reproduce the two-user reference
// scenario; the JSON loader rejects unknown keys and version mismatches.
struct ExperimentConfig {
    int users = 2;
    int antennas = 1;
    int elements = 8;
    int irs_rows = 0;  // 0 picks the near-square grid factor
    double power_dbm = 30.0;
    double noise_dbm = -114.0;
    int trials = 1;
    std::uint64_t seed = 1;
    int threads = 1;
    std::vector<std::string> schemes{"irs-noma"};
    std::string mode = "auto";  // auto, siso or miso solver family for superposition schemes
    int bits = 0;  // 0 keeps phases continuous
    SweepSpec sweep;
    bool oma_per_slot_phases = false;
    bool timing = false;  // runtime_ms stays zero when off, keeping output byte-stable
    bool random_drops = false;  // redraw user positions per trial even for two users
    std::vector<Eigen::Vector3d> user_positions;  // empty: preset pair or random drops
    std::array<double, 4> drop_region{20.0, 55.0, 10.0, 35.0};  // x min/max, y min/max
    double drop_height = 1.5;
    Geometry geometry = default_geometry();
    ChannelParams channel;
    SolverConfig solver;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Consistency checks shared by the loader and programmatic construction.
// Throws std::invalid_argument with a reason.
void validate_config(const ExperimentConfig& cfg);

struct ResultRow {
    int trial = 0;
    double sweep_value = 0.0;
    std::string scheme;
    int user_index = 0;  // original user id
    double rate = 0.0;
    double q_linear = 0.0;
    int iterations = 0;
    double runtime_ms = 0.0;
    std::uint64_t seed = 0;
    std::string status;  // ok, flag, cap or error
};

// Runs every (sweep value, trial, scheme) cell.  Rows come back sorted by
// sweep value, then trial, then scheme order of the config, then user.
// Bit-identical for a fixed config, independent of the thread count.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

// The channel realization one experiment cell would draw, before any sweep
// override is applied.
ChannelSet channels_for_trial(const ExperimentConfig& cfg, int trial);

std::string csv_header();
void write_csv(const std::vector<ResultRow>& rows, std::ostream& os);

// Re-evaluates a finished solve with its phases snapped to 2^bits levels;
// the single-antenna path re-balances powers, the multi-antenna path keeps
// its beams.
SolveResult with_quantized_phases(const SolveResult& res, const ChannelSet& ch, double power,
                                  int bits);

// Brute-force decode-order search over all user permutations (up to 5
// users); ties keep the lexicographically first maximizer.
std::pair<double, std::vector<int>> exhaustive_order_oracle(
    int users, const std::function<double(const std::vector<int>&)>& evaluate);

// Brute-force phase search on the uniform grid with the given level count
// per element; the enumeration is capped at about 2e7 points.
std::pair<double, RVector> grid_phase_oracle(
    int elements, int levels, const std::function<double(const RVector&)>& evaluate);

}  // namespace irsnoma
