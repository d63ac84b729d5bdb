// SPDX-License-Identifier: MIT
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "irsnoma/baselines.hpp"
#include "irsnoma/harness.hpp"
#include "irsnoma/miso.hpp"
#include "irsnoma/ordering.hpp"
#include "irsnoma/siso.hpp"
#include "support/oracles.hpp"

using namespace irsnoma;

namespace {
ChannelSet direct_pair(double s0, double s1, double noise) {
    ChannelSet ch;
    ch.F = CMatrix::Zero(0, 1);
    ch.g = {CVector::Zero(0), CVector::Zero(0)};
    ch.v = {CVector::Constant(1, Complex(std::sqrt(s0), 0.0)),
            CVector::Constant(1, Complex(std::sqrt(s1), 0.0))};
    ch.noise_power = noise;
    return ch;
}

std::string csv_of(const ExperimentConfig& cfg) {
    std::ostringstream os;
    write_csv(run_experiment(cfg), os);
    return os.str();
}
}  // namespace

TEST_CASE("phase quantization snaps to the nearest level") {
    RVector th(3);
    th << kTwoPi - 0.01, 0.01, kTwoPi / 4.0 + 0.02;
    RVector q1 = quantize_phases(th, 1);
    CHECK(q1(0) == doctest::Approx(0.0));
    CHECK(q1(1) == doctest::Approx(0.0));
    CHECK(q1(2) == doctest::Approx(kTwoPi / 2.0));
    RVector q2 = quantize_phases(th, 2);
    CHECK(q2(2) == doctest::Approx(kTwoPi / 4.0));
    RVector q8 = quantize_phases(th, 8);
    CHECK(std::abs(q8(2) - th(2)) <= kTwoPi / 512.0 + 1e-12);
    CHECK_THROWS_AS(quantize_phases(th, 0), std::invalid_argument);
    CHECK_THROWS_AS(quantize_phases(th, 31), std::invalid_argument);
}

TEST_CASE("removing the surface keeps only direct links") {
    Geometry geo = default_geometry();
    geo.user_positions = preset_user_pair();
    geo.irs_grid = {2, 2};
    ChannelSet ch = sample_channels(geo, ChannelParams{}, 2, 3, 9);
    ChannelSet bare = without_irs(ch);
    CHECK(bare.elements() == 0);
    CHECK(bare.antennas() == 3);
    CHECK(bare.users() == 2);
    CHECK((bare.v[0] - ch.v[0]).norm() == 0.0);
    CHECK(bare.noise_power == ch.noise_power);
}

TEST_CASE("superposition without the surface hits the closed two-user value") {
    ChannelSet ch = direct_pair(1.0, 1.0, 1.0);
    SolverConfig cfg;
    cfg.power = 1.0;
    auto res = noma_no_irs(ch, cfg);
    CHECK(std::abs(res.q - (std::sqrt(2.0) - 1.0)) < 1e-9);
}

TEST_CASE("time-division allocation on fixed gains") {
    RVector s1(1);
    s1 << 3.0;
    auto single = oma_maxmin(s1, 2.0, 1.0);
    CHECK(single.rate == doctest::Approx(std::log2(7.0)).epsilon(1e-9));
    CHECK(single.tau(0) == doctest::Approx(1.0));

    RVector s(2);
    s << 1.0, 4.0;
    auto res = oma_maxmin(s, 10.0, 1.0);
    double grid = oracles::tdma_grid_rate({1.0, 4.0}, 10.0, 1.0);
    CHECK(res.rate == doctest::Approx(grid).epsilon(0.01));
    CHECK(res.tau.sum() == doctest::Approx(1.0).epsilon(1e-8));
    double energy = res.tau(0) * res.slot_powers(0) + res.tau(1) * res.slot_powers(1);
    CHECK(energy <= 10.0 * (1.0 + 1e-6));
    for (int k = 0; k < 2; ++k) {
        double rk = res.tau(k) * std::log2(1.0 + res.slot_powers(k) * s(k) / 1.0);
        CHECK(rk == doctest::Approx(res.rate).epsilon(1e-6));
    }
}

TEST_CASE("per-slot reflection outperforms a shared profile and no surface") {
    Geometry geo = default_geometry();
    geo.user_positions = preset_user_pair();
    geo.irs_grid = {1, 6};
    ChannelSet ch = sample_channels(geo, ChannelParams{}, 2, 1, 33);
    SolverConfig cfg;
    cfg.power = dbm_to_watt(10.0);
    cfg.seed = 2;
    auto per_slot = oma_maxmin(ch, cfg, true, true);
    auto shared = oma_maxmin(ch, cfg, true, false);
    auto off = oma_maxmin(ch, cfg, false, false);
    CHECK(per_slot.rate >= shared.rate - 1e-6);
    CHECK(per_slot.rate >= off.rate - 1e-6);
    CHECK(shared.phases.theta.size() == 6);
    CHECK(per_slot.strengths.minCoeff() > 0.0);
}

TEST_CASE("config parsing applies defaults and rejects unknown keys") {
    auto cfg = parse_config_text(R"({"version": 1})");
    CHECK(cfg.users == 2);
    CHECK(cfg.antennas == 1);
    CHECK(cfg.elements == 8);
    CHECK(cfg.power_dbm == doctest::Approx(30.0));
    CHECK(cfg.noise_dbm == doctest::Approx(-114.0));
    CHECK(cfg.schemes == std::vector<std::string>{"irs-noma"});

    auto full = parse_config_text(R"({
        "version": 1, "users": 3, "antennas": 2, "elements": 4, "power_dbm": 10,
        "trials": 5, "seed": 9, "schemes": ["oma", "noma"], "mode": "miso",
        "bits": 2, "sweep": {"parameter": "power_dbm", "values": [0, 10, 20]},
        "solver": {"eps": 0.02, "iteration_cap": 10}
    })");
    CHECK(full.users == 3);
    CHECK(full.sweep.values.size() == 3);
    CHECK(full.solver.eps == doctest::Approx(0.02));
    CHECK(full.solver.iteration_cap == 10);

    CHECK_THROWS_AS(parse_config_text(R"({"version": 2})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text(R"({"users": 2})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text(R"({"version": 1, "typo_key": 3})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text(R"({"version": 1, "users": 1.5})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("not json"), std::invalid_argument);
}

TEST_CASE("config validation rejects inconsistent requests") {
    ExperimentConfig cfg;
    cfg.users = 0;
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
    cfg = {};
    cfg.schemes = {"carrier-pigeon"};
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
    cfg = {};
    cfg.mode = "siso";
    cfg.antennas = 2;
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
    cfg = {};
    cfg.sweep = {"elements", {4.0, 8.5}};
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
    cfg = {};
    cfg.sweep = {"carrier", {1.0}};
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
    cfg = {};
    cfg.bits = 9;
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
    cfg = {};
    cfg.threads = 0;
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
    cfg = {};
    cfg.user_positions = {{1.0, 2.0, 1.5}};
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
    cfg = {};
    validate_config(cfg);
}

TEST_CASE("channel draws are per-trial deterministic") {
    ExperimentConfig cfg;
    cfg.elements = 4;
    ChannelSet a = channels_for_trial(cfg, 3);
    ChannelSet b = channels_for_trial(cfg, 3);
    ChannelSet c = channels_for_trial(cfg, 4);
    CHECK((a.F - b.F).norm() == 0.0);
    CHECK((a.v[0] - b.v[0]).norm() == 0.0);
    CHECK((a.F - c.F).norm() > 0.0);
}

TEST_CASE("experiment rows are ordered, complete and byte-stable") {
    ExperimentConfig cfg;
    cfg.elements = 2;
    cfg.trials = 2;
    cfg.power_dbm = 10.0;
    cfg.schemes = {"irs-noma", "irs-oma", "noma", "oma"};
    cfg.solver.randomization_trials = 100;
    auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 2 * 4 * 2);
    for (const auto& r : rows) CHECK(r.status == "ok");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &p = rows[i - 1], &q = rows[i];
        bool ordered = p.trial < q.trial ||
                       (p.trial == q.trial && (p.scheme != q.scheme || p.user_index < q.user_index));
        CHECK(ordered);
    }
    std::string once = csv_of(cfg);
    CHECK(once == csv_of(cfg));
    ExperimentConfig par = cfg;
    par.threads = 3;
    CHECK(once == csv_of(par));
    CHECK(once.rfind(csv_header(), 0) == 0);
    ExperimentConfig timed = cfg;
    timed.timing = true;
    auto trows = run_experiment(timed);
    bool any_time = false;
    for (const auto& r : trows) any_time = any_time || r.runtime_ms > 0.0;
    CHECK(any_time);
    for (const auto& r : rows) CHECK(r.runtime_ms == 0.0);
}

TEST_CASE("sweep cells override the swept parameter") {
    ExperimentConfig cfg;
    cfg.elements = 2;
    cfg.trials = 1;
    cfg.schemes = {"oma"};
    cfg.sweep = {"power_dbm", {0.0, 20.0}};
    auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].sweep_value == doctest::Approx(0.0));
    CHECK(rows[2].sweep_value == doctest::Approx(20.0));
    CHECK(rows[2].rate > rows[0].rate);
}

TEST_CASE("quantized re-evaluation stays close at fine resolution") {
    ExperimentConfig cfg;
    cfg.elements = 6;
    cfg.power_dbm = 10.0;
    ChannelSet ch = channels_for_trial(cfg, 0);
    SolverConfig scfg = cfg.solver;
    scfg.power = dbm_to_watt(cfg.power_dbm);
    scfg.seed = 4;
    auto ord = order_users(ch, scfg.randomization_trials, 19);
    auto res = solve_siso(ch, ord, scfg);
    auto q8 = with_quantized_phases(res, ch, scfg.power, 8);
    CHECK(q8.rates.minCoeff() ==
          doctest::Approx(res.rates.minCoeff()).epsilon(0.02));
    auto q1 = with_quantized_phases(res, ch, scfg.power, 1);
    CHECK(q1.rates.minCoeff() <= res.rates.minCoeff() + 1e-9);
    for (int i = 0; i < q1.phases.theta.size(); ++i) {
        double t = q1.phases.theta(i);
        CHECK((std::abs(t) < 1e-12 || std::abs(t - kTwoPi / 2.0) < 1e-12));
    }
}

TEST_CASE("permutation oracle keeps the first maximizer on ties") {
    auto [best, perm] = exhaustive_order_oracle(3, [](const std::vector<int>& p) {
        return (p[0] == 2) ? 5.0 : 1.0;
    });
    CHECK(best == doctest::Approx(5.0));
    CHECK(perm == std::vector<int>{2, 0, 1});
    auto [tied, first] = exhaustive_order_oracle(3, [](const std::vector<int>&) { return 1.0; });
    CHECK(first == std::vector<int>{0, 1, 2});
}

TEST_CASE("grid oracle enumerates every level combination") {
    int calls = 0;
    auto [best, th] = grid_phase_oracle(2, 3, [&](const RVector& t) {
        ++calls;
        return std::cos(t(0)) + std::cos(t(1) - kTwoPi / 3.0);
    });
    CHECK(calls == 9);
    CHECK(best == doctest::Approx(2.0));
    CHECK(th(0) == doctest::Approx(0.0));
    CHECK(th(1) == doctest::Approx(kTwoPi / 3.0));
}

TEST_CASE("joint design beats every benchmark at desk scale") {
    ExperimentConfig cfg;
    cfg.antennas = 2;
    cfg.elements = 4;
    cfg.power_dbm = 10.0;
    cfg.trials = 100;
    cfg.seed = 3;
    cfg.schemes = {"irs-noma", "irs-oma", "noma", "oma"};
    cfg.oma_per_slot_phases = true;
    cfg.solver.randomization_trials = 200;
    auto rows = run_experiment(cfg);
    std::map<std::string, double> worst_sum;
    std::map<std::string, int> n;
    std::map<std::pair<int, std::string>, double> cell_min;
    for (const auto& r : rows) {
        CHECK(r.status != "error");
        auto key = std::make_pair(r.trial, r.scheme);
        auto it = cell_min.find(key);
        if (it == cell_min.end())
            cell_min[key] = r.rate;
        else
            it->second = std::min(it->second, r.rate);
    }
    for (const auto& [key, rate] : cell_min) {
        worst_sum[key.second] += rate;
        n[key.second] += 1;
    }
    for (const auto& [scheme, count] : n) CHECK(count == 100);
    double joint = worst_sum["irs-noma"];
    CHECK(joint > worst_sum["irs-oma"]);
    CHECK(joint > worst_sum["noma"]);
    CHECK(joint > worst_sum["oma"]);
}
