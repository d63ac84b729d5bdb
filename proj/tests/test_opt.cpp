// SPDX-License-Identifier: MIT
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "irsnoma/baselines.hpp"
#include "irsnoma/harness.hpp"
#include "irsnoma/lifting.hpp"
#include "irsnoma/miso.hpp"
#include "irsnoma/ordering.hpp"
#include "irsnoma/rng.hpp"
#include "irsnoma/sdp.hpp"
#include "irsnoma/siso.hpp"
#include "irsnoma/solver.hpp"
#include "support/oracles.hpp"

using namespace irsnoma;

namespace {
const double kPi = kTwoPi / 2.0;

ChannelSet drop(std::uint64_t seed, int m, int n, int k) {
    Geometry geo = default_geometry();
    geo.user_positions = preset_user_pair();
    geo.user_positions.push_back({40.0, 30.0, 1.5});
    geo.user_positions.push_back({28.0, 16.0, 1.5});
    geo.user_positions.resize(k);
    geo.irs_grid = {1, m};
    return sample_channels(geo, ChannelParams{}, k, n, seed);
}

ChannelSet role_sorted(const ChannelSet& ch, const PhaseConfig& phases) {
    RVector s = combined_strengths(ch, phases);
    std::vector<int> perm(ch.users());
    for (int i = 0; i < ch.users(); ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(), [&](int a, int b) { return s(a) < s(b); });
    return reorder_users(ch, perm);
}

double honest_maxmin_miso(const ChannelSet& ch, const PhaseConfig& phases,
                          const std::vector<CVector>& beams) {
    std::vector<CRowVector> rows;
    for (int u = 0; u < ch.users(); ++u) rows.push_back(combined_channel(ch, phases, u));
    return maxmin_sinr_miso(rows, beams, ch.noise_power);
}
}  // namespace

TEST_CASE("power allocation closed cases") {
    RVector s(2);
    s << 1.0, 1.0;
    auto eq = optimal_power_allocation(s, 1.0, 1.0);
    CHECK(std::abs(eq.q - (std::sqrt(2.0) - 1.0)) < 1e-10);
    CHECK(eq.alpha(0) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-9));
    CHECK(eq.alpha(1) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-9));

    s << 1.0, 4.0;
    auto sk = optimal_power_allocation(s, 10.0, 1.0);
    CHECK(std::abs(sk.q - oracles::frozen_skewed_q()) < 1e-10);
    CHECK(sk.alpha(1) == doctest::Approx(oracles::frozen_skewed_alpha_strong()).epsilon(1e-9));
    CHECK(sk.alpha(0) == doctest::Approx(1.0 - oracles::frozen_skewed_alpha_strong()).epsilon(1e-9));
    CHECK(sinr_siso(s, sk.alpha, 10.0, 1.0, 0) == doctest::Approx(4.3007).epsilon(1e-4));
    CHECK(sinr_siso(s, sk.alpha, 10.0, 1.0, 1) == doctest::Approx(4.3007).epsilon(1e-4));
}

TEST_CASE("power allocation matches the fixed-point oracle") {
    Rng r(17);
    for (int inst = 0; inst < 60; ++inst) {
        int k = 2 + static_cast<int>(r.next_u64() % 5);
        std::vector<double> sv(k);
        RVector se(k);
        for (int i = 0; i < k; ++i) sv[i] = std::pow(10.0, -3.0 + 6.0 * r.uniform());
        std::sort(sv.begin(), sv.end());
        for (int i = 0; i < k; ++i) se(i) = sv[i];
        double snr = std::pow(10.0, 6.0 * r.uniform());
        auto pa = optimal_power_allocation(se, snr, 1.0);
        double qo = oracles::fixed_point_q(sv, snr, 1.0);
        CHECK(std::abs(pa.q - qo) / qo < 1e-8);
        CHECK(std::abs(pa.alpha.sum() - 1.0) < 1e-9);
        for (int i = 0; i < k; ++i)
            CHECK(sinr_siso(se, pa.alpha, snr, 1.0, i) == doctest::Approx(pa.q).epsilon(1e-8));
        for (int i = 0; i + 1 < k; ++i) CHECK(pa.alpha(i) >= pa.alpha(i + 1) - 1e-12);
    }
}

TEST_CASE("two-user closed form agrees with the fixed-point oracle") {
    Rng r(23);
    for (int inst = 0; inst < 30; ++inst) {
        double sw = std::pow(10.0, -2.0 + 3.0 * r.uniform());
        double ss = sw * (1.0 + 9.0 * r.uniform());
        double snr = std::pow(10.0, 4.0 * r.uniform());
        double qa = oracles::two_user_balanced_q(sw, ss, snr, 1.0);
        double qb = oracles::fixed_point_q({sw, ss}, snr, 1.0);
        CHECK(qa == doctest::Approx(qb).epsilon(1e-10));
    }
}

TEST_CASE("best strength tracks the dense phase grid") {
    ChannelSet ch = drop(101, 3, 1, 2);
    for (int u = 0; u < 2; ++u) {
        auto [best, phases] = max_combined_strength(ch, u, 400, 11 + u);
        auto [grid_best, grid_phases] = grid_phase_oracle(3, 64, [&](const RVector& th) {
            return combined_strengths(ch, PhaseConfig(th))(u);
        });
        CHECK(best >= 0.95 * grid_best);
        CHECK(best <= 1.05 * grid_best);
        CHECK(combined_strengths(ch, PhaseConfig(phases))(u) == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("user order matches the per-user grid oracle") {
    ChannelSet ch = drop(202, 2, 1, 3);
    auto ord = order_users(ch, 400, 5);
    RVector grid_strength(3);
    for (int u = 0; u < 3; ++u) {
        auto [gb, gp] = grid_phase_oracle(2, 64, [&](const RVector& th) {
            return combined_strengths(ch, PhaseConfig(th))(u);
        });
        grid_strength(u) = gb;
    }
    std::vector<int> expect{0, 1, 2};
    std::sort(expect.begin(), expect.end(),
              [&](int a, int b) { return grid_strength(a) < grid_strength(b); });
    CHECK(ord.permutation == expect);
    for (int i = 0; i + 1 < 3; ++i)
        CHECK(ord.strengths(ord.permutation[i]) <= ord.strengths(ord.permutation[i + 1]) + 1e-12);
}

TEST_CASE("randomized extraction clears the quarter-pi bound") {
    int failures = 0;
    for (int inst = 0; inst < 100; ++inst) {
        int m = 1 + inst % 4;
        ChannelSet ch = drop(300 + inst, m, 1, 2);
        int u = inst % 2;
        auto [best, phases] = max_combined_strength(ch, u, 400, 900 + inst);

        sdp::Problem p;
        int b = p.add_block(m + 1);
        CMatrix cascade = irs_cascade(ch.g[u], ch.F);
        p.add_objective(b, lifted_strength_matrix(cascade, ch.v[u]));
        for (int i = 0; i <= m; ++i) p.fix_diagonal(b, i, 1.0);
        auto sol = sdp::solve(p);
        REQUIRE((sol.status == sdp::Status::Optimal || sol.status == sdp::Status::Feasible));
        double sdr_total = sol.objective_value + ch.v[u].squaredNorm();
        if (best < (kPi / 4.0) * sdr_total - 1e-9) ++failures;
    }
    CHECK(failures == 0);
}

TEST_CASE("co-phasing aligns every reflected term for one user") {
    ChannelSet ch = drop(404, 5, 1, 2);
    RVector th = cophase_heuristic(ch, 1);
    CMatrix cascade = irs_cascade(ch.g[1], ch.F);
    double amp = std::abs(ch.v[1](0));
    for (int m = 0; m < 5; ++m) amp += std::abs(cascade(m, 0));
    double strength = combined_strengths(ch, PhaseConfig(th))(1);
    CHECK(strength == doctest::Approx(amp * amp).epsilon(1e-9));
    CHECK(strength >= combined_strengths(ch, PhaseConfig(RVector::Zero(5)))(1));
}

TEST_CASE("two-user closed-form phases reproduce the direct substitution") {
    ChannelSet ch;
    ch.F = CMatrix::Zero(2, 1);
    ch.F << std::polar(0.8, kPi / 8.0), std::polar(1.3, kPi / 8.0);
    ch.g = {CVector::Zero(2), CVector::Zero(2)};
    ch.g[0] << std::polar(0.5, 0.4), std::polar(0.7, 1.9);
    ch.g[1] << std::polar(0.6, -kPi / 4.0), std::polar(0.9, -kPi / 4.0);
    ch.v = {CVector::Zero(1), CVector::Zero(1)};
    ch.v[0] << std::polar(0.3, 2.2);
    ch.v[1] << std::polar(1.1, -kPi / 2.0);
    ch.noise_power = 1.0;
    PhaseConfig phases = closed_form_phases_two_user(ch);
    for (int i = 0; i < 2; ++i) CHECK(phases.theta(i) == doctest::Approx(kPi / 8.0).epsilon(1e-9));
    double amp = std::abs(ch.v[1](0));
    CMatrix cascade = irs_cascade(ch.g[1], ch.F);
    for (int m = 0; m < 2; ++m) amp += std::abs(cascade(m, 0));
    CHECK(combined_strengths(ch, phases)(1) == doctest::Approx(amp * amp).epsilon(1e-9));
}

TEST_CASE("closed-form pipeline approaches the full solver at high power") {
    ChannelSet ch = drop(515, 8, 1, 2);
    SolverConfig cfg;
    cfg.power = dbm_to_watt(40.0);
    cfg.seed = 515;
    auto ord = order_users(ch, 400, 515);
    auto res = solve_siso(ch, ord, cfg);

    ChannelSet ro = reorder_users(ch, ord.permutation);
    PhaseConfig cf = closed_form_phases_two_user(ro);
    RVector s = combined_strengths(ro, cf);
    auto pa = optimal_power_allocation(s, cfg.power, ro.noise_power);
    double q_cf = maxmin_sinr_siso(s, pa.alpha, cfg.power, ro.noise_power);
    double rate_cf = std::log2(1.0 + q_cf);
    double rate_full = std::log2(1.0 + res.q);
    CHECK(std::abs(rate_cf - rate_full) / rate_full < 0.02);
}

TEST_CASE("bisection helper brackets a threshold predicate") {
    auto out = bisect_max_feasible(0.0, 10.0, 1e-7, [](double q) { return q <= 3.7; });
    CHECK(out.any_feasible);
    CHECK(out.q == doctest::Approx(3.7).epsilon(1e-5));
    CHECK(out.probes <= 64);
    auto none = bisect_max_feasible(5.0, 10.0, 1e-7, [](double q) { return q < 1.0; });
    CHECK_FALSE(none.any_feasible);
}

TEST_CASE("balanced allocations saturate the pairwise worst case") {
    RVector s(3);
    s << 0.5, 2.0, 9.0;
    auto pa = optimal_power_allocation(s, 4.0, 1.0);
    double mm = maxmin_sinr_siso(s, pa.alpha, 4.0, 1.0);
    CHECK(mm == doctest::Approx(pa.q).epsilon(1e-8));
    RVector tg = target_sinrs_siso(s, pa.alpha, 4.0, 1.0);
    for (int t = 0; t < 3; ++t) {
        CHECK(tg(t) <= sinr_siso(s, pa.alpha, 4.0, 1.0, t) + 1e-12);
        CHECK(tg(t) >= mm - 1e-9);
    }
    RVector rates = rates_from_sinrs(tg);
    for (int t = 0; t < 3; ++t) CHECK(rates(t) == doctest::Approx(std::log2(1.0 + tg(t))));
}

TEST_CASE("reorder and ordering checks") {
    ChannelSet ch = drop(612, 3, 2, 3);
    std::vector<int> perm{2, 0, 1};
    ChannelSet ro = reorder_users(ch, perm);
    CHECK((ro.v[0] - ch.v[2]).norm() == 0.0);
    CHECK((ro.g[1] - ch.g[0]).norm() == 0.0);
    CHECK((ro.F - ch.F).norm() == 0.0);
    RVector up(3), down(3);
    up << 1.0, 2.0, 3.0;
    down << 1.0, 3.0, 2.0;
    CHECK(ordering_ok(up));
    CHECK_FALSE(ordering_ok(down));
}

TEST_CASE("phase step never falls below its incumbent") {
    ChannelSet ch = drop(710, 4, 1, 2);
    auto ord = order_users(ch, 200, 7);
    ChannelSet ro = reorder_users(ch, ord.permutation);
    SolverConfig cfg;
    cfg.power = dbm_to_watt(20.0);
    cfg.seed = 3;
    RVector s0 = combined_strengths(ro, PhaseConfig(RVector::Zero(4)));
    auto pa = optimal_power_allocation(s0, cfg.power, ro.noise_power);
    double q0 = maxmin_sinr_siso(s0, pa.alpha, cfg.power, ro.noise_power);
    auto step = phase_opt_siso(ro, pa.alpha, cfg, PhaseConfig(RVector::Zero(4)), q0);
    CHECK(step.q >= q0 - 1e-12);
    auto again = phase_opt_siso(ro, pa.alpha, cfg, step.phases, step.q);
    CHECK(again.q >= step.q - 1e-12);
}

TEST_CASE("single-antenna solve tracks the joint grid oracle") {
    SolverConfig cfg;
    cfg.power = dbm_to_watt(30.0);
    for (int m : {2, 4}) {
        ChannelSet ch = drop(820 + m, m, 1, 2);
        cfg.seed = 21 + m;
        auto ord = order_users(ch, 400, 13 + m);
        auto res = solve_siso(ch, ord, cfg);
        auto [qg, pg] = grid_phase_oracle(m, 64, [&](const RVector& th) {
            RVector s = combined_strengths(ch, PhaseConfig(th));
            double lo = std::min(s(0), s(1)), hi = std::max(s(0), s(1));
            return oracles::two_user_balanced_q(lo, hi, cfg.power, ch.noise_power);
        });
        CHECK(res.q >= 0.95 * qg);
        CHECK(res.q <= 1.05 * qg);
    }
}

TEST_CASE("single-antenna solve invariants") {
    ChannelSet ch = drop(911, 6, 1, 2);
    SolverConfig cfg;
    cfg.power = dbm_to_watt(10.0);
    cfg.seed = 4;
    auto ord = order_users(ch, 400, 9);
    auto res = solve_siso(ch, ord, cfg);
    REQUIRE(res.q_trace.size() >= 1);
    for (std::size_t i = 1; i < res.q_trace.size(); ++i)
        CHECK(res.q_trace[i] >= res.q_trace[i - 1] - 1e-9 * std::max(1.0, res.q_trace[i - 1]));
    CHECK(res.q == doctest::Approx(res.q_trace.back()));
    CHECK(std::abs(res.alpha.sum() - 1.0) < 1e-9);
    CHECK(res.rates.minCoeff() == doctest::Approx(std::log2(1.0 + res.q)).epsilon(1e-9));
    std::vector<int> sorted = res.user_order;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1});
}

TEST_CASE("multi-antenna pair sinr reduces to the scalar form") {
    ChannelSet ch = drop(1020, 3, 1, 3);
    ChannelSet ro = role_sorted(ch, PhaseConfig(RVector::Zero(3)));
    RVector s = combined_strengths(ro, PhaseConfig(RVector::Zero(3)));
    RVector alpha(3);
    alpha << 0.6, 0.3, 0.1;
    double power = 2.5;
    std::vector<CVector> beams;
    for (int k = 0; k < 3; ++k)
        beams.push_back(CVector::Constant(1, Complex(std::sqrt(alpha(k) * power), 0.0)));
    PhaseConfig zero(RVector::Zero(3));
    for (int k = 0; k < 3; ++k) {
        double a = sinr_miso(ro, zero, beams, k, k);
        double b = sinr_siso(s, alpha, power, ro.noise_power, k);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
    std::vector<CRowVector> rows;
    for (int u = 0; u < 3; ++u) rows.push_back(combined_channel(ro, zero, u));
    CHECK(maxmin_sinr_miso(rows, beams, ro.noise_power) ==
          doctest::Approx(maxmin_sinr_siso(s, alpha, power, ro.noise_power)).epsilon(1e-12));
    CHECK_THROWS_AS(sinr_miso(ro, zero, beams, 2, 0), std::invalid_argument);
}

TEST_CASE("multi-antenna phase step agrees with the scalar step at one antenna") {
    ChannelSet ch = drop(1130, 4, 1, 2);
    auto ord = order_users(ch, 200, 31);
    ChannelSet ro = reorder_users(ch, ord.permutation);
    SolverConfig cfg;
    cfg.power = dbm_to_watt(10.0);
    cfg.seed = 77;
    RVector s0 = combined_strengths(ro, PhaseConfig(RVector::Zero(4)));
    auto pa = optimal_power_allocation(s0, cfg.power, ro.noise_power);
    double q0 = maxmin_sinr_siso(s0, pa.alpha, cfg.power, ro.noise_power);
    auto scalar = phase_opt_siso(ro, pa.alpha, cfg, PhaseConfig(RVector::Zero(4)), q0);
    std::vector<CVector> beams;
    for (int k = 0; k < 2; ++k)
        beams.push_back(CVector::Constant(1, Complex(std::sqrt(pa.alpha(k) * cfg.power), 0.0)));
    auto vec = phase_opt_miso(ro, beams, cfg, PhaseConfig(RVector::Zero(4)), q0);
    CHECK(vec.q == doctest::Approx(scalar.q).epsilon(0.05));
}

TEST_CASE("multi-antenna phase step tracks the grid with fixed beams") {
    ChannelSet ch = drop(1240, 2, 2, 2);
    ChannelSet ro = role_sorted(ch, PhaseConfig(RVector::Zero(2)));
    SolverConfig cfg;
    cfg.power = dbm_to_watt(10.0);
    cfg.seed = 5;
    Rng r(55);
    std::vector<CVector> beams{r.cgauss_vector(2), r.cgauss_vector(2)};
    double tot = beams[0].squaredNorm() + beams[1].squaredNorm();
    for (auto& b : beams) b *= std::sqrt(cfg.power / tot);
    double q0 = honest_maxmin_miso(ro, PhaseConfig(RVector::Zero(2)), beams);
    auto step = phase_opt_miso(ro, beams, cfg, PhaseConfig(RVector::Zero(2)), q0);
    auto [qg, pg] = grid_phase_oracle(2, 64, [&](const RVector& th) {
        return honest_maxmin_miso(ro, PhaseConfig(th), beams);
    });
    CHECK(step.q >= 0.95 * qg);
    CHECK(step.q <= 1.05 * qg);
}

TEST_CASE("beam step reduces to the closed-form split at one antenna") {
    ChannelSet ch = drop(1360, 4, 1, 2);
    ChannelSet ro = role_sorted(ch, PhaseConfig(RVector::Zero(4)));
    SolverConfig cfg;
    cfg.power = dbm_to_watt(10.0);
    cfg.eps_bisect = 1e-8;
    auto out = beamforming_opt(ro, PhaseConfig(RVector::Zero(4)), cfg);
    RVector s = combined_strengths(ro, PhaseConfig(RVector::Zero(4)));
    auto pa = optimal_power_allocation(s, cfg.power, ro.noise_power);
    CHECK(std::abs(out.q - pa.q) / pa.q < 1e-6);
}

TEST_CASE("identical users collapse the beam step to a scalar problem") {
    Rng r(1470);
    ChannelSet ch;
    ch.F = CMatrix::Zero(0, 2);
    ch.g = {CVector::Zero(0), CVector::Zero(0)};
    CVector v = 1e-6 * r.cgauss_vector(2);
    ch.v = {v, v};
    ch.noise_power = 1e-13;
    SolverConfig cfg;
    cfg.power = dbm_to_watt(10.0);
    cfg.eps_bisect = 1e-8;
    auto out = beamforming_opt(ch, PhaseConfig(RVector::Zero(0)), cfg);
    RVector s(2);
    s << v.squaredNorm(), v.squaredNorm();
    auto pa = optimal_power_allocation(s, cfg.power, ch.noise_power);
    CHECK(std::abs(out.q - pa.q) / pa.q < 1e-6);
}

TEST_CASE("beam extraction keeps most of the relaxed target") {
    int ok = 0;
    int rank_bound = 0;
    for (int inst = 0; inst < 100; ++inst) {
        ChannelSet ch = drop(1500 + inst, 2, 2, 2);
        ChannelSet ro = role_sorted(ch, PhaseConfig(RVector::Zero(2)));
        SolverConfig cfg;
        cfg.power = dbm_to_watt(10.0);
        auto relaxed = beamforming_opt(ro, PhaseConfig(RVector::Zero(2)), cfg);
        auto beams = extract_beams(relaxed.beams, ro, PhaseConfig(RVector::Zero(2)), cfg.power,
                                   400, 2200 + inst);
        double q = honest_maxmin_miso(ro, PhaseConfig(RVector::Zero(2)), beams.omegas);
        if (q >= 0.8 * relaxed.q) ++ok;
        auto ranks = rank_profile(relaxed.beams, 1e-6);
        if (*std::max_element(ranks.begin(), ranks.end()) <= 2) ++rank_bound;
        double used = 0.0;
        for (const auto& w : beams.omegas) used += w.squaredNorm();
        CHECK(used <= cfg.power * (1.0 + 1e-9));
    }
    CHECK(ok >= 90);
    CHECK(rank_bound == 100);
}

TEST_CASE("multi-antenna solve matches the scalar solve at one antenna") {
    ChannelSet ch = drop(1650, 4, 1, 2);
    SolverConfig cfg;
    cfg.power = dbm_to_watt(10.0);
    cfg.seed = 12;
    auto ord = order_users(ch, 400, 6);
    auto a = solve_siso(ch, ord, cfg);
    auto b = solve_miso(ch, ord, cfg);
    CHECK(b.q == doctest::Approx(a.q).epsilon(0.05));
}

TEST_CASE("multi-antenna solve invariants") {
    ChannelSet ch = drop(1760, 4, 2, 2);
    SolverConfig cfg;
    cfg.power = dbm_to_watt(10.0);
    cfg.seed = 8;
    auto ord = order_users(ch, 400, 14);
    auto res = solve_miso(ch, ord, cfg);
    REQUIRE(res.q_trace.size() >= 1);
    for (std::size_t i = 1; i < res.q_trace.size(); ++i)
        CHECK(res.q_trace[i] >= res.q_trace[i - 1] - 1e-9 * std::max(1.0, res.q_trace[i - 1]));
    CHECK(res.q == doctest::Approx(res.q_trace.back()));
    REQUIRE(res.beams.size() == 2);
    double used = 0.0;
    for (const auto& w : res.beams) used += w.squaredNorm();
    CHECK(used <= cfg.power * (1.0 + 1e-9));
    CHECK(res.rates.minCoeff() == doctest::Approx(std::log2(1.0 + res.q)).epsilon(1e-9));
}
