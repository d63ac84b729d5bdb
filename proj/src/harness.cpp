// SPDX-License-Identifier: Apache-2.0
#include "irsnoma/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "irsnoma/baselines.hpp"
#include "irsnoma/miso.hpp"
#include "irsnoma/ordering.hpp"
#include "irsnoma/rng.hpp"
#include "irsnoma/siso.hpp"

namespace irsnoma {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument("config: " + msg); }

void check_keys(const json& j, const char* where,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (item.key() == a) {
                known = true;
                break;
            }
        if (!known) bad("unknown key '" + item.key() + "' in " + where);
    }
}

double as_number(const json& j, const char* name) {
    if (!j.is_number()) bad(std::string("'") + name + "' must be a number");
    return j.get<double>();
}

int as_int(const json& j, const char* name) {
    if (!j.is_number_integer()) bad(std::string("'") + name + "' must be an integer");
    return j.get<int>();
}

bool as_bool(const json& j, const char* name) {
    if (!j.is_boolean()) bad(std::string("'") + name + "' must be a boolean");
    return j.get<bool>();
}

std::uint64_t as_seed(const json& j, const char* name) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    bad(std::string("'") + name + "' must be a nonnegative integer");
}

Eigen::Vector3d as_vec3(const json& j, const char* name) {
    if (!j.is_array() || j.size() != 3) bad(std::string("'") + name + "' must have 3 entries");
    Eigen::Vector3d v;
    for (int i = 0; i < 3; ++i) v(i) = as_number(j[i], name);
    return v;
}

const std::vector<std::string>& known_schemes() {
    static const std::vector<std::string> s{"irs-noma", "irs-oma", "noma", "oma"};
    return s;
}

ExperimentConfig parse_config_json(const json& j) {
    if (!j.is_object()) bad("top level must be an object");
    check_keys(j, "top level",
               {"version", "users", "antennas", "elements", "irs_rows", "power_dbm",
                "noise_dbm", "trials", "seed", "threads", "schemes", "mode", "bits",
                "sweep", "oma_per_slot_phases", "timing", "random_drops", "user_positions",
                "drop_region", "drop_height", "solver", "geometry", "channel"});
    if (!j.contains("version")) bad("missing 'version'");
    if (as_int(j.at("version"), "version") != 1) bad("unsupported 'version', expected 1");

    ExperimentConfig cfg;
    if (j.contains("users")) cfg.users = as_int(j.at("users"), "users");
    if (j.contains("antennas")) cfg.antennas = as_int(j.at("antennas"), "antennas");
    if (j.contains("elements")) cfg.elements = as_int(j.at("elements"), "elements");
    if (j.contains("irs_rows")) cfg.irs_rows = as_int(j.at("irs_rows"), "irs_rows");
    if (j.contains("power_dbm")) cfg.power_dbm = as_number(j.at("power_dbm"), "power_dbm");
    if (j.contains("noise_dbm")) cfg.noise_dbm = as_number(j.at("noise_dbm"), "noise_dbm");
    if (j.contains("trials")) cfg.trials = as_int(j.at("trials"), "trials");
    if (j.contains("seed")) cfg.seed = as_seed(j.at("seed"), "seed");
    if (j.contains("threads")) cfg.threads = as_int(j.at("threads"), "threads");
    if (j.contains("bits")) cfg.bits = as_int(j.at("bits"), "bits");
    if (j.contains("mode")) {
        if (!j.at("mode").is_string()) bad("'mode' must be a string");
        cfg.mode = j.at("mode").get<std::string>();
    }
    if (j.contains("oma_per_slot_phases"))
        cfg.oma_per_slot_phases = as_bool(j.at("oma_per_slot_phases"), "oma_per_slot_phases");
    if (j.contains("timing")) cfg.timing = as_bool(j.at("timing"), "timing");
    if (j.contains("random_drops"))
        cfg.random_drops = as_bool(j.at("random_drops"), "random_drops");
    if (j.contains("drop_height")) cfg.drop_height = as_number(j.at("drop_height"), "drop_height");

    if (j.contains("schemes")) {
        const json& s = j.at("schemes");
        if (!s.is_array() || s.empty()) bad("'schemes' must be a nonempty array");
        cfg.schemes.clear();
        for (const auto& e : s) {
            if (!e.is_string()) bad("'schemes' entries must be strings");
            cfg.schemes.push_back(e.get<std::string>());
        }
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        if (!s.is_object()) bad("'sweep' must be an object");
        check_keys(s, "sweep", {"parameter", "values"});
        if (!s.contains("parameter") || !s.contains("values"))
            bad("'sweep' needs 'parameter' and 'values'");
        if (!s.at("parameter").is_string()) bad("'sweep.parameter' must be a string");
        cfg.sweep.parameter = s.at("parameter").get<std::string>();
        const json& vals = s.at("values");
        if (!vals.is_array() || vals.empty()) bad("'sweep.values' must be a nonempty array");
        for (const auto& v : vals) cfg.sweep.values.push_back(as_number(v, "sweep.values"));
    }
    if (j.contains("user_positions")) {
        const json& p = j.at("user_positions");
        if (!p.is_array()) bad("'user_positions' must be an array");
        for (const auto& e : p) cfg.user_positions.push_back(as_vec3(e, "user_positions"));
    }
    if (j.contains("drop_region")) {
        const json& r = j.at("drop_region");
        if (!r.is_array() || r.size() != 4) bad("'drop_region' must have 4 entries");
        for (int i = 0; i < 4; ++i) cfg.drop_region[i] = as_number(r[i], "drop_region");
    }
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        if (!s.is_object()) bad("'solver' must be an object");
        check_keys(s, "solver",
                   {"eps", "eps_rel", "eps_bisect", "randomization_trials", "iteration_cap"});
        if (s.contains("eps")) cfg.solver.eps = as_number(s.at("eps"), "solver.eps");
        if (s.contains("eps_rel"))
            cfg.solver.eps_rel = as_number(s.at("eps_rel"), "solver.eps_rel");
        if (s.contains("eps_bisect"))
            cfg.solver.eps_bisect = as_number(s.at("eps_bisect"), "solver.eps_bisect");
        if (s.contains("randomization_trials"))
            cfg.solver.randomization_trials =
                as_int(s.at("randomization_trials"), "solver.randomization_trials");
        if (s.contains("iteration_cap"))
            cfg.solver.iteration_cap = as_int(s.at("iteration_cap"), "solver.iteration_cap");
    }
    if (j.contains("geometry")) {
        const json& g = j.at("geometry");
        if (!g.is_object()) bad("'geometry' must be an object");
        check_keys(g, "geometry",
                   {"bs_position", "irs_position", "bs_antenna_spacing", "irs_element_spacing",
                    "carrier_frequency_hz"});
        if (g.contains("bs_position"))
            cfg.geometry.bs_position = as_vec3(g.at("bs_position"), "geometry.bs_position");
        if (g.contains("irs_position"))
            cfg.geometry.irs_position = as_vec3(g.at("irs_position"), "geometry.irs_position");
        if (g.contains("bs_antenna_spacing"))
            cfg.geometry.bs_antenna_spacing =
                as_number(g.at("bs_antenna_spacing"), "geometry.bs_antenna_spacing");
        if (g.contains("irs_element_spacing"))
            cfg.geometry.irs_element_spacing =
                as_number(g.at("irs_element_spacing"), "geometry.irs_element_spacing");
        if (g.contains("carrier_frequency_hz"))
            cfg.geometry.carrier_frequency_hz =
                as_number(g.at("carrier_frequency_hz"), "geometry.carrier_frequency_hz");
    }
    if (j.contains("channel")) {
        const json& c = j.at("channel");
        if (!c.is_object()) bad("'channel' must be an object");
        check_keys(c, "channel",
                   {"pathloss_ref_gain", "exponent_bs_user", "exponent_bs_irs",
                    "exponent_irs_user", "rician_k1", "rician_k2"});
        if (c.contains("pathloss_ref_gain"))
            cfg.channel.pathloss_ref_gain =
                as_number(c.at("pathloss_ref_gain"), "channel.pathloss_ref_gain");
        if (c.contains("exponent_bs_user"))
            cfg.channel.exponent_bs_user =
                as_number(c.at("exponent_bs_user"), "channel.exponent_bs_user");
        if (c.contains("exponent_bs_irs"))
            cfg.channel.exponent_bs_irs =
                as_number(c.at("exponent_bs_irs"), "channel.exponent_bs_irs");
        if (c.contains("exponent_irs_user"))
            cfg.channel.exponent_irs_user =
                as_number(c.at("exponent_irs_user"), "channel.exponent_irs_user");
        if (c.contains("rician_k1"))
            cfg.channel.rician_k1 = as_number(c.at("rician_k1"), "channel.rician_k1");
        if (c.contains("rician_k2"))
            cfg.channel.rician_k2 = as_number(c.at("rician_k2"), "channel.rician_k2");
    }
    validate_config(cfg);
    return cfg;
}

int near_square_rows(int elements) {
    int best = 1;
    for (int r = 1; r * r <= elements; ++r)
        if (elements % r == 0) best = r;
    return best;
}

UraGrid pick_grid(int elements, int irs_rows) {
    UraGrid grid;
    if (elements == 0) {
        grid.rows = 1;
        grid.cols = 0;
        return grid;
    }
    grid.rows = irs_rows > 0 ? irs_rows : near_square_rows(elements);
    grid.cols = elements / grid.rows;
    return grid;
}

std::vector<Eigen::Vector3d> positions_for_trial(const ExperimentConfig& c, int trial) {
    if (!c.user_positions.empty()) return c.user_positions;
    if (c.users == 2 && !c.random_drops) return preset_user_pair();
    Rng rng(derive_seed(c.seed, {4, static_cast<std::uint64_t>(trial)}));
    std::vector<Eigen::Vector3d> pos(c.users);
    for (int u = 0; u < c.users; ++u) {
        double x = c.drop_region[0] + (c.drop_region[1] - c.drop_region[0]) * rng.uniform();
        double y = c.drop_region[2] + (c.drop_region[3] - c.drop_region[2]) * rng.uniform();
        pos[u] = Eigen::Vector3d(x, y, c.drop_height);
    }
    return pos;
}

void apply_sweep(ExperimentConfig& c, const std::string& parameter, double value) {
    if (parameter == "power_dbm")
        c.power_dbm = value;
    else if (parameter == "elements")
        c.elements = static_cast<int>(value);
    else if (parameter == "bits")
        c.bits = static_cast<int>(value);
}

ResultRow base_row(int trial, double sweep_value, const std::string& scheme, int user,
                   std::uint64_t seed) {
    ResultRow row;
    row.trial = trial;
    row.sweep_value = sweep_value;
    row.scheme = scheme;
    row.user_index = user;
    row.seed = seed;
    return row;
}

std::vector<ResultRow> run_cell(const ExperimentConfig& base, double sweep_value, int trial) {
    ExperimentConfig c = base;
    if (!base.sweep.parameter.empty()) apply_sweep(c, base.sweep.parameter, sweep_value);
    const double power = dbm_to_watt(c.power_dbm);
    const double noise = dbm_to_watt(c.noise_dbm);
    const std::uint64_t seed_row = derive_seed(c.seed, {1, static_cast<std::uint64_t>(trial)});

    std::vector<ResultRow> out;
    ChannelSet ch;
    bool sampled = false;
    try {
        Geometry geo = c.geometry;
        geo.irs_grid = pick_grid(c.elements, c.irs_rows);
        geo.user_positions = positions_for_trial(c, trial);
        ChannelParams par = c.channel;
        par.noise_power = noise;
        ch = sample_channels(geo, par, c.users, c.antennas, seed_row);
        sampled = true;
    } catch (const std::exception&) {
    }

    for (const std::string& scheme : c.schemes) {
        auto t0 = std::chrono::steady_clock::now();
        std::vector<ResultRow> batch;
        try {
            if (!sampled) throw NumericalError("channel sampling failed");
            if (scheme == "irs-noma" || scheme == "noma") {
                const bool use_siso = c.mode == "siso" || (c.mode == "auto" && c.antennas == 1);
                SolveResult res;
                SolverConfig scfg = c.solver;
                scfg.power = power;
                scfg.seed = derive_seed(c.seed, {3, static_cast<std::uint64_t>(trial)});
                if (scheme == "irs-noma") {
                    OrderingResult ord =
                        order_users(ch, scfg.randomization_trials,
                                    derive_seed(c.seed, {2, static_cast<std::uint64_t>(trial)}));
                    res = use_siso ? solve_siso(ch, ord, scfg) : solve_miso(ch, ord, scfg);
                    if (c.bits >= 1 && c.elements > 0)
                        res = with_quantized_phases(res, ch, power, c.bits);
                } else {
                    ChannelSet bare = without_irs(ch);
                    OrderingResult ord =
                        order_users(bare, scfg.randomization_trials,
                                    derive_seed(c.seed, {6, static_cast<std::uint64_t>(trial)}));
                    res = use_siso ? solve_siso(bare, ord, scfg) : solve_miso(bare, ord, scfg);
                }
                std::vector<int> role_of(c.users, 0);
                for (int r = 0; r < c.users; ++r) role_of[res.user_order[r]] = r;
                std::string status = res.phase_flag ? "flag" : (res.cap_hit ? "cap" : "ok");
                for (int u = 0; u < c.users; ++u) {
                    ResultRow row = base_row(trial, sweep_value, scheme, u, seed_row);
                    row.rate = res.rates(role_of[u]);
                    row.q_linear = std::exp2(row.rate) - 1.0;
                    row.iterations = res.iterations;
                    row.status = status;
                    batch.push_back(std::move(row));
                }
            } else {
                SolverConfig ocfg = c.solver;
                ocfg.power = power;
                ocfg.seed = derive_seed(c.seed, {5, static_cast<std::uint64_t>(trial)});
                OmaResult res =
                    oma_maxmin(ch, ocfg, scheme == "irs-oma", c.oma_per_slot_phases);
                if (scheme == "irs-oma" && c.bits >= 1 && c.elements > 0 &&
                    !c.oma_per_slot_phases) {
                    PhaseConfig snapped(quantize_phases(res.phases.theta, c.bits));
                    OmaResult req = oma_maxmin(combined_strengths(ch, snapped), power, noise);
                    req.phases = snapped;
                    res = req;
                }
                for (int u = 0; u < c.users; ++u) {
                    ResultRow row = base_row(trial, sweep_value, scheme, u, seed_row);
                    row.rate = res.rate;
                    row.q_linear = res.slot_powers(u) * res.strengths(u) / noise;
                    row.iterations = 0;
                    row.status = "ok";
                    batch.push_back(std::move(row));
                }
            }
        } catch (const std::exception&) {
            batch.clear();
            for (int u = 0; u < c.users; ++u) {
                ResultRow row = base_row(trial, sweep_value, scheme, u, seed_row);
                row.status = "error";
                batch.push_back(std::move(row));
            }
        }
        if (c.timing) {
            double ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
            for (ResultRow& row : batch) row.runtime_ms = ms;
        }
        for (ResultRow& row : batch) out.push_back(std::move(row));
    }
    return out;
}

void append_number(std::string& line, double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    line += buf;
}

}  // namespace

Geometry default_geometry() {
    Geometry g;
    g.bs_position = Eigen::Vector3d(0.0, 0.0, 10.0);
    double d = 25.0 * std::sqrt(2.0);
    g.irs_position = Eigen::Vector3d(d, d, 10.0);
    return g;
}

std::vector<Eigen::Vector3d> preset_user_pair() {
    return {Eigen::Vector3d(32.52, 23.48, 1.5), Eigen::Vector3d(48.45, 19.55, 1.5)};
}

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        bad(std::string("parse error: ") + e.what());
    }
    try {
        return parse_config_json(j);
    } catch (const json::exception& e) {
        bad(std::string("schema error: ") + e.what());
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.users < 1) bad("'users' must be positive");
    if (cfg.antennas < 1) bad("'antennas' must be positive");
    if (cfg.elements < 0) bad("'elements' must be nonnegative");
    if (cfg.irs_rows < 0) bad("'irs_rows' must be nonnegative");
    if (cfg.irs_rows > 0 && cfg.elements % cfg.irs_rows != 0)
        bad("'irs_rows' must divide 'elements'");
    if (cfg.trials < 1) bad("'trials' must be positive");
    if (cfg.threads < 1 || cfg.threads > 64) bad("'threads' must lie in 1..64");
    if (cfg.bits < 0 || cfg.bits > 8) bad("'bits' must lie in 0..8");
    if (!std::isfinite(cfg.power_dbm) || !std::isfinite(cfg.noise_dbm))
        bad("'power_dbm' and 'noise_dbm' must be finite");
    if (cfg.mode != "auto" && cfg.mode != "siso" && cfg.mode != "miso")
        bad("'mode' must be auto, siso or miso");
    if (cfg.mode == "siso" && cfg.antennas != 1) bad("mode 'siso' needs a single antenna");
    if (cfg.schemes.empty()) bad("'schemes' must be nonempty");
    for (const std::string& s : cfg.schemes) {
        const auto& known = known_schemes();
        if (std::find(known.begin(), known.end(), s) == known.end())
            bad("unknown scheme '" + s + "'");
        if ((s == "irs-noma" || s == "noma") && cfg.users < 2)
            bad("scheme '" + s + "' needs at least two users");
    }
    if (!cfg.sweep.parameter.empty()) {
        const std::string& p = cfg.sweep.parameter;
        if (p != "power_dbm" && p != "elements" && p != "bits")
            bad("'sweep.parameter' must be power_dbm, elements or bits");
        if (cfg.sweep.values.empty()) bad("'sweep.values' must be nonempty");
        if (p == "elements" || p == "bits") {
            for (double v : cfg.sweep.values)
                if (v < 0.0 || v != std::floor(v))
                    bad("'sweep.values' for " + p + " must be nonnegative integers");
            if (p == "elements" && cfg.irs_rows != 0)
                bad("'irs_rows' must be 0 (auto) when sweeping elements");
            if (p == "bits")
                for (double v : cfg.sweep.values)
                    if (v > 8.0) bad("'sweep.values' for bits must lie in 0..8");
        }
    } else if (!cfg.sweep.values.empty()) {
        bad("'sweep.values' given without 'sweep.parameter'");
    }
    if (!cfg.user_positions.empty()) {
        if (static_cast<int>(cfg.user_positions.size()) != cfg.users)
            bad("'user_positions' must list one position per user");
        if (cfg.random_drops) bad("'random_drops' conflicts with 'user_positions'");
    }
    if (cfg.drop_region[0] >= cfg.drop_region[1] || cfg.drop_region[2] >= cfg.drop_region[3])
        bad("'drop_region' must be [x_min, x_max, y_min, y_max] with min < max");
    if (cfg.solver.eps < 0.0 || cfg.solver.eps_rel < 0.0) bad("solver tolerances must be >= 0");
    if (cfg.solver.eps_bisect <= 0.0) bad("'solver.eps_bisect' must be positive");
    if (cfg.solver.randomization_trials < 1)
        bad("'solver.randomization_trials' must be positive");
    if (cfg.solver.iteration_cap < 1) bad("'solver.iteration_cap' must be positive");
    if (cfg.geometry.bs_antenna_spacing <= 0.0 || cfg.geometry.irs_element_spacing <= 0.0)
        bad("antenna spacings must be positive");
    if (cfg.geometry.carrier_frequency_hz <= 0.0) bad("carrier frequency must be positive");
    if (cfg.channel.pathloss_ref_gain <= 0.0) bad("'channel.pathloss_ref_gain' must be positive");
    if (cfg.channel.exponent_bs_user <= 0.0 || cfg.channel.exponent_bs_irs <= 0.0 ||
        cfg.channel.exponent_irs_user <= 0.0)
        bad("pathloss exponents must be positive");
    if (cfg.channel.rician_k1 < 0.0 || cfg.channel.rician_k2 < 0.0)
        bad("Rician factors must be nonnegative");
}

ChannelSet channels_for_trial(const ExperimentConfig& cfg, int trial) {
    validate_config(cfg);
    Geometry geo = cfg.geometry;
    geo.irs_grid = pick_grid(cfg.elements, cfg.irs_rows);
    geo.user_positions = positions_for_trial(cfg, trial);
    ChannelParams par = cfg.channel;
    par.noise_power = dbm_to_watt(cfg.noise_dbm);
    return sample_channels(geo, par, cfg.users, cfg.antennas,
                           derive_seed(cfg.seed, {1, static_cast<std::uint64_t>(trial)}));
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    std::vector<double> sweep_values =
        cfg.sweep.parameter.empty() ? std::vector<double>{0.0} : cfg.sweep.values;

    struct Job {
        double sweep_value;
        int trial;
    };
    std::vector<Job> jobs;
    for (double v : sweep_values)
        for (int t = 0; t < cfg.trials; ++t) jobs.push_back({v, t});

    std::vector<std::vector<ResultRow>> per_job(jobs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            per_job[i] = run_cell(cfg, jobs[i].sweep_value, jobs[i].trial);
        }
    };
    int nthreads = std::min<int>(cfg.threads, static_cast<int>(jobs.size()));
    if (nthreads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }

    std::vector<ResultRow> rows;
    for (std::vector<ResultRow>& batch : per_job)
        for (ResultRow& row : batch) rows.push_back(std::move(row));
    return rows;
}

std::string csv_header() {
    return "trial,sweep_value,scheme,user,rate,q_linear,iterations,runtime_ms,seed,status";
}

void write_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
    os << csv_header() << '\n';
    for (const ResultRow& row : rows) {
        std::string line;
        line += std::to_string(row.trial);
        line += ',';
        append_number(line, row.sweep_value);
        line += ',';
        line += row.scheme;
        line += ',';
        line += std::to_string(row.user_index);
        line += ',';
        append_number(line, row.rate);
        line += ',';
        append_number(line, row.q_linear);
        line += ',';
        line += std::to_string(row.iterations);
        line += ',';
        append_number(line, row.runtime_ms);
        line += ',';
        line += std::to_string(row.seed);
        line += ',';
        line += row.status;
        line += '\n';
        os << line;
    }
}

SolveResult with_quantized_phases(const SolveResult& res, const ChannelSet& ch, double power,
                                  int bits) {
    SolveResult out = res;
    if (ch.elements() == 0) return out;
    ChannelSet role = reorder_users(ch, res.user_order);
    PhaseConfig snapped(quantize_phases(res.phases.theta, bits));
    out.phases = snapped;
    if (ch.antennas() == 1) {
        RVector s = combined_strengths(role, snapped);
        PowerAllocation pa = optimal_power_allocation(s, power, ch.noise_power);
        out.alpha = pa.alpha;
        out.q = maxmin_sinr_siso(s, pa.alpha, power, ch.noise_power);
        out.rates = rates_from_sinrs(target_sinrs_siso(s, pa.alpha, power, ch.noise_power));
    } else {
        std::vector<CRowVector> rows(role.users());
        for (int j = 0; j < role.users(); ++j) rows[j] = combined_channel(role, snapped, j);
        out.q = maxmin_sinr_miso(rows, res.beams, ch.noise_power);
        out.rates = rates_from_sinrs(target_sinrs_miso(rows, res.beams, ch.noise_power));
    }
    return out;
}

std::pair<double, std::vector<int>> exhaustive_order_oracle(
    int users, const std::function<double(const std::vector<int>&)>& evaluate) {
    if (users < 1 || users > 5)
        throw std::invalid_argument("exhaustive_order_oracle: supports 1..5 users");
    std::vector<int> perm(users);
    std::iota(perm.begin(), perm.end(), 0);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> best_perm = perm;
    do {
        double v = evaluate(perm);
        if (v > best) {
            best = v;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {best, best_perm};
}

std::pair<double, RVector> grid_phase_oracle(
    int elements, int levels, const std::function<double(const RVector&)>& evaluate) {
    if (elements < 1 || elements > 4)
        throw std::invalid_argument("grid_phase_oracle: supports 1..4 elements");
    if (levels < 1 || levels > 64)
        throw std::invalid_argument("grid_phase_oracle: supports 1..64 levels");
    double points = std::pow(static_cast<double>(levels), elements);
    if (points > 2.1e7) throw std::invalid_argument("grid_phase_oracle: grid too large");

    const double step = kTwoPi / levels;
    std::vector<int> idx(elements, 0);
    RVector theta = RVector::Zero(elements);
    double best = -std::numeric_limits<double>::infinity();
    RVector best_theta = theta;
    for (;;) {
        for (int i = 0; i < elements; ++i) theta(i) = idx[i] * step;
        double v = evaluate(theta);
        if (v > best) {
            best = v;
            best_theta = theta;
        }
        int pos = 0;
        while (pos < elements) {
            if (++idx[pos] < levels) break;
            idx[pos] = 0;
            ++pos;
        }
        if (pos == elements) break;
    }
    return {best, best_theta};
}

}  // namespace irsnoma
