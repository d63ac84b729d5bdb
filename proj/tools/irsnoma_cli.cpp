// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "irsnoma/baselines.hpp"
#include "irsnoma/harness.hpp"
#include "irsnoma/ordering.hpp"
#include "irsnoma/rng.hpp"
#include "irsnoma/siso.hpp"

namespace {

using namespace irsnoma;

struct SchemeStats {
    int cells = 0;
    double min_rate_sum = 0.0;
    std::map<std::string, int> statuses;
};

void print_summary(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
    std::map<std::string, SchemeStats> stats;
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        double min_rate = rows[i].rate;
        while (j < rows.size() && rows[j].scheme == rows[i].scheme &&
               rows[j].trial == rows[i].trial && rows[j].sweep_value == rows[i].sweep_value) {
            min_rate = std::min(min_rate, rows[j].rate);
            ++j;
        }
        SchemeStats& s = stats[rows[i].scheme];
        ++s.cells;
        s.min_rate_sum += min_rate;
        ++s.statuses[rows[i].status];
        i = j;
    }
    for (const std::string& scheme : cfg.schemes) {
        auto it = stats.find(scheme);
        if (it == stats.end()) continue;
        const SchemeStats& s = it->second;
        std::printf("%-10s mean min-rate %.6g bits/s/Hz over %d cells (", scheme.c_str(),
                    s.min_rate_sum / s.cells, s.cells);
        bool first = true;
        for (const auto& [status, count] : s.statuses) {
            std::printf("%s%s=%d", first ? "" : " ", status.c_str(), count);
            first = false;
        }
        std::printf(")\n");
    }
}

void write_rows(const std::vector<ResultRow>& rows, const std::string& out_path) {
    if (out_path.empty()) {
        write_csv(rows, std::cout);
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + out_path + "'");
    write_csv(rows, f);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"max-min rate simulator for a reflecting-surface assisted downlink"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string mode = "auto";
    std::string param;
    std::string kind = "grid";
    std::vector<std::string> schemes;
    std::vector<double> values;
    std::uint64_t seed = 1;
    int trials = 1, users = 2, antennas = 1, elements = 8, bits = 0, threads = 1;
    int trial = 0, levels = 16;
    double power_dbm = 30.0;
    bool per_slot = false, timing = false, random_drops = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON experiment description");
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--trials", trials, "number of channel realizations");
        sub->add_option("--users", users, "number of users");
        sub->add_option("--antennas", antennas, "transmit antennas");
        sub->add_option("--elements", elements, "reflecting elements");
        sub->add_option("--power-dbm", power_dbm, "transmit power in dBm");
        sub->add_option("--bits", bits, "phase resolution bits, 0 = continuous");
        sub->add_option("--mode", mode, "solver family: auto, siso or miso")
            ->check(CLI::IsMember({"auto", "siso", "miso"}));
        sub->add_option("--scheme", schemes, "schemes to run, repeatable")->delimiter(',');
        sub->add_option("--threads", threads, "worker threads");
        sub->add_flag("--timing", timing, "record wall-clock runtimes in the output");
        sub->add_flag("--oma-per-slot-phases", per_slot,
                      "dedicated reflection profile per time slot");
        sub->add_flag("--random-drops", random_drops, "redraw user positions per trial");
    };

    CLI::App* solve_cmd = app.add_subcommand("solve", "run the configured schemes once");
    add_common(solve_cmd);
    solve_cmd->add_option("--out", out_path, "CSV output path");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "sweep one parameter and emit CSV");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--param", param, "swept parameter: power_dbm, elements or bits");
    sweep_cmd->add_option("--values", values, "swept values, comma separated")->delimiter(',');
    sweep_cmd->add_option("--out", out_path, "CSV output path, default stdout");

    CLI::App* order_cmd = app.add_subcommand("order", "print the decode order of one drop");
    add_common(order_cmd);
    order_cmd->add_option("--trial", trial, "trial index of the drop");

    CLI::App* oracle_cmd =
        app.add_subcommand("oracle", "compare the solver against a brute-force reference");
    add_common(oracle_cmd);
    oracle_cmd->add_option("--kind", kind, "grid (phases) or perm (decode order)")
        ->check(CLI::IsMember({"grid", "perm"}));
    oracle_cmd->add_option("--levels", levels, "grid levels per element");
    oracle_cmd->add_option("--trial", trial, "trial index of the drop");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    auto build_cfg = [&](CLI::App* sub) {
        ExperimentConfig cfg =
            config_path.empty() ? ExperimentConfig{} : load_config(config_path);
        if (sub->count("--seed")) cfg.seed = seed;
        if (sub->count("--trials")) cfg.trials = trials;
        if (sub->count("--users")) cfg.users = users;
        if (sub->count("--antennas")) cfg.antennas = antennas;
        if (sub->count("--elements")) cfg.elements = elements;
        if (sub->count("--power-dbm")) cfg.power_dbm = power_dbm;
        if (sub->count("--bits")) cfg.bits = bits;
        if (sub->count("--mode")) cfg.mode = mode;
        if (sub->count("--scheme")) cfg.schemes = schemes;
        if (sub->count("--threads")) cfg.threads = threads;
        if (sub->count("--timing")) cfg.timing = timing;
        if (sub->count("--oma-per-slot-phases")) cfg.oma_per_slot_phases = per_slot;
        if (sub->count("--random-drops")) cfg.random_drops = random_drops;
        validate_config(cfg);
        return cfg;
    };

    try {
        if (solve_cmd->parsed()) {
            ExperimentConfig cfg = build_cfg(solve_cmd);
            std::vector<ResultRow> rows = run_experiment(cfg);
            if (!out_path.empty()) write_rows(rows, out_path);
            print_summary(cfg, rows);
        } else if (sweep_cmd->parsed()) {
            ExperimentConfig cfg = build_cfg(sweep_cmd);
            if (sweep_cmd->count("--param")) cfg.sweep.parameter = param;
            if (sweep_cmd->count("--values")) cfg.sweep.values = values;
            validate_config(cfg);
            if (cfg.sweep.parameter.empty())
                throw std::invalid_argument("sweep: --param (or a config sweep) is required");
            write_rows(run_experiment(cfg), out_path);
        } else if (order_cmd->parsed()) {
            ExperimentConfig cfg = build_cfg(order_cmd);
            ChannelSet ch = channels_for_trial(cfg, trial);
            OrderingResult ord =
                order_users(ch, cfg.solver.randomization_trials,
                            derive_seed(cfg.seed, {2, static_cast<std::uint64_t>(trial)}));
            for (int u = 0; u < ch.users(); ++u)
                std::printf("user %d: best strength %.10g\n", u, ord.strengths(u));
            std::printf("decode order (weakest first):");
            for (int role : ord.permutation) std::printf(" %d", role);
            std::printf("\n");
        } else if (oracle_cmd->parsed()) {
            ExperimentConfig cfg = build_cfg(oracle_cmd);
            ChannelSet ch = channels_for_trial(cfg, trial);
            const double power = dbm_to_watt(cfg.power_dbm);
            const double noise = ch.noise_power;
            if (kind == "grid") {
                if (cfg.antennas != 1)
                    throw std::invalid_argument("oracle grid: single antenna only");
                auto value_at = [&](const RVector& theta) {
                    RVector s = combined_strengths(ch, PhaseConfig(theta));
                    PowerAllocation pa = optimal_power_allocation(s, power, noise);
                    return maxmin_sinr_siso(s, pa.alpha, power, noise);
                };
                auto [q_grid, theta] = grid_phase_oracle(cfg.elements, levels, value_at);
                OrderingResult ord =
                    order_users(ch, cfg.solver.randomization_trials,
                                derive_seed(cfg.seed, {2, static_cast<std::uint64_t>(trial)}));
                SolverConfig scfg = cfg.solver;
                scfg.power = power;
                scfg.seed = derive_seed(cfg.seed, {3, static_cast<std::uint64_t>(trial)});
                SolveResult res = solve_siso(ch, ord, scfg);
                std::printf("grid best sinr    %.10g\n", q_grid);
                std::printf("solver sinr       %.10g\n", res.q);
                std::printf("solver/grid ratio %.6f\n", res.q / q_grid);
            } else {
                auto value_of = [&](const std::vector<int>& perm) {
                    ChannelSet role = reorder_users(ch, perm);
                    RVector s = combined_strengths(role, PhaseConfig(RVector::Zero(
                                                             static_cast<Eigen::Index>(
                                                                 ch.elements()))));
                    PowerAllocation pa = optimal_power_allocation(s, power, noise);
                    return maxmin_sinr_siso(s, pa.alpha, power, noise);
                };
                auto [best, perm] = exhaustive_order_oracle(cfg.users, value_of);
                OrderingResult ord =
                    order_users(ch, cfg.solver.randomization_trials,
                                derive_seed(cfg.seed, {2, static_cast<std::uint64_t>(trial)}));
                std::printf("exhaustive best sinr %.10g at order", best);
                for (int r : perm) std::printf(" %d", r);
                std::printf("\nstrength-sorted sinr %.10g at order", value_of(ord.permutation));
                for (int r : ord.permutation) std::printf(" %d", r);
                std::printf("\n");
            }
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
