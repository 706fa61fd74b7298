// Command-line driver: single runs, ell-sweeps, the Gibbs-Thomson disk
// benchmark, and the built-in selftest. Exit codes: 0 success, 2 config
// error, 3 solver failure, 4 I/O failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chb/chb.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw chb::IoError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<double> parse_ell_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0')
            throw chb::ConfigError("cannot parse ell value '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw chb::ConfigError("empty ell list");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"chb: Cahn-Hilliard-Biot simulator and sharp-interface diagnostics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string scenario;
    std::string ell_arg;
    double r0 = -1.0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration file (key = value)");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--ell", ell_arg, "interface width override, X or X,Y,... for sweep");
    };

    CLI::App* cmd_run = app.add_subcommand("run", "execute one scenario to t_final");
    add_common(cmd_run);
    cmd_run->add_option("--scenario", scenario,
                        "paper_halfspace | ch_relax_1d | ch_disk | custom");

    CLI::App* cmd_sweep = app.add_subcommand("sweep", "paper_halfspace runs over an ell list");
    add_common(cmd_sweep);

    CLI::App* cmd_disk = app.add_subcommand("bench-disk", "Gibbs-Thomson disk benchmark");
    add_common(cmd_disk);
    cmd_disk->add_option("--r0", r0, "initial disk radius");

    CLI::App* cmd_selftest = app.add_subcommand("selftest", "run built-in invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : chb::kExitConfig;
    }

    try {
        chb::RunConfig cfg;
        if (!config_path.empty()) cfg = chb::parse_config(read_file(config_path));
        if (!scenario.empty()) {
            cfg.scenario = scenario;
            cfg.validate();
        }

        if (cmd_selftest->parsed()) {
            bool all = true;
            for (const auto& r : chb::run_selftests()) {
                std::printf("%s  %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str());
                all = all && r.passed;
            }
            return all ? 0 : 1;
        }

        if (cmd_run->parsed()) {
            if (!ell_arg.empty()) {
                const auto ells = parse_ell_list(ell_arg);
                if (ells.size() != 1)
                    throw chb::ConfigError("run takes a single --ell value");
                cfg.material.ell = ells.front();
                cfg.validate();
            }
            const chb::RunResult rr = chb::run(cfg, out_dir);
            std::printf("%s: %s (steps=%d, t=%g)\n",
                        rr.exit_code == 0 ? "completed" : "failed", rr.message.c_str(),
                        rr.steps_done, rr.t_end);
            return rr.exit_code;
        }

        if (cmd_sweep->parsed()) {
            std::vector<double> ells = {0.1, 0.05, 0.025};
            if (!ell_arg.empty()) ells = parse_ell_list(ell_arg);
            const chb::SweepResult sr = chb::sweep(cfg, ells, out_dir);
            for (const auto& row : sr.rows)
                std::printf("ell=%-8g x_half=%-10.6g width_19=%-10.6g jump_p=%-10.4g "
                            "jump_u=%-10.4g %s\n",
                            row.ell, row.x_half, row.width_19, row.jump_p, row.jump_u,
                            row.ok ? "ok" : "failed");
            if (sr.exit_code != 0) std::fprintf(stderr, "sweep: %s\n", sr.message.c_str());
            return sr.exit_code;
        }

        if (cmd_disk->parsed()) {
            if (!ell_arg.empty()) {
                const auto ells = parse_ell_list(ell_arg);
                if (ells.size() != 1)
                    throw chb::ConfigError("bench-disk takes a single --ell value");
                cfg.material.ell = ells.front();
                cfg.validate();
            }
            const double radius = r0 > 0.0 ? r0 : cfg.disk_r0;
            const chb::DiskBenchReport rep = chb::bench_disk(cfg, radius, out_dir);
            if (rep.exit_code != 0) {
                std::fprintf(stderr, "bench-disk: %s\n", rep.message.c_str());
                return rep.exit_code;
            }
            std::printf("r0=%g r_measured=%.6g |H|=%.6g mu=%.6g target=%.6g ratio=%.4f\n",
                        rep.r0, rep.r_measured, rep.curvature, rep.mu_measured, rep.mu_target,
                        rep.ratio);
            return 0;
        }
    } catch (const chb::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return chb::kExitConfig;
    } catch (const chb::SolverError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return chb::kExitSolver;
    } catch (const chb::IoError& e) {
        std::fprintf(stderr, "I/O failure: %s\n", e.what());
        return chb::kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
