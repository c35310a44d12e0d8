// yauyau: run filtering experiments from presets or JSON configs.

#include "yauyau/experiment.hpp"
#include "yauyau/io.hpp"
#include "yauyau/oracles.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <future>
#include <iostream>
#include <mutex>

using namespace yauyau;

namespace {

std::mutex out_mutex;

void report_validation(const ValidationError& e) {
    std::lock_guard lock(out_mutex);
    std::cerr << "invalid configuration:\n";
    for (const auto& f : e.errors()) {
        std::cerr << "  " << f.field << ": " << f.message;
        if (f.offset) std::cerr << " (offset " << *f.offset << ")";
        std::cerr << '\n';
    }
}

int run_one(ExperimentConfig cfg) {
    try {
        auto out = run_experiment(cfg);
        write_artifacts(out, cfg.output_dir);
        std::lock_guard lock(out_mutex);
        std::printf("%s: rmse %.6g (zero estimator %.6g), Ns %zu^%d, %.2f s -> %s\n",
                    cfg.preset.empty() ? "config" : cfg.preset.c_str(), out.result.rmse, out.zero_rmse, out.grid.ns(),
                    out.grid.dim(), out.wall_seconds, cfg.output_dir.c_str());
        for (const auto& w : out.result.warnings) std::printf("  warning: %s\n", w.c_str());
        return 0;
    } catch (const ValidationError& e) {
        report_validation(e);
        return 2;
    } catch (const std::exception& e) {
        std::lock_guard lock(out_mutex);
        std::cerr << (cfg.preset.empty() ? "config" : cfg.preset) << ": " << e.what() << '\n';
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Yau-Yau nonlinear filter experiments"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "simulate, filter and write artifacts");
    std::string config_path;
    std::vector<std::string> presets;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    unsigned jobs = 1;
    auto* cfg_opt = run->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    auto* preset_opt = run->add_option("--preset", presets, "preset name (repeatable)");
    cfg_opt->excludes(preset_opt);
    run->add_option("--seed", seed, "override the seed");
    run->add_option("--out", out_dir, "output directory (one subdirectory per preset when several run)");
    run->add_option("--jobs", jobs, "presets to run concurrently")->check(CLI::Range(1u, 64u));

    auto* list = app.add_subcommand("presets", "list built-in presets");

    auto* orc = app.add_subcommand("oracle", "run a reference filter on the simulated path of a config");
    std::string kind;
    std::string orc_config, orc_preset;
    std::size_t particles = 5000;
    std::uint64_t pf_seed = 1;
    std::string orc_out;
    orc->add_option("--kind", kind, "pf or kalman")->required()->check(CLI::IsMember({"pf", "kalman"}));
    auto* oc = orc->add_option("--config", orc_config, "JSON experiment config")->check(CLI::ExistingFile);
    auto* op = orc->add_option("--preset", orc_preset, "preset name");
    oc->excludes(op);
    orc->add_option("--particles", particles, "particle count for pf");
    orc->add_option("--pf-seed", pf_seed, "particle filter seed");
    orc->add_option("--out", orc_out, "write oracle_estimates.csv here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const auto& name : preset_names()) {
                auto p = preset(name);
                std::printf("%-15s D=%d  f=[", name.c_str(), p.dim);
                for (std::size_t i = 0; i < p.f.size(); ++i) std::printf("%s%s", i ? ", " : "", p.f[i].c_str());
                std::printf("]  h=[");
                for (std::size_t i = 0; i < p.h.size(); ++i) std::printf("%s%s", i ? ", " : "", p.h[i].c_str());
                std::printf("]  T=%g dt=%g dtau=%g ds=%g\n", p.T, p.dt, p.dtau, p.ds);
            }
            return 0;
        }

        if (run->parsed()) {
            std::vector<ExperimentConfig> cfgs;
            if (!config_path.empty()) {
                cfgs.push_back(load_config(config_path));
            } else if (!presets.empty()) {
                for (const auto& p : presets) cfgs.push_back(preset(p));
            } else {
                std::cerr << "run: one of --config or --preset is required\n";
                return 2;
            }
            for (auto& c : cfgs) {
                if (seed) c.seed = *seed;
                if (!out_dir.empty()) c.output_dir = cfgs.size() == 1 ? out_dir : out_dir + "/" + c.preset;
                if (c.output_dir.empty()) c.output_dir = "out";
            }
            int status = 0;
            std::vector<std::future<int>> running;
            for (auto& c : cfgs) {
                if (running.size() >= jobs) {
                    status = std::max(status, running.front().get());
                    running.erase(running.begin());
                }
                running.push_back(std::async(std::launch::async, run_one, c));
            }
            for (auto& f : running) status = std::max(status, f.get());
            return status;
        }

        if (orc->parsed()) {
            ExperimentConfig cfg;
            if (!orc_config.empty()) {
                cfg = load_config(orc_config);
            } else if (!orc_preset.empty()) {
                cfg = preset(orc_preset);
            } else {
                std::cerr << "oracle: one of --config or --preset is required\n";
                return 2;
            }
            auto errs = validate(cfg);
            if (!errs.empty()) throw ValidationError(std::move(errs));
            auto model = model_of(cfg);
            auto tg = time_grid_of(cfg);
            auto x0 = initial_state(cfg);
            auto paths = simulate_paths(model, tg, x0, cfg.seed);
            auto truth = coarse_states(paths.states, tg);
            Matrix est;
            if (kind == "kalman") {
                oracle::KalmanOptions ko;
                ko.prior_variance = cfg.init_sigma * cfg.init_sigma;
                est = oracle::kalman_oracle(oracle::extract_affine(model), paths.observations, tg, x0, ko).means;
            } else {
                est = oracle::particle_oracle(model, paths.observations, tg, x0,
                                              {.particles = particles, .seed = pf_seed, .prior_sigma = cfg.init_sigma});
            }
            const double r = rmse(est, truth);
            std::printf("%s oracle: rmse %.6g\n", kind.c_str(), r);
            if (!orc_out.empty()) {
                std::filesystem::create_directories(orc_out);
                const std::size_t D = est.cols();
                std::vector<std::string> header{"tau"};
                for (std::size_t d = 1; d <= D; ++d) header.push_back("x" + std::to_string(d));
                for (std::size_t d = 1; d <= D; ++d) header.push_back("xhat" + std::to_string(d));
                header.push_back("err");
                auto errs_k = step_errors(est, truth);
                Matrix joined(est.rows(), 2 * D + 1);
                for (std::size_t k = 0; k < est.rows(); ++k) {
                    for (std::size_t d = 0; d < D; ++d) {
                        joined(k, d) = truth(k, d);
                        joined(k, D + d) = est(k, d);
                    }
                    joined(k, 2 * D) = errs_k[k];
                }
                io::write_timed_csv(std::filesystem::path(orc_out) / "oracle_estimates.csv", header, joined, tg.dtau);
            }
            return 0;
        }
    } catch (const ValidationError& e) {
        report_validation(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
