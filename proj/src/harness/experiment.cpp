#include "yauyau/experiment.hpp"

#include "yauyau/io.hpp"
#include "yauyau/simd.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace yauyau {

using nlohmann::json;

double rmse(const Matrix& estimates, const Matrix& truth) {
    if (estimates.rows() != truth.rows() || estimates.cols() != truth.cols())
        throw std::invalid_argument("rmse: shapes differ");
    if (estimates.rows() == 0 || estimates.cols() == 0) throw std::invalid_argument("rmse: empty input");
    double s = 0.0;
    auto e = estimates.values(), t = truth.values();
    for (std::size_t i = 0; i < e.size(); ++i) s += (e[i] - t[i]) * (e[i] - t[i]);
    return std::sqrt(s / static_cast<double>(e.size()));
}

std::vector<double> step_errors(const Matrix& estimates, const Matrix& truth) {
    if (estimates.rows() != truth.rows() || estimates.cols() != truth.cols())
        throw std::invalid_argument("step_errors: shapes differ");
    std::vector<double> out(estimates.rows());
    for (std::size_t k = 0; k < estimates.rows(); ++k) {
        double s = 0.0;
        for (std::size_t d = 0; d < estimates.cols(); ++d) s += std::pow(estimates(k, d) - truth(k, d), 2);
        out[k] = std::sqrt(s / static_cast<double>(estimates.cols()));
    }
    return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg, const FilterOptions& options) {
    auto errs = validate(cfg);
    if (!errs.empty()) throw ValidationError(std::move(errs));
    const auto t0 = std::chrono::steady_clock::now();

    ExperimentOutput out;
    out.config = cfg;
    out.time = time_grid_of(cfg);
    const auto model = model_of(cfg);
    const auto x0 = initial_state(cfg);
    out.paths = simulate_paths(model, out.time, x0, cfg.seed);

    if (cfg.bounds == BoundsMode::Data) {
        auto [lo, hi] = data_driven_bounds(out.paths.states, cfg.ds);
        std::vector<double> l(static_cast<std::size_t>(cfg.dim), lo), h(static_cast<std::size_t>(cfg.dim), hi);
        out.grid = build_grid(cfg.dim, l, h, cfg.ds);
    } else {
        out.grid = build_grid(cfg.dim, cfg.lo, cfg.hi, cfg.ds);
    }

    InitialDensity init{cfg.init, x0, cfg.init_sigma};
    if (cfg.init == InitKind::Uniform) init.center.clear();
    auto u0 = initial_density(out.grid, init);

    FilterOptions opts = options;
    opts.snapshot_count = cfg.snapshots;
    out.result = run_filter(model, out.time, out.grid, out.paths.observations, u0, opts);

    out.truth = coarse_states(out.paths.states, out.time);
    out.result.errors = step_errors(out.result.estimates, out.truth);
    out.result.rmse = rmse(out.result.estimates, out.truth);
    out.zero_rmse = rmse(Matrix(out.truth.rows(), out.truth.cols()), out.truth);
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

json summary_json(const ExperimentOutput& out) {
    json grid = {
        {"dim", out.grid.dim()}, {"ns", out.grid.ns()}, {"ds", out.grid.ds()},
        {"lo", out.grid.lo()},   {"hi", out.grid.hi()}, {"nodes", out.grid.size()},
    };
    json snaps = json::array();
    for (const auto& s : out.result.snapshots) snaps.push_back({{"k", s.k}, {"tau", s.tau}});
    return {
        {"preset", out.config.preset},
        {"rmse", out.result.rmse},
        {"zero_rmse", out.zero_rmse},
        {"ntau", out.time.ntau},
        {"nt", out.time.nt},
        {"grid", grid},
        {"timings",
         {{"propagation", out.result.timings.propagation},
          {"update", out.result.timings.update},
          {"estimation", out.result.timings.estimation},
          {"total", out.wall_seconds}}},
        {"simd", simd::isa_name(simd::active().isa)},
        {"snapshots", snaps},
        {"warnings", out.result.warnings},
        {"config", to_json(out.config)},
    };
}

void write_artifacts(const ExperimentOutput& out, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto D = static_cast<std::size_t>(out.grid.dim());

    std::vector<std::string> xs{"t"};
    for (std::size_t d = 1; d <= D; ++d) xs.push_back("x" + std::to_string(d));
    io::write_timed_csv(dir / "states.csv", xs, out.paths.states, out.time.dt);

    std::vector<std::string> ys{"tau"};
    for (std::size_t j = 1; j <= out.paths.observations.cols(); ++j) ys.push_back("y" + std::to_string(j));
    io::write_timed_csv(dir / "observations.csv", ys, out.paths.observations, out.time.dtau);

    std::vector<std::string> es{"tau"};
    for (std::size_t d = 1; d <= D; ++d) es.push_back("x" + std::to_string(d));
    for (std::size_t d = 1; d <= D; ++d) es.push_back("xhat" + std::to_string(d));
    es.push_back("err");
    Matrix joined(out.truth.rows(), 2 * D + 1);
    for (std::size_t k = 0; k < joined.rows(); ++k) {
        for (std::size_t d = 0; d < D; ++d) {
            joined(k, d) = out.truth(k, d);
            joined(k, D + d) = out.result.estimates(k, d);
        }
        joined(k, 2 * D) = out.result.errors[k];
    }
    io::write_timed_csv(dir / "estimates.csv", es, joined, out.time.dtau);

    for (std::size_t i = 0; i < out.result.snapshots.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "density_%04zu.bin", i);
        io::write_density(dir / name, out.grid, out.result.snapshots[i].values);
    }

    std::ofstream js(dir / "summary.json");
    if (!js) throw Error("cannot write " + (dir / "summary.json").string());
    js << summary_json(out).dump(2) << '\n';
}

} // namespace yauyau
