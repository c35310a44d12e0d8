#include "doctest.h"

#include "yauyau/experiment.hpp"
#include "yauyau/io.hpp"
#include "yauyau/oracles.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace yauyau;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("yauyau_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

FieldError first_error(const json& doc) {
    try {
        config_from_json(doc);
    } catch (const ValidationError& e) {
        REQUIRE_FALSE(e.errors().empty());
        return e.errors().front();
    }
    FAIL("expected a validation error");
    return {};
}

ExperimentConfig small_config() {
    auto c = preset("cubic1d");
    c.T = 1.0;
    c.snapshots = 4;
    return c;
}

} // namespace

TEST_CASE("presets carry the benchmark parameters") {
    auto c = preset("cubic1d");
    CHECK(c.dim == 1);
    CHECK(c.f == std::vector<std::string>{"cos(x1)"});
    CHECK(c.h == std::vector<std::string>{"x1^3"});
    CHECK(c.T == 20.0);
    CHECK(c.dt == 0.001);
    CHECK(c.dtau == 0.005);
    CHECK(c.ds == 0.5);
    CHECK(c.seed == 42);
    CHECK(c.bounds == BoundsMode::Data);

    auto a = preset("almostlinear");
    CHECK(a.dim == 1);
    CHECK(a.h == std::vector<std::string>{"x1*(1+0.25*cos(x1))"});
    CHECK(a.T == 50.0);
    CHECK(a.dt == 0.0001);
    CHECK(a.dtau == 0.0005);

    auto c3 = preset("cubic3d");
    CHECK(c3.dim == 3);
    CHECK(c3.T == 20.0);
    CHECK(time_grid_of(c3).ntau == 4000);
    CHECK(time_grid_of(c3).total_fine_steps() == 20000);

    for (const auto& name : preset_names()) CHECK(validate(preset(name)).empty());
    CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("config JSON round trip") {
    std::vector<ExperimentConfig> cfgs;
    for (const auto& name : preset_names()) cfgs.push_back(preset(name));
    auto custom = preset("linear");
    custom.preset.clear();
    custom.x0 = {0.25};
    custom.init = InitKind::Uniform;
    custom.seed = 0xFFFFFFFFFFFFull;
    custom.snapshots = 0;
    cfgs.push_back(custom);
    for (const auto& c : cfgs) {
        CAPTURE(c.preset);
        auto text = to_json(c).dump();
        auto back = config_from_json(json::parse(text));
        CHECK(back == c);
        CHECK(to_json(back) == to_json(c));
    }
}

TEST_CASE("config documents override presets field by field") {
    auto c = config_from_json(json::parse(R"j({"preset":"cubic1d","seed":7,"time":{"T":2}})j"));
    CHECK(c.seed == 7);
    CHECK(c.T == 2.0);
    CHECK(c.dt == 0.001);
    CHECK(c.f == preset("cubic1d").f);

    auto d = config_from_json(json::parse(R"j({
        "model":{"dim":2,"f":["0","-x2"],"h":["x1"]},
        "time":{"T":1,"dt":0.01,"dtau":0.05},
        "space":{"ds":0.25,"bounds":{"mode":"fixed","lo":[-2,-2],"hi":[2,2]}},
        "init":{"kind":"uniform"}})j"));
    CHECK(d.obs_dim == 1);
    CHECK(d.bounds == BoundsMode::Fixed);
    CHECK(d.init == InitKind::Uniform);
}

TEST_CASE("config validation reports fields and expression offsets") {
    auto e = first_error(json::parse(R"j({"preset":"cubic3d","model":{"f":["cos(x1)","cos(x2)","cos(x4)"]}})j"));
    CHECK(e.field == "model.f[2]");
    CHECK(e.message.find("x4") != std::string::npos);
    REQUIRE(e.offset.has_value());
    CHECK(*e.offset == 4);

    CHECK(first_error(json::parse(R"j({"preset":"cubic1d","time":{"dtau":0.0025}})j")).field == "time.dtau");
    CHECK(first_error(json::parse(R"j({"preset":"cubic1d","time":{"dt":-1}})j")).field == "time.dt");
    CHECK(first_error(json::parse(R"j({"preset":"cubic1d","seed":"abc"})j")).field == "seed");
    CHECK(first_error(json::parse(R"j({"preset":"bogus"})j")).field == "preset");
    CHECK(first_error(json::parse(R"j({"preset":"linear","space":{"bounds":{"hi":[-4.9]}}})j")).field ==
          "space.bounds.hi[0]");
    CHECK(first_error(json::parse(R"j({"preset":"linear","x0":[9]})j")).field == "x0");
    CHECK(first_error(json::parse(R"j({"preset":"cubic1d","model":{"dim":2}})j")).field == "model.f");
    CHECK(first_error(json::parse(R"j({"preset":"linear","space":{"ds":0.0001,"bounds":{"mode":"fixed",
        "lo":[-5,-5,-5],"hi":[5,5,5]}},"model":{"dim":3,"f":["0","0","0"],"h":["x1"]},"x0":[0,0,0]})j"))
              .field == "space.ds");
    CHECK(first_error(json::parse("[1,2]")).field == "config");

    try {
        config_from_json(json::parse(R"j({"preset":"cubic1d","time":{"dt":0},"space":{"ds":-1}})j"));
        FAIL("expected errors");
    } catch (const ValidationError& err) {
        CHECK(err.errors().size() >= 2);
    }
}

TEST_CASE("rmse examples") {
    Matrix a(5, 3, 1.5);
    CHECK(rmse(a, a) == 0.0);

    Matrix b = a;
    for (std::size_t k = 0; k < 5; ++k) b(k, 1) += 0.3;
    CHECK(rmse(b, a) == doctest::Approx(0.3 / std::sqrt(3.0)).epsilon(1e-15));

    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    Matrix p(200, 2), q(200, 2);
    for (auto& v : p.values()) v = g(rng);
    for (auto& v : q.values()) v = g(rng);
    long double s = 0.0L;
    for (std::size_t k = 0; k < 200; ++k)
        for (std::size_t d = 0; d < 2; ++d) s += std::pow(static_cast<long double>(p(k, d)) - q(k, d), 2);
    CHECK(std::fabs(rmse(p, q) - static_cast<double>(std::sqrt(s / 400.0L))) < 1e-12);

    auto errs = step_errors(b, a);
    for (double e : errs) CHECK(e == doctest::Approx(0.3 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK_THROWS(rmse(Matrix(2, 2), Matrix(2, 3)));
}

TEST_CASE("affine extraction") {
    auto m = oracle::extract_affine(expr::ModelSpec::from_text(2, {"-0.5*x1 + 2*x2 + 1", "3"}, {"x1 - x2"}));
    CHECK(m.A(0, 0) == -0.5);
    CHECK(m.A(0, 1) == 2.0);
    CHECK(m.A(1, 0) == 0.0);
    CHECK(m.a == std::vector<double>{1.0, 3.0});
    CHECK(m.C(0, 0) == 1.0);
    CHECK(m.C(0, 1) == -1.0);
    CHECK_THROWS_AS(oracle::extract_affine(expr::ModelSpec::from_text(1, {"cos(x1)"}, {"x1"})), ConfigError);
    CHECK_THROWS_AS(oracle::extract_affine(expr::ModelSpec::from_text(1, {"0"}, {"x1^3"})), ConfigError);
}

TEST_CASE("kalman oracle: static state follows the closed-form Riccati recursion") {
    auto tg = TimeGrid::make(2.0, 0.01, 0.05);
    auto model = oracle::extract_affine(expr::ModelSpec::from_text(1, {"0"}, {"2*x1"}));
    Matrix obs(tg.ntau + 1, 1);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (std::size_t k = 1; k <= tg.ntau; ++k) obs(k, 0) = obs(k - 1, 0) + 2.0 * 0.7 * tg.dtau + std::sqrt(tg.dtau) * g(rng);
    const double s0 = 1.7;
    const double x0[] = {0.0};
    auto r = oracle::kalman_oracle(model, obs, tg, x0, {.process_noise = 0.0, .prior_variance = s0});
    // dy_k = c x dtau + noise of variance dtau
    const double c = 2.0 * tg.dtau, rv = tg.dtau;
    for (std::size_t k = 0; k <= tg.ntau; ++k) {
        const double closed = s0 / (1.0 + static_cast<double>(k) * s0 * c * c / rv);
        CHECK(std::fabs(r.variances(k, 0) - closed) < 1e-10);
        if (k > 0) CHECK(r.variances(k, 0) < r.variances(k - 1, 0));
    }
}

TEST_CASE("kalman oracle agrees with a weighted Monte-Carlo conditional mean") {
    // 3 observation intervals of 2 fine steps each
    auto tg = TimeGrid::make(0.3, 0.05, 0.1);
    auto spec = expr::ModelSpec::from_text(1, {"-0.5*x1"}, {"x1"});
    const double x0[] = {0.3};
    auto paths = simulate_paths(spec, tg, x0, 11);
    auto kf = oracle::kalman_oracle(oracle::extract_affine(spec), paths.observations, tg, x0);

    const std::size_t S = 1'000'000;
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> g;
    const double sq = std::sqrt(tg.dt);
    std::vector<long double> sw(4, 0.0L), swx(4, 0.0L);
    std::vector<std::vector<double>> xs(4, std::vector<double>(S)), ws(4, std::vector<double>(S));
    for (std::size_t s = 0; s < S; ++s) {
        double x = x0[0] + g(rng);
        double logw = 0.0;
        for (std::size_t k = 1; k <= 3; ++k) {
            double z = 0.0;
            for (std::size_t n = 0; n < tg.nt; ++n) {
                z += x * tg.dt;
                x += -0.5 * x * tg.dt + sq * g(rng);
            }
            const double dy = paths.observations(k, 0) - paths.observations(k - 1, 0);
            logw += -(dy - z) * (dy - z) / (2.0 * tg.dtau);
            const double w = std::exp(logw);
            xs[k][s] = x;
            ws[k][s] = w;
            sw[k] += w;
            swx[k] += w * x;
        }
    }
    for (std::size_t k = 1; k <= 3; ++k) {
        const double mean = static_cast<double>(swx[k] / sw[k]);
        long double v = 0.0L;
        for (std::size_t s = 0; s < S; ++s) v += std::pow(ws[k][s] * (xs[k][s] - mean), 2);
        const double se = static_cast<double>(std::sqrt(v) / sw[k]);
        CAPTURE(k);
        CHECK(std::fabs(kf.means(k, 0) - mean) < 3.0 * se);
    }
}

TEST_CASE("particle oracle basics") {
    auto tg = TimeGrid::make(0.5, 0.01, 0.05);
    auto spec = expr::ModelSpec::from_text(1, {"-x1"}, {"0"});
    const double x0[] = {1.0};
    Matrix obs(tg.ntau + 1, 1);
    for (std::size_t k = 0; k <= tg.ntau; ++k) obs(k, 0) = 0.37 * static_cast<double>(k);
    auto a = oracle::particle_oracle(spec, obs, tg, x0, {.particles = 2000, .seed = 5});
    auto b = oracle::particle_oracle(spec, obs, tg, x0, {.particles = 2000, .seed = 5});
    CHECK(a == b);
    // h = 0: observations carry no information, the estimate is the prior
    // cloud mean, x0 e^{-t} up to Monte-Carlo and Euler error
    for (std::size_t k = 0; k <= tg.ntau; ++k) {
        const double t = tg.coarse_time(k);
        CHECK(std::fabs(a(k, 0) - std::exp(-t)) < 4.0 * std::sqrt(1.0 / 2000.0) + 0.01);
    }
    CHECK_THROWS_AS(oracle::particle_oracle(spec, obs, tg, x0, {.particles = 10}), ConfigError);
}

TEST_CASE("particle oracle matches the Kalman oracle on a linear model") {
    auto tg = TimeGrid::make(1.0, 0.005, 0.025);
    auto spec = expr::ModelSpec::from_text(1, {"-0.5*x1"}, {"x1"});
    const double x0[] = {0.0};
    auto paths = simulate_paths(spec, tg, x0, 42);
    auto kf = oracle::kalman_oracle(oracle::extract_affine(spec), paths.observations, tg, x0);

    const int R = 16;
    std::vector<Matrix> runs;
    for (int r = 0; r < R; ++r)
        runs.push_back(oracle::particle_oracle(spec, paths.observations, tg, x0,
                                               {.particles = 10000, .seed = static_cast<std::uint64_t>(100 + r)}));
    for (std::size_t k : {tg.ntau / 4, tg.ntau / 2, 3 * tg.ntau / 4, tg.ntau}) {
        double mean = 0.0;
        for (const auto& m : runs) mean += m(k, 0);
        mean /= R;
        double var = 0.0;
        for (const auto& m : runs) var += std::pow(m(k, 0) - mean, 2);
        var /= R - 1;
        // standard error of a single 10^4-particle run, estimated from replicates
        const double se = std::sqrt(var);
        CAPTURE(k);
        CHECK(std::fabs(mean - kf.means(k, 0)) < 3.0 * se / std::sqrt(double(R)));
        CHECK(std::fabs(runs.front()(k, 0) - kf.means(k, 0)) < 3.0 * se + 1e-3);
    }
}

TEST_CASE("run_experiment is deterministic and writes artifacts") {
    auto cfg = small_config();
    auto a = run_experiment(cfg);
    auto b = run_experiment(cfg);
    CHECK(a.result.estimates == b.result.estimates);
    CHECK(a.paths.states == b.paths.states);
    CHECK(a.result.rmse == b.result.rmse);
    CHECK(a.truth.rows() == a.time.ntau + 1);

    for (double v : a.paths.states.values()) {
        CHECK(v >= a.grid.lo());
        CHECK(v <= a.grid.lo() + static_cast<double>(a.grid.ns()) * a.grid.ds());
    }

    auto dir = scratch_dir("artifacts");
    write_artifacts(a, dir);
    for (const char* f : {"states.csv", "observations.csv", "estimates.csv", "summary.json"})
        CHECK(std::filesystem::exists(dir / f));

    std::vector<std::string> header;
    auto est = io::read_csv(dir / "estimates.csv", &header);
    CHECK(header == std::vector<std::string>{"tau", "x1", "xhat1", "err"});
    REQUIRE(est.rows() == a.time.ntau + 1);
    for (std::size_t k = 0; k < est.rows(); ++k) {
        CHECK(est(k, 1) == a.truth(k, 0));
        CHECK(est(k, 2) == a.result.estimates(k, 0));
        CHECK(est(k, 3) == a.result.errors[k]);
    }
    auto states = io::read_csv(dir / "states.csv");
    CHECK(states.rows() == a.paths.states.rows());
    CHECK(states(states.rows() - 1, 1) == a.paths.states(a.paths.states.rows() - 1, 0));

    std::ifstream js(dir / "summary.json");
    auto summary = json::parse(js);
    CHECK(summary["rmse"].get<double>() == a.result.rmse);
    CHECK(config_from_json(summary["config"]) == cfg);

    REQUIRE(a.result.snapshots.size() == 4);
    auto dump = io::read_density(dir / "density_0003.bin");
    CHECK(dump.dim == 1);
    CHECK(dump.ns == a.grid.ns());
    CHECK(dump.ds == a.grid.ds());
    CHECK(dump.lo[0] == a.grid.lo());
    CHECK(dump.hi[0] == a.grid.hi());
    CHECK(dump.values == a.result.snapshots[3].values);
    std::filesystem::remove_all(dir);
}

TEST_CASE("format_double round trips") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        double v = u(rng) * std::pow(10.0, (i % 40) - 20);
        CHECK(std::stod(io::format_double(v)) == v);
    }
    CHECK(io::format_double(0.5) == "0.5");
}
