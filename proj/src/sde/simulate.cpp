#include "yauyau/errors.hpp"
#include "yauyau/sde.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace yauyau {

namespace {

std::size_t integral_ratio(double num, double den, const char* field) {
    double r = num / den;
    double n = std::round(r);
    if (n < 1.0 || std::fabs(r - n) > 1e-9 * n) {
        throw ConfigError(field, "ratio " + std::to_string(r) + " is not a positive integer");
    }
    return static_cast<std::size_t>(n);
}

void require_positive(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be positive and finite");
}

} // namespace

TimeGrid TimeGrid::make(double T, double dt, double dtau) {
    require_positive(T, "time.T");
    require_positive(dt, "time.dt");
    require_positive(dtau, "time.dtau");
    TimeGrid g;
    g.dt = dt;
    g.nt = integral_ratio(dtau, dt, "time.dtau");
    g.dtau = static_cast<double>(g.nt) * dt;
    g.ntau = integral_ratio(T, g.dtau, "time.T");
    g.T = static_cast<double>(g.ntau) * g.dtau;
    return g;
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

double NormalStream::uniform() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

double NormalStream::next() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

SimulatedPaths simulate_paths(const expr::ModelSpec& model, const TimeGrid& tg,
                              std::span<const double> x0, std::uint64_t seed,
                              const SimulationOptions& options) {
    model.validate();
    const auto D = static_cast<std::size_t>(model.dim);
    const auto M = static_cast<std::size_t>(model.obs_dim);
    if (x0.size() != D) throw ConfigError("x0", "length must equal model dimension");
    for (double v : x0)
        if (!std::isfinite(v)) throw ConfigError("x0", "must be finite");

    std::vector<expr::Program> f, h;
    for (const auto& e : model.f) f.emplace_back(e);
    for (const auto& e : model.h) h.emplace_back(e);

    const std::size_t total = tg.total_fine_steps();
    SimulatedPaths out{Matrix(total + 1, D), Matrix(tg.ntau + 1, M)};
    for (std::size_t d = 0; d < D; ++d) out.states(0, d) = x0[d];

    NormalStream state_noise(seed, options.state_stream);
    NormalStream obs_noise(seed, options.obs_stream);
    const double sqdt = std::sqrt(tg.dt) * options.noise_scale;

    std::vector<double> z(M, 0.0);
    std::vector<double> drift(D), sensor(M);
    for (std::size_t n = 0; n < total; ++n) {
        auto x = out.states.row(n);
        for (std::size_t d = 0; d < D; ++d) drift[d] = f[d](x);
        for (std::size_t j = 0; j < M; ++j) sensor[j] = h[j](x);
        for (double v : drift)
            if (!std::isfinite(v)) throw NonFiniteError("non-finite drift at fine step " + std::to_string(n), n);
        for (double v : sensor)
            if (!std::isfinite(v)) throw NonFiniteError("non-finite observation at fine step " + std::to_string(n), n);

        auto next = out.states.row(n + 1);
        for (std::size_t d = 0; d < D; ++d) {
            next[d] = x[d] + drift[d] * tg.dt + sqdt * state_noise.next();
            if (!std::isfinite(next[d])) {
                throw NonFiniteError("state escaped to non-finite value at fine step " + std::to_string(n + 1), n + 1);
            }
        }
        for (std::size_t j = 0; j < M; ++j) z[j] += sensor[j] * tg.dt + sqdt * obs_noise.next();

        if ((n + 1) % tg.nt == 0) {
            auto row = out.observations.row((n + 1) / tg.nt);
            for (std::size_t j = 0; j < M; ++j) row[j] = z[j];
        }
    }
    return out;
}

Matrix observation_increments(const Matrix& observations) {
    if (observations.rows() == 0) return {};
    Matrix inc(observations.rows() - 1, observations.cols());
    for (std::size_t k = 1; k < observations.rows(); ++k) {
        for (std::size_t j = 0; j < observations.cols(); ++j) {
            inc(k - 1, j) = observations(k, j) - observations(k - 1, j);
        }
    }
    return inc;
}

Matrix coarse_states(const Matrix& states, const TimeGrid& tg) {
    if (states.rows() != tg.total_fine_steps() + 1) {
        throw std::invalid_argument("state path length does not match the time grid");
    }
    Matrix out(tg.ntau + 1, states.cols());
    for (std::size_t k = 0; k <= tg.ntau; ++k) {
        auto src = states.row(k * tg.nt);
        std::copy(src.begin(), src.end(), out.row(k).begin());
    }
    return out;
}

} // namespace yauyau
