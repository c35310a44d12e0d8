#include "yauyau/oracles.hpp"

#include "yauyau/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace yauyau::oracle {

namespace {

double constant_value(const expr::Expr& e, std::size_t dim, const char* what) {
    if (e.depends_on_variables()) throw ConfigError("model", std::string(what) + " is not affine");
    std::vector<double> zero(dim, 0.0);
    return expr::evaluate(e, zero);
}

} // namespace

AffineModel extract_affine(const expr::ModelSpec& model) {
    model.validate();
    AffineModel m;
    m.dim = static_cast<std::size_t>(model.dim);
    m.obs_dim = static_cast<std::size_t>(model.obs_dim);
    m.A = Matrix(m.dim, m.dim);
    m.C = Matrix(m.obs_dim, m.dim);
    std::vector<double> zero(m.dim, 0.0);
    auto fill = [&](const std::vector<expr::Expr>& fs, Matrix& J, std::vector<double>& off, const char* what) {
        for (std::size_t i = 0; i < fs.size(); ++i) {
            off.push_back(expr::evaluate(fs[i], zero));
            for (std::size_t j = 0; j < m.dim; ++j)
                J(i, j) = constant_value(expr::differentiate(fs[i], static_cast<int>(j + 1)), m.dim, what);
        }
    };
    fill(model.f, m.A, m.a, "drift");
    fill(model.h, m.C, m.c, "observation function");
    return m;
}

KalmanResult kalman_oracle(const AffineModel& model, const Matrix& observations, const TimeGrid& tg,
                           std::span<const double> prior_mean, const KalmanOptions& options) {
    using Eigen::Index;
    const auto D = static_cast<Index>(model.dim);
    const auto M = static_cast<Index>(model.obs_dim);
    if (observations.rows() != tg.ntau + 1 || observations.cols() != model.obs_dim)
        throw std::invalid_argument("kalman_oracle: observation path has the wrong shape");
    if (prior_mean.size() != model.dim) throw std::invalid_argument("kalman_oracle: prior mean has the wrong length");

    const Index S = D + M;
    const double dt = tg.dt;
    Eigen::MatrixXd F = Eigen::MatrixXd::Identity(S, S);
    Eigen::VectorXd bias = Eigen::VectorXd::Zero(S);
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(S, S);
    for (Index i = 0; i < D; ++i) {
        for (Index j = 0; j < D; ++j) F(i, j) += model.A(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) * dt;
        bias(i) = model.a[static_cast<std::size_t>(i)] * dt;
        Q(i, i) = options.process_noise * dt;
    }
    for (Index r = 0; r < M; ++r) {
        for (Index j = 0; j < D; ++j) F(D + r, j) = model.C(static_cast<std::size_t>(r), static_cast<std::size_t>(j)) * dt;
        bias(D + r) = model.c[static_cast<std::size_t>(r)] * dt;
        Q(D + r, D + r) = dt;
    }

    Eigen::VectorXd m = Eigen::VectorXd::Zero(S);
    for (Index i = 0; i < D; ++i) m(i) = prior_mean[static_cast<std::size_t>(i)];
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(S, S);
    for (Index i = 0; i < D; ++i) P(i, i) = options.prior_variance;

    KalmanResult out{Matrix(tg.ntau + 1, model.dim), Matrix(tg.ntau + 1, model.dim)};
    auto record = [&](std::size_t k) {
        for (Index i = 0; i < D; ++i) {
            out.means(k, static_cast<std::size_t>(i)) = m(i);
            out.variances(k, static_cast<std::size_t>(i)) = P(i, i);
        }
    };
    record(0);

    for (std::size_t k = 1; k <= tg.ntau; ++k) {
        for (std::size_t n = 0; n < tg.nt; ++n) {
            m = F * m + bias;
            P = F * P * F.transpose() + Q;
        }
        // z is observed exactly: condition on z = dy.
        Eigen::VectorXd innov(M);
        for (Index r = 0; r < M; ++r)
            innov(r) = observations(k, static_cast<std::size_t>(r)) - observations(k - 1, static_cast<std::size_t>(r)) -
                       m(D + r);
        const Eigen::MatrixXd Szz = P.bottomRightCorner(M, M);
        Eigen::LLT<Eigen::MatrixXd> llt(Szz);
        if (llt.info() != Eigen::Success) throw Error("kalman_oracle: innovation covariance is not positive definite");
        const Eigen::MatrixXd Pxz = P.topRightCorner(D, M);
        const Eigen::MatrixXd gain = llt.solve(Pxz.transpose()).transpose();
        Eigen::MatrixXd Pxx = P.topLeftCorner(D, D) - gain * Pxz.transpose();
        Pxx = 0.5 * (Pxx + Pxx.transpose());
        m.head(D) += gain * innov;
        m.tail(M).setZero();
        P.setZero();
        P.topLeftCorner(D, D) = Pxx;
        for (Index i = 0; i < D; ++i)
            if (!(Pxx(i, i) > 0.0) || !std::isfinite(Pxx(i, i)))
                throw Error("kalman_oracle: posterior covariance lost positive definiteness at step " +
                            std::to_string(k));
        record(k);
    }
    return out;
}

Matrix particle_oracle(const expr::ModelSpec& model, const Matrix& observations, const TimeGrid& tg,
                       std::span<const double> x0, const ParticleOptions& options) {
    model.validate();
    const auto D = static_cast<std::size_t>(model.dim);
    const auto M = static_cast<std::size_t>(model.obs_dim);
    const std::size_t N = options.particles;
    if (N < 100) throw ConfigError("particles", "at least 100 particles are required");
    if (observations.rows() != tg.ntau + 1 || observations.cols() != M)
        throw std::invalid_argument("particle_oracle: observation path has the wrong shape");
    if (x0.size() != D) throw std::invalid_argument("particle_oracle: x0 has the wrong length");

    std::vector<expr::Program> f, h;
    for (const auto& e : model.f) f.emplace_back(e);
    for (const auto& e : model.h) h.emplace_back(e);

    NormalStream rng(options.seed, 3);
    std::vector<std::vector<double>> x(D, std::vector<double>(N)), next(D, std::vector<double>(N));
    for (std::size_t d = 0; d < D; ++d)
        for (std::size_t i = 0; i < N; ++i) x[d][i] = x0[d] + options.prior_sigma * rng.next();

    std::vector<const double*> cols(D);
    std::vector<double> drift(N), hv(N), logw(N), w(N), scratch;
    const double sqdt = std::sqrt(tg.dt);
    auto point_columns = [&] {
        for (std::size_t d = 0; d < D; ++d) cols[d] = x[d].data();
    };

    Matrix est(tg.ntau + 1, D);
    for (std::size_t d = 0; d < D; ++d) {
        double s = 0.0;
        for (double v : x[d]) s += v;
        est(0, d) = s / static_cast<double>(N);
    }

    for (std::size_t k = 1; k <= tg.ntau; ++k) {
        for (std::size_t n = 0; n < tg.nt; ++n) {
            point_columns();
            for (std::size_t d = 0; d < D; ++d) {
                f[d].eval_batch(cols, N, drift.data(), scratch);
                for (std::size_t i = 0; i < N; ++i) next[d][i] = x[d][i] + drift[i] * tg.dt + sqdt * rng.next();
            }
            std::swap(x, next);
        }

        point_columns();
        std::fill(logw.begin(), logw.end(), 0.0);
        for (std::size_t j = 0; j < M; ++j) {
            const double dy = observations(k, j) - observations(k - 1, j);
            h[j].eval_batch(cols, N, hv.data(), scratch);
            for (std::size_t i = 0; i < N; ++i) logw[i] += hv[i] * dy - 0.5 * hv[i] * hv[i] * tg.dtau;
        }
        double top = -std::numeric_limits<double>::infinity();
        for (double v : logw)
            if (std::isfinite(v)) top = std::max(top, v);
        double total = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            w[i] = std::isfinite(logw[i]) ? std::exp(logw[i] - top) : 0.0;
            total += w[i];
        }
        if (!(total > 0.0) || !std::isfinite(total))
            throw DensityCollapse("particle weights degenerated at observation " + std::to_string(k), k);

        for (std::size_t d = 0; d < D; ++d) {
            double s = 0.0;
            for (std::size_t i = 0; i < N; ++i) s += w[i] * x[d][i];
            est(k, d) = s / total;
        }

        // systematic resampling
        const double step = total / static_cast<double>(N);
        double u = (1.0 - rng.uniform()) * step;
        double cum = w[0];
        std::size_t src = 0;
        for (std::size_t i = 0; i < N; ++i) {
            while (cum < u && src + 1 < N) cum += w[++src];
            for (std::size_t d = 0; d < D; ++d) next[d][i] = x[d][src];
            u += step;
        }
        std::swap(x, next);
    }
    return est;
}

} // namespace yauyau::oracle
