#pragma once

// Independent reference computations for one-dimensional steps: explicitly
// assembled dense matrices and a tridiagonal (Thomas) solve. None of this
// touches the transform path.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace yauyau::testing {

// (1/ds^2) tridiag(1, -2, 1) with Dirichlet closure.
inline Eigen::MatrixXd dense_laplacian(std::size_t n, double ds) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const double c = 1.0 / (ds * ds);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
        L(i, i) = -2.0 * c;
        if (i > 0) L(i, i - 1) = c;
        if (i + 1 < static_cast<Eigen::Index>(n)) L(i, i + 1) = c;
    }
    return L;
}

// C = -diag(f) Dc - diag(r), Dc the central difference (u_{i+1} - u_{i-1}) / 2ds.
inline Eigen::MatrixXd dense_drift_reaction(std::span<const double> f, std::span<const double> r, double ds) {
    const auto n = static_cast<Eigen::Index>(f.size());
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double fi = f[static_cast<std::size_t>(i)];
        if (i > 0) C(i, i - 1) = fi / (2.0 * ds);
        if (i + 1 < n) C(i, i + 1) = -fi / (2.0 * ds);
        C(i, i) = -r[static_cast<std::size_t>(i)];
    }
    return C;
}

// u' = (I - dt/2 L)^{-1} (I + dt C) u
inline std::vector<double> dense_step(std::span<const double> u, std::span<const double> f,
                                      std::span<const double> r, double dt, double ds) {
    const auto n = static_cast<Eigen::Index>(u.size());
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd A = I - 0.5 * dt * dense_laplacian(u.size(), ds);
    Eigen::MatrixXd B = I + dt * dense_drift_reaction(f, r, ds);
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(u.data(), n);
    Eigen::VectorXd y = A.partialPivLu().solve(B * x);
    return {y.data(), y.data() + n};
}

// Solves tridiag(a, b, c) x = d (a[0] and c[n-1] unused).
inline std::vector<double> thomas_solve(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                                        std::vector<double> d) {
    const std::size_t n = d.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
    return x;
}

} // namespace yauyau::testing
