#pragma once

// Synthetic functional time series: a periodic signal plus Gaussian white
// noise or a FAR(1) process with a parabolic kernel.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fssa/error.hpp"

namespace fssa::sim {

/// Integral of (2 - (2s-1)^2 - (2u-1)^2)^2 over the unit square.
inline constexpr double kParabolicKernelSquaredNorm = 88.0 / 45.0;

struct NoiseModel {
    enum class Kind { gwn, far1 };
    Kind kind = Kind::gwn;
    double hs_norm = 0.0;  ///< squared Hilbert-Schmidt norm of the FAR operator

    static NoiseModel gwn() { return {Kind::gwn, 0.0}; }
    static NoiseModel far1(double hs) { return {Kind::far1, hs}; }

    std::string label() const {
        if (kind == Kind::gwn) return "GWN";
        std::string v = std::to_string(hs_norm);
        v.erase(v.find_last_not_of('0') + 1);
        if (v.back() == '.') v += '0';
        return "FAR1(" + v + ")";
    }
    friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

struct SimConfig {
    int length = 100;  ///< N
    int grid_size = 100;  ///< n
    double omega = 0.0;
    NoiseModel noise = NoiseModel::gwn();
    double sigma = 0.1;
    std::uint64_t seed = 1;
    int burn_in = 100;

    void validate() const {
        if (length < 4) throw ConfigurationError("series length N must be >= 4");
        if (grid_size < 2) throw ConfigurationError("grid size n must be >= 2");
        if (sigma < 0.0) throw ConfigurationError("sigma must be non-negative");
        if (burn_in < 0) throw ConfigurationError("burn-in must be non-negative");
        if (noise.kind == NoiseModel::Kind::far1 && !(noise.hs_norm >= 0.0 && noise.hs_norm < 1.0))
            throw StationarityError("FAR(1) requires 0 <= ||Psi||^2 < 1");
    }
};

/// n equally spaced points 0, 1/(n-1), ..., 1.
inline std::vector<double> uniform_grid(int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n - 1);
    return g;
}

/// m_t(s) = exp(s^2) cos(2 pi omega t) + cos(4 pi s) sin(2 pi omega t), t = 1..N.
inline Eigen::MatrixXd gen_periodic(int length, std::span<const double> grid, double omega) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.size()), length);
    for (int t = 1; t <= length; ++t) {
        const double phase = 2.0 * std::numbers::pi * omega * t;
        const double c = std::cos(phase), s = std::sin(phase);
        for (std::size_t i = 0; i < grid.size(); ++i)
            out(static_cast<Eigen::Index>(i), t - 1) =
                std::exp(grid[i] * grid[i]) * c + std::cos(4.0 * std::numbers::pi * grid[i]) * s;
    }
    return out;
}

/// gamma_0 giving the kernel a squared Hilbert-Schmidt norm of `hs_norm`.
inline double kernel_scale(double hs_norm) { return std::sqrt(hs_norm / kParabolicKernelSquaredNorm); }

inline double parabolic_kernel(double s, double u, double gamma0) {
    const double a = 2.0 * s - 1.0, b = 2.0 * u - 1.0;
    return gamma0 * (2.0 - a * a - b * b);
}

inline Eigen::VectorXd trapezoid_weights(std::span<const double> grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const double h = grid[static_cast<std::size_t>(i + 1)] - grid[static_cast<std::size_t>(i)];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    return w;
}

/// Discretized FAR operator: (A x)_i = sum_j psi(s_i, u_j) x_j w_j.
inline Eigen::MatrixXd far_operator(std::span<const double> grid, double hs_norm) {
    const double gamma0 = kernel_scale(hs_norm);
    const Eigen::VectorXd w = trapezoid_weights(grid);
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            a(i, j) = parabolic_kernel(grid[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(j)], gamma0) * w[j];
    return a;
}

/// Trapezoid double-quadrature estimate of the squared Hilbert-Schmidt norm
/// of the kernel on `grid`.
inline double discrete_hs_norm(std::span<const double> grid, double hs_norm) {
    const double gamma0 = kernel_scale(hs_norm);
    const Eigen::VectorXd w = trapezoid_weights(grid);
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double k = parabolic_kernel(grid[i], grid[j], gamma0);
            acc += w[static_cast<Eigen::Index>(i)] * w[static_cast<Eigen::Index>(j)] * k * k;
        }
    return acc;
}

/// Standard Brownian motion sampled on `grid` (grid[0] is taken as the
/// origin of the path, so the first value is 0).
inline Eigen::VectorXd brownian_path(std::span<const double> grid, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd path(static_cast<Eigen::Index>(grid.size()));
    path[0] = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        path[static_cast<Eigen::Index>(i)] = path[static_cast<Eigen::Index>(i - 1)] + std::sqrt(grid[i] - grid[i - 1]) * normal(rng);
    return path;
}

/// n x N noise matrix for the configured setting.
inline Eigen::MatrixXd gen_noise(const SimConfig& cfg, std::span<const double> grid, std::mt19937_64& rng) {
    cfg.validate();
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd out(n, cfg.length);
    if (cfg.noise.kind == NoiseModel::Kind::gwn) {
        std::normal_distribution<double> normal(0.0, cfg.sigma);
        for (Eigen::Index t = 0; t < cfg.length; ++t)
            for (Eigen::Index i = 0; i < n; ++i) out(i, t) = normal(rng);
        return out;
    }
    const Eigen::MatrixXd op = far_operator(grid, cfg.noise.hs_norm);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int t = 0; t < cfg.burn_in + cfg.length; ++t) {
        Eigen::VectorXd next = brownian_path(grid, rng);
        if (cfg.noise.hs_norm > 0.0) next.noalias() += op * x;
        x = std::move(next);
        if (t >= cfg.burn_in) out.col(t - cfg.burn_in) = x;
    }
    return out;
}

inline Eigen::MatrixXd gen_noise(const SimConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    const auto grid = uniform_grid(cfg.grid_size);
    return gen_noise(cfg, grid, rng);
}

inline double rmse(const Eigen::MatrixXd& y, const Eigen::MatrixXd& yhat) {
    if (y.rows() != yhat.rows() || y.cols() != yhat.cols()) throw DimensionError("RMSE needs equal shapes");
    return std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
}

}  // namespace fssa::sim
