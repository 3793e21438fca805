#pragma once

// Smoothing discrete samples into a basis: ordinary least squares and
// GCV selection of the basis dimension.

#include <algorithm>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fssa/basis.hpp"
#include "fssa/error.hpp"

namespace fssa {

namespace detail {

inline void check_grid(std::span<const double> grid) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) throw DomainError("grid points must lie in [0,1]");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("grid must be strictly increasing");
    }
}

}  // namespace detail

/// Least-squares fit of each column of `values` (n x N, samples on `grid`)
/// onto `basis`. One QR factorization of the n x d evaluation matrix is
/// shared by all curves.
inline FunctionalTimeSeries project_samples(std::span<const double> grid, const Eigen::MatrixXd& values,
                                            const BasisSystem& basis) {
    detail::check_grid(grid);
    const auto n = static_cast<Eigen::Index>(grid.size());
    if (values.rows() != n) throw DimensionError("values must have one row per grid point");
    if (n < basis.dim()) throw UnderdeterminedError("need at least d grid points to fit a d-dimensional basis");
    const Eigen::MatrixXd design = basis.evaluate(grid);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < basis.dim()) throw SingularFitError("basis evaluation matrix is rank deficient on this grid");
    return FunctionalTimeSeries(basis, qr.solve(values));
}

/// Mean over curves of GCV(d) = (RSS_t / n) / (1 - d/n)^2 for a basis.
inline double gcv_score(std::span<const double> grid, const Eigen::MatrixXd& values, const BasisSystem& basis) {
    const double n = static_cast<double>(grid.size());
    if (basis.dim() >= static_cast<int>(grid.size()))
        return std::numeric_limits<double>::infinity();
    const auto fts = project_samples(grid, values, basis);
    const Eigen::MatrixXd resid = values - fts.evaluate(grid);
    const double denom = 1.0 - basis.dim() / n;
    const double mean_rss = resid.colwise().squaredNorm().mean();
    return (mean_rss / n) / (denom * denom);
}

/// Picks the candidate cubic (or `degree`) B-spline dimension with the
/// smallest mean GCV; near-ties resolve toward the smaller dimension.
inline int gcv_select_dof(std::span<const double> grid, const Eigen::MatrixXd& values,
                          std::vector<int> candidates, int degree = 3) {
    if (candidates.empty()) throw ConfigurationError("GCV needs at least one candidate dimension");
    std::sort(candidates.begin(), candidates.end());
    for (int d : candidates) {
        if (d > static_cast<int>(grid.size())) throw UnderdeterminedError("candidate dimension exceeds grid size");
    }
    if (candidates.size() == 1) return candidates.front();

    // Scores closer than this (relative to the data's mean square) count as ties.
    const double tie = 1e-12 * values.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, values.size()));
    int best = candidates.front();
    double best_score = std::numeric_limits<double>::infinity();
    for (int d : candidates) {
        const double score = gcv_score(grid, values, BasisSystem::bspline(d, std::min(degree, d - 1)));
        if (score < best_score - tie) {
            best_score = score;
            best = d;
        }
    }
    return best;
}

}  // namespace fssa
