#pragma once

// Multivariate SSA baseline on discretized curves.

#include <algorithm>

#include <Eigen/Dense>

#include "fssa/decomposition.hpp"
#include "fssa/error.hpp"

namespace fssa {

/// How the n univariate trajectory matrices are combined.
///   vertical:   nL x K, column j stacks y_j, ..., y_{j+L-1}
///   horizontal: L x nK, the L x K Hankel matrices of each variable side by side
enum class MssaStacking { vertical, horizontal };

struct MssaResult {
    Eigen::MatrixXd values;  ///< n x N reconstruction
    int rank = 0;            ///< rank actually used
    bool clipped = false;    ///< requested rank exceeded min(rows, cols) of the trajectory matrix
};

/// Row l * n + i holds variable i at lag l.
inline Eigen::MatrixXd stacked_trajectory(const Eigen::MatrixXd& values, int window,
                                          MssaStacking stacking = MssaStacking::vertical) {
    const auto n = values.rows();
    const int k = static_cast<int>(values.cols()) - window + 1;
    if (stacking == MssaStacking::vertical) {
        Eigen::MatrixXd x(n * window, k);
        for (int j = 0; j < k; ++j)
            for (int l = 0; l < window; ++l) x.block(static_cast<Eigen::Index>(l) * n, j, n, 1) = values.col(j + l);
        return x;
    }
    Eigen::MatrixXd x(window, n * k);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) x.col(i * k + j) = values.row(i).segment(j, window).transpose();
    return x;
}

namespace detail {

/// Best rank-r approximation X V_r V_r^T (or U_r U_r^T X), using whichever
/// cross-product is smaller. Equals the truncated SVD U_r S_r V_r^T.
inline Eigen::MatrixXd low_rank_projection(const Eigen::MatrixXd& x, int rank) {
    if (x.cols() <= x.rows()) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x.transpose() * x);
        const Eigen::MatrixXd v = eig.eigenvectors().rightCols(rank);
        return (x * v) * v.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x * x.transpose());
    const Eigen::MatrixXd u = eig.eigenvectors().rightCols(rank);
    return u * (u.transpose() * x);
}

}  // namespace detail

/// Rank-truncated MSSA reconstruction followed by per-variable diagonal
/// averaging.
inline MssaResult mssa_reconstruct(const Eigen::MatrixXd& values, int window, int rank,
                                   MssaStacking stacking = MssaStacking::vertical) {
    const int length = static_cast<int>(values.cols());
    check_window(window, length);
    if (rank < 1) throw ConfigurationError("MSSA rank must be >= 1");
    const auto n = values.rows();
    const int k = length - window + 1;
    const Eigen::MatrixXd x = stacked_trajectory(values, window, stacking);
    MssaResult out;
    const auto max_rank = std::min(x.rows(), x.cols());
    out.rank = static_cast<int>(std::min<Eigen::Index>(rank, max_rank));
    out.clipped = rank > max_rank;
    const Eigen::MatrixXd approx = detail::low_rank_projection(x, out.rank);

    out.values = Eigen::MatrixXd::Zero(n, length);
    if (stacking == MssaStacking::vertical) {
        for (int j = 0; j < k; ++j)
            for (int l = 0; l < window; ++l)
                out.values.col(j + l) += approx.block(static_cast<Eigen::Index>(l) * n, j, n, 1);
    } else {
        for (Eigen::Index i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j)
                out.values.row(i).segment(j, window) += approx.col(i * k + j).transpose();
    }
    for (int t = 0; t < length; ++t) out.values.col(t) /= std::min({t + 1, window, k, length - t});
    return out;
}

}  // namespace fssa
