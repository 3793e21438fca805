#pragma once

// Embedding of a functional time series into its trajectory operator and
// the eigentriple decomposition of that operator.
//
// Coefficient vectors in H_d^L use the flat layout k = q * L + l (0-based),
// where q indexes the basis function and l the lag inside the window. A
// column of length L*d reshaped column-major to an L x d matrix therefore
// holds lag block l in row l.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "fssa/basis.hpp"
#include "fssa/error.hpp"

namespace fssa {

inline Eigen::Index flat_index(int q, int l, int window) { return static_cast<Eigen::Index>(q) * window + l; }

inline void check_window(int window, int length) {
    if (window < 2 || window > length / 2)
        throw WindowLengthError("window length must satisfy 2 <= L <= N/2 (got L=" + std::to_string(window) +
                                ", N=" + std::to_string(length) + ")");
}

/// Functional L-lagged embedding. The trajectory operator is implicit: cell
/// (l, j) is curve y_{l+j}. Only W = G * coef (the inner products
/// <y_t, nu_q>) is precomputed.
class Embedding {
public:
    Embedding(FunctionalTimeSeries fts, int window)
        : fts_(std::move(fts)), window_(window), gram_(gram_matrix(fts_.basis())) {
        check_window(window_, fts_.length());
        k_ = fts_.length() - window_ + 1;
        w_ = gram_.values() * fts_.coef();
    }

    const FunctionalTimeSeries& series() const noexcept { return fts_; }
    const BasisSystem& basis() const noexcept { return fts_.basis(); }
    const GramMatrix& gram() const noexcept { return gram_; }
    int window() const noexcept { return window_; }
    int columns() const noexcept { return k_; }
    int dim() const noexcept { return fts_.dim(); }
    int length() const noexcept { return fts_.length(); }
    /// d x N matrix of <y_t, nu_q>.
    const Eigen::MatrixXd& projections() const noexcept { return w_; }

    /// Ld x K matrix whose column j holds <x_j, phi_k> in the flat layout.
    Eigen::MatrixXd lagged_projections() const { return lag_stack(w_, window_); }

    /// Stacks the rows of a d x N matrix into the Ld x K lagged layout:
    /// out(q*L + l, j) = m(q, l + j).
    static Eigen::MatrixXd lag_stack(const Eigen::MatrixXd& m, int window) {
        const auto d = m.rows();
        const auto k = m.cols() - window + 1;
        Eigen::MatrixXd out(d * window, k);
        for (Eigen::Index q = 0; q < d; ++q)
            for (int l = 0; l < window; ++l) out.row(q * window + l) = m.row(q).segment(l, k);
        return out;
    }

private:
    FunctionalTimeSeries fts_;
    int window_;
    int k_ = 0;
    GramMatrix gram_;
    Eigen::MatrixXd w_;
};

inline Embedding embed(const FunctionalTimeSeries& fts, int window) { return Embedding(fts, window); }

/// G kron I_L: in the flat layout, G_L[i,j] = delta(r_i, r_j) <nu_{q_i}, nu_{q_j}>.
inline Eigen::MatrixXd lift_to_window(const Eigen::MatrixXd& m, int window) {
    const Eigen::Index d = m.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d * window, d * window);
    for (Eigen::Index p = 0; p < d; ++p)
        for (Eigen::Index q = 0; q < d; ++q)
            if (m(p, q) != 0.0) out.block(p * window, q * window, window, window).diagonal().setConstant(m(p, q));
    return out;
}

struct NormalMatrices {
    Eigen::MatrixXd gram;  ///< G_L
    Eigen::MatrixXd s0;    ///< S0[i,j] = sum_m <y_{r_i+m}, nu_{q_i}> <y_{r_j+m}, nu_{q_j}>
};

inline NormalMatrices build_normal_matrices(const Embedding& emb) {
    const Eigen::MatrixXd stacked = emb.lagged_projections();
    NormalMatrices out;
    out.gram = lift_to_window(emb.gram().values(), emb.window());
    out.s0 = stacked * stacked.transpose();
    return out;
}

/// Eigentriples (lambda_i, psi_i, v_i) of the trajectory operator, sorted by
/// decreasing lambda. psi_i is stored as its Ld coefficient vector in the
/// flat layout; v_i is a unit vector in R^K.
class Decomposition {
public:
    Decomposition(BasisSystem basis, int window, int columns, Eigen::VectorXd lambda, Eigen::MatrixXd psi,
                  Eigen::MatrixXd v)
        : basis_(std::move(basis)), window_(window), k_(columns), lambda_(std::move(lambda)),
          psi_(std::move(psi)), v_(std::move(v)) {
        const Eigen::Index r = lambda_.size();
        if (r < 1) throw DegenerateSeriesError("decomposition has no eigentriples");
        if (psi_.rows() != static_cast<Eigen::Index>(basis_.dim()) * window_ || psi_.cols() != r)
            throw DimensionError("psi must be (L*d) x r");
        if (v_.rows() != k_ || v_.cols() != r) throw DimensionError("v must be K x r");
        for (Eigen::Index i = 1; i < r; ++i)
            if (lambda_[i] > lambda_[i - 1]) throw FormatError("eigenvalues must be in descending order");
        if ((lambda_.array() <= 0.0).any()) throw FormatError("retained eigenvalues must be positive");
    }

    const BasisSystem& basis() const noexcept { return basis_; }
    int window() const noexcept { return window_; }
    int columns() const noexcept { return k_; }
    int length() const noexcept { return window_ + k_ - 1; }
    int dim() const noexcept { return basis_.dim(); }
    int rank() const noexcept { return static_cast<int>(lambda_.size()); }
    const Eigen::VectorXd& lambda() const noexcept { return lambda_; }
    const Eigen::MatrixXd& psi() const noexcept { return psi_; }
    const Eigen::MatrixXd& v() const noexcept { return v_; }
    Eigen::VectorXd singular_values() const { return lambda_.cwiseSqrt(); }

    /// L x d view of psi_i; row l is the lag-l coefficient block.
    Eigen::Map<const Eigen::MatrixXd> psi_blocks(int i) const {
        return {psi_.col(i).data(), window_, basis_.dim()};
    }
    Eigen::VectorXd psi_block(int i, int lag) const { return psi_blocks(i).row(lag).transpose(); }

private:
    BasisSystem basis_;
    int window_;
    int k_;
    Eigen::VectorXd lambda_;
    Eigen::MatrixXd psi_;
    Eigen::MatrixXd v_;
};

/// Relative cutoff below which eigenvalues are treated as numerical zeros.
inline constexpr double kEigenvalueCutoff = 1e-12;

/// Solves S0 c = lambda G_L c through the Cholesky-whitened symmetric
/// problem and returns the leading `rank` eigentriples (all numerically
/// nonzero ones by default).
inline Decomposition decompose(const Embedding& emb, std::optional<int> rank = std::nullopt) {
    const int window = emb.window();
    const int k = emb.columns();
    const Eigen::Index ld = static_cast<Eigen::Index>(emb.dim()) * window;
    const Eigen::Index max_rank = std::min<Eigen::Index>(ld, k);
    if (rank && (*rank < 1 || *rank > max_rank))
        throw ConfigurationError("rank must satisfy 1 <= r <= min(L*d, K) = " + std::to_string(max_rank));

    Eigen::LLT<Eigen::MatrixXd> llt(emb.gram().values());
    if (llt.info() != Eigen::Success) throw BasisDegeneracyError("Gram matrix is not positive definite");
    // G_L = R_L^T R_L with R_L = R kron I_L and G = R^T R. The whitened matrix
    // R_L^{-T} S0 R_L^{-1} equals B B^T, where B is the lagged stack of
    // R^{-T} W; its eigenpairs are the squared singular values and left
    // singular vectors of B.
    const auto r_upper = llt.matrixU();
    const Eigen::MatrixXd whitened = Embedding::lag_stack(r_upper.transpose().solve(emb.projections()), window);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(whitened, Eigen::ComputeThinU);
    if (svd.info() != Eigen::Success) throw DegenerateSeriesError("SVD of the whitened trajectory failed");

    const Eigen::VectorXd values = svd.singularValues().array().square();  // descending
    const double top = values.size() > 0 ? values[0] : 0.0;
    if (!(top > 0.0) || !std::isfinite(top)) throw DegenerateSeriesError("trajectory operator is zero");
    Eigen::Index kept = 0;
    while (kept < max_rank && values[kept] >= kEigenvalueCutoff * top) ++kept;
    if (rank) kept = std::min<Eigen::Index>(kept, *rank);

    const Eigen::VectorXd lambda = values.head(kept);
    // c = R_L^{-1} u, i.e. each lag block is mapped by R^{-1}. With a column
    // viewed as an L x d matrix (row l = block l) this is U_i R^{-T}.
    const Eigen::MatrixXd& gram = emb.gram().values();
    Eigen::MatrixXd psi(ld, kept);
    for (Eigen::Index i = 0; i < kept; ++i) {
        const Eigen::Map<const Eigen::MatrixXd> u_blocks(svd.matrixU().col(i).data(), window, emb.dim());
        Eigen::Map<Eigen::MatrixXd> c_blocks(psi.col(i).data(), window, emb.dim());
        c_blocks = r_upper.solve(u_blocks.transpose()).transpose();
        c_blocks /= std::sqrt((c_blocks * gram * c_blocks.transpose()).trace());
    }

    const Eigen::MatrixXd stacked = emb.lagged_projections();
    // v_i[j] = <psi_i, x_j> / sqrt(lambda_i)
    Eigen::MatrixXd v = stacked.transpose() * psi;
    for (Eigen::Index i = 0; i < kept; ++i) {
        v.col(i) /= std::sqrt(lambda[i]);
        Eigen::Index arg = 0;
        v.col(i).cwiseAbs().maxCoeff(&arg);
        if (v(arg, i) < 0.0) {
            v.col(i) = -v.col(i);
            psi.col(i) = -psi.col(i);
        }
    }
    return Decomposition(emb.basis(), window, k, std::move(lambda), std::move(psi), std::move(v));
}

inline Decomposition decompose(const FunctionalTimeSeries& fts, int window, std::optional<int> rank = std::nullopt) {
    return decompose(Embedding(fts, window), rank);
}

}  // namespace fssa
