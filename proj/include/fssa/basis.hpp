#pragma once

// Finite function bases on [0,1], their Gram matrices, and the functional
// time series type built on top of them.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fssa/error.hpp"

namespace fssa {

enum class BasisKind { bspline, orthonormal_grid };

inline std::string to_string(BasisKind kind) {
    return kind == BasisKind::bspline ? "bspline" : "orthonormal_grid";
}

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussLegendreRule gauss_legendre(int order) {
    if (order < 1) throw ConfigurationError("Gauss-Legendre order must be >= 1");
    GaussLegendreRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-like initial guess, refined by Newton on P_order.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= order; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = order * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
    return rule;
}

/// A finite basis {nu_1, ..., nu_d} of functions on [0,1].
///
/// Two families are supported: clamped B-splines of arbitrary degree and
/// "orthonormal grid" step functions sqrt(n) * 1[cell_i], whose Gram matrix
/// is the identity. Instances are immutable value types.
class BasisSystem {
public:
    /// Clamped B-spline basis of dimension `d`. Interior knots default to
    /// d - degree - 1 equally spaced points.
    static BasisSystem bspline(int d, int degree = 3,
                               std::optional<std::vector<double>> interior_knots = std::nullopt) {
        if (degree < 1) throw ConfigurationError("B-spline degree must be >= 1");
        if (d < 2) throw ConfigurationError("basis dimension must be >= 2");
        std::vector<double> interior;
        if (interior_knots) {
            interior = *interior_knots;
            for (double k : interior) {
                if (!(k > 0.0 && k < 1.0))
                    throw DomainError("interior knots must lie strictly inside (0,1)");
            }
            if (!std::is_sorted(interior.begin(), interior.end()))
                throw ConfigurationError("interior knots must be non-decreasing");
            if (static_cast<int>(interior.size()) + degree + 1 != d)
                throw ConfigurationError("B-spline dimension must equal #interior knots + degree + 1");
        } else {
            const int count = d - degree - 1;
            if (count < 0)
                throw ConfigurationError("B-spline dimension must be at least degree + 1");
            for (int i = 1; i <= count; ++i) interior.push_back(static_cast<double>(i) / (count + 1));
        }
        // Multiplicity beyond degree + 1 would produce identically-zero functions.
        for (std::size_t i = 0; i < interior.size();) {
            std::size_t j = i;
            while (j < interior.size() && interior[j] == interior[i]) ++j;
            if (static_cast<int>(j - i) > degree + 1)
                throw ConfigurationError("interior knot multiplicity exceeds degree + 1");
            i = j;
        }

        BasisSystem b;
        b.kind_ = BasisKind::bspline;
        b.d_ = d;
        b.degree_ = degree;
        b.interior_ = interior;
        b.knots_.assign(degree + 1, 0.0);
        b.knots_.insert(b.knots_.end(), interior.begin(), interior.end());
        b.knots_.insert(b.knots_.end(), degree + 1, 1.0);
        b.breaks_.push_back(0.0);
        for (double k : interior)
            if (k > b.breaks_.back()) b.breaks_.push_back(k);
        b.breaks_.push_back(1.0);
        return b;
    }

    /// n indicator functions on equal cells, scaled by sqrt(n).
    static BasisSystem orthonormal_grid(int n) {
        if (n < 2) throw ConfigurationError("basis dimension must be >= 2");
        BasisSystem b;
        b.kind_ = BasisKind::orthonormal_grid;
        b.d_ = n;
        b.degree_ = 0;
        for (int i = 0; i <= n; ++i) b.breaks_.push_back(static_cast<double>(i) / n);
        return b;
    }

    BasisKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return d_; }
    /// Polynomial degree on each piece (0 for the step basis).
    int degree() const noexcept { return degree_; }
    const std::vector<double>& interior_knots() const noexcept { return interior_; }
    /// Distinct breakpoints 0 = b_0 < ... < b_m = 1; every basis function is
    /// a polynomial on each [b_i, b_{i+1}].
    const std::vector<double>& breakpoints() const noexcept { return breaks_; }

    /// Values of all d basis functions at s.
    Eigen::VectorXd evaluate(double s) const {
        if (!(s >= 0.0 && s <= 1.0)) throw DomainError("evaluation point outside [0,1]");
        Eigen::VectorXd out = Eigen::VectorXd::Zero(d_);
        if (kind_ == BasisKind::orthonormal_grid) {
            const int cell = std::min(static_cast<int>(s * d_), d_ - 1);
            out[cell] = std::sqrt(static_cast<double>(d_));
            return out;
        }
        const int p = degree_;
        const int span = find_span(s);
        std::vector<double> n(p + 1, 0.0), left(p + 1, 0.0), right(p + 1, 0.0);
        n[0] = 1.0;
        for (int j = 1; j <= p; ++j) {
            left[j] = s - knots_[span + 1 - j];
            right[j] = knots_[span + j] - s;
            double saved = 0.0;
            for (int r = 0; r < j; ++r) {
                const double temp = n[r] / (right[r + 1] + left[j - r]);
                n[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            n[j] = saved;
        }
        for (int j = 0; j <= p; ++j) out[span - p + j] = n[j];
        return out;
    }

    /// Evaluation matrix: row i holds all basis functions at grid[i].
    Eigen::MatrixXd evaluate(std::span<const double> grid) const {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.size()), d_);
        for (std::size_t i = 0; i < grid.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = evaluate(grid[i]).transpose();
        return out;
    }

    friend bool operator==(const BasisSystem& a, const BasisSystem& b) {
        return a.kind_ == b.kind_ && a.d_ == b.d_ && a.degree_ == b.degree_ && a.interior_ == b.interior_;
    }

private:
    BasisSystem() = default;

    int find_span(double s) const {
        // Largest span index mu in [degree, d-1] with knots[mu] <= s < knots[mu+1];
        // s == 1 belongs to the last non-empty span.
        if (s >= 1.0) {
            int mu = d_ - 1;
            while (mu > degree_ && knots_[mu] >= knots_[mu + 1]) --mu;
            return mu;
        }
        const auto it = std::upper_bound(knots_.begin() + degree_, knots_.begin() + d_ + 1, s);
        return static_cast<int>(it - knots_.begin()) - 1;
    }

    BasisKind kind_ = BasisKind::bspline;
    int d_ = 0;
    int degree_ = 0;
    std::vector<double> interior_;
    std::vector<double> knots_;
    std::vector<double> breaks_;
};

/// Matrix of pairwise L2[0,1] inner products of basis functions.
class GramMatrix {
public:
    explicit GramMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {}
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    Eigen::Index dim() const noexcept { return values_.rows(); }

private:
    Eigen::MatrixXd values_;
};

/// Exact Gram matrix: Gauss-Legendre with degree + 1 nodes per polynomial
/// piece integrates the product of two pieces exactly.
inline GramMatrix gram_matrix(const BasisSystem& basis) {
    const int d = basis.dim();
    if (basis.kind() == BasisKind::orthonormal_grid) return GramMatrix(Eigen::MatrixXd::Identity(d, d));
    const auto rule = gauss_legendre(basis.degree() + 1);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
    const auto& br = basis.breakpoints();
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        const double a = br[k], b = br[k + 1];
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const Eigen::VectorXd v = basis.evaluate(mid + half * rule.nodes[q]);
            g.noalias() += (half * rule.weights[q]) * v * v.transpose();
        }
    }
    return GramMatrix(0.5 * (g + g.transpose()));
}

/// <f, g> = f^T G g for coefficient vectors in the same basis.
inline double inner_product(const Eigen::Ref<const Eigen::VectorXd>& f, const Eigen::Ref<const Eigen::VectorXd>& g,
                            const GramMatrix& gram) {
    if (f.size() != gram.dim() || g.size() != gram.dim())
        throw DimensionError("coefficient vectors must match the basis dimension");
    return f.dot(gram.values() * g);
}

/// A functional time series y_1, ..., y_N stored as a d x N coefficient
/// matrix over a fixed basis: y_t(s) = sum_i coef(i, t) nu_i(s).
class FunctionalTimeSeries {
public:
    FunctionalTimeSeries(BasisSystem basis, Eigen::MatrixXd coef)
        : basis_(std::move(basis)), coef_(std::move(coef)) {
        if (coef_.rows() != basis_.dim())
            throw DimensionError("coefficient rows must equal the basis dimension");
        if (coef_.cols() < 2) throw DimensionError("a functional time series needs N >= 2 curves");
        if (!coef_.allFinite()) throw DomainError("coefficients must be finite");
    }

    const BasisSystem& basis() const noexcept { return basis_; }
    const Eigen::MatrixXd& coef() const noexcept { return coef_; }
    int length() const noexcept { return static_cast<int>(coef_.cols()); }
    int dim() const noexcept { return static_cast<int>(coef_.rows()); }

    double evaluate(int t, double s) const { return basis_.evaluate(s).dot(coef_.col(t)); }

    /// n x N matrix of curve values on a grid.
    Eigen::MatrixXd evaluate(std::span<const double> grid) const { return basis_.evaluate(grid) * coef_; }

private:
    BasisSystem basis_;
    Eigen::MatrixXd coef_;
};

}  // namespace fssa
