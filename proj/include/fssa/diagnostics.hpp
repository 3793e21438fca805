#pragma once

// Separability and grouping-support diagnostics.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fssa/basis.hpp"
#include "fssa/decomposition.hpp"
#include "fssa/error.hpp"

namespace fssa {

/// w_t = min(t, L, N - t + 1) for 1-based t.
inline Eigen::VectorXd w_weights(int length, int window) {
    check_window(window, length);
    Eigen::VectorXd w(length);
    for (int t = 1; t <= length; ++t) w[t - 1] = std::min({t, window, length - t + 1});
    return w;
}

inline double w_inner(const FunctionalTimeSeries& a, const FunctionalTimeSeries& b, int window,
                      const GramMatrix& gram) {
    if (a.length() != b.length()) throw DimensionError("series lengths differ");
    if (!(a.basis() == b.basis())) throw DimensionError("series use different bases");
    const Eigen::VectorXd w = w_weights(a.length(), window);
    // Column-wise <a_t, b_t> = diag(A^T G B).
    const Eigen::VectorXd pointwise = (a.coef().array() * (gram.values() * b.coef()).array()).colwise().sum();
    return w.dot(pointwise);
}

inline double w_inner(const FunctionalTimeSeries& a, const FunctionalTimeSeries& b, int window) {
    return w_inner(a, b, window, gram_matrix(a.basis()));
}

struct WCorrelationMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> labels;
};

inline WCorrelationMatrix wcor_matrix(const std::vector<FunctionalTimeSeries>& series, int window,
                                      std::vector<std::string> labels = {}) {
    if (series.empty()) throw ConfigurationError("w-correlation needs at least one series");
    const auto m = static_cast<Eigen::Index>(series.size());
    const GramMatrix gram = gram_matrix(series.front().basis());
    Eigen::MatrixXd inner(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i; j < m; ++j)
            inner(i, j) = inner(j, i) = w_inner(series[static_cast<std::size_t>(i)], series[static_cast<std::size_t>(j)], window, gram);
    for (Eigen::Index i = 0; i < m; ++i)
        if (!(inner(i, i) > 0.0))
            throw UndefinedCorrelationError("w-correlation undefined: series " + std::to_string(i + 1) +
                                            " has zero weighted norm");
    WCorrelationMatrix out;
    out.values.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        out.values(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < m; ++j) {
            const double rho = std::clamp(inner(i, j) / std::sqrt(inner(i, i) * inner(j, j)), -1.0, 1.0);
            out.values(i, j) = out.values(j, i) = rho;
        }
    }
    if (labels.empty())
        for (Eigen::Index i = 0; i < m; ++i) labels.push_back("g" + std::to_string(i + 1));
    out.labels = std::move(labels);
    return out;
}

/// Mean-removed periodogram |DFT|^2 / K at Fourier frequencies j/K,
/// j = 0..floor(K/2).
inline Eigen::VectorXd periodogram(const Eigen::Ref<const Eigen::VectorXd>& x) {
    const Eigen::Index k = x.size();
    const Eigen::VectorXd centred = x.array() - x.mean();
    Eigen::VectorXd out(k / 2 + 1);
    for (Eigen::Index j = 0; j <= k / 2; ++j) {
        double re = 0.0, im = 0.0;
        for (Eigen::Index t = 0; t < k; ++t) {
            const double angle = 2.0 * std::numbers::pi * static_cast<double>(j * t % k) / static_cast<double>(k);
            re += centred[t] * std::cos(angle);
            im -= centred[t] * std::sin(angle);
        }
        out[j] = (re * re + im * im) / static_cast<double>(k);
    }
    return out;
}

/// Frequency of the periodogram peak over j/K, j >= 1; 0 when the
/// mean-removed vector carries no energy.
inline double dominant_frequency(const Eigen::Ref<const Eigen::VectorXd>& x) {
    const Eigen::VectorXd p = periodogram(x);
    const double energy = (x.array() - x.mean()).square().sum();
    if (p.size() < 2 || energy <= 1e-24 * std::max(1.0, x.squaredNorm())) return 0.0;
    Eigen::Index arg = 0;
    p.tail(p.size() - 1).maxCoeff(&arg);
    return static_cast<double>(arg + 1) / static_cast<double>(x.size());
}

struct EigentripleSummary {
    Eigen::VectorXd singular_values;
    Eigen::VectorXd percentages;        ///< 100 * lambda_i / sum(lambda)
    Eigen::MatrixXd v;                  ///< K x r right singular vectors
    Eigen::VectorXd dominant_frequency; ///< per component, in cycles per step
    std::vector<double> render_grid;
    std::vector<Eigen::MatrixXd> psi_curves;  ///< per component: L x m values of each lag block on the grid
    Eigen::MatrixXd lag_norms;                ///< L x r: ||psi_i block l||
};

inline EigentripleSummary eigentriple_summary(const Decomposition& dec, std::span<const double> render_grid) {
    EigentripleSummary out;
    const int r = dec.rank();
    out.singular_values = dec.singular_values();
    out.percentages = 100.0 * dec.lambda() / dec.lambda().sum();
    out.v = dec.v();
    out.dominant_frequency.resize(r);
    for (int i = 0; i < r; ++i) out.dominant_frequency[i] = dominant_frequency(dec.v().col(i));

    out.render_grid.assign(render_grid.begin(), render_grid.end());
    const Eigen::MatrixXd eval = dec.basis().evaluate(render_grid);  // m x d
    const GramMatrix gram = gram_matrix(dec.basis());
    out.lag_norms.resize(dec.window(), r);
    out.psi_curves.reserve(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
        const auto blocks = dec.psi_blocks(i);  // L x d
        out.psi_curves.emplace_back(blocks * eval.transpose());
        for (int l = 0; l < dec.window(); ++l) {
            const Eigen::VectorXd b = blocks.row(l).transpose();
            out.lag_norms(l, i) = std::sqrt(std::max(0.0, inner_product(b, b, gram)));
        }
    }
    return out;
}

}  // namespace fssa
