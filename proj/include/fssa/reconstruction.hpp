#pragma once

// Grouping of eigentriples, grouped (and elementary) operators, diagonal
// averaging, and reconstruction of component series.

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fssa/decomposition.hpp"
#include "fssa/error.hpp"

namespace fssa {

/// Ordered list of disjoint, non-empty sets of eigentriple indices
/// (0-based in this API; the text syntax is 1-based).
class Grouping {
public:
    Grouping() = default;
    explicit Grouping(std::vector<std::vector<int>> groups, std::vector<std::string> labels = {})
        : groups_(std::move(groups)), labels_(std::move(labels)) {
        std::set<int> seen;
        for (const auto& g : groups_) {
            if (g.empty()) throw GroupingError("groups must be non-empty");
            for (int i : g) {
                if (i < 0) throw GroupingError("group indices must be positive");
                if (!seen.insert(i).second)
                    throw GroupingError("groups must be disjoint (index " + std::to_string(i + 1) + " repeats)");
            }
        }
        if (!labels_.empty() && labels_.size() != groups_.size())
            throw GroupingError("one label per group is required");
    }

    /// Parses "1;2-3;4,6-7": semicolon-separated groups, each a comma list of
    /// 1-based indices or inclusive ranges.
    static Grouping parse(std::string_view text) {
        std::vector<std::vector<int>> groups;
        std::size_t start = 0;
        while (start <= text.size()) {
            const auto end = std::min(text.find(';', start), text.size());
            groups.push_back(parse_group(text.substr(start, end - start)));
            start = end + 1;
        }
        return Grouping(std::move(groups));
    }

    /// Inverse of parse: consecutive runs are written as ranges.
    std::string to_string() const {
        std::ostringstream out;
        for (std::size_t g = 0; g < groups_.size(); ++g) {
            if (g) out << ';';
            std::vector<int> sorted = groups_[g];
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t i = 0; i < sorted.size();) {
                std::size_t j = i;
                while (j + 1 < sorted.size() && sorted[j + 1] == sorted[j] + 1) ++j;
                if (i) out << ',';
                out << sorted[i] + 1;
                if (j > i) out << '-' << sorted[j] + 1;
                i = j + 1;
            }
        }
        return out.str();
    }

    void validate(int rank) const {
        for (const auto& g : groups_)
            for (int i : g)
                if (i >= rank)
                    throw IndexError("eigentriple index " + std::to_string(i + 1) + " exceeds rank " +
                                     std::to_string(rank));
    }

    const std::vector<std::vector<int>>& groups() const noexcept { return groups_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return groups_.size(); }
    std::string label(std::size_t g) const {
        return labels_.empty() ? "g" + std::to_string(g + 1) : labels_[g];
    }

private:
    static int parse_index(std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            throw GroupingError("malformed group index '" + std::string(s) + "'");
        const int value = std::stoi(std::string(s));
        if (value < 1) throw GroupingError("group indices are 1-based");
        return value - 1;
    }

    static std::vector<int> parse_group(std::string_view text) {
        std::vector<int> out;
        std::size_t start = 0;
        while (start <= text.size()) {
            const auto end = std::min(text.find(',', start), text.size());
            const auto item = text.substr(start, end - start);
            const auto dash = item.find('-');
            if (dash == std::string_view::npos) {
                out.push_back(parse_index(item));
            } else {
                const int lo = parse_index(item.substr(0, dash));
                const int hi = parse_index(item.substr(dash + 1));
                if (hi < lo) throw GroupingError("descending range in group");
                for (int i = lo; i <= hi; ++i) out.push_back(i);
            }
            start = end + 1;
        }
        return out;
    }

    std::vector<std::vector<int>> groups_;
    std::vector<std::string> labels_;
};

/// An element of H^{L x K} restricted to H_d: cell (l, j) is a function
/// stored by its d coefficients. Backed by an (L*d) x K matrix in the flat
/// layout, so column j is the lagged vector at position j.
class GroupedOperator {
public:
    GroupedOperator(int dim, int window, Eigen::MatrixXd cells) : d_(dim), window_(window), cells_(std::move(cells)) {
        if (cells_.rows() != static_cast<Eigen::Index>(d_) * window_)
            throw DimensionError("operator cells must have L*d rows");
        if (!cells_.allFinite()) throw DomainError("operator cells must be finite");
    }

    int dim() const noexcept { return d_; }
    int window() const noexcept { return window_; }
    int columns() const noexcept { return static_cast<int>(cells_.cols()); }
    const Eigen::MatrixXd& cells() const noexcept { return cells_; }

    Eigen::VectorXd cell(int lag, int j) const {
        Eigen::VectorXd out(d_);
        for (int q = 0; q < d_; ++q) out[q] = cells_(flat_index(q, lag, window_), j);
        return out;
    }

private:
    int d_;
    int window_;
    Eigen::MatrixXd cells_;
};

/// Trajectory operator of a series: cell (l, j) = y_{l+j}.
inline GroupedOperator trajectory_operator(const FunctionalTimeSeries& fts, int window) {
    check_window(window, fts.length());
    const int k = fts.length() - window + 1;
    Eigen::MatrixXd cells(static_cast<Eigen::Index>(fts.dim()) * window, k);
    for (int q = 0; q < fts.dim(); ++q)
        for (int l = 0; l < window; ++l) cells.row(flat_index(q, l, window)) = fts.coef().row(q).segment(l, k);
    return {fts.dim(), window, std::move(cells)};
}

inline void check_group(const Decomposition& dec, const std::vector<int>& index_set) {
    if (index_set.empty()) throw GroupingError("index set must be non-empty");
    for (int i : index_set)
        if (i < 0 || i >= dec.rank())
            throw IndexError("eigentriple index " + std::to_string(i + 1) + " out of range 1.." +
                             std::to_string(dec.rank()));
    if (std::set<int>(index_set.begin(), index_set.end()).size() != index_set.size())
        throw GroupingError("index set contains duplicates");
}

/// Sum over i in the set of sqrt(lambda_i) psi_i v_i^T, accumulated as one
/// rank-|I| product.
inline GroupedOperator group_operator(const Decomposition& dec, const std::vector<int>& index_set) {
    check_group(dec, index_set);
    const auto m = static_cast<Eigen::Index>(index_set.size());
    Eigen::MatrixXd left(dec.psi().rows(), m), right(dec.columns(), m);
    for (Eigen::Index c = 0; c < m; ++c) {
        const int i = index_set[static_cast<std::size_t>(c)];
        left.col(c) = std::sqrt(dec.lambda()[i]) * dec.psi().col(i);
        right.col(c) = dec.v().col(i);
    }
    return {dec.dim(), dec.window(), left * right.transpose()};
}

inline GroupedOperator elementary_operator(const Decomposition& dec, int i) { return group_operator(dec, {i}); }

/// Number of cells on anti-diagonal t (0-based), equal to min(t+1, L, K, N-t).
inline int antidiagonal_count(int t, int window, int columns) {
    const int n = window + columns - 1;
    return std::min({t + 1, window, columns, n - t});
}

/// Averages each anti-diagonal and returns the d x N coefficients of the
/// resulting series.
inline Eigen::MatrixXd diagonal_average(const GroupedOperator& op) {
    const int window = op.window(), k = op.columns(), d = op.dim();
    const int n = window + k - 1;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, n);
    for (int q = 0; q < d; ++q)
        for (int l = 0; l < window; ++l) acc.row(q).segment(l, k) += op.cells().row(flat_index(q, l, window));
    for (int t = 0; t < n; ++t) acc.col(t) /= antidiagonal_count(t, window, k);
    return acc;
}

/// Orthogonal projection onto Hankel operators.
inline GroupedOperator hankelize(const GroupedOperator& op) {
    const Eigen::MatrixXd avg = diagonal_average(op);
    const int window = op.window(), k = op.columns();
    Eigen::MatrixXd cells(op.cells().rows(), k);
    for (int q = 0; q < op.dim(); ++q)
        for (int l = 0; l < window; ++l) cells.row(flat_index(q, l, window)) = avg.row(q).segment(l, k);
    return {op.dim(), window, std::move(cells)};
}

/// Coefficients of the series reconstructed from one group, computed
/// directly on anti-diagonals without materializing the L x K operator.
inline Eigen::MatrixXd reconstruct_coefficients(const Decomposition& dec, const std::vector<int>& index_set) {
    check_group(dec, index_set);
    const int window = dec.window(), k = dec.columns(), d = dec.dim();
    const auto m = static_cast<Eigen::Index>(index_set.size());
    Eigen::MatrixXd scaled_v(k, m);
    Eigen::MatrixXd psi(dec.psi().rows(), m);
    for (Eigen::Index c = 0; c < m; ++c) {
        const int i = index_set[static_cast<std::size_t>(c)];
        scaled_v.col(c) = std::sqrt(dec.lambda()[i]) * dec.v().col(i);
        psi.col(c) = dec.psi().col(i);
    }
    const int n = window + k - 1;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, n);
    using Strided = Eigen::Map<const Eigen::MatrixXd, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;
    for (int l = 0; l < window; ++l) {
        // d x m: the lag-l blocks of the group's psi columns.
        const Strided block(psi.data() + l, d, m, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(psi.rows(), window));
        acc.middleCols(l, k).noalias() += block * scaled_v.transpose();
    }
    for (int t = 0; t < n; ++t) acc.col(t) /= antidiagonal_count(t, window, k);
    return acc;
}

/// One reconstructed series per group, in the decomposition's basis.
inline std::vector<FunctionalTimeSeries> reconstruct(const Decomposition& dec, const Grouping& grouping) {
    grouping.validate(dec.rank());
    std::vector<FunctionalTimeSeries> out;
    out.reserve(grouping.size());
    for (const auto& g : grouping.groups()) out.emplace_back(dec.basis(), reconstruct_coefficients(dec, g));
    return out;
}

/// Grouping {{0, ..., r-1}}.
inline Grouping full_grouping(int rank) {
    std::vector<int> all(static_cast<std::size_t>(rank));
    for (int i = 0; i < rank; ++i) all[static_cast<std::size_t>(i)] = i;
    return Grouping({all});
}

}  // namespace fssa
