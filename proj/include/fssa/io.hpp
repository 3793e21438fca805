#pragma once

// File formats: curve samples as CSV (grid column `s` followed by one
// column per curve) and decompositions as JSON.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "fssa/basis.hpp"
#include "fssa/decomposition.hpp"
#include "fssa/error.hpp"

#ifndef FSSA_VERSION
#define FSSA_VERSION "0.0.0"
#endif

namespace fssa::io {

inline constexpr const char* kDecompositionFormat = "fssa-decomposition/1";
inline constexpr const char* kSignConvention = "max_abs_v_positive";

/// Curves sampled on a common grid. `grid` is the original abscissa; the
/// library works on its affine image in [0,1].
struct SeriesData {
    std::vector<double> grid;
    Eigen::MatrixXd values;  ///< n x N

    double lower() const { return grid.front(); }
    double upper() const { return grid.back(); }
    std::vector<double> unit_grid() const { return rescale(grid, lower(), upper()); }

    static std::vector<double> rescale(const std::vector<double>& g, double lo, double hi) {
        std::vector<double> out(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::clamp((g[i] - lo) / (hi - lo), 0.0, 1.0);
        return out;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_double(std::string_view s, std::size_t line) {
    double value = 0.0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value))
        throw FormatError("line " + std::to_string(line) + ": non-numeric value '" + std::string(s) + "'");
    return value;
}

}  // namespace detail

inline SeriesData read_series_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::size_t columns = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!detail::trim(line).empty()) break;
    }
    if (lineno == 0 || detail::trim(line).empty()) throw FormatError("series file is empty");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
    const auto header = detail::split(line);
    columns = header.size();
    if (columns < 5) throw FormatError("series file needs a grid column and at least 4 curve columns");

    std::vector<double> grid;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split(line);
        if (fields.size() != columns)
            throw FormatError("line " + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                              " fields, got " + std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(columns - 1);
        grid.push_back(detail::parse_double(fields[0], lineno));
        for (std::size_t c = 1; c < columns; ++c) row.push_back(detail::parse_double(fields[c], lineno));
        rows.push_back(std::move(row));
    }
    if (grid.size() < 2) throw FormatError("series file needs at least 2 grid rows");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw FormatError("grid column must be strictly ascending");

    SeriesData out;
    out.grid = std::move(grid);
    out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns - 1));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c + 1 < columns; ++c)
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    return out;
}

inline SeriesData read_series_csv(const std::string& text_or_path, bool is_path) {
    if (is_path) {
        std::ifstream in(text_or_path);
        if (!in) throw FormatError("cannot open series file '" + text_or_path + "'");
        return read_series_csv(in);
    }
    std::istringstream in(text_or_path);
    return read_series_csv(in);
}

inline void write_series_csv(std::ostream& out, const std::vector<double>& grid, const Eigen::MatrixXd& values) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << 's';
    for (Eigen::Index t = 0; t < values.cols(); ++t) out << ",t" << t + 1;
    out << '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        out << grid[static_cast<std::size_t>(i)];
        for (Eigen::Index t = 0; t < values.cols(); ++t) out << ',' << values(i, t);
        out << '\n';
    }
}

inline std::string series_csv(const std::vector<double>& grid, const Eigen::MatrixXd& values) {
    std::ostringstream out;
    write_series_csv(out, grid, values);
    return out.str();
}

inline nlohmann::json basis_to_json(const BasisSystem& b) {
    if (b.kind() == BasisKind::orthonormal_grid) return {{"kind", "orthonormal_grid"}, {"d", b.dim()}};
    return {{"kind", "bspline"}, {"d", b.dim()}, {"degree", b.degree()}, {"interior_knots", b.interior_knots()}};
}

inline BasisSystem basis_from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "orthonormal_grid") return BasisSystem::orthonormal_grid(j.at("d").get<int>());
    if (kind == "bspline")
        return BasisSystem::bspline(j.at("d").get<int>(), j.at("degree").get<int>(),
                                    j.at("interior_knots").get<std::vector<double>>());
    throw FormatError("unknown basis kind '" + kind + "'");
}

inline nlohmann::json matrix_rows(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_rows(const nlohmann::json& rows, Eigen::Index expect_rows, Eigen::Index expect_cols,
                                        const std::string& name) {
    if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != expect_rows)
        throw FormatError(name + " must have " + std::to_string(expect_rows) + " rows");
    Eigen::MatrixXd m(expect_rows, expect_cols);
    for (Eigen::Index i = 0; i < expect_rows; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != expect_cols)
            throw FormatError(name + " rows must have " + std::to_string(expect_cols) + " entries");
        for (Eigen::Index c = 0; c < expect_cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

/// A decomposition together with the original sampling grid, so that
/// reconstructions can be evaluated where the data was observed.
struct DecompositionRecord {
    Decomposition decomposition;
    std::vector<double> grid;

    std::vector<double> unit_grid() const { return SeriesData::rescale(grid, grid.front(), grid.back()); }
};

inline nlohmann::json decomposition_to_json(const DecompositionRecord& rec) {
    const auto& dec = rec.decomposition;
    nlohmann::json meta = {{"format", kDecompositionFormat},
                           {"version", FSSA_VERSION},
                           {"N", dec.length()},
                           {"L", dec.window()},
                           {"K", dec.columns()},
                           {"d", dec.dim()},
                           {"r", dec.rank()},
                           {"basis", basis_to_json(dec.basis())},
                           {"grid", rec.grid},
                           {"domain", {rec.grid.front(), rec.grid.back()}}};
    return {{"meta", meta},
            {"lambda", std::vector<double>(dec.lambda().data(), dec.lambda().data() + dec.rank())},
            {"psi_coef", matrix_rows(dec.psi())},
            {"v", matrix_rows(dec.v())},
            {"signs", kSignConvention}};
}

inline DecompositionRecord decomposition_from_json(const nlohmann::json& j) {
    try {
        const auto& meta = j.at("meta");
        const int n = meta.at("N").get<int>(), window = meta.at("L").get<int>(), k = meta.at("K").get<int>();
        const int d = meta.at("d").get<int>(), r = meta.at("r").get<int>();
        if (k != n - window + 1) throw FormatError("meta.K must equal N - L + 1");
        auto basis = basis_from_json(meta.at("basis"));
        if (basis.dim() != d) throw FormatError("meta.d does not match the basis");
        auto lambda_vec = j.at("lambda").get<std::vector<double>>();
        if (static_cast<int>(lambda_vec.size()) != r) throw FormatError("lambda must have r entries");
        Eigen::VectorXd lambda = Eigen::Map<const Eigen::VectorXd>(lambda_vec.data(), r);
        Eigen::MatrixXd psi = matrix_from_rows(j.at("psi_coef"), static_cast<Eigen::Index>(window) * d, r, "psi_coef");
        Eigen::MatrixXd v = matrix_from_rows(j.at("v"), k, r, "v");
        auto grid = meta.at("grid").get<std::vector<double>>();
        if (grid.size() < 2) throw FormatError("meta.grid needs at least 2 points");
        return {Decomposition(std::move(basis), window, k, std::move(lambda), std::move(psi), std::move(v)),
                std::move(grid)};
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed decomposition file: ") + e.what());
    }
}

inline DecompositionRecord read_decomposition(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open decomposition file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("decomposition file is not valid JSON: ") + e.what());
    }
    return decomposition_from_json(j);
}

}  // namespace fssa::io
