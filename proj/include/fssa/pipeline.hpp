#pragma once

// End-to-end steps shared by the command line and the HTTP service, so both
// front ends produce bit-identical numbers for the same inputs.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fssa/decomposition.hpp"
#include "fssa/diagnostics.hpp"
#include "fssa/io.hpp"
#include "fssa/projection.hpp"
#include "fssa/reconstruction.hpp"

namespace fssa {

struct DecomposeRequest {
    int window = 0;
    std::optional<int> dof;          ///< fixed basis dimension
    std::vector<int> gcv_candidates; ///< used when dof is not set
    int degree = 3;
    std::optional<int> rank;
};

inline int choose_dimension(const io::SeriesData& data, const DecomposeRequest& req) {
    if (req.dof) return *req.dof;
    if (req.gcv_candidates.empty()) throw ConfigurationError("either a basis dimension or GCV candidates are required");
    return gcv_select_dof(data.unit_grid(), data.values, req.gcv_candidates, req.degree);
}

inline FunctionalTimeSeries smooth_series(const io::SeriesData& data, int dof, int degree) {
    return project_samples(data.unit_grid(), data.values, BasisSystem::bspline(dof, degree));
}

inline io::DecompositionRecord decompose_series(const io::SeriesData& data, const DecomposeRequest& req) {
    check_window(req.window, static_cast<int>(data.values.cols()));
    const int dof = choose_dimension(data, req);
    const auto fts = smooth_series(data, dof, req.degree);
    return {decompose(fts, req.window, req.rank), data.grid};
}

/// Reconstructed components evaluated on the record's original grid (n x N each).
inline std::vector<Eigen::MatrixXd> reconstruct_on_grid(const io::DecompositionRecord& rec, const Grouping& grouping) {
    const auto unit = rec.unit_grid();
    const Eigen::MatrixXd eval = rec.decomposition.basis().evaluate(unit);
    std::vector<Eigen::MatrixXd> out;
    for (const auto& fts : reconstruct(rec.decomposition, grouping)) out.push_back(eval * fts.coef());
    return out;
}

inline WCorrelationMatrix grouped_wcor(const io::DecompositionRecord& rec, const Grouping& grouping) {
    std::vector<std::string> labels;
    for (const auto& g : grouping.groups()) labels.push_back(Grouping({g}).to_string());
    return wcor_matrix(reconstruct(rec.decomposition, grouping), rec.decomposition.window(), std::move(labels));
}

}  // namespace fssa
