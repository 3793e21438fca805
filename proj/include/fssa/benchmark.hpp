#pragma once

// FSSA vs MSSA reconstruction benchmark on simulated series.

#include <cstdint>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fssa/decomposition.hpp"
#include "fssa/mssa.hpp"
#include "fssa/parallel.hpp"
#include "fssa/projection.hpp"
#include "fssa/reconstruction.hpp"
#include "fssa/simulation.hpp"

namespace fssa::sim {

struct BenchmarkCell {
    NoiseModel noise;
    double omega = 0.0;
    int length = 100;
    int window = 20;
};

/// What the reconstruction is scored against.
enum class ScoreTarget { signal, observed };

struct BenchmarkOptions {
    int reps = 100;
    std::uint64_t seed = 1;
    int rank = 2;
    int grid_size = 100;
    double sigma = 0.1;
    int burn_in = 100;
    int dof = 15;
    int degree = 3;
    ScoreTarget target = ScoreTarget::signal;
    MssaStacking mssa_stacking = MssaStacking::horizontal;
};

struct BenchmarkRow {
    BenchmarkCell cell;
    std::string method;
    double mean_rmse = 0.0;
    int reps = 0;
    std::uint64_t seed = 0;
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;

    const BenchmarkRow* find(const BenchmarkCell& c, const std::string& method) const {
        for (const auto& r : rows)
            if (r.method == method && r.cell.noise == c.noise && r.cell.omega == c.omega &&
                r.cell.length == c.length && r.cell.window == c.window)
                return &r;
        return nullptr;
    }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of replication `rep` in cell `cell`: two splitmix64 rounds over the
/// base seed, so streams for distinct (cell, rep) pairs are independent of
/// scheduling.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t cell, std::uint64_t rep) {
    return splitmix64(splitmix64(base ^ splitmix64(cell)) ^ rep);
}

struct RepResult {
    double fssa = 0.0;
    double mssa = 0.0;
};

/// One replication: simulate, smooth, reconstruct both ways, score.
inline RepResult run_replication(const BenchmarkCell& cell, const BenchmarkOptions& opt, std::uint64_t seed) {
    SimConfig cfg;
    cfg.length = cell.length;
    cfg.grid_size = opt.grid_size;
    cfg.omega = cell.omega;
    cfg.noise = cell.noise;
    cfg.sigma = opt.sigma;
    cfg.seed = seed;
    cfg.burn_in = opt.burn_in;
    cfg.validate();

    const auto grid = uniform_grid(opt.grid_size);
    std::mt19937_64 rng(seed);
    const Eigen::MatrixXd signal = gen_periodic(cell.length, grid, cell.omega);
    const Eigen::MatrixXd observed = signal + gen_noise(cfg, grid, rng);
    const Eigen::MatrixXd& target = opt.target == ScoreTarget::signal ? signal : observed;

    const auto basis = BasisSystem::bspline(opt.dof, opt.degree);
    const auto fts = project_samples(grid, observed, basis);
    const auto dec = decompose(fts, cell.window);
    std::vector<int> leading;
    for (int i = 0; i < std::min(opt.rank, dec.rank()); ++i) leading.push_back(i);
    const FunctionalTimeSeries fitted(basis, reconstruct_coefficients(dec, leading));

    RepResult out;
    out.fssa = rmse(target, fitted.evaluate(grid));
    out.mssa = rmse(target, mssa_reconstruct(observed, cell.window, opt.rank, opt.mssa_stacking).values);
    return out;
}

inline BenchmarkReport run_benchmark(const std::vector<BenchmarkCell>& cells, const BenchmarkOptions& opt) {
    if (opt.reps < 1) throw ConfigurationError("reps must be >= 1");
    for (const auto& c : cells) check_window(c.window, c.length);

    const std::size_t reps = static_cast<std::size_t>(opt.reps);
    std::vector<RepResult> results(cells.size() * reps);
    parallel_for(results.size(), [&](std::size_t idx) {
        const std::size_t c = idx / reps, rep = idx % reps;
        results[idx] = run_replication(cells[c], opt, derive_seed(opt.seed, c, rep));
    });

    BenchmarkReport report;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        double fssa = 0.0, mssa = 0.0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            fssa += results[c * reps + rep].fssa;
            mssa += results[c * reps + rep].mssa;
        }
        report.rows.push_back({cells[c], "FSSA", fssa / opt.reps, opt.reps, opt.seed});
        report.rows.push_back({cells[c], "MSSA", mssa / opt.reps, opt.reps, opt.seed});
    }
    return report;
}

inline std::string to_csv(const BenchmarkReport& report) {
    std::ostringstream out;
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << "setting,omega,N,L,method,mean_rmse,reps,seed\n";
    for (const auto& r : report.rows)
        out << r.cell.noise.label() << ',' << r.cell.omega << ',' << r.cell.length << ',' << r.cell.window << ','
            << r.method << ',' << r.mean_rmse << ',' << r.reps << ',' << r.seed << '\n';
    return out.str();
}

inline nlohmann::json to_json(const BenchmarkReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"setting", r.cell.noise.label()},
                        {"omega", r.cell.omega},
                        {"N", r.cell.length},
                        {"L", r.cell.window},
                        {"method", r.method},
                        {"mean_rmse", r.mean_rmse},
                        {"reps", r.reps},
                        {"seed", r.seed}});
    return {{"rows", rows}};
}

}  // namespace fssa::sim
