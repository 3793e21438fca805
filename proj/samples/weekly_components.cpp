// Daily curves with a weekly and a monthly cycle: prints the scree data,
// dominant frequencies and the w-correlation of singleton groups, which is
// what an analyst inspects before choosing a grouping.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "fssa/decomposition.hpp"
#include "fssa/diagnostics.hpp"
#include "fssa/projection.hpp"
#include "fssa/reconstruction.hpp"
#include "fssa/simulation.hpp"

int main() {
    using namespace fssa;
    constexpr int days = 210, points = 48;
    const auto grid = sim::uniform_grid(points);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.05);
    Eigen::MatrixXd values(points, days);
    for (int t = 0; t < days; ++t)
        for (int i = 0; i < points; ++i) {
            const double s = grid[static_cast<std::size_t>(i)];
            const double profile = std::sin(std::numbers::pi * s);
            values(i, t) = 2.0 * profile + std::cos(2 * std::numbers::pi * t / 7.0) * std::cos(2 * std::numbers::pi * s) +
                           0.5 * std::sin(2 * std::numbers::pi * t / 30.0) * s + noise(rng);
        }

    const auto dec = decompose(project_samples(grid, values, BasisSystem::bspline(12)), 28);
    std::vector<double> render(50);
    for (int i = 0; i < 50; ++i) render[static_cast<std::size_t>(i)] = i / 49.0;
    const auto summary = eigentriple_summary(dec, render);
    std::printf("component  sv        share%%   freq\n");
    for (int i = 0; i < 7; ++i)
        std::printf("%9d  %8.4f  %7.3f  %.4f\n", i + 1, summary.singular_values[i], summary.percentages[i],
                    summary.dominant_frequency[i]);

    std::vector<std::vector<int>> singles;
    for (int i = 0; i < 7; ++i) singles.push_back({i});
    const auto w = wcor_matrix(reconstruct(dec, Grouping(singles)), dec.window());
    std::printf("\n|w-correlation| of the first 7 components:\n");
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j < 7; ++j) std::printf(" %5.2f", std::abs(w.values(i, j)));
        std::printf("\n");
    }
}
