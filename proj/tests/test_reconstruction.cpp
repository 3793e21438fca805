#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fssa/decomposition.hpp"
#include "fssa/projection.hpp"
#include "fssa/reconstruction.hpp"
#include "fssa/simulation.hpp"
#include "oracles.hpp"

using namespace fssa;

namespace {

// Functional Frobenius norm: sum over cells of <a, a>.
double hs_norm2(const GroupedOperator& op, const Eigen::MatrixXd& gram) {
    double acc = 0.0;
    for (int l = 0; l < op.window(); ++l)
        for (int j = 0; j < op.columns(); ++j) {
            const Eigen::VectorXd c = op.cell(l, j);
            acc += c.dot(gram * c);
        }
    return acc;
}

GroupedOperator minus(const GroupedOperator& a, const GroupedOperator& b) {
    return {a.dim(), a.window(), a.cells() - b.cells()};
}

}  // namespace

TEST(Grouping, ParseAndPrint) {
    const auto g = Grouping::parse("1;2-3;4,6-7");
    ASSERT_EQ(g.size(), 3u);
    EXPECT_EQ(g.groups()[0], std::vector<int>{0});
    EXPECT_EQ(g.groups()[1], (std::vector<int>{1, 2}));
    EXPECT_EQ(g.groups()[2], (std::vector<int>{3, 5, 6}));
    EXPECT_EQ(g.to_string(), "1;2-3;4,6-7");
    EXPECT_EQ(g.label(1), "g2");
}

TEST(Grouping, Errors) {
    EXPECT_THROW(Grouping::parse("1-2;2"), GroupingError);
    EXPECT_THROW(Grouping::parse("0"), GroupingError);
    EXPECT_THROW(Grouping::parse("a"), GroupingError);
    EXPECT_THROW(Grouping::parse("3-1"), GroupingError);
    EXPECT_THROW(Grouping::parse("1;;2"), GroupingError);
    EXPECT_THROW(Grouping({{0}, {1}}, {"one"}), GroupingError);
    EXPECT_THROW(Grouping::parse("1;5").validate(4), IndexError);
}

TEST(Operators, ElementarySumAndRankOne) {
    std::mt19937_64 rng(31);
    const auto fts = oracle::random_fts(rng, 8, 30, 14);
    const int window = 6;
    const auto dec = decompose(fts, window);
    const auto x = trajectory_operator(fts, window);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(x.cells().rows(), x.cells().cols());
    for (int i = 0; i < dec.rank(); ++i) {
        const auto e = elementary_operator(dec, i);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(e.cells());
        EXPECT_LT(svd.singularValues()[1], 1e-10 * svd.singularValues()[0]);
        sum += e.cells();
    }
    EXPECT_LE((sum - x.cells()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Operators, GroupIsSumOfElementary) {
    std::mt19937_64 rng(32);
    const auto dec = decompose(oracle::random_fts(rng, 8, 30, 14), 5);
    const auto g = group_operator(dec, {0, 2, 3});
    const Eigen::MatrixXd ref =
        elementary_operator(dec, 0).cells() + elementary_operator(dec, 2).cells() + elementary_operator(dec, 3).cells();
    EXPECT_LE((g.cells() - ref).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_THROW(group_operator(dec, {0, 0}), GroupingError);
    EXPECT_THROW(group_operator(dec, {dec.rank()}), IndexError);
}

TEST(Hankel, AntidiagonalCounts) {
    // N = 10, L = 4, K = 7
    const int expect[] = {1, 2, 3, 4, 4, 4, 4, 3, 2, 1};
    for (int t = 0; t < 10; ++t) EXPECT_EQ(antidiagonal_count(t, 4, 7), expect[t]);
}

TEST(Hankel, TrajectoryIsFixedPoint) {
    std::mt19937_64 rng(33);
    const auto fts = oracle::random_fts(rng, 6, 20, 10);
    const auto x = trajectory_operator(fts, 4);
    EXPECT_LE((hankelize(x).cells() - x.cells()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((diagonal_average(x) - fts.coef()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Hankel, IdempotentLinearOptimal) {
    std::mt19937_64 rng(34);
    const auto basis = BasisSystem::bspline(6);
    const Eigen::MatrixXd gram = gram_matrix(basis).values();
    const int window = 5, k = 9;
    const GroupedOperator a(6, window, oracle::random_matrix(6 * window, k, rng));
    const GroupedOperator b(6, window, oracle::random_matrix(6 * window, k, rng));
    const auto ha = hankelize(a);
    EXPECT_LE((hankelize(ha).cells() - ha.cells()).cwiseAbs().maxCoeff(), 1e-12);
    const GroupedOperator combo(6, window, 2.5 * a.cells() - 0.7 * b.cells());
    EXPECT_LE((hankelize(combo).cells() - (2.5 * ha.cells() - 0.7 * hankelize(b).cells())).cwiseAbs().maxCoeff(), 1e-12);
    const double best = hs_norm2(minus(a, ha), gram);
    for (int rep = 0; rep < 20; ++rep) {
        const FunctionalTimeSeries z(basis, oracle::random_matrix(6, window + k - 1, rng));
        const auto competitor = trajectory_operator(z, window);
        EXPECT_LT(best, hs_norm2(minus(a, competitor), gram));
        const GroupedOperator nearby(6, window, ha.cells() + 1e-3 * competitor.cells());
        EXPECT_LT(best, hs_norm2(minus(a, nearby), gram));
    }
}

TEST(Reconstruct, FullGroupingRecoversInput) {
    std::mt19937_64 rng(35);
    const auto fts = oracle::random_fts(rng, 10, 50, 20);
    const auto dec = decompose(fts, 7);
    const auto parts = reconstruct(dec, full_grouping(dec.rank()));
    ASSERT_EQ(parts.size(), 1u);
    EXPECT_LE((parts[0].coef() - fts.coef()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Reconstruct, GroupsAddUp) {
    std::mt19937_64 rng(36);
    const auto fts = oracle::random_fts(rng, 8, 40, 20);
    const auto dec = decompose(fts, 6);
    std::vector<int> rest;
    for (int i = 3; i < dec.rank(); ++i) rest.push_back(i);
    const auto parts = reconstruct(dec, Grouping({{0}, {1, 2}, rest}));
    const Eigen::MatrixXd total = parts[0].coef() + parts[1].coef() + parts[2].coef();
    EXPECT_LE((total - fts.coef()).cwiseAbs().maxCoeff(), 1e-9);
    // streaming path equals hankelize of the grouped operator
    EXPECT_LE((parts[1].coef() - diagonal_average(group_operator(dec, {1, 2}))).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Reconstruct, NoiselessHarmonic) {
    const auto grid = sim::uniform_grid(100);
    const Eigen::MatrixXd m = sim::gen_periodic(100, grid, 0.1);
    const auto basis = BasisSystem::bspline(15);
    const auto fts = project_samples(grid, m, basis);
    const auto dec = decompose(fts, 20);
    const auto parts = reconstruct(dec, Grouping::parse("1-2"));
    EXPECT_LE((parts[0].coef() - fts.coef()).cwiseAbs().maxCoeff(), 1e-8);
}
