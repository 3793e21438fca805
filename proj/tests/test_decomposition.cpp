#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fssa/decomposition.hpp"
#include "fssa/mssa.hpp"
#include "fssa/projection.hpp"
#include "fssa/reconstruction.hpp"
#include "fssa/simulation.hpp"
#include "oracles.hpp"

using namespace fssa;

TEST(Embedding, ColumnCount) {
    const auto b = BasisSystem::bspline(5);
    EXPECT_EQ(embed(FunctionalTimeSeries(b, Eigen::MatrixXd::Ones(5, 10)), 4).columns(), 7);
    EXPECT_EQ(embed(FunctionalTimeSeries(b, Eigen::MatrixXd::Ones(5, 365)), 28).columns(), 338);
    EXPECT_EQ(embed(FunctionalTimeSeries(b, Eigen::MatrixXd::Ones(5, 448)), 45).columns(), 404);
}

TEST(Embedding, WindowErrors) {
    const FunctionalTimeSeries fts(BasisSystem::bspline(5), Eigen::MatrixXd::Ones(5, 10));
    EXPECT_THROW(embed(fts, 1), WindowLengthError);
    EXPECT_THROW(embed(fts, 6), WindowLengthError);
    EXPECT_NO_THROW(embed(fts, 5));
    try {
        embed(fts, 6);
    } catch (const WindowLengthError& e) {
        EXPECT_NE(std::string(e.what()).find("L=6"), std::string::npos);
    }
}

TEST(Embedding, FlatIndexLayout) {
    EXPECT_EQ(flat_index(0, 0, 4), 0);
    EXPECT_EQ(flat_index(2, 3, 4), 11);
    Eigen::MatrixXd m(2, 5);
    m << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10;
    const Eigen::MatrixXd s = Embedding::lag_stack(m, 2);
    ASSERT_EQ(s.rows(), 4);
    ASSERT_EQ(s.cols(), 4);
    EXPECT_EQ(s(flat_index(1, 1, 2), 2), m(1, 3));
    EXPECT_EQ(s(flat_index(0, 0, 2), 3), m(0, 3));
}

TEST(NormalMatrices, GridBasisLiftIsIdentity) {
    const FunctionalTimeSeries fts(BasisSystem::orthonormal_grid(4), Eigen::MatrixXd::Ones(4, 9));
    const auto nm = build_normal_matrices(embed(fts, 3));
    EXPECT_TRUE(nm.gram.isIdentity(0.0));
}

TEST(NormalMatrices, ConstantSeriesS0) {
    // y_t = nu_1 for every t with an orthonormal basis: S0 = K on the (q=0) block.
    const int d = 3, n = 10, window = 4, k = n - window + 1;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, n);
    c.row(0).setOnes();
    const auto nm = build_normal_matrices(embed(FunctionalTimeSeries(BasisSystem::orthonormal_grid(d), c), window));
    for (int l = 0; l < window; ++l)
        for (int m = 0; m < window; ++m) EXPECT_DOUBLE_EQ(nm.s0(flat_index(0, l, window), flat_index(0, m, window)), k);
    EXPECT_DOUBLE_EQ(nm.s0.bottomRows(window * (d - 1)).cwiseAbs().sum(), 0.0);
}

TEST(NormalMatrices, S0MatchesQuadratureBruteForce) {
    std::mt19937_64 rng(2);
    const auto basis = BasisSystem::bspline(3, 2);
    const int n = 6, window = 2, k = n - window + 1, d = 3;
    const FunctionalTimeSeries fts(basis, oracle::random_matrix(d, n, rng));
    const auto nm = build_normal_matrices(embed(fts, window));
    for (int qi = 0; qi < d; ++qi)
        for (int ri = 0; ri < window; ++ri)
            for (int qj = 0; qj < d; ++qj)
                for (int rj = 0; rj < window; ++rj) {
                    double acc = 0.0;
                    for (int m = 0; m < k; ++m)
                        acc += oracle::quad_inner(basis, fts.coef().col(ri + m), Eigen::VectorXd::Unit(d, qi)) *
                               oracle::quad_inner(basis, fts.coef().col(rj + m), Eigen::VectorXd::Unit(d, qj));
                    EXPECT_NEAR(nm.s0(flat_index(qi, ri, window), flat_index(qj, rj, window)), acc, 1e-11);
                }
}

TEST(Decompose, ConstantSeriesEigentriple) {
    const int d = 5, n = 12, window = 4, k = n - window + 1;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, n);
    c.row(0).setOnes();
    const auto dec = decompose(FunctionalTimeSeries(BasisSystem::orthonormal_grid(d), c), window);
    ASSERT_EQ(dec.rank(), 1);
    EXPECT_NEAR(dec.lambda()[0], window * k, 1e-12);
    for (int l = 0; l < window; ++l) {
        EXPECT_NEAR(dec.psi_block(0, l)[0], 1.0 / std::sqrt(window), 1e-14);
        EXPECT_NEAR(dec.psi_block(0, l).tail(d - 1).cwiseAbs().maxCoeff(), 0.0, 1e-14);
    }
    EXPECT_LE((dec.v().col(0).array() - 1.0 / std::sqrt(k)).abs().maxCoeff(), 1e-14);
}

TEST(Decompose, NoiselessHarmonicHasRankTwo) {
    const auto grid = sim::uniform_grid(100);
    const Eigen::MatrixXd m = sim::gen_periodic(100, grid, 0.1);
    const auto dec = decompose(project_samples(grid, m, BasisSystem::bspline(15)), 20);
    int above = 0;
    for (int i = 0; i < dec.rank(); ++i) above += dec.lambda()[i] > 1e-8 * dec.lambda()[0];
    EXPECT_EQ(above, 2);
    // The discretized trajectory agrees.
    const Eigen::VectorXd sv = oracle::singular_values(oracle::stacked(m, 20));
    EXPECT_LT(sv[2], 1e-6 * sv[0]);
}

class DecomposeInvariants : public ::testing::TestWithParam<int> {};

TEST_P(DecomposeInvariants, Hold) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(100 + GetParam()));
    const auto fts = oracle::random_fts(rng, 12, 40, 10);
    std::uniform_int_distribution<int> wd(2, fts.length() / 2);
    const int window = wd(rng);
    const auto emb = embed(fts, window);
    const auto dec = decompose(emb);
    const auto nm = build_normal_matrices(emb);
    const Eigen::MatrixXd& psi = dec.psi();
    const int r = dec.rank();

    // S0 psi = lambda G_L psi
    const Eigen::MatrixXd resid = nm.s0 * psi - nm.gram * psi * dec.lambda().asDiagonal();
    EXPECT_LE(resid.cwiseAbs().maxCoeff(), 1e-9 * dec.lambda()[0]);
    // G-orthonormal psi, orthonormal v
    EXPECT_LE((psi.transpose() * nm.gram * psi - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((dec.v().transpose() * dec.v() - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff(), 1e-9);
    // descending, sign convention
    for (int i = 1; i < r; ++i) EXPECT_GE(dec.lambda()[i - 1], dec.lambda()[i]);
    for (int i = 0; i < r; ++i) {
        Eigen::Index arg;
        dec.v().col(i).cwiseAbs().maxCoeff(&arg);
        EXPECT_GT(dec.v()(arg, i), 0.0);
    }
    // energy: sum lambda = sum_j ||x_j||^2 = sum_t n_t ||y_t||^2
    const Eigen::MatrixXd ip = oracle::curve_inner_products(fts);
    double energy = 0.0;
    for (int t = 0; t < fts.length(); ++t) energy += antidiagonal_count(t, window, emb.columns()) * ip(t, t);
    EXPECT_NEAR(dec.lambda().sum(), energy, 1e-8 * energy);
}

INSTANTIATE_TEST_SUITE_P(Random, DecomposeInvariants, ::testing::Range(0, 8));

TEST(Decompose, DualMatrixAndCellwiseIdentity) {
    std::mt19937_64 rng(77);
    const auto fts = oracle::random_fts(rng, 8, 24, 12);
    const int window = 5;
    const auto dec = decompose(fts, window);
    const Eigen::VectorXd dual = oracle::descending_eigenvalues(oracle::dual_matrix(oracle::curve_inner_products(fts), window));
    for (int i = 0; i < dec.rank(); ++i) EXPECT_NEAR(dec.lambda()[i], dual[i], 1e-7 * dual[i]);
    for (int i = 0; i < dec.rank(); ++i)
        for (int l = 0; l < window; ++l) {
            Eigen::VectorXd cell = Eigen::VectorXd::Zero(fts.dim());
            for (int j = 0; j < dec.columns(); ++j) cell += dec.v()(j, i) * fts.coef().col(l + j);
            EXPECT_LE((cell - std::sqrt(dec.lambda()[i]) * dec.psi_block(i, l)).cwiseAbs().maxCoeff(), 1e-8);
        }
}

TEST(Decompose, GridBasisMatchesMssa) {
    std::mt19937_64 rng(8);
    const int n = 6, length = 20, window = 5;
    const auto grid = sim::uniform_grid(n);
    const Eigen::MatrixXd x = oracle::random_matrix(n, length, rng);
    const auto fts = project_samples(grid, x, BasisSystem::orthonormal_grid(n));
    const auto dec = decompose(fts, window);
    const Eigen::VectorXd sv = oracle::singular_values(oracle::stacked(x, window));
    // The step basis scales cell values by 1/sqrt(n).
    for (int i = 0; i < dec.rank(); ++i) EXPECT_NEAR(dec.singular_values()[i] * std::sqrt(n), sv[i], 1e-9 * sv[0]);
    const auto rec = FunctionalTimeSeries(fts.basis(), reconstruct_coefficients(dec, {0, 1, 2})).evaluate(grid);
    const auto ref = mssa_reconstruct(x, window, 3, MssaStacking::vertical).values;
    EXPECT_LE((rec - ref).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Decompose, RankOptionAndErrors) {
    std::mt19937_64 rng(4);
    const FunctionalTimeSeries fts(BasisSystem::bspline(6), oracle::random_matrix(6, 20, rng));
    EXPECT_EQ(decompose(fts, 5, 3).rank(), 3);
    EXPECT_THROW(decompose(fts, 5, 0), ConfigurationError);
    EXPECT_THROW(decompose(fts, 5, 31), ConfigurationError);
    EXPECT_THROW(decompose(FunctionalTimeSeries(BasisSystem::bspline(6), Eigen::MatrixXd::Zero(6, 20)), 5),
                 DegenerateSeriesError);
}
