#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tf/banded.hpp"
#include "tf/diff_ops.hpp"

namespace {

tf::BandedMatrix random_banded(std::size_t rows, std::size_t cols, std::size_t lo, std::size_t up, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    tf::BandedMatrix a(rows, cols, lo, up);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            if (a.in_band(i, j)) a.at(i, j) = u(rng);
    return a;
}

tf::BandedMatrix random_spd(std::size_t n, std::size_t bw, std::uint64_t seed) {
    const tf::BandedMatrix b = random_banded(n, n, bw, 0, seed);
    tf::BandedMatrix a = tf::band_gram_transpose(b);
    for (std::size_t i = 0; i < n; ++i) a.at(i, i) += 1.0;
    return a;
}

}  // namespace

TEST(BandedMatrix, OutOfBandEntriesAreZero) {
    const tf::BandedMatrix a = random_banded(7, 9, 2, 3, 1);
    const Eigen::MatrixXd d = a.to_dense();
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = 0; j < d.cols(); ++j)
            if (j - i > 3 || i - j > 2) EXPECT_EQ(d(i, j), 0.0);
    tf::BandedMatrix m = a;
    EXPECT_THROW(m.at(0, 5), std::out_of_range);
}

TEST(BandedMatrix, DenseRoundTripIsExact) {
    for (std::size_t n : {1u, 5u, 37u, 100u}) {
        const std::size_t lo = std::min<std::size_t>(3, n - 1), up = std::min<std::size_t>(2, n - 1);
        const tf::BandedMatrix a = random_banded(n, n, lo, up, n);
        const tf::BandedMatrix b = tf::BandedMatrix::from_dense(a.to_dense(), lo, up);
        EXPECT_EQ((a.to_dense() - b.to_dense()).cwiseAbs().maxCoeff(), 0.0);
    }
    Eigen::MatrixXd full = Eigen::MatrixXd::Ones(4, 4);
    EXPECT_THROW(tf::BandedMatrix::from_dense(full, 1, 1), std::invalid_argument);
}

TEST(BandedMatrix, MatvecIdentityAndDifference) {
    const Eigen::Vector3d v(1, 2, 3);
    EXPECT_EQ(tf::band_matvec(tf::BandedMatrix::identity(3), v), Eigen::VectorXd(v));
    const tf::DiffOp d(4, 1);
    const Eigen::VectorXd r = tf::band_matvec(d.matrix(), Eigen::VectorXd::Constant(4, 5.0));
    ASSERT_EQ(r.size(), 3);
    EXPECT_EQ(r.cwiseAbs().maxCoeff(), 0.0);
}

TEST(BandedMatrix, MatvecMatchesDense) {
    for (std::size_t n : {10u, 57u, 200u}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const tf::BandedMatrix a = random_banded(n, n + 3, 2 + seed % 3, 1 + seed % 4, seed * 31 + n);
            const Eigen::VectorXd v = oracle::gaussian(n + 3, seed);
            const Eigen::VectorXd w = oracle::gaussian(n, seed + 100);
            const Eigen::MatrixXd dense = a.to_dense();
            const Eigen::VectorXd ref = dense * v, reft = dense.transpose() * w;
            EXPECT_LE((tf::band_matvec(a, v) - ref).norm(), 1e-12 * ref.norm());
            EXPECT_LE((tf::band_matvec_transpose(a, w) - reft).norm(), 1e-12 * reft.norm());
        }
    }
}

TEST(BandedMatrix, GramTransposeAndCombine) {
    const tf::BandedMatrix a = random_banded(12, 15, 1, 2, 3);
    const Eigen::MatrixXd d = a.to_dense();
    EXPECT_LE((tf::band_gram(a).to_dense() - d * d.transpose()).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LE((tf::band_gram_transpose(a).to_dense() - d.transpose() * d).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_EQ((tf::band_transpose(a).to_dense() - d.transpose()).cwiseAbs().maxCoeff(), 0.0);
    const tf::BandedMatrix b = random_banded(12, 15, 3, 0, 4);
    const Eigen::MatrixXd c = tf::band_combine(2.0, a, -0.5, b).to_dense();
    EXPECT_LE((c - (2.0 * d - 0.5 * b.to_dense())).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BandCholesky, IdentityAndTridiagonal) {
    const Eigen::VectorXd b = oracle::gaussian(5, 9);
    EXPECT_LE((tf::band_cholesky_solve(tf::BandedMatrix::identity(5), b) - b).norm(), 1e-15);

    tf::BandedMatrix t(4, 4, 1, 1);
    for (std::size_t i = 0; i < 4; ++i) {
        t.at(i, i) = 2.0;
        if (i + 1 < 4) t.at(i, i + 1) = t.at(i + 1, i) = -1.0;
    }
    const Eigen::VectorXd x = tf::band_cholesky_solve(t, Eigen::Vector4d(1, 0, 0, 0));
    const Eigen::Vector4d expected(0.8, 0.6, 0.4, 0.2);
    EXPECT_LE((x - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(BandCholesky, NearlySingularDifferenceGram) {
    const std::size_t n = 60;
    const tf::DiffOp d(n, 2);
    tf::BandedMatrix a = d.gram();
    for (std::size_t i = 0; i < a.rows(); ++i) a.at(i, i) += 1e-6;
    const Eigen::VectorXd b = oracle::gaussian(a.rows(), 5);
    const Eigen::VectorXd x = tf::band_cholesky_solve(a, b);
    EXPECT_LE((a.to_dense() * x - b).norm(), 1e-8 * b.norm());
}

TEST(BandCholesky, RecoversSolutionOfSpdSystems) {
    for (std::size_t n : {3u, 40u, 200u}) {
        for (std::size_t bw : {1u, 2u, 4u}) {
            if (bw >= n) continue;
            const tf::BandedMatrix a = random_spd(n, bw, n + bw);
            const Eigen::VectorXd x = oracle::gaussian(n, bw);
            const Eigen::VectorXd got = tf::BandCholesky(a).solve(tf::band_matvec(a, x));
            EXPECT_LE((got - x).norm(), 1e-8 * x.norm()) << "n=" << n << " bw=" << bw;
        }
    }
}

TEST(BandCholesky, NonSpdIsReported) {
    tf::BandedMatrix a = tf::BandedMatrix::identity(4);
    a.at(2, 2) = -1.0;
    try {
        tf::BandCholesky f(a);
        FAIL() << "expected NotPositiveDefinite";
    } catch (const tf::NotPositiveDefinite& e) {
        EXPECT_EQ(e.pivot(), 2u);
    }
}

TEST(BandCholesky, WorkGrowsLinearlyInSizeAndQuadraticallyInBandwidth) {
    const auto count = [](std::size_t n, std::size_t bw) {
        return static_cast<double>(tf::BandCholesky(random_spd(n, bw, 1)).update_count());
    };
    const double base = count(1000, 3);
    EXPECT_NEAR(count(2000, 3) / base, 2.0, 0.05);
    const double w = count(4000, 6) / count(4000, 3);
    EXPECT_GT(w, 3.0);
    EXPECT_LT(w, 5.0);
    EXPECT_LE(base, 1000.0 * 3 * 3 * 2);
}

TEST(BandCholesky, FromRowsMatchesNormalEquations) {
    const tf::BandedMatrix b = random_banded(30, 20, 3, 1, 8);
    Eigen::VectorXd d = oracle::gaussian(20, 2).cwiseAbs();
    const Eigen::MatrixXd bd = b.to_dense();
    const Eigen::MatrixXd m = bd.transpose() * bd + Eigen::MatrixXd(d.asDiagonal());
    const Eigen::VectorXd rhs = oracle::gaussian(20, 3);
    const Eigen::VectorXd ref = m.ldlt().solve(rhs);
    EXPECT_LE((tf::BandCholesky::from_rows(b, d).solve(rhs) - ref).norm(), 1e-10 * ref.norm());

    const tf::BandedMatrix c = random_banded(20, 20, 1, 1, 9);
    const Eigen::MatrixXd m2 = bd.transpose() * bd + c.to_dense().transpose() * c.to_dense();
    const Eigen::VectorXd ref2 = m2.ldlt().solve(rhs);
    EXPECT_LE((tf::BandCholesky::from_rows(b, c).solve(rhs) - ref2).norm(), 1e-10 * ref2.norm());
}

TEST(BandCholesky, InverseBandMatchesDenseInverse) {
    const tf::BandedMatrix a = random_spd(25, 2, 4);
    const Eigen::MatrixXd inv = a.to_dense().inverse();
    const tf::BandedMatrix ib = tf::BandCholesky(a).inverse_band();
    for (std::size_t i = 0; i < 25; ++i)
        for (std::size_t j = 0; j < 25; ++j)
            if (ib.in_band(i, j))
                EXPECT_NEAR(ib(i, j), inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 1e-12);
}
