#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tf/diff_ops.hpp"

TEST(DiffOp, FirstOrderRows) {
    const Eigen::MatrixXd d = tf::make_diff_op(4, 1).matrix().to_dense();
    Eigen::MatrixXd expected(3, 4);
    expected << -1, 1, 0, 0, 0, -1, 1, 0, 0, 0, -1, 1;
    EXPECT_EQ(d, expected);
}

TEST(DiffOp, SecondAndThirdOrderFirstRows) {
    const Eigen::MatrixXd d2 = tf::make_diff_op(6, 2).matrix().to_dense();
    const Eigen::MatrixXd d3 = tf::make_diff_op(6, 3).matrix().to_dense();
    Eigen::RowVectorXd r2(6), r3(6);
    r2 << 1, -2, 1, 0, 0, 0;
    r3 << -1, 3, -3, 1, 0, 0;
    EXPECT_EQ(Eigen::RowVectorXd(d2.row(0)), r2);
    EXPECT_EQ(Eigen::RowVectorXd(d3.row(0)), r3);
}

TEST(DiffOp, AlternatingBinomialPattern) {
    for (std::size_t order = 1; order <= tf::kMaxOrder + 1; ++order) {
        const tf::DiffOp d(order + 7, order);
        const auto c = d.coefficients();
        ASSERT_EQ(c.size(), order + 1);
        for (std::size_t m = 0; m <= order; ++m) {
            const std::int64_t sign = ((order - m) % 2 == 0) ? 1 : -1;
            EXPECT_EQ(c[m], sign * oracle::binomial(order, m)) << "order " << order << " m " << m;
        }
        const Eigen::MatrixXd dense = d.matrix().to_dense();
        EXPECT_EQ((dense - oracle::diff_matrix(order + 7, order)).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(DiffOp, AnnihilatesPolynomials) {
    for (std::size_t k = 0; k <= 5; ++k) {
        for (std::size_t n : {k + 2, std::size_t{50}, std::size_t{200}}) {
            const tf::DiffOp d(n, k + 1);
            Eigen::VectorXd p(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i) {
                const double x = static_cast<double>(i + 1) / static_cast<double>(n);
                double v = 0.0;
                for (std::size_t j = 0; j <= k; ++j) v += (1.0 + static_cast<double>(j)) * std::pow(x, static_cast<double>(j));
                p[static_cast<Eigen::Index>(i)] = v;
            }
            // Coefficients reach C(k+1, (k+1)/2); rounding scales with them.
            double coeff_sum = 0.0;
            for (auto c : d.coefficients()) coeff_sum += std::abs(static_cast<double>(c));
            EXPECT_LE(d.apply(p).lpNorm<Eigen::Infinity>(), 1e-13 * coeff_sum * p.lpNorm<Eigen::Infinity>())
                << "k=" << k << " n=" << n;
        }
    }
}

TEST(DiffOp, GramIsBandedAndPositiveDefinite) {
    for (std::size_t k = 0; k <= 3; ++k) {
        const std::size_t n = 40;
        const tf::DiffOp d(n, k + 1);
        const tf::BandedMatrix g = d.gram();
        EXPECT_EQ(g.lower_bw(), k + 1);
        EXPECT_EQ(g.upper_bw(), k + 1);
        const Eigen::MatrixXd dd = oracle::diff_matrix(n, k + 1);
        EXPECT_LE((g.to_dense() - dd * dd.transpose()).cwiseAbs().maxCoeff(), 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.to_dense());
        EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
        EXPECT_LE((d.gram_transpose().to_dense() - dd.transpose() * dd).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(DiffOp, ApplyAndTransposeMatchDense) {
    const tf::DiffOp d(31, 3);
    const Eigen::MatrixXd dd = oracle::diff_matrix(31, 3);
    const Eigen::VectorXd b = oracle::gaussian(31, 1), v = oracle::gaussian(28, 2);
    EXPECT_LE((d.apply(b) - dd * b).norm(), 1e-13);
    EXPECT_LE((d.apply_transpose(v) - dd.transpose() * v).norm(), 1e-13);
}

TEST(DiffOp, SolveTransposeOnRangeOfDTranspose) {
    const tf::DiffOp d(25, 3);
    const Eigen::VectorXd v = oracle::gaussian(22, 4);
    const Eigen::VectorXd r = d.apply_transpose(v);
    EXPECT_LE((d.solve_transpose(r) - v).norm(), 1e-9 * v.norm());
}

TEST(DiffOp, RejectsBadShapes) {
    EXPECT_THROW(tf::make_diff_op(3, 3), std::invalid_argument);
    EXPECT_THROW(tf::make_diff_op(40, 0), std::invalid_argument);
    EXPECT_THROW(tf::make_diff_op(40, tf::kMaxOrder + 2), std::invalid_argument);
}

TEST(CumulativeSums, KnownValues) {
    EXPECT_EQ(tf::cumsum_k(5, 0), 1.0);
    EXPECT_EQ(tf::cumsum_k(5, 1), 5.0);
    EXPECT_EQ(tf::cumsum_k(4, 2), 10.0);
    // sigma_i^(k) = C(i + k - 1, k)
    for (std::size_t k = 0; k <= 5; ++k)
        for (std::size_t i = 1; i <= 30; ++i)
            EXPECT_EQ(tf::cumsum_k(i, k), static_cast<double>(oracle::binomial(i + k - 1, k)));
    const auto table = tf::cumsum_table(10, 3);
    ASSERT_EQ(table.size(), 10u);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(table[i], tf::cumsum_k(i + 1, 3));
}

TEST(PolyNullBasis, ConstantColumnAndAnnihilation) {
    const Eigen::MatrixXd b0 = tf::poly_null_basis(4, 0);
    ASSERT_EQ(b0.cols(), 1);
    EXPECT_LE((b0 - Eigen::VectorXd::Constant(4, 0.5)).cwiseAbs().maxCoeff(), 1e-15);
    for (std::size_t k = 0; k <= 5; ++k) {
        const std::size_t n = 60;
        const Eigen::MatrixXd b = tf::poly_null_basis(n, k);
        ASSERT_EQ(b.cols(), static_cast<Eigen::Index>(k + 1));
        const tf::DiffOp d(n, k + 1);
        for (Eigen::Index j = 0; j < b.cols(); ++j) EXPECT_LE(d.apply(b.col(j)).lpNorm<Eigen::Infinity>(), 1e-10);
        EXPECT_LE((b.transpose() * b - Eigen::MatrixXd::Identity(b.cols(), b.cols())).cwiseAbs().maxCoeff(), 1e-12);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(b);
        qr.setThreshold(1e-10);
        EXPECT_EQ(qr.rank(), b.cols());
    }
}

TEST(PolyNullBasis, ProjectionMatchesNormalEquations) {
    for (std::size_t k = 0; k <= 3; ++k) {
        const Eigen::VectorXd y = oracle::gaussian(80, k);
        EXPECT_LE((tf::polynomial_projection(y, k) - oracle::poly_fit(y, k)).cwiseAbs().maxCoeff(), 1e-10);
    }
}
