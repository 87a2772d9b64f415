#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tf/bases.hpp"
#include "tf/diff_ops.hpp"
#include "tf/estimators.hpp"

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Knots, EvenlySpacedFormula) {
    for (std::size_t k = 0; k <= 4; ++k) {
        const std::size_t n = 20;
        const tf::KnotSet s = tf::make_knots(n, k);
        ASSERT_EQ(s.knots.size(), n - k - 1);
        const double off = (k % 2 == 0) ? (k + 2) / 2.0 : (k + 1) / 2.0;
        for (std::size_t i = 0; i < s.knots.size(); ++i) {
            EXPECT_DOUBLE_EQ(s.knots[i], (off + static_cast<double>(i + 1)) / static_cast<double>(n));
            if (i) EXPECT_LT(s.knots[i - 1], s.knots[i]);
        }
        EXPECT_GT(s.knots.front(), 1.0 / static_cast<double>(n));
        // For k = 0 the last knot sits on x_n itself.
        if (k == 0) EXPECT_DOUBLE_EQ(s.knots.back(), 1.0);
        else EXPECT_LT(s.knots.back(), 1.0);
    }
}

TEST(BasisG, ZeroOrderIsLowerTriangularOnes) {
    const Eigen::MatrixXd g = tf::make_G(7, 0).entries;
    for (Eigen::Index i = 0; i < 7; ++i)
        for (Eigen::Index j = 0; j < 7; ++j) EXPECT_EQ(g(i, j), i >= j ? 1.0 : 0.0);
}

TEST(BasisG, PolynomialColumnsAndConstant) {
    const tf::BasisMatrix g = tf::make_G(22, 3);
    ASSERT_EQ(g.entries.cols(), 22);
    for (Eigen::Index i = 0; i < 22; ++i)
        for (Eigen::Index j = 0; j < 4; ++j)
            EXPECT_NEAR(g.entries(i, j), std::pow((i + 1) / 22.0, static_cast<double>(j)), 1e-15);
    EXPECT_EQ(g.entries.col(0), Eigen::VectorXd::Ones(22));
}

TEST(BasisG, MatchesDefiningFormula) {
    for (std::size_t k = 0; k <= 4; ++k)
        for (std::size_t n : {10u, 23u, 60u})
            EXPECT_LE(max_abs(tf::make_G(n, k).entries - oracle::truncated_power_matrix(n, k)), 1e-14) << "k=" << k;
}

TEST(BasisH, KnownEntryAndFormula) {
    const Eigen::MatrixXd h = tf::make_H(5, 1).entries;
    EXPECT_DOUBLE_EQ(h(3, 2), 2.0 / 5.0);
    for (std::size_t k = 0; k <= 5; ++k)
        for (std::size_t n : {k + 2, std::size_t{30}, std::size_t{90}})
            EXPECT_LE(max_abs(tf::make_H(n, k).entries - oracle::falling_factorial_matrix(n, k)), 1e-12) << "k=" << k;
}

TEST(BasisH, TripleIdentity) {
    for (std::size_t k = 0; k <= 5; ++k) {
        for (std::size_t n : {k + 2, std::size_t{17}, std::size_t{120}, std::size_t{200}}) {
            const Eigen::MatrixXd h = tf::make_H(n, k).entries;
            EXPECT_LE(max_abs(h - tf::make_H_product(n, k)), 1e-12) << "k=" << k << " n=" << n;
            EXPECT_LE(max_abs(h - tf::make_H_evaluated(n, k)), 1e-12) << "k=" << k << " n=" << n;
        }
    }
}

TEST(BasisH, EqualsGForLowOrdersOnly) {
    for (std::size_t n : {10u, 50u, 200u}) {
        for (std::size_t k : {0u, 1u}) EXPECT_LE(max_abs(tf::make_G(n, k).entries - tf::make_H(n, k).entries), 1e-12);
        for (std::size_t k : {2u, 3u}) EXPECT_GT(max_abs(tf::make_G(n, k).entries - tf::make_H(n, k).entries), 1e-6);
    }
}

TEST(BasisH, ZeroPatternAboveSupport) {
    const std::size_t n = 30;
    for (std::size_t k = 1; k <= 3; ++k) {
        const Eigen::MatrixXd h = tf::make_H(n, k).entries;
        const Eigen::MatrixXd g = tf::make_G(n, k).entries;
        const std::size_t shift = (k % 2 == 0) ? k / 2 : (k + 1) / 2;
        for (std::size_t j = k + 2; j <= n; ++j) {
            for (std::size_t i = 1; i <= j - 1; ++i) EXPECT_EQ(h(i - 1, j - 1), 0.0);
            for (std::size_t i = 1; i + shift <= j; ++i) EXPECT_EQ(g(i - 1, j - 1), 0.0);
        }
    }
}

TEST(Coefficients, InvertHWithoutFormingIt) {
    for (std::size_t k = 0; k <= 3; ++k) {
        const std::size_t n = 40;
        const Eigen::VectorXd b = oracle::gaussian(n, 10 + k);
        const Eigen::VectorXd alpha = tf::tf_coefficients(b, k);
        const Eigen::VectorXd back = tf::make_H(n, k).entries * alpha;
        EXPECT_LE((back - b).lpNorm<Eigen::Infinity>(), 1e-8 * b.lpNorm<Eigen::Infinity>()) << "k=" << k;
    }
}

TEST(EvalFunction, InterpolatesAndMatchesDirectSum) {
    const std::size_t n = 25;
    for (std::size_t k = 0; k <= 3; ++k) {
        const Eigen::VectorXd b = oracle::gaussian(n, 20 + k);
        const Eigen::VectorXd alpha = tf::tf_coefficients(b, k);
        for (std::size_t i = 1; i <= n; ++i)
            EXPECT_NEAR(tf::eval_tf_function(alpha, k, static_cast<double>(i) / n), b[static_cast<Eigen::Index>(i - 1)], 1e-8);
        for (double x : {0.013, 0.5071, 0.77, 0.999})
            EXPECT_NEAR(tf::eval_tf_function(alpha, k, x), oracle::falling_factorial_eval(alpha, k, x), 1e-10);
    }
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    e1[0] = 1.0;
    for (double x : {0.0, 0.3, 1.0}) EXPECT_EQ(tf::eval_tf_function(e1, 3, x), 1.0);
}

TEST(EvalFunction, ContinuousForPositiveOrders) {
    const std::size_t n = 30;
    for (std::size_t k = 1; k <= 3; ++k) {
        const Eigen::VectorXd alpha = tf::tf_coefficients(oracle::gaussian(n, k), k);
        for (std::size_t i = 2; i < n; ++i) {
            const double x = static_cast<double>(i) / n;
            const double jump = tf::eval_tf_function(alpha, k, x + 1e-12) - tf::eval_tf_function(alpha, k, x - 1e-12);
            EXPECT_LE(std::abs(jump), 1e-8) << "k=" << k << " i=" << i;
        }
    }
}

TEST(EvalFunction, DerivativeJumpsExistForOrderTwoAndAbove) {
    const std::size_t n = 30;
    for (std::size_t k = 2; k <= 3; ++k) {
        const Eigen::VectorXd y = oracle::gaussian(n, 40 + k);
        const tf::TrendFilterFit fit = tf::fit_trend_filter(y, k, 0.1 * tf::lambda_max_scaled(y, k, tf::LambdaScale::PaperScaled));
        const Eigen::VectorXd alpha = fit.coefficients();
        const double h = 1e-6;
        double biggest = 0.0;
        for (std::size_t i = 2; i < n; ++i) {
            const double x = static_cast<double>(i) / n;
            const double right = (tf::eval_tf_function(alpha, k, x + h) - tf::eval_tf_function(alpha, k, x)) / h;
            const double left = (tf::eval_tf_function(alpha, k, x) - tf::eval_tf_function(alpha, k, x - h)) / h;
            biggest = std::max(biggest, std::abs(right - left));
        }
        EXPECT_GT(biggest, 1e-4) << "k=" << k;
    }
}

TEST(Bases, DenseCapIsEnforced) {
    EXPECT_THROW(tf::make_H(tf::kDenseBasisCap + 1, 1), std::invalid_argument);
    EXPECT_THROW(tf::make_G(tf::kDenseBasisCap + 1, 1), std::invalid_argument);
}
