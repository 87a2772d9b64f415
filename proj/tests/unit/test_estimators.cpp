#include <algorithm>
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tf/bases.hpp"
#include "tf/diff_ops.hpp"
#include "tf/estimators.hpp"
#include "tf/simbench.hpp"

namespace {

double paper_lambda_max(const Eigen::VectorXd& y, std::size_t k) {
    return tf::lambda_max_scaled(y, k, tf::LambdaScale::PaperScaled);
}

Eigen::VectorXd log_grid(double hi, double lo, Eigen::Index count) {
    Eigen::VectorXd g(count);
    for (Eigen::Index i = 0; i < count; ++i)
        g[i] = hi * std::pow(lo / hi, static_cast<double>(i) / static_cast<double>(count - 1));
    return g;
}

}  // namespace

TEST(FitTrendFilter, PolynomialLimitHasNoKnots) {
    for (std::size_t k = 0; k <= 3; ++k) {
        const Eigen::VectorXd y = oracle::gaussian(60, k);
        const tf::TrendFilterFit fit = tf::fit_trend_filter(y, k, 1.5 * paper_lambda_max(y, k));
        EXPECT_TRUE(fit.knots.empty());
        EXPECT_EQ(fit.df_estimate, k + 1);
    }
}

TEST(FitTrendFilter, ZeroLambdaReturnsData) {
    const Eigen::VectorXd y = oracle::gaussian(40, 2);
    const tf::TrendFilterFit fit = tf::fit_trend_filter(y, 2, 0.0);
    EXPECT_EQ(fit.beta, y);
    EXPECT_EQ(fit.df_estimate, 40u);
}

TEST(FitTrendFilter, KnotsAreValidRowsAndDfIsBounded) {
    for (std::size_t k = 0; k <= 3; ++k) {
        const std::size_t n = 100;
        const Eigen::VectorXd y = tf::gen_hills(n, 0.1, k).y;
        for (double f : {0.5, 0.05, 0.005}) {
            const tf::TrendFilterFit fit = tf::fit_trend_filter(y, k, f * paper_lambda_max(y, k));
            EXPECT_GE(fit.df_estimate, k + 1);
            EXPECT_LE(fit.df_estimate, n);
            EXPECT_TRUE(std::is_sorted(fit.knots.begin(), fit.knots.end()));
            for (const auto i : fit.knots) EXPECT_LT(i, n - k - 1);
        }
    }
}

TEST(FitTrendFilter, RefitOnKnotsUndoesShrinkage) {
    for (std::size_t k = 0; k <= 3; ++k) {
        const std::size_t n = 60;
        const Eigen::VectorXd y = tf::gen_hills(n, 0.1, 40 + k).y;
        const tf::TrendFilterFit fit = tf::fit_trend_filter(y, k, 0.05 * paper_lambda_max(y, k));
        const Eigen::MatrixXd d = oracle::diff_matrix(n, k + 1);
        // Least squares over vectors whose differences vanish off the knots.
        std::vector<Eigen::Index> off;
        for (Eigen::Index i = 0; i < d.rows(); ++i)
            if (!std::binary_search(fit.knots.begin(), fit.knots.end(), static_cast<std::size_t>(i))) off.push_back(i);
        Eigen::MatrixXd c(static_cast<Eigen::Index>(off.size()), static_cast<Eigen::Index>(n));
        for (std::size_t r = 0; r < off.size(); ++r) c.row(static_cast<Eigen::Index>(r)) = d.row(off[r]);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullV);
        const Eigen::Index rank = svd.rank();
        const Eigen::MatrixXd null = svd.matrixV().rightCols(static_cast<Eigen::Index>(n) - rank);
        const Eigen::VectorXd refit = null * (null.transpose() * y);
        EXPECT_GE((d * refit).lpNorm<1>(), (d * fit.beta).lpNorm<1>() - 1e-8) << "k=" << k;
    }
}

TEST(FitTrendFilter, IsNotALinearSmoother) {
    const std::size_t n = 50;
    Eigen::VectorXd y1 = Eigen::VectorXd::Zero(n), y2 = Eigen::VectorXd::Zero(n);
    y1.tail(25).setConstant(1.0);
    y2.tail(25).setConstant(1.0);
    const double lam = 0.5;
    const auto f = [&](const Eigen::VectorXd& y) { return tf::fit_trend_filter(y, 0, lam).beta; };
    EXPECT_GT((f(y1 + y2) - f(y1) - f(y2)).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(FitTrendFilter, CoefficientsReproduceFit) {
    const Eigen::VectorXd y = oracle::gaussian(30, 9);
    const tf::TrendFilterFit fit = tf::fit_trend_filter(y, 2, 0.01);
    EXPECT_LE((tf::make_H(30, 2).entries * fit.coefficients() - fit.beta).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(TuneToDf, HillsDf19HasFifteenKnots) {
    const tf::Dataset ds = tf::gen_hills(128, tf::kHillsNoiseSd, 3);
    const tf::TrendFilterFit fit = tf::tune_to_df(ds.y, 3, 19);
    EXPECT_EQ(fit.df_estimate, 19u);
    EXPECT_EQ(fit.knots.size(), 15u);
    EXPECT_FALSE(fit.warning.has_value());
}

TEST(TuneToDf, Extremes) {
    const Eigen::VectorXd y = oracle::gaussian(40, 12);
    tf::FitConfig cfg;
    cfg.lambda_min_ratio = 0.0;
    for (std::size_t k = 0; k <= 3; ++k) {
        const tf::TrendFilterFit low = tf::tune_to_df(y, k, k + 1, cfg);
        EXPECT_DOUBLE_EQ(low.lambda, paper_lambda_max(y, k));
        EXPECT_TRUE(low.knots.empty());
        const tf::TrendFilterFit full = tf::tune_to_df(y, k, 40, cfg);
        EXPECT_EQ(full.df_estimate, 40u);
        EXPECT_EQ(full.lambda, 0.0);
    }
    EXPECT_THROW(tf::tune_to_df(y, 2, 2), std::invalid_argument);
    EXPECT_THROW(tf::tune_to_df(y, 2, 41), std::invalid_argument);
}

TEST(TuneToDf, PolynomialTargetGivesNoKnotsOnRandomData) {
    for (std::uint64_t seed = 0; seed < 20; ++seed)
        for (std::size_t k = 0; k <= 3; ++k)
            EXPECT_TRUE(tf::tune_to_df(oracle::gaussian(50, seed), k, k + 1).knots.empty());
}

TEST(TuneToDf, DopplerDf50) {
    const tf::Dataset ds = tf::gen_doppler(1000, tf::kDopplerNoiseSd, 1);
    const tf::TrendFilterFit fit = tf::tune_to_df(ds.y, 3, 50);
    EXPECT_GE(fit.df_estimate, 48u);
    EXPECT_LE(fit.df_estimate, 52u);
}

TEST(CrossValidate, NoiselessConstantPicksLargestLambda) {
    // Training fits treat the retained points as an even grid, so only
    // constant data stays in the null space of every training penalty.
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(60, 1.7);
    const tf::CrossValidation cv = tf::cross_validate(y, 0, log_grid(10.0, 1e-4, 12), 5);
    EXPECT_EQ(cv.best_index, 0u);
    EXPECT_EQ(cv.best_lambda, 10.0);
}

TEST(CrossValidate, NoiselessPolynomialFitsExactlyAtEveryLambda) {
    const std::size_t n = 60, k = 2;
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i + 1) / n;
        y[static_cast<Eigen::Index>(i)] = 1.0 - 2.0 * x + 3.0 * x * x;
    }
    const tf::CrossValidation cv = tf::cross_validate(y, k, log_grid(10.0, 1e-4, 12), 5);
    const tf::TrendFilterFit fit = tf::fit_trend_filter(y, k, cv.best_lambda);
    EXPECT_LE(oracle::rms(fit.beta, y), 1e-8);
}

TEST(CrossValidate, PureNoiseFavoursHeavySmoothing) {
    std::vector<std::size_t> picks;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Eigen::VectorXd y = oracle::gaussian(80, 1000 + seed);
        const Eigen::VectorXd grid = log_grid(paper_lambda_max(y, 1), 1e-4 * paper_lambda_max(y, 1), 20);
        picks.push_back(tf::cross_validate(y, 1, grid, 5).best_index);
    }
    std::nth_element(picks.begin(), picks.begin() + 10, picks.end());
    EXPECT_LT(picks[10], 5u);
}

TEST(CrossValidate, HillsSelectionIsNearOracleBest) {
    for (std::uint64_t seed : {3u, 5u}) {
        const tf::Dataset ds = tf::gen_hills(128, tf::kHillsNoiseSd, seed);
        const double lmax = paper_lambda_max(ds.y, 3);
        const Eigen::VectorXd grid = log_grid(lmax, 1e-5 * lmax, 30);
        const tf::CrossValidation cv = tf::cross_validate(ds.y, 3, grid, 5);
        double best_loss = std::numeric_limits<double>::infinity();
        for (Eigen::Index g = 0; g < grid.size(); ++g)
            best_loss = std::min(best_loss, tf::loss_mse(tf::fit_trend_filter(ds.y, 3, grid[g]).beta, *ds.f0));
        const tf::TrendFilterFit fit = tf::fit_trend_filter(ds.y, 3, cv.best_lambda);
        EXPECT_GE(fit.df_estimate, 12u);
        EXPECT_LE(fit.df_estimate, 48u);
        EXPECT_LE(tf::loss_mse(fit.beta, *ds.f0), 1.25 * best_loss);
    }
}

TEST(CrossValidate, RejectsBadGrids) {
    const Eigen::VectorXd y = oracle::gaussian(30, 1);
    EXPECT_THROW(tf::cross_validate(y, 1, Eigen::Vector2d(1.0, 2.0), 5), std::invalid_argument);
    EXPECT_THROW(tf::cross_validate(y, 1, Eigen::Vector2d(2.0, 1.0), 1), std::invalid_argument);
}

TEST(LocallyAdaptive, EqualsTrendFilterForLowOrders) {
    for (std::size_t k : {0u, 1u}) {
        const Eigen::VectorXd y = tf::gen_hills(100, 0.1, 7 + k).y;
        const double lam = 0.02 * paper_lambda_max(y, k);
        const tf::LocallyAdaptiveFit las = tf::fit_locally_adaptive_spline(y, k, lam);
        tf::FitConfig cfg;
        cfg.tol = 1e-12;
        EXPECT_LE((las.fitted - tf::fit_trend_filter(y, k, lam, cfg).beta).cwiseAbs().maxCoeff(), 1e-8) << "k=" << k;
    }
}

TEST(LocallyAdaptive, ZeroLambdaReturnsData) {
    const Eigen::VectorXd y = oracle::gaussian(30, 3);
    EXPECT_LE((tf::fit_locally_adaptive_spline(y, 3, 0.0).fitted - y).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LocallyAdaptive, MatchesLassoOnG) {
    const std::size_t n = 20;
    for (std::size_t k = 2; k <= 3; ++k) {
        const Eigen::VectorXd y = oracle::gaussian(n, 80 + k);
        const double lam = 0.05 * tf::lambda_max_locally_adaptive(y, k);
        const tf::LocallyAdaptiveFit las = tf::fit_locally_adaptive_spline(y, k, lam);
        const Eigen::MatrixXd g = oracle::truncated_power_matrix(n, k);
        const Eigen::VectorXd theta = tf::solve_lasso_cd(g, y, lam, k + 1);
        EXPECT_LE(oracle::rms(las.fitted, g * theta), 1e-6) << "k=" << k;
        EXPECT_NEAR(las.tv, theta.tail(static_cast<Eigen::Index>(n - k - 1)).lpNorm<1>(), 1e-6 * (1.0 + las.tv));
        EXPECT_LE(oracle::rms(g * las.theta, las.fitted), 1e-7);
    }
}

TEST(LocallyAdaptive, CloseToTrendFilterOnHills) {
    const tf::Dataset ds = tf::gen_hills(128, tf::kHillsNoiseSd, 11);
    const double lam = tf::tune_to_df(ds.y, 3, 19).lambda;
    const tf::LocallyAdaptiveFit las = tf::fit_locally_adaptive_spline(ds.y, 3, lam);
    const Eigen::VectorXd tfit = tf::fit_trend_filter(ds.y, 3, lam).beta;
    EXPECT_LE((las.fitted - tfit).squaredNorm() / 128.0, 1e-4);
}

TEST(LocallyAdaptive, LambdaMaxGivesPolynomial) {
    const Eigen::VectorXd y = oracle::gaussian(40, 6);
    const tf::LocallyAdaptiveFit las = tf::fit_locally_adaptive_spline(y, 3, 1.01 * tf::lambda_max_locally_adaptive(y, 3));
    EXPECT_LE((las.fitted - oracle::poly_fit(y, 3)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_EQ(las.df, 4u);
}

TEST(SmoothingSpline, PenaltyMatchesDenseConstruction) {
    EXPECT_LE((tf::smoothing_spline_penalty(30) - oracle::spline_penalty(30)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SmoothingSpline, ZeroLambdaAndLinearData) {
    const std::size_t n = 50;
    const Eigen::VectorXd y = oracle::gaussian(n, 2);
    const tf::SmoothingSplineFit f0 = tf::fit_smoothing_spline(y, 0.0);
    EXPECT_EQ(f0.fitted, y);
    EXPECT_EQ(f0.df, 50.0);
    Eigen::VectorXd lin(n);
    for (std::size_t i = 0; i < n; ++i) lin[static_cast<Eigen::Index>(i)] = 0.7 - 3.0 * static_cast<double>(i + 1) / n;
    EXPECT_LE((oracle::spline_penalty(n) * lin).cwiseAbs().maxCoeff(), 1e-9);
    for (double lam : {1e-6, 1.0, 1e6, 1e12})
        EXPECT_LE((tf::fit_smoothing_spline(lin, lam).fitted - lin).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SmoothingSpline, MatchesDenseOracle) {
    const std::size_t n = 40;
    const Eigen::VectorXd y = oracle::gaussian(n, 4);
    for (double lam : {1e-6, 1e-3, 1.0}) {
        EXPECT_LE((tf::fit_smoothing_spline(y, lam).fitted - oracle::spline_fit(y, lam)).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_NEAR(tf::df_smoothing_spline(lam, n), oracle::spline_df(n, lam), 1e-9);
    }
}

TEST(SmoothingSpline, DfIsMonotoneWithLimits) {
    const std::size_t n = 200;
    EXPECT_EQ(tf::df_smoothing_spline(0.0, n), 200.0);
    double prev = static_cast<double>(n);
    for (int i = 0; i < 50; ++i) {
        const double df = tf::df_smoothing_spline(std::pow(10.0, -12.0 + 0.4 * i), n);
        EXPECT_LE(df, prev + 1e-9);
        prev = df;
    }
    // The smallest nonzero eigenvalue of K is about (pi/n)^4 / n^3, so the
    // limit needs a very large lambda.
    EXPECT_NEAR(tf::df_smoothing_spline(1e30, n), 2.0, 1e-6);
}

TEST(SmoothingSpline, IsLinearInData) {
    const Eigen::VectorXd y1 = oracle::gaussian(60, 1), y2 = oracle::gaussian(60, 2);
    const double lam = 1e-3;
    const Eigen::VectorXd lhs = tf::fit_smoothing_spline(2.0 * y1 - 0.5 * y2, lam).fitted;
    const Eigen::VectorXd rhs = 2.0 * tf::fit_smoothing_spline(y1, lam).fitted - 0.5 * tf::fit_smoothing_spline(y2, lam).fitted;
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SmoothingSpline, TuneHitsTargetDf) {
    const Eigen::VectorXd y = tf::gen_hills(128, tf::kHillsNoiseSd, 1).y;
    for (double target : {5.0, 19.0, 60.5}) EXPECT_NEAR(tf::tune_smoothing_spline_to_df(y, target).df, target, 1e-6);
    EXPECT_THROW(tf::tune_smoothing_spline_to_df(y, 2.0), std::invalid_argument);
}
