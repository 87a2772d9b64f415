#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tf/solvers.hpp"

namespace tf {

struct TrendFilterFit {
    Eigen::VectorXd beta;
    std::size_t k = 0;
    double lambda = 0.0;      // in the units of the config's LambdaScale
    double lambda_eff = 0.0;  // the multiplier actually applied to ||D^(k+1) beta||_1
    LambdaScale scale = LambdaScale::PaperScaled;
    std::vector<std::size_t> knots;  // 0-based rows i of D^(k+1) with (D^(k+1) beta)_i != 0
    std::size_t df_estimate = 0;     // knots.size() + k + 1
    SolverDiagnostics diagnostics;
    Eigen::VectorXd dual;
    // Set by tune_to_df when the returned fit misses the requested df.
    std::optional<std::string> warning;

    /// Falling factorial coefficients alpha with H alpha = beta.
    Eigen::VectorXd coefficients() const;
};

/**
 * Knot set of an interior-point solution.
 *
 * A row i counts as a knot when |w_i| > knot_tol * ||w||_inf, with
 * w = D^(k+1) beta, and when w_i is large relative to the dual slack:
 * |w_i| / ||w||_inf > (lambda_eff - |v_i|) / lambda_eff. Along the central
 * path |w_i| times the slack is roughly constant, so off-knot rows show a
 * tiny w_i and an O(1) slack while knots show the reverse.
 *
 * lambda_eff == 0 keeps every row with |(D^(k+1) y)_i| > knot_tol * ||D^(k+1) y||_inf.
 */
std::vector<std::size_t> detect_knots(const Eigen::VectorXd& beta, const Eigen::VectorXd& dual,
                                      std::size_t k, double lambda_eff, double knot_tol);

/**
 * Trend filtering fit at a fixed lambda (interpreted per cfg.scale).
 *
 * The solve runs to a relative gap of min(cfg.tol, cfg.knot_gap_tol) so the
 * knot count is stable; at or beyond lambda_max the fit is the polynomial
 * limit with no knots.
 */
TrendFilterFit fit_trend_filter(const Eigen::VectorXd& y, std::size_t k, double lambda,
                                const FitConfig& cfg = {},
                                const std::optional<Eigen::VectorXd>& warm_dual = std::nullopt);

/// lambda_max in the units of cfg.scale.
double lambda_max_scaled(const Eigen::VectorXd& y, std::size_t k, LambdaScale scale);

/**
 * Bisection on log lambda over [lambda_min_ratio * lambda_max, lambda_max]
 * until df_estimate == target_df or the bracket collapses. When the lower end
 * still has too few knots the unpenalized fit (lambda = 0) is also tried.
 * Returns the fit whose df is closest to the target, ties to the larger
 * lambda; `warning` is set when the target was not hit.
 */
TrendFilterFit tune_to_df(const Eigen::VectorXd& y, std::size_t k, std::size_t target_df,
                          const FitConfig& cfg = {});

struct CrossValidation {
    double best_lambda = 0.0;
    std::size_t best_index = 0;
    Eigen::VectorXd cv_curve;  // mean held-out squared error per grid value
};

/**
 * Structured K-fold cross-validation over a descending lambda grid.
 *
 * Fold f holds out the interior points 1 + f, 1 + f + folds, ... (0-based);
 * the endpoints are always retained. Each training fit sees its m points as
 * an even grid, with the effective penalty rescaled by (m/n)^(k+1) so a
 * given lambda means the same smoothness on both grids. Held-out values are
 * predicted by linear interpolation between the two flanking retained points.
 * Errors within a relative 1e-6 of the best count as ties, resolved toward the
 * larger lambda.
 */
CrossValidation cross_validate(const Eigen::VectorXd& y, std::size_t k, const Eigen::VectorXd& lambda_grid,
                               std::size_t folds, const FitConfig& cfg = {});

struct LocallyAdaptiveFit {
    Eigen::VectorXd fitted;
    Eigen::VectorXd theta;  // truncated power basis coefficients
    double tv = 0.0;        // total variation of the k-th derivative of the fit
    double lambda = 0.0;
    std::size_t df = 0;     // active hinge terms + k + 1
};

/**
 * Locally adaptive regression spline: the lasso on the truncated power basis
 * (make_G) with the polynomial block unpenalized, lambda being the lasso
 * penalty (which matches trend filtering's PaperScaled lambda).
 *
 * With M = D^(k+1) G_hinge, which is square and banded, the hinge coefficients
 * of a fit b are M^{-1} D^(k+1) b, so the problem is solved in the fitted
 * values as min 1/2 ||y - b||^2 + lambda ||M^{-1} D^(k+1) b||_1 by the same
 * dual interior point scheme as trend filtering. Active hinges are chosen by
 * the knot rule of detect_knots. Requires n <= kDenseBasisCap.
 */
LocallyAdaptiveFit fit_locally_adaptive_spline(const Eigen::VectorXd& y, std::size_t k, double lambda,
                                               const FitConfig& cfg = {});

/// Smallest lambda at which the locally adaptive spline is the polynomial fit.
double lambda_max_locally_adaptive(const Eigen::VectorXd& y, std::size_t k);

/// Bisection on log lambda for the locally adaptive spline, as tune_to_df.
LocallyAdaptiveFit tune_locally_adaptive_to_df(const Eigen::VectorXd& y, std::size_t k, std::size_t target_df,
                                               const FitConfig& cfg = {});

struct SmoothingSplineFit {
    Eigen::VectorXd fitted;
    double lambda = 0.0;
    double df = 0.0;  // trace of (I + lambda K)^{-1}
};

/**
 * Cubic smoothing spline penalty over x_i = i/n,
 * K = (D^(2))^T C^{-1} D^(2) / n^3 with C tridiagonal (2/3 on the diagonal,
 * 1/6 off it). K itself is dense; it is only formed here, for n <= kDenseBasisCap.
 */
Eigen::MatrixXd smoothing_spline_penalty(std::size_t n);

/**
 * u = (I + lambda K)^{-1} y through the Reinsch form
 * u = y - (lambda / n^3) (D^(2))^T g with (C + (lambda / n^3) D^(2) (D^(2))^T) g = D^(2) y,
 * a pentadiagonal SPD system. Requires n >= 4.
 */
SmoothingSplineFit fit_smoothing_spline(const Eigen::VectorXd& y, double lambda);

/// trace((I + lambda K)^{-1}) = 2 + trace(M^{-1} C) with M as above; the
/// needed entries of M^{-1} come from the band of the inverse.
double df_smoothing_spline(double lambda, std::size_t n);

/// Smoothing spline whose df matches target_df (2 < target_df <= n) to
/// within df_tol, found by bisection on log lambda.
SmoothingSplineFit tune_smoothing_spline_to_df(const Eigen::VectorXd& y, double target_df, double df_tol = 1e-6);

}  // namespace tf
