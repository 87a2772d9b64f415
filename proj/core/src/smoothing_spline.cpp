#include <cmath>
#include <stdexcept>
#include <string>

#include "tf/banded.hpp"
#include "tf/bases.hpp"
#include "tf/diff_ops.hpp"
#include "tf/estimators.hpp"

namespace tf {

namespace {

BandedMatrix tridiagonal_c(std::size_t m) {
    BandedMatrix c(m, m, 1, 1);
    for (std::size_t i = 0; i < m; ++i) {
        c.at(i, i) = 2.0 / 3.0;
        if (i + 1 < m) {
            c.at(i, i + 1) = 1.0 / 6.0;
            c.at(i + 1, i) = 1.0 / 6.0;
        }
    }
    return c;
}

double penalty_scale(std::size_t n) {
    const auto nd = static_cast<double>(n);
    return 1.0 / (nd * nd * nd);
}

// M = C + lambda s D D^T, pentadiagonal and SPD for lambda >= 0.
BandCholesky reinsch_factor(const DiffOp& d, double lambda) {
    const BandedMatrix c = tridiagonal_c(d.rows());
    const BandedMatrix m = band_combine(1.0, c, lambda * penalty_scale(d.n()), d.gram());
    return BandCholesky(m);
}

void check_lambda(double lambda, const char* who) {
    if (!(lambda >= 0.0) || std::isinf(lambda)) throw std::invalid_argument(std::string(who) + ": lambda must be finite and nonnegative");
}

}  // namespace

Eigen::MatrixXd smoothing_spline_penalty(std::size_t n) {
    if (n < 4) throw std::invalid_argument("smoothing_spline_penalty: need n >= 4");
    if (n > kDenseBasisCap) throw std::length_error("smoothing_spline_penalty: n exceeds the dense cap");
    const DiffOp d(n, 2);
    const Eigen::MatrixXd dd = d.matrix().to_dense();
    const Eigen::MatrixXd c = tridiagonal_c(d.rows()).to_dense();
    return penalty_scale(n) * dd.transpose() * c.llt().solve(dd);
}

SmoothingSplineFit fit_smoothing_spline(const Eigen::VectorXd& y, double lambda) {
    const auto n = static_cast<std::size_t>(y.size());
    if (n < 4) throw std::invalid_argument("fit_smoothing_spline: need n >= 4");
    check_lambda(lambda, "fit_smoothing_spline");
    SmoothingSplineFit fit;
    fit.lambda = lambda;
    fit.df = df_smoothing_spline(lambda, n);
    if (lambda == 0.0) {
        fit.fitted = y;
        return fit;
    }
    const DiffOp d(n, 2);
    const Eigen::VectorXd gamma = reinsch_factor(d, lambda).solve(d.apply(y));
    fit.fitted = y - lambda * penalty_scale(n) * d.apply_transpose(gamma);
    return fit;
}

double df_smoothing_spline(double lambda, std::size_t n) {
    if (n < 4) throw std::invalid_argument("df_smoothing_spline: need n >= 4");
    check_lambda(lambda, "df_smoothing_spline");
    if (lambda == 0.0) return static_cast<double>(n);
    const DiffOp d(n, 2);
    const BandedMatrix inv = reinsch_factor(d, lambda).inverse_band();
    // trace(M^{-1} C) with C tridiagonal needs only the first band of M^{-1}.
    const std::size_t m = d.rows();
    double tr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        tr += (2.0 / 3.0) * inv(i, i);
        if (i + 1 < m) tr += 2.0 * (1.0 / 6.0) * inv(i, i + 1);
    }
    return 2.0 + tr;
}

SmoothingSplineFit tune_smoothing_spline_to_df(const Eigen::VectorXd& y, double target_df, double df_tol) {
    const auto n = static_cast<std::size_t>(y.size());
    if (n < 4) throw std::invalid_argument("tune_smoothing_spline_to_df: need n >= 4");
    if (!(target_df > 2.0) || target_df > static_cast<double>(n))
        throw std::invalid_argument("tune_smoothing_spline_to_df: target df must lie in (2, n]");
    if (target_df == static_cast<double>(n)) return fit_smoothing_spline(y, 0.0);

    // df is decreasing in lambda; bracket the target, then bisect on log lambda.
    double lo = 0.0, hi = 0.0;
    while (df_smoothing_spline(std::exp(hi), n) > target_df) hi += std::log(10.0);
    lo = hi - std::log(10.0);
    while (df_smoothing_spline(std::exp(lo), n) < target_df) lo -= std::log(10.0);
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double df = df_smoothing_spline(std::exp(mid), n);
        if (std::abs(df - target_df) <= df_tol) break;
        if (df > target_df) lo = mid;
        else hi = mid;
    }
    return fit_smoothing_spline(y, std::exp(mid));
}

}  // namespace tf
