#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "tf/bases.hpp"
#include "tf/diff_ops.hpp"
#include "tf/estimators.hpp"

namespace tf {

Eigen::VectorXd TrendFilterFit::coefficients() const { return tf_coefficients(beta, k); }

std::vector<std::size_t> detect_knots(const Eigen::VectorXd& beta, const Eigen::VectorXd& dual,
                                      std::size_t k, double lambda_eff, double knot_tol) {
    const auto n = static_cast<std::size_t>(beta.size());
    const DiffOp d(n, k + 1);
    const Eigen::VectorXd w = d.apply(beta);
    const double wmax = w.lpNorm<Eigen::Infinity>();
    std::vector<std::size_t> knots;
    if (wmax == 0.0) return knots;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double wrel = std::abs(w[i]) / wmax;
        if (wrel <= knot_tol) continue;
        if (lambda_eff > 0.0) {
            if (dual.size() != w.size()) throw DimensionError("detect_knots: dual has the wrong length");
            const double slack = (lambda_eff - std::abs(dual[i])) / lambda_eff;
            if (wrel <= slack) continue;
        }
        knots.push_back(static_cast<std::size_t>(i));
    }
    return knots;
}

double lambda_max_scaled(const Eigen::VectorXd& y, std::size_t k, LambdaScale scale) {
    return lambda_max(y, k) / lambda_scale_factor(static_cast<std::size_t>(y.size()), k, scale);
}

TrendFilterFit fit_trend_filter(const Eigen::VectorXd& y, std::size_t k, double lambda, const FitConfig& cfg,
                                const std::optional<Eigen::VectorXd>& warm_dual) {
    const TFProblem problem{y, k, lambda, cfg.scale};
    problem.validate();
    FitConfig solve_cfg = cfg;
    solve_cfg.tol = std::min(cfg.tol, cfg.knot_gap_tol);
    TFSolution sol = solve_tf_pdip(problem, solve_cfg, warm_dual);

    TrendFilterFit fit;
    fit.k = k;
    fit.lambda = lambda;
    fit.lambda_eff = problem.effective_lambda();
    fit.scale = cfg.scale;
    // Rounding in the scale factor must not push lambda_max itself below the limit.
    if (fit.lambda_eff < lambda_max(y, k) * (1.0 - 1e-12)) fit.knots = detect_knots(sol.beta, sol.dual, k, fit.lambda_eff, cfg.knot_tol);
    fit.df_estimate = fit.knots.size() + k + 1;
    fit.beta = std::move(sol.beta);
    fit.dual = std::move(sol.dual);
    fit.diagnostics = sol.diagnostics;
    return fit;
}

namespace {

// Prefer the df closest to the target; ties go to the larger lambda.
bool better(const TrendFilterFit& a, const TrendFilterFit& b, std::size_t target) {
    const auto dist = [target](std::size_t df) { return df > target ? df - target : target - df; };
    if (dist(a.df_estimate) != dist(b.df_estimate)) return dist(a.df_estimate) < dist(b.df_estimate);
    return a.lambda > b.lambda;
}

}  // namespace

TrendFilterFit tune_to_df(const Eigen::VectorXd& y, std::size_t k, std::size_t target_df, const FitConfig& cfg) {
    const auto n = static_cast<std::size_t>(y.size());
    TFProblem{y, k, 0.0, cfg.scale}.validate();
    if (target_df < k + 1 || target_df > n)
        throw std::invalid_argument("tune_to_df: target df must lie in [k + 1, n]");

    const double lmax = lambda_max_scaled(y, k, cfg.scale);
    TrendFilterFit best = fit_trend_filter(y, k, lmax, cfg);
    if (best.df_estimate == target_df || lmax == 0.0) return best;

    const double lmin = cfg.lambda_min_ratio * lmax;
    TrendFilterFit low = fit_trend_filter(y, k, lmin, cfg);
    if (better(low, best, target_df)) best = low;
    if (low.df_estimate < target_df) {
        TrendFilterFit zero = fit_trend_filter(y, k, 0.0, cfg);
        if (better(zero, best, target_df)) best = zero;
    }

    if (best.df_estimate != target_df && lmin > 0.0 && low.df_estimate > target_df) {
        double lo = std::log(lmin), hi = std::log(lmax);
        for (std::size_t it = 0; it < cfg.max_bisect && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            TrendFilterFit fit = fit_trend_filter(y, k, std::exp(mid), cfg);
            if (better(fit, best, target_df)) best = fit;
            if (fit.df_estimate == target_df) break;
            if (fit.df_estimate > target_df) lo = mid;
            else hi = mid;
        }
    }
    if (best.df_estimate != target_df)
        best.warning = "tune_to_df: target df " + std::to_string(target_df) + " not reached; closest df is " +
                       std::to_string(best.df_estimate);
    return best;
}

CrossValidation cross_validate(const Eigen::VectorXd& y, std::size_t k, const Eigen::VectorXd& lambda_grid,
                               std::size_t folds, const FitConfig& cfg) {
    const auto n = static_cast<Eigen::Index>(y.size());
    if (lambda_grid.size() == 0) throw std::invalid_argument("cross_validate: empty lambda grid");
    if (folds < 2) throw std::invalid_argument("cross_validate: need at least two folds");
    for (Eigen::Index g = 1; g < lambda_grid.size(); ++g)
        if (!(lambda_grid[g] <= lambda_grid[g - 1])) throw std::invalid_argument("cross_validate: grid must be descending");
    if (lambda_grid.minCoeff() < 0.0) throw std::invalid_argument("cross_validate: lambdas must be nonnegative");
    const auto nf = static_cast<Eigen::Index>(folds);
    if (n - 2 < nf) throw std::invalid_argument("cross_validate: fewer interior points than folds");

    Eigen::VectorXd sse = Eigen::VectorXd::Zero(lambda_grid.size());
    Eigen::Index held_total = 0;
    for (Eigen::Index f = 0; f < nf; ++f) {
        std::vector<Eigen::Index> train, held;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i > 0 && i < n - 1 && (i - 1) % nf == f) held.push_back(i);
            else train.push_back(i);
        }
        const auto m = static_cast<Eigen::Index>(train.size());
        if (static_cast<std::size_t>(m) < k + 2) throw std::invalid_argument("cross_validate: too few training points");
        Eigen::VectorXd yt(m);
        for (Eigen::Index j = 0; j < m; ++j) yt[j] = y[train[static_cast<std::size_t>(j)]];

        // Same effective penalty per unit of smoothness on the coarser grid.
        const double ratio = static_cast<double>(m) / static_cast<double>(n);
        const double rescale = std::pow(ratio, static_cast<double>(k + 1)) *
                               lambda_scale_factor(static_cast<std::size_t>(n), k, cfg.scale) /
                               lambda_scale_factor(static_cast<std::size_t>(m), k, cfg.scale);

        for (Eigen::Index g = 0; g < lambda_grid.size(); ++g) {
            const TrendFilterFit fit = fit_trend_filter(yt, k, lambda_grid[g] * rescale, cfg);
            std::size_t seg = 0;
            for (const Eigen::Index i : held) {
                while (train[seg + 1] < i) ++seg;
                const auto a = train[seg], b = train[seg + 1];
                const double t = static_cast<double>(i - a) / static_cast<double>(b - a);
                const double pred = (1.0 - t) * fit.beta[static_cast<Eigen::Index>(seg)] +
                                    t * fit.beta[static_cast<Eigen::Index>(seg + 1)];
                sse[g] += (y[i] - pred) * (y[i] - pred);
            }
        }
        held_total += static_cast<Eigen::Index>(held.size());
    }

    CrossValidation cv;
    cv.cv_curve = sse / static_cast<double>(held_total);
    // Errors within a relative 1e-6 of each other count as ties and go to the
    // larger lambda, so solver noise cannot pick a smaller one.
    for (Eigen::Index g = 1; g < cv.cv_curve.size(); ++g) {
        const double best = cv.cv_curve[static_cast<Eigen::Index>(cv.best_index)];
        if (cv.cv_curve[g] < best * (1.0 - 1e-6)) cv.best_index = static_cast<std::size_t>(g);
    }
    cv.best_lambda = lambda_grid[static_cast<Eigen::Index>(cv.best_index)];
    return cv;
}

}  // namespace tf
