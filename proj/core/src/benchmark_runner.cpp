#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "tf/estimators.hpp"
#include "tf/simbench.hpp"

namespace tf {

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = next++; i < count; i = next++) task(i);
            } catch (...) {
                failures[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);
}

std::string MethodSpec::name() const {
    switch (kind) {
        case Kind::TrendFilter: return "trend_filter_k" + std::to_string(k);
        case Kind::SmoothingSpline: return "smoothing_spline";
        case Kind::LocallyAdaptiveSpline: return "locally_adaptive_k" + std::to_string(k);
        case Kind::SplitSmoothingSpline: return "split_smoothing_spline";
    }
    return "unknown";
}

SplitSplineFit fit_split_smoothing_spline(const Eigen::VectorXd& y, double split, double df_left, double df_right) {
    const auto n = y.size();
    Eigen::Index nl = 0;
    while (nl < n && static_cast<double>(nl + 1) / static_cast<double>(n) <= split) ++nl;
    const Eigen::Index nr = n - nl;
    if (nl < 4 || nr < 4) throw std::invalid_argument("fit_split_smoothing_spline: each side needs at least 4 points");
    const SmoothingSplineFit left = tune_smoothing_spline_to_df(y.head(nl), df_left);
    const SmoothingSplineFit right = tune_smoothing_spline_to_df(y.tail(nr), df_right);
    SplitSplineFit fit;
    fit.fitted.resize(n);
    fit.fitted << left.fitted, right.fitted;
    fit.lambda_left = left.lambda;
    fit.lambda_right = right.lambda;
    fit.df_left = left.df;
    fit.df_right = right.df;
    return fit;
}

void summarize(BenchResult& r) {
    double sum = 0.0;
    std::size_t ok = 0;
    for (const double l : r.losses)
        if (std::isfinite(l)) {
            sum += l;
            ++ok;
        }
    if (ok == 0) {
        r.mean_loss = std::numeric_limits<double>::quiet_NaN();
        r.stderr_loss = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    r.mean_loss = sum / static_cast<double>(ok);
    double ss = 0.0;
    for (const double l : r.losses)
        if (std::isfinite(l)) ss += (l - r.mean_loss) * (l - r.mean_loss);
    r.stderr_loss = ok > 1 ? std::sqrt(ss / static_cast<double>(ok - 1)) / std::sqrt(static_cast<double>(ok)) : 0.0;
}

namespace {

struct MethodOutcome {
    Eigen::VectorXd fitted;
    double df = 0.0;
};

MethodOutcome fit_method(const MethodSpec& m, const Eigen::VectorXd& y, std::size_t df, const FitConfig& cfg) {
    const auto n = static_cast<std::size_t>(y.size());
    switch (m.kind) {
        case MethodSpec::Kind::TrendFilter: {
            TrendFilterFit fit = tune_to_df(y, m.k, df, cfg);
            return {std::move(fit.beta), static_cast<double>(fit.df_estimate)};
        }
        case MethodSpec::Kind::SmoothingSpline: {
            SmoothingSplineFit fit = tune_smoothing_spline_to_df(y, static_cast<double>(df));
            return {std::move(fit.fitted), fit.df};
        }
        case MethodSpec::Kind::LocallyAdaptiveSpline: {
            LocallyAdaptiveFit fit = tune_locally_adaptive_to_df(y, m.k, df, cfg);
            return {std::move(fit.fitted), static_cast<double>(fit.df)};
        }
        case MethodSpec::Kind::SplitSmoothingSpline: {
            std::size_t nl = 0;
            while (nl < n && static_cast<double>(nl + 1) / static_cast<double>(n) <= m.split) ++nl;
            const double share = static_cast<double>(nl) / static_cast<double>(n);
            const double dfl = m.df_left.value_or(static_cast<double>(df) * share);
            const double dfr = m.df_right.value_or(static_cast<double>(df) - dfl);
            SplitSplineFit fit = fit_split_smoothing_spline(y, m.split, dfl, dfr);
            return {std::move(fit.fitted), fit.df_left + fit.df_right};
        }
    }
    throw std::logic_error("fit_method: unknown method");
}

}  // namespace

std::vector<BenchResult> run_benchmark(const BenchmarkSpec& spec) {
    if (spec.methods.empty()) throw std::invalid_argument("run_benchmark: no methods");
    if (spec.df_grid.empty()) throw std::invalid_argument("run_benchmark: empty df grid");
    if (spec.replicates == 0) throw std::invalid_argument("run_benchmark: need at least one replicate");

    std::vector<Dataset> data;
    data.reserve(spec.replicates);
    for (std::size_t r = 0; r < spec.replicates; ++r) data.push_back(generate(spec.scenario, spec.n, spec.noise_sd, spec.seed + r));

    const std::size_t nm = spec.methods.size(), nd = spec.df_grid.size(), nr = spec.replicates;
    std::vector<BenchResult> results(nm * nd);
    for (std::size_t mi = 0; mi < nm; ++mi)
        for (std::size_t di = 0; di < nd; ++di) {
            BenchResult& r = results[mi * nd + di];
            r.method = spec.methods[mi].name();
            r.df_target = spec.df_grid[di];
            r.losses.assign(nr, std::numeric_limits<double>::quiet_NaN());
            r.achieved_df.assign(nr, std::numeric_limits<double>::quiet_NaN());
            r.runtimes.assign(nr, 0.0);
            r.errors.assign(nr, std::string());
        }

    // Every task writes only its own preallocated slot.
    parallel_for(nm * nd * nr, spec.threads, [&](std::size_t task) {
        const std::size_t rep = task % nr, cell = task / nr;
        const std::size_t mi = cell / nd, di = cell % nd;
        BenchResult& r = results[cell];
        const Dataset& ds = data[rep];
        const auto start = std::chrono::steady_clock::now();
        try {
            const MethodOutcome out = fit_method(spec.methods[mi], ds.y, spec.df_grid[di], spec.fit);
            r.losses[rep] = loss_mse(out.fitted, *ds.f0, spec.restrict_from);
            r.achieved_df[rep] = out.df;
        } catch (const std::exception& e) {
            r.errors[rep] = e.what();
        }
        r.runtimes[rep] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });

    for (auto& r : results) summarize(r);
    return results;
}

namespace {

double mean_tf_loss(const RateSpec& spec, std::size_t n, double lambda) {
    std::vector<double> losses(spec.replicates);
    FitConfig cfg = spec.fit;
    cfg.scale = LambdaScale::PaperScaled;
    parallel_for(spec.replicates, spec.threads, [&](std::size_t r) {
        const Dataset ds = generate(spec.scenario, n, spec.noise_sd, spec.seed + r);
        const TrendFilterFit fit = fit_trend_filter(ds.y, spec.k, lambda, cfg);
        losses[r] = loss_mse(fit.beta, *ds.f0);
    });
    double sum = 0.0;
    for (const double l : losses) sum += l;
    return sum / static_cast<double>(losses.size());
}

}  // namespace

RateResult rate_check(const RateSpec& spec) {
    if (spec.n_grid.size() < 2) throw std::invalid_argument("rate_check: need at least two sample sizes");
    if (spec.replicates == 0) throw std::invalid_argument("rate_check: need at least one replicate");
    RateResult res;
    res.k = spec.k;
    res.n_grid = spec.n_grid;
    const double expo = 1.0 / static_cast<double>(2 * spec.k + 3);
    res.theoretical_slope = -static_cast<double>(2 * spec.k + 2) / static_cast<double>(2 * spec.k + 3);
    const auto lambda_at = [&](double c, std::size_t n) {
        return (1.0 + spec.delta) * c * std::pow(static_cast<double>(n), expo);
    };

    if (spec.c_lambda) {
        res.c_lambda = *spec.c_lambda;
    } else {
        // Coarse log grid over eight decades, then a finer one around the best point.
        const std::size_t nc = spec.calibration_n;
        double best_c = 1.0, best_loss = std::numeric_limits<double>::infinity();
        const auto scan = [&](double lo, double hi, int steps) {
            for (int s = 0; s <= steps; ++s) {
                const double c = std::pow(10.0, lo + (hi - lo) * s / steps);
                const double loss = mean_tf_loss(spec, nc, lambda_at(c, nc));
                if (loss < best_loss) {
                    best_loss = loss;
                    best_c = c;
                }
            }
        };
        scan(-4.0, 4.0, 32);
        const double centre = std::log10(best_c);
        scan(centre - 0.25, centre + 0.25, 10);
        res.c_lambda = best_c;
    }

    for (const std::size_t n : spec.n_grid) {
        const double lambda = lambda_at(res.c_lambda, n);
        res.lambdas.push_back(lambda);
        res.mean_loss.push_back(mean_tf_loss(spec, n, lambda));
    }

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const auto m = static_cast<double>(spec.n_grid.size());
    for (std::size_t i = 0; i < spec.n_grid.size(); ++i) {
        const double lx = std::log(static_cast<double>(spec.n_grid[i]));
        const double ly = std::log(res.mean_loss[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    res.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return res;
}

}  // namespace tf
