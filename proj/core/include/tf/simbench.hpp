#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tf/solvers.hpp"

namespace tf {

enum class Scenario { Hills, Doppler, PiecewiseLinear, PiecewiseConstant, Custom };

std::string scenario_name(Scenario s);
/// Parses "hills", "doppler", "piecewise-linear" or "piecewise-constant".
std::optional<Scenario> parse_scenario(const std::string& name);

/// Default noise standard deviations.
inline constexpr double kHillsNoiseSd = 0.12;
inline constexpr double kDopplerNoiseSd = 0.4;
inline constexpr double kPiecewiseNoiseSd = 0.3;
/// Doppler losses skip the region x < 0.175, where the function oscillates
/// faster than the grid can resolve.
inline constexpr double kDopplerRestrictFrom = 0.175;

struct Dataset {
    std::size_t n = 0;
    Eigen::VectorXd x;  // x_i = i / n, i = 1..n
    Eigen::VectorXd y;
    std::optional<Eigen::VectorXd> f0;
    std::uint64_t seed = 0;
    Scenario scenario = Scenario::Custom;
    double noise_sd = 0.0;
};

/**
 * Piecewise cubic on [0, 1] whose second derivative interpolates linearly
 * between fixed nodes, so the function is C^2 everywhere. The nodes are sparse
 * on [0, 0.8] (a single broad bump) and every 0.025 on [0.8, 1], where the
 * function has three sharp hills.
 */
double hills_f0(double x);
/// Nodes of the hills second derivative, including 0 and 1.
std::span<const double> hills_knots();
double doppler_f0(double x);  // sin(4 / x) + 1.5
/// Continuous, piecewise linear with kinks at 0.2, 0.45, 0.6 and 0.85.
double piecewise_linear_f0(double x);
/// Step function with jumps at 0.2, 0.45, 0.6 and 0.85.
double piecewise_constant_f0(double x);
double scenario_f0(Scenario s, double x);

/// f0 on x_i = i/n plus i.i.d. N(0, noise_sd^2) noise from mt19937_64(seed).
Dataset generate(Scenario s, std::size_t n, double noise_sd, std::uint64_t seed);
Dataset gen_hills(std::size_t n, double noise_sd = kHillsNoiseSd, std::uint64_t seed = 0);
Dataset gen_doppler(std::size_t n, double noise_sd = kDopplerNoiseSd, std::uint64_t seed = 0);

/// Mean of (fit_i - f0_i)^2 over the points with x_i = i/n >= restrict_from.
double loss_mse(const Eigen::VectorXd& fit, const Eigen::VectorXd& f0,
                std::optional<double> restrict_from = std::nullopt);

struct MethodSpec {
    enum class Kind { TrendFilter, SmoothingSpline, LocallyAdaptiveSpline, SplitSmoothingSpline };
    Kind kind = Kind::TrendFilter;
    std::size_t k = 3;
    // Split smoothing spline: independent fits on x <= split and x > split.
    // Without per-side df the df target is shared in proportion to the points.
    double split = 0.8;
    std::optional<double> df_left;
    std::optional<double> df_right;

    std::string name() const;
};

struct SplitSplineFit {
    Eigen::VectorXd fitted;
    double lambda_left = 0.0;
    double lambda_right = 0.0;
    double df_left = 0.0;
    double df_right = 0.0;
};

/// Two cubic smoothing splines on [0, split] and (split, 1], each tuned to its own df.
SplitSplineFit fit_split_smoothing_spline(const Eigen::VectorXd& y, double split, double df_left, double df_right);

struct BenchResult {
    std::string method;
    std::size_t df_target = 0;
    std::vector<double> losses;       // per replicate; NaN where the fit failed
    std::vector<double> achieved_df;  // per replicate
    std::vector<double> runtimes;     // seconds per fit
    std::vector<std::string> errors;  // per replicate; empty on success
    double mean_loss = 0.0;           // over successful replicates
    double stderr_loss = 0.0;         // sd / sqrt(successful replicates)
};

struct BenchmarkSpec {
    Scenario scenario = Scenario::Hills;
    std::size_t n = 128;
    double noise_sd = kHillsNoiseSd;
    std::optional<double> restrict_from;
    std::vector<MethodSpec> methods;
    std::vector<std::size_t> df_grid;
    std::size_t replicates = 1;
    std::uint64_t seed = 0;  // replicate r uses seed + r
    std::size_t threads = 1;
    FitConfig fit;
};

/// Fits every method x df target x replicate by df-targeted tuning. Results
/// are identical for any thread count.
std::vector<BenchResult> run_benchmark(const BenchmarkSpec& spec);

/// Mean and standard error over the finite entries of `losses`.
void summarize(BenchResult& r);

struct RateSpec {
    std::size_t k = 1;
    std::vector<std::size_t> n_grid{64, 128, 256, 512, 1024};
    std::size_t replicates = 20;
    Scenario scenario = Scenario::PiecewiseLinear;
    double noise_sd = kPiecewiseNoiseSd;
    std::optional<double> c_lambda;  // calibrated when absent
    std::size_t calibration_n = 256;
    double delta = 0.0;              // lambda = (1 + delta) c n^(1/(2k+3))
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    FitConfig fit;
};

struct RateResult {
    std::size_t k = 0;
    double c_lambda = 0.0;
    std::vector<std::size_t> n_grid;
    std::vector<double> lambdas;
    std::vector<double> mean_loss;
    double slope = 0.0;
    double theoretical_slope = 0.0;  // -(2k+2)/(2k+3)
};

/// Least-squares slope of log(mean loss) against log(n) for trend filtering
/// with lambda = c n^(1/(2k+3)) (PaperScaled). When c is not given it is the
/// minimizer of the mean loss at calibration_n over a log grid.
RateResult rate_check(const RateSpec& spec);

/// Runs task(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task);

}  // namespace tf
