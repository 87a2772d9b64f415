#include <benchmark/benchmark.h>

#include "tf/banded.hpp"
#include "tf/diff_ops.hpp"
#include "tf/estimators.hpp"
#include "tf/simbench.hpp"
#include "tf/solvers.hpp"

namespace {

void BM_PdipScaling(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto k = static_cast<std::size_t>(state.range(1));
    const tf::Dataset ds = tf::gen_hills(n, tf::kHillsNoiseSd, 1);
    const tf::TFProblem problem{ds.y, k, 1e-3 * tf::lambda_max(ds.y, k), tf::LambdaScale::Raw};
    std::size_t iters = 0;
    for (auto _ : state) {
        try {
            const tf::TFSolution s = tf::solve_tf_pdip(problem);
            iters = s.diagnostics.iterations;
            benchmark::DoNotOptimize(s.beta.data());
        } catch (const tf::ConvergenceError& e) {
            state.SkipWithError(e.what());
            break;
        }
    }
    state.counters["newton_iters"] = static_cast<double>(iters);
    state.SetComplexityN(state.range(0));
}
// k = 3 stops at n = 4000: past that the raw lambda_max grows like n^4 and
// double precision in the dual no longer resolves beta.
BENCHMARK(BM_PdipScaling)
    ->ArgsProduct({{1000, 4000, 16000, 64000}, {0, 1}})
    ->Args({1000, 3})
    ->Args({4000, 3})
    ->Unit(benchmark::kMillisecond)
    ->Complexity(benchmark::oN);

void BM_BandCholesky(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto order = static_cast<std::size_t>(state.range(1));
    const tf::DiffOp d(n, order);
    tf::BandedMatrix a = d.gram();
    for (std::size_t i = 0; i < a.rows(); ++i) a.at(i, i) += 1.0;
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(a.rows()));
    for (auto _ : state) {
        const tf::BandCholesky f(a);
        benchmark::DoNotOptimize(f.solve(b).data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BandCholesky)->ArgsProduct({{10000, 100000}, {1, 2, 4}})->Unit(benchmark::kMicrosecond);

void BM_NewtonFactorFromRows(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const tf::DiffOp d(n, 2);
    const tf::BandedMatrix dt = tf::band_transpose(d.matrix());
    const Eigen::VectorXd diag = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(d.rows()), 1e-8, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(tf::BandCholesky::from_rows(dt, diag).size());
}
BENCHMARK(BM_NewtonFactorFromRows)->Arg(10000)->Arg(100000)->Unit(benchmark::kMicrosecond);

void BM_TautString(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const tf::Dataset ds = tf::gen_doppler(n, tf::kDopplerNoiseSd, 2);
    const double lam = 0.01 * tf::lambda_max(ds.y, 0);
    for (auto _ : state) benchmark::DoNotOptimize(tf::solve_tf_tautstring(ds.y, lam).data());
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TautString)->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Unit(benchmark::kMicrosecond)->Complexity(benchmark::oN);

void BM_TuneToDf(benchmark::State& state) {
    const tf::Dataset ds = tf::gen_hills(static_cast<std::size_t>(state.range(0)), tf::kHillsNoiseSd, 3);
    for (auto _ : state) benchmark::DoNotOptimize(tf::tune_to_df(ds.y, 3, 19).df_estimate);
}
BENCHMARK(BM_TuneToDf)->Arg(128)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_SmoothingSplineDf(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(tf::df_smoothing_spline(1e-2, n));
}
BENCHMARK(BM_SmoothingSplineDf)->Arg(1000)->Arg(100000)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
