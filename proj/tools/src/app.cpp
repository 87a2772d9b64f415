#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "tf/diff_ops.hpp"
#include "tfcli/tfcli.hpp"

namespace tfcli {

namespace {

const CLI::Range kOrderRange(std::size_t{0}, tf::kMaxOrder);

void add_solver_flags(CLI::App& sub, RunConfig& cfg) {
    sub.add_option("--tol", cfg.fit.tol, "Relative duality gap tolerance")->check(CLI::PositiveNumber);
    sub.add_option("--max-iter", cfg.fit.max_iter, "Interior point iteration cap")->check(CLI::PositiveNumber);
    sub.add_option("--knot-tol", cfg.fit.knot_tol, "Knot threshold relative to max |D^(k+1) beta|")
        ->check(CLI::PositiveNumber);
}

void add_scenario_flags(CLI::App& sub, RunConfig& cfg, std::string& scenario) {
    sub.add_option("scenario,--scenario", scenario, "hills, doppler, piecewise-linear or piecewise-constant");
    sub.add_option("--noise-sd", cfg.noise_sd, "Noise standard deviation (scenario default otherwise)")
        ->check(CLI::NonNegativeNumber);
    sub.add_option("--seed", cfg.seed, "Base seed; replicate r uses seed + r");
}

void add_pool_flags(CLI::App& sub, RunConfig& cfg) {
    sub.add_option("--reps", cfg.reps, "Replicates")->check(CLI::PositiveNumber);
    sub.add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Trend filtering fits, tuning and simulation benchmarks"};
    app.require_subcommand(1);

    RunConfig cfg;
    cfg.threads = std::max(1u, std::thread::hardware_concurrency());
    std::string scenario, scale = "paper";
    const std::map<std::string, tf::LambdaScale> scales{{"paper", tf::LambdaScale::PaperScaled},
                                                        {"raw", tf::LambdaScale::Raw}};

    auto* fit = app.add_subcommand("fit", "Trend filtering fit at a given lambda or df (CSV x,y in; x,beta out)");
    fit->add_option("input,--in", cfg.input_path, "Input CSV with header x,y")->required();
    fit->add_option("--out", cfg.output_path, "Output CSV; the JSON sidecar goes to <out>.json")->required();
    fit->add_option("--k", cfg.k, "Polynomial order")->check(kOrderRange);
    fit->add_option("--lambda", cfg.lambda, "Penalty")->check(CLI::NonNegativeNumber);
    fit->add_option("--df", cfg.df_target, "Target degrees of freedom (tunes lambda)");
    fit->add_option("--lambda-scale", scale, "paper (lambda n^k / k!) or raw")->check(CLI::IsMember({"paper", "raw"}));
    fit->add_option("--lambda1", cfg.lambda1, "Sparse/mixed: weight on ||D^(k1+1) beta||_1")->check(CLI::NonNegativeNumber);
    fit->add_option("--lambda2", cfg.lambda2, "Sparse: weight on ||beta||_1; mixed: on ||D^(k2+1) beta||_1")
        ->check(CLI::NonNegativeNumber);
    fit->add_option("--k1", cfg.k1, "Order of the first penalty (defaults to --k)")->check(kOrderRange);
    fit->add_option("--k2", cfg.k2, "Order of the second penalty; selects mixed trend filtering")->check(kOrderRange);
    add_solver_flags(*fit, cfg);

    auto* tune = app.add_subcommand("tune", "Fit tuned to a df target (trend filter, smoothing spline or locally adaptive spline)");
    tune->add_option("input,--in", cfg.input_path, "Input CSV with header x,y")->required();
    tune->add_option("--out", cfg.output_path, "Output CSV; the JSON sidecar goes to <out>.json")->required();
    tune->add_option("--k", cfg.k, "Polynomial order")->check(kOrderRange);
    tune->add_option("--df", cfg.df_target, "Target degrees of freedom")->required();
    tune->add_option("--method", cfg.method, "tf, ss or las")->check(CLI::IsMember({"tf", "ss", "las"}));
    tune->add_option("--lambda-scale", scale, "paper or raw")->check(CLI::IsMember({"paper", "raw"}));
    add_solver_flags(*tune, cfg);

    auto* sim = app.add_subcommand("simulate", "Write a simulated data set as CSV x,y,f0");
    add_scenario_flags(*sim, cfg, scenario);
    sim->add_option("--n", cfg.n, "Number of points")->check(CLI::Range(2, 100000000));
    sim->add_option("--out", cfg.output_path, "Output CSV")->required();

    auto* bench = app.add_subcommand("bench", "Replicated df-matched comparison of estimators");
    add_scenario_flags(*bench, cfg, scenario);
    add_pool_flags(*bench, cfg);
    add_solver_flags(*bench, cfg);
    bench->add_option("--n", cfg.n, "Number of points")->check(CLI::Range(4, 100000000));
    bench->add_option("--k", cfg.k, "Order for trend filter and locally adaptive spline")->check(kOrderRange);
    bench->add_option("--df", cfg.df_grid, "df targets (repeatable)")->required();
    bench->add_option("--methods", cfg.methods, "Any of tf, ss, las, split")->delimiter(',');
    bench->add_option("--restrict-from", cfg.restrict_from, "Loss uses x >= this (doppler default 0.175)");
    bench->add_option("--split", cfg.split, "Split point for the split smoothing spline")->check(CLI::Range(0.0, 1.0));
    bench->add_option("--df-left", cfg.df_left, "Split smoothing spline df left of the split");
    bench->add_option("--df-right", cfg.df_right, "Split smoothing spline df right of the split");
    bench->add_option("--out", cfg.output_path, "Per-replicate CSV; summary JSON at <out>.json")->required();

    auto* rate = app.add_subcommand("rate", "Empirical error rate slope of trend filtering");
    add_scenario_flags(*rate, cfg, scenario);
    add_pool_flags(*rate, cfg);
    add_solver_flags(*rate, cfg);
    cfg.reps = 20;
    rate->add_option("--k", cfg.k, "Polynomial order")->check(kOrderRange);
    rate->add_option("--n", cfg.n_grid, "Sample sizes (repeatable; default 64..1024)");
    rate->add_option("--c-lambda", cfg.c_lambda, "lambda = c n^(1/(2k+3)); calibrated when absent")
        ->check(CLI::PositiveNumber);
    rate->add_option("--out", cfg.output_path, "Output JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    // simulate and bench default to one replicate; rate keeps its own default.
    if (!rate->parsed() && bench->count("--reps") == 0) cfg.reps = 1;

    cfg.scale = scales.at(scale);
    if (!scenario.empty()) {
        cfg.scenario = tf::parse_scenario(scenario);
        if (!cfg.scenario) {
            err << "error: unknown scenario '" << scenario << "'\n";
            return kExitUsage;
        }
    }

    if (fit->parsed()) return cmd_fit(cfg, err);
    if (tune->parsed()) return cmd_tune(cfg, err);
    if (sim->parsed()) return cmd_simulate(cfg, err);
    if (bench->parsed()) return cmd_bench(cfg, err);
    return cmd_rate(cfg, err);
}

}  // namespace tfcli
