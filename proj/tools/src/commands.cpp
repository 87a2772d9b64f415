#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "json.hpp"

#include "tf/banded.hpp"
#include "tf/estimators.hpp"
#include "tfcli/tfcli.hpp"

namespace tfcli {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Exit status for a command body; library exceptions map onto the CLI contract.
template <class Body>
int guarded(std::ostream& log, Body&& body) {
    try {
        return body();
    } catch (const InputError& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const tf::ConvergenceError& e) {
        log << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const tf::NotPositiveDefinite& e) {
        log << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::length_error& e) {
        log << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        log << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}

void require_paths(const RunConfig& cfg, bool needs_input) {
    if (needs_input && cfg.input_path.empty()) throw InputError("--in is required");
    if (cfg.output_path.empty()) throw InputError("--out is required");
}

XYData load_input(const RunConfig& cfg) {
    XYData data = read_xy_csv_file(cfg.input_path);
    validate_even_grid(data.x);
    return data;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json base_json(const char* command) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    return j;
}

const char* scale_name(tf::LambdaScale s) { return s == tf::LambdaScale::Raw ? "raw" : "paper"; }

int write_tf_fit(const RunConfig& cfg, const XYData& data, const tf::TrendFilterFit& fit, double wall,
                 const char* command, std::ostream& log) {
    write_text_file(cfg.output_path, format_csv({"x", "beta"}, {data.x, fit.beta}));
    json j = base_json(command);
    j["method"] = "trend_filter";
    j["k"] = fit.k;
    j["lambda"] = fit.lambda;
    j["lambda_scale"] = scale_name(fit.scale);
    j["lambda_effective"] = fit.lambda_eff;
    j["df"] = fit.df_estimate;
    j["knots"] = fit.knots;
    j["duality_gap"] = fit.diagnostics.duality_gap;
    j["iterations"] = fit.diagnostics.iterations;
    j["wall_time"] = wall;
    if (cfg.df_target) j["df_target"] = *cfg.df_target;
    if (fit.warning) {
        j["warning"] = *fit.warning;
        log << "warning: " << *fit.warning << '\n';
    }
    write_text_file(sidecar_path(cfg.output_path), dump(j));
    return kExitOk;
}

int fit_variant(const RunConfig& cfg, std::ostream& log) {
    if (cfg.lambda || cfg.df_target) throw InputError("--lambda1/--lambda2 cannot be combined with --lambda or --df");
    const XYData data = load_input(cfg);
    const double l1 = cfg.lambda1.value_or(0.0), l2 = cfg.lambda2.value_or(0.0);
    const bool mixed = cfg.k2.has_value();
    const std::size_t k1 = cfg.k1.value_or(cfg.k);
    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::VectorXd beta = mixed ? tf::solve_mixed_tf(data.y, k1, *cfg.k2, l1, l2, cfg.fit)
                                       : tf::solve_sparse_tf(data.y, k1, l1, l2, cfg.fit);
    const double wall = seconds_since(t0);
    write_text_file(cfg.output_path, format_csv({"x", "beta"}, {data.x, beta}));
    json j = base_json("fit");
    j["method"] = mixed ? "mixed_trend_filter" : "sparse_trend_filter";
    if (mixed) {
        j["k1"] = k1;
        j["k2"] = *cfg.k2;
    } else {
        j["k"] = k1;
    }
    j["lambda1"] = l1;
    j["lambda2"] = l2;
    j["lambda_scale"] = "raw";
    j["wall_time"] = wall;
    write_text_file(sidecar_path(cfg.output_path), dump(j));
    (void)log;
    return kExitOk;
}

double default_noise(tf::Scenario s) {
    switch (s) {
        case tf::Scenario::Hills: return tf::kHillsNoiseSd;
        case tf::Scenario::Doppler: return tf::kDopplerNoiseSd;
        default: return tf::kPiecewiseNoiseSd;
    }
}

tf::Scenario require_scenario(const RunConfig& cfg) {
    if (!cfg.scenario) throw InputError("a scenario is required (hills, doppler, piecewise-linear, piecewise-constant)");
    return *cfg.scenario;
}

tf::MethodSpec parse_method(const std::string& name, const RunConfig& cfg) {
    tf::MethodSpec m;
    m.k = cfg.k;
    if (name == "tf") m.kind = tf::MethodSpec::Kind::TrendFilter;
    else if (name == "ss") m.kind = tf::MethodSpec::Kind::SmoothingSpline;
    else if (name == "las") m.kind = tf::MethodSpec::Kind::LocallyAdaptiveSpline;
    else if (name == "split") {
        m.kind = tf::MethodSpec::Kind::SplitSmoothingSpline;
        m.split = cfg.split;
        m.df_left = cfg.df_left;
        m.df_right = cfg.df_right;
    } else {
        throw InputError("unknown method '" + name + "' (expected tf, ss, las or split)");
    }
    return m;
}

}  // namespace

int cmd_fit(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&] {
        require_paths(cfg, true);
        if (cfg.lambda1 || cfg.lambda2 || cfg.k2) return fit_variant(cfg, log);
        if (cfg.lambda.has_value() == cfg.df_target.has_value())
            throw InputError("fit needs exactly one of --lambda and --df");
        const XYData data = load_input(cfg);
        const auto t0 = std::chrono::steady_clock::now();
        tf::FitConfig fc = cfg.fit;
        fc.scale = cfg.scale;
        const tf::TrendFilterFit fit = cfg.lambda ? tf::fit_trend_filter(data.y, cfg.k, *cfg.lambda, fc)
                                                  : tf::tune_to_df(data.y, cfg.k, *cfg.df_target, fc);
        return write_tf_fit(cfg, data, fit, seconds_since(t0), "fit", log);
    });
}

int cmd_tune(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&] {
        require_paths(cfg, true);
        if (!cfg.df_target) throw InputError("tune needs --df");
        const XYData data = load_input(cfg);
        const std::size_t df = *cfg.df_target;
        const auto t0 = std::chrono::steady_clock::now();
        tf::FitConfig fc = cfg.fit;
        fc.scale = cfg.scale;
        if (cfg.method == "tf") return write_tf_fit(cfg, data, tf::tune_to_df(data.y, cfg.k, df, fc), seconds_since(t0), "tune", log);

        json j = base_json("tune");
        j["df_target"] = df;
        Eigen::VectorXd fitted;
        if (cfg.method == "ss") {
            const tf::SmoothingSplineFit fit = tf::tune_smoothing_spline_to_df(data.y, static_cast<double>(df));
            fitted = fit.fitted;
            j["method"] = "smoothing_spline";
            j["lambda"] = fit.lambda;
            j["df"] = fit.df;
        } else if (cfg.method == "las") {
            const tf::LocallyAdaptiveFit fit = tf::tune_locally_adaptive_to_df(data.y, cfg.k, df, fc);
            fitted = fit.fitted;
            j["method"] = "locally_adaptive_spline";
            j["k"] = cfg.k;
            j["lambda"] = fit.lambda;
            j["df"] = fit.df;
            j["total_variation"] = fit.tv;
        } else {
            throw InputError("unknown method '" + cfg.method + "' (expected tf, ss or las)");
        }
        j["wall_time"] = seconds_since(t0);
        write_text_file(cfg.output_path, format_csv({"x", "beta"}, {data.x, fitted}));
        write_text_file(sidecar_path(cfg.output_path), dump(j));
        return kExitOk;
    });
}

std::string simulate_csv(const tf::Dataset& ds) {
    const Eigen::VectorXd f0 = ds.f0 ? *ds.f0 : Eigen::VectorXd::Constant(ds.x.size(), std::numeric_limits<double>::quiet_NaN());
    return format_csv({"x", "y", "f0"}, {ds.x, ds.y, f0});
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&] {
        require_paths(cfg, false);
        const tf::Scenario s = require_scenario(cfg);
        const tf::Dataset ds = tf::generate(s, cfg.n, cfg.noise_sd.value_or(default_noise(s)), cfg.seed);
        write_text_file(cfg.output_path, simulate_csv(ds));
        return kExitOk;
    });
}

tf::BenchmarkSpec bench_spec(const RunConfig& cfg) {
    tf::BenchmarkSpec spec;
    spec.scenario = require_scenario(cfg);
    spec.n = cfg.n;
    spec.noise_sd = cfg.noise_sd.value_or(default_noise(spec.scenario));
    spec.restrict_from = cfg.restrict_from;
    if (!spec.restrict_from && spec.scenario == tf::Scenario::Doppler) spec.restrict_from = tf::kDopplerRestrictFrom;
    if (cfg.methods.empty()) throw InputError("no methods given");
    for (const auto& name : cfg.methods) spec.methods.push_back(parse_method(name, cfg));
    if (cfg.df_grid.empty()) throw InputError("bench needs at least one --df");
    spec.df_grid = cfg.df_grid;
    spec.replicates = cfg.reps;
    spec.seed = cfg.seed;
    spec.threads = cfg.threads;
    spec.fit = cfg.fit;
    return spec;
}

std::string bench_csv(const std::vector<tf::BenchResult>& results, std::uint64_t seed) {
    std::string out = "method,df_target,replicate,seed,loss,achieved_df\n";
    for (const auto& r : results) {
        for (std::size_t rep = 0; rep < r.losses.size(); ++rep) {
            out += r.method + "," + std::to_string(r.df_target) + "," + std::to_string(rep) + "," +
                   std::to_string(seed + rep) + "," + format_double(r.losses[rep]) + "," +
                   format_double(r.achieved_df[rep]) + "\n";
        }
    }
    return out;
}

int cmd_bench(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&] {
        require_paths(cfg, false);
        const tf::BenchmarkSpec spec = bench_spec(cfg);
        const auto t0 = std::chrono::steady_clock::now();
        const std::vector<tf::BenchResult> results = tf::run_benchmark(spec);
        const double wall = seconds_since(t0);

        json j = base_json("bench");
        j["scenario"] = tf::scenario_name(spec.scenario);
        j["n"] = spec.n;
        j["noise_sd"] = spec.noise_sd;
        j["restrict_from"] = spec.restrict_from ? json(*spec.restrict_from) : json(nullptr);
        j["replicates"] = spec.replicates;
        j["seed"] = spec.seed;
        j["wall_time"] = wall;
        j["results"] = json::array();
        bool any_total_failure = false;
        for (const auto& r : results) {
            std::size_t failures = 0;
            double runtime = 0.0;
            for (std::size_t i = 0; i < r.losses.size(); ++i) {
                if (!r.errors[i].empty()) {
                    ++failures;
                    log << "warning: " << r.method << " df " << r.df_target << " replicate " << i << ": " << r.errors[i] << '\n';
                }
                runtime += r.runtimes[i];
            }
            if (failures == r.losses.size()) any_total_failure = true;
            json e;
            e["method"] = r.method;
            e["df_target"] = r.df_target;
            e["mean_loss"] = r.mean_loss;
            e["stderr_loss"] = r.stderr_loss;
            e["failures"] = failures;
            e["mean_runtime"] = runtime / static_cast<double>(r.losses.size());
            j["results"].push_back(e);
        }
        write_text_file(cfg.output_path, bench_csv(results, spec.seed));
        write_text_file(sidecar_path(cfg.output_path), dump(j));
        return any_total_failure ? kExitNumerical : kExitOk;
    });
}

tf::RateSpec rate_spec(const RunConfig& cfg) {
    tf::RateSpec spec;
    spec.k = cfg.k;
    if (!cfg.n_grid.empty()) spec.n_grid = cfg.n_grid;
    spec.replicates = cfg.reps;
    spec.scenario = cfg.scenario.value_or(tf::Scenario::PiecewiseLinear);
    spec.noise_sd = cfg.noise_sd.value_or(default_noise(spec.scenario));
    spec.c_lambda = cfg.c_lambda;
    spec.seed = cfg.seed;
    spec.threads = cfg.threads;
    spec.fit = cfg.fit;
    return spec;
}

int cmd_rate(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&] {
        require_paths(cfg, false);
        const tf::RateSpec spec = rate_spec(cfg);
        const auto t0 = std::chrono::steady_clock::now();
        const tf::RateResult res = tf::rate_check(spec);
        json j = base_json("rate");
        j["k"] = res.k;
        j["scenario"] = tf::scenario_name(spec.scenario);
        j["noise_sd"] = spec.noise_sd;
        j["replicates"] = spec.replicates;
        j["seed"] = spec.seed;
        j["c_lambda"] = res.c_lambda;
        j["n"] = res.n_grid;
        j["lambda"] = res.lambdas;
        j["mean_loss"] = res.mean_loss;
        j["slope"] = res.slope;
        j["theoretical_slope"] = res.theoretical_slope;
        j["wall_time"] = seconds_since(t0);
        write_text_file(cfg.output_path, dump(j));
        return kExitOk;
    });
}

}  // namespace tfcli
