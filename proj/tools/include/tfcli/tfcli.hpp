#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tf/simbench.hpp"
#include "tf/solvers.hpp"

namespace tfcli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kSchemaVersion = 1;

/// Bad input file or flag combination; maps to exit status 1.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct XYData {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
};

/// Reads a CSV with a header naming columns x and y (any order, other columns
/// ignored). Errors carry the 1-based line number.
XYData read_xy_csv(std::istream& in);
XYData read_xy_csv_file(const std::string& path);

/// Throws InputError unless x is strictly increasing with every step within
/// relative `rel_tol` of the mean step.
void validate_even_grid(const Eigen::VectorXd& x, double rel_tol = 1e-6);

/// 17 significant digits, enough to read a double back bit-exactly.
std::string format_double(double v);

/// Header row plus one row per index; all columns must have equal length.
std::string format_csv(const std::vector<std::string>& header, const std::vector<Eigen::VectorXd>& columns);

void write_text_file(const std::string& path, const std::string& contents);

/// JSON sidecar path for a CSV output.
inline std::string sidecar_path(const std::string& out) { return out + ".json"; }

enum class Command { Fit, Tune, Simulate, Bench, Rate };

struct RunConfig {
    Command command = Command::Fit;
    std::string input_path;
    std::string output_path;

    // fit / tune
    std::size_t k = 1;
    std::optional<double> lambda;
    std::optional<std::size_t> df_target;
    tf::LambdaScale scale = tf::LambdaScale::PaperScaled;
    std::string method = "tf";  // tune: tf, ss or las

    // sparse / mixed variants of fit
    std::optional<double> lambda1;
    std::optional<double> lambda2;
    std::optional<std::size_t> k1;
    std::optional<std::size_t> k2;

    // simulate / bench / rate
    std::optional<tf::Scenario> scenario;  // rate defaults to piecewise-linear
    std::size_t n = 128;
    std::optional<double> noise_sd;
    std::size_t reps = 1;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::optional<double> restrict_from;
    std::vector<std::size_t> df_grid;
    std::vector<std::string> methods{"tf", "ss"};
    double split = 0.8;
    std::optional<double> df_left;
    std::optional<double> df_right;
    std::vector<std::size_t> n_grid;
    std::optional<double> c_lambda;

    tf::FitConfig fit;
};

int cmd_fit(const RunConfig& cfg, std::ostream& log);
int cmd_tune(const RunConfig& cfg, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_bench(const RunConfig& cfg, std::ostream& log);
int cmd_rate(const RunConfig& cfg, std::ostream& log);

/// Library-level equivalents of the file-writing commands, used by the
/// commands themselves so their output can be reproduced without the CLI.
std::string simulate_csv(const tf::Dataset& ds);
std::string bench_csv(const std::vector<tf::BenchResult>& results, std::uint64_t seed);
tf::BenchmarkSpec bench_spec(const RunConfig& cfg);
tf::RateSpec rate_spec(const RunConfig& cfg);

/// Parses argv and dispatches; returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tfcli
