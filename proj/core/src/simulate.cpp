#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "tf/simbench.hpp"

namespace tf {

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Hills: return "hills";
        case Scenario::Doppler: return "doppler";
        case Scenario::PiecewiseLinear: return "piecewise-linear";
        case Scenario::PiecewiseConstant: return "piecewise-constant";
        case Scenario::Custom: return "custom";
    }
    return "custom";
}

std::optional<Scenario> parse_scenario(const std::string& name) {
    if (name == "hills") return Scenario::Hills;
    if (name == "doppler") return Scenario::Doppler;
    if (name == "piecewise-linear") return Scenario::PiecewiseLinear;
    if (name == "piecewise-constant") return Scenario::PiecewiseConstant;
    return std::nullopt;
}

namespace {

constexpr std::array<double, 12> kHillsNodes{0.0, 0.3, 0.6, 0.8, 0.825, 0.85, 0.875, 0.9, 0.925, 0.95, 0.975, 1.0};
constexpr std::array<double, 12> kHillsCurvature{-6.9, -9.1, -17.3, 57.2, 668.5, -2567.1,
                                                 4451.6, -5015.4, 3369.1, -88.5, -3247.8, 6055.4};
constexpr double kHillsValue0 = 0.5;
constexpr double kHillsSlope0 = 3.6;

struct HillsTable {
    std::array<double, 12> f{};
    std::array<double, 12> df{};
};

// f and f' at every node, integrating the linear f'' segment by segment.
const HillsTable& hills_table() {
    static const HillsTable table = [] {
        HillsTable t;
        t.f[0] = kHillsValue0;
        t.df[0] = kHillsSlope0;
        for (std::size_t j = 0; j + 1 < kHillsNodes.size(); ++j) {
            const double h = kHillsNodes[j + 1] - kHillsNodes[j];
            const double a = kHillsCurvature[j], b = kHillsCurvature[j + 1];
            t.df[j + 1] = t.df[j] + h * (a + b) / 2.0;
            t.f[j + 1] = t.f[j] + t.df[j] * h + h * h * (2.0 * a + b) / 6.0;
        }
        return t;
    }();
    return table;
}

double piecewise_linear_interp(double x, const double* xs, const double* vs, std::size_t count) {
    if (x <= xs[0]) return vs[0];
    for (std::size_t j = 0; j + 1 < count; ++j)
        if (x <= xs[j + 1]) return vs[j] + (vs[j + 1] - vs[j]) * (x - xs[j]) / (xs[j + 1] - xs[j]);
    return vs[count - 1];
}

}  // namespace

std::span<const double> hills_knots() { return kHillsNodes; }

double hills_f0(double x) {
    const HillsTable& t = hills_table();
    x = std::clamp(x, 0.0, 1.0);
    std::size_t j = 0;
    while (j + 2 < kHillsNodes.size() && x > kHillsNodes[j + 1]) ++j;
    const double h = kHillsNodes[j + 1] - kHillsNodes[j];
    const double u = x - kHillsNodes[j];
    const double a = kHillsCurvature[j], b = kHillsCurvature[j + 1];
    return t.f[j] + t.df[j] * u + a * u * u / 2.0 + (b - a) * u * u * u / (6.0 * h);
}

double doppler_f0(double x) { return std::sin(4.0 / x) + 1.5; }

double piecewise_linear_f0(double x) {
    static constexpr double xs[] = {0.0, 0.2, 0.45, 0.6, 0.85, 1.0};
    static constexpr double vs[] = {0.0, 1.0, 0.2, 0.9, -0.3, 0.3};
    return piecewise_linear_interp(x, xs, vs, 6);
}

double piecewise_constant_f0(double x) {
    if (x < 0.2) return 0.0;
    if (x < 0.45) return 1.0;
    if (x < 0.6) return 0.2;
    if (x < 0.85) return 1.2;
    return 0.5;
}

double scenario_f0(Scenario s, double x) {
    switch (s) {
        case Scenario::Hills: return hills_f0(x);
        case Scenario::Doppler: return doppler_f0(x);
        case Scenario::PiecewiseLinear: return piecewise_linear_f0(x);
        case Scenario::PiecewiseConstant: return piecewise_constant_f0(x);
        case Scenario::Custom: break;
    }
    throw std::invalid_argument("scenario_f0: custom scenarios have no built-in f0");
}

Dataset generate(Scenario s, std::size_t n, double noise_sd, std::uint64_t seed) {
    if (n < 10) throw std::invalid_argument("generate: need n >= 10");
    if (s == Scenario::Hills && n < 20) throw std::invalid_argument("gen_hills: need n >= 20");
    if (!(noise_sd >= 0.0)) throw std::invalid_argument("generate: noise_sd must be nonnegative");
    Dataset ds;
    ds.n = n;
    ds.seed = seed;
    ds.scenario = s;
    ds.noise_sd = noise_sd;
    const auto ni = static_cast<Eigen::Index>(n);
    ds.x.resize(ni);
    Eigen::VectorXd f0(ni);
    for (Eigen::Index i = 0; i < ni; ++i) {
        ds.x[i] = static_cast<double>(i + 1) / static_cast<double>(n);
        f0[i] = scenario_f0(s, ds.x[i]);
    }
    ds.y = f0;
    if (noise_sd > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, noise_sd);
        for (Eigen::Index i = 0; i < ni; ++i) ds.y[i] += noise(rng);
    }
    ds.f0 = std::move(f0);
    return ds;
}

Dataset gen_hills(std::size_t n, double noise_sd, std::uint64_t seed) { return generate(Scenario::Hills, n, noise_sd, seed); }

Dataset gen_doppler(std::size_t n, double noise_sd, std::uint64_t seed) {
    return generate(Scenario::Doppler, n, noise_sd, seed);
}

double loss_mse(const Eigen::VectorXd& fit, const Eigen::VectorXd& f0, std::optional<double> restrict_from) {
    if (fit.size() != f0.size()) throw std::invalid_argument("loss_mse: lengths differ");
    const auto n = fit.size();
    double sum = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = static_cast<double>(i + 1) / static_cast<double>(n);
        if (restrict_from && x < *restrict_from) continue;
        sum += (fit[i] - f0[i]) * (fit[i] - f0[i]);
        ++count;
    }
    if (count == 0) throw std::invalid_argument("loss_mse: no points at or beyond restrict_from");
    return sum / static_cast<double>(count);
}

}  // namespace tf
