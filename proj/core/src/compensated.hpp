#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "tf/diff_ops.hpp"

namespace tf::detail {

// Error-free transformations: a + b = s + e and a * b = p + e exactly.
inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    const double bb = s - a;
    e = (a - (s - bb)) + (b - bb);
}

inline void two_prod(double a, double b, double& p, double& e) {
    p = a * b;
    e = std::fma(a, b, -p);
}

// Dual iterate carried as an unevaluated sum hi + lo. Near the solution |z|
// can exceed |y - D^T z| by many orders of magnitude (roughly n^(k+1)), so a
// single double cannot represent z finely enough for D (y - D^T z) to vanish
// off the knots. The pair gives about twice the working precision.
struct DualIterate {
    Eigen::VectorXd hi;
    Eigen::VectorXd lo;

    double operator[](Eigen::Index i) const { return hi[i] + lo[i]; }

    void add_scaled(double step, const Eigen::VectorXd& dz) {
        for (Eigen::Index i = 0; i < hi.size(); ++i) {
            double s, e;
            two_sum(hi[i], step * dz[i], s, e);
            const double t = lo[i] + e;
            hi[i] = s + t;
            lo[i] = t - (hi[i] - s);
        }
    }
};

// beta = y - D^T z and w = D beta, both from compensated dot products so that
// each is accurate to a few roundings of its own magnitude.
inline void evaluate(const DiffOp& d, const Eigen::VectorXd& y, const DualIterate& z, Eigen::VectorXd& beta,
                     Eigen::VectorXd& w) {
    const auto c = d.coefficients();
    const auto order = static_cast<Eigen::Index>(d.order());
    const auto n = y.size();
    const auto m = z.hi.size();
    Eigen::VectorXd rh(n), rl(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double s = y[j], t = 0.0;
        const Eigen::Index lo = std::max<Eigen::Index>(0, j - (m - 1));
        for (Eigen::Index q = lo; q <= std::min(order, j); ++q) {
            const auto cq = static_cast<double>(c[static_cast<std::size_t>(q)]);
            double p, e, e2;
            two_prod(-cq, z.hi[j - q], p, e);
            two_sum(s, p, s, e2);
            t += e + e2 - cq * z.lo[j - q];
        }
        rh[j] = s + t;
        rl[j] = t - (rh[j] - s);
    }
    beta = rh + rl;
    w.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double s = 0.0, t = 0.0;
        for (Eigen::Index q = 0; q <= order; ++q) {
            const auto cq = static_cast<double>(c[static_cast<std::size_t>(q)]);
            double p, e, e2;
            two_prod(cq, rh[i + q], p, e);
            two_sum(s, p, s, e2);
            t += e + e2 + cq * rl[i + q];
        }
        w[i] = s + t;
    }
}

}  // namespace tf::detail
