#pragma once

// Dense reference implementations used only by the tests. None of them calls
// into the library, so agreement is an independent check.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Dense D^(order) built by repeatedly differencing the identity.
Eigen::MatrixXd diff_matrix(std::size_t n, std::size_t order);

/// Binomial coefficient by the multiplicative formula.
std::int64_t binomial(std::size_t n, std::size_t r);

/// Least-squares fit of degree k in x_i = i/n through the normal equations
/// on the centred and scaled abscissa.
Eigen::VectorXd poly_fit(const Eigen::VectorXd& y, std::size_t k);

/// Truncated power basis matrix from its defining formula.
Eigen::MatrixXd truncated_power_matrix(std::size_t n, std::size_t k);

/// Falling factorial basis matrix from the product formula.
Eigen::MatrixXd falling_factorial_matrix(std::size_t n, std::size_t k);

/// h_j(x) summed directly: sum_j alpha_j h_j(x).
double falling_factorial_eval(const Eigen::VectorXd& alpha, std::size_t k, double x);

/// One l1 penalty block w * ||A beta||_1 of a generalized lasso.
struct Penalty {
    Eigen::MatrixXd a;
    double weight = 0.0;
};

struct GenLassoSolution {
    Eigen::VectorXd beta;
    double gap = 0.0;  // certified primal minus dual objective
};

/**
 * min 1/2 ||y - b||^2 + sum_r w_r ||A_r b||_1 through accelerated projected
 * gradient on the box-constrained dual, with adaptive restart, until the
 * duality gap falls below gap_tol. Since the primal is 1-strongly convex,
 * ||b - b*||^2 <= 2 * gap. Meant for n of a few dozen at most.
 */
GenLassoSolution generalized_lasso(const Eigen::VectorXd& y, const std::vector<Penalty>& penalties,
                                   double gap_tol = 1e-14, std::size_t max_iter = 20000000);

/// Objective 1/2 ||y - b||^2 + sum_r w_r ||A_r b||_1.
double generalized_lasso_objective(const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                                   const std::vector<Penalty>& penalties);

/// Cubic smoothing spline penalty built densely: D2^T C^{-1} D2 / n^3.
Eigen::MatrixXd spline_penalty(std::size_t n);

/// (I + lambda K)^{-1} y and its trace.
Eigen::VectorXd spline_fit(const Eigen::VectorXd& y, double lambda);
double spline_df(std::size_t n, double lambda);

double rms(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Standard normal vector from mt19937_64(seed).
Eigen::VectorXd gaussian(std::size_t n, std::uint64_t seed, double sd = 1.0);

}  // namespace oracle
