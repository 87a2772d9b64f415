#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace tf {

/// Dense basis matrices are only built up to this many points.
inline constexpr std::size_t kDenseBasisCap = 5000;

/// Knot superset of the locally adaptive regression spline over x_i = i/n:
/// the inputs with the points near both boundaries removed.
struct KnotSet {
    std::vector<double> knots;  // t_1 < ... < t_{n-k-1}
    std::size_t k = 0;
    std::size_t n = 0;
};

KnotSet make_knots(std::size_t n, std::size_t k);

enum class BasisKind { TruncatedPower, FallingFactorial };

struct BasisMatrix {
    BasisKind kind;
    std::size_t k;
    std::size_t n;
    Eigen::MatrixXd entries;  // n x n
};

/// Truncated power basis g_1..g_n evaluated at x_i = i/n (the lasso design of
/// the locally adaptive regression spline).
BasisMatrix make_G(std::size_t n, std::size_t k);

/// Falling factorial basis matrix, built from k-th order cumulative sums:
/// H(i, j) = sigma_{i-j+1}^(k) k! / n^k below the diagonal for j >= k+2.
BasisMatrix make_H(std::size_t n, std::size_t k);

/// The same matrix via the product form prod_{l=1..k} (i - (j-k-1+l)) / n^k.
Eigen::MatrixXd make_H_product(std::size_t n, std::size_t k);

/// The same matrix by evaluating falling_factorial_basis(j, k, n, x_i).
Eigen::MatrixXd make_H_evaluated(std::size_t n, std::size_t k);

/// g_j(x), 1-based j, for the truncated power basis with knots make_knots(n, k).
double truncated_power_basis(std::size_t j, std::size_t k, std::size_t n, double x);

/// h_j(x), 1-based j: x^{j-1} for j <= k+1, otherwise
/// prod_{l=1..k} (x - x_{j-k-1+l}) * 1{x > x_{j-1}} with x_i = i/n. For k >= 1
/// the product vanishes at x_{j-1}, so only k = 0 depends on the strict bound.
double falling_factorial_basis(std::size_t j, std::size_t k, std::size_t n, double x);

/**
 * Basis coefficients alpha with H alpha = beta, without forming H.
 *
 * The penalized block is alpha_{k+2..n} = (n^k / k!) D^(k+1) beta. The first
 * k+1 inputs see only the polynomial block, so alpha_{1..k+1} solves the
 * (k+1)x(k+1) Vandermonde system on x_1..x_{k+1}.
 */
Eigen::VectorXd tf_coefficients(const Eigen::VectorXd& beta, std::size_t k);

/// f(x) = sum_j alpha_j h_j(x) with n = alpha.size(). x must lie in [0, 1].
double eval_tf_function(const Eigen::VectorXd& alpha, std::size_t k, double x);

}  // namespace tf
