#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tf/banded.hpp"

namespace tf {

/// Largest polynomial order k supported by the difference operators.
inline constexpr std::size_t kMaxOrder = 10;

/**
 * Discrete difference operator of a given order over n evenly spaced points.
 *
 * Shape (n - order) x n. Every row carries the same integer pattern
 * c_0..c_order, shifted one column per row, obtained from the recursion
 * D^(k+1) = D^(1) D^(k) with D^(1) rows (-1, 1). The coefficients are kept as
 * exact integers and converted to double when applied.
 */
class DiffOp {
public:
    DiffOp(std::size_t n, std::size_t order);

    std::size_t n() const noexcept { return n_; }
    std::size_t order() const noexcept { return order_; }
    std::size_t rows() const noexcept { return n_ - order_; }

    /// Row pattern c_0..c_order; entry (i, i + m) of the operator is c_m.
    std::span<const std::int64_t> coefficients() const noexcept { return coeffs_; }

    /// Banded view, shape (n - order) x n, upper bandwidth `order`.
    const BandedMatrix& matrix() const noexcept { return matrix_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& beta) const;
    Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const;

    /// D D^T, symmetric banded with half-bandwidth `order`.
    BandedMatrix gram() const;
    /// D^T D, symmetric banded with half-bandwidth `order`.
    BandedMatrix gram_transpose() const;

    /// Solves D^T v = r by forward substitution on the first rows of D^T.
    /// Only meaningful when r is orthogonal to the polynomial null space of D;
    /// then v is the unique solution of D D^T v = D r.
    Eigen::VectorXd solve_transpose(const Eigen::VectorXd& r) const;

private:
    std::size_t n_;
    std::size_t order_;
    std::vector<std::int64_t> coeffs_;
    BandedMatrix matrix_;
};

/// D^(order) over n points. Requires order >= 1, order <= kMaxOrder + 1 and
/// n >= order + 1.
DiffOp make_diff_op(std::size_t n, std::size_t order);

/// sigma_i^(k): the k-th order cumulative sum of (1, ..., 1) in R^i, taken at
/// position i (1-based). sigma_i^(0) = 1.
double cumsum_k(std::size_t i, std::size_t k);

/// Table of sigma_i^(k) for i = 1..count, returned zero-based.
std::vector<double> cumsum_table(std::size_t count, std::size_t k);

/**
 * Orthonormal basis (n x (k+1)) of the polynomials of degree <= k sampled at
 * x_i = i/n. Column j spans the same nested subspace as x^0..x^j, with the
 * orientation fixed so the leading monomial coefficient is positive.
 */
Eigen::MatrixXd poly_null_basis(std::size_t n, std::size_t k);

/// Least-squares projection of y onto polynomials of degree <= k in x_i = i/n.
Eigen::VectorXd polynomial_projection(const Eigen::VectorXd& y, std::size_t k);

}  // namespace tf
