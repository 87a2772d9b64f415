#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tf {

/// Thrown when operand shapes do not line up.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown by the banded Cholesky factorization when a pivot is not strictly
/// positive. `pivot()` is the zero-based row at which it happened.
class NotPositiveDefinite : public std::runtime_error {
public:
    NotPositiveDefinite(std::size_t pivot, double value);

    std::size_t pivot() const noexcept { return pivot_; }
    double value() const noexcept { return value_; }

private:
    std::size_t pivot_;
    double value_;
};

/**
 * Rectangular banded matrix.
 *
 * Entries (i, j) with -lower_bw <= j - i <= upper_bw are stored; everything
 * else is an exact zero. Storage is diagonal-major: diagonal `d = j - i`
 * occupies one contiguous run of `rows()` slots indexed by the row `i`
 * (slots that fall outside the matrix are kept at zero).
 */
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(std::size_t rows, std::size_t cols, std::size_t lower_bw, std::size_t upper_bw);

    static BandedMatrix identity(std::size_t n);

    /// Copies the band of `dense`; throws if a nonzero lies outside the band.
    static BandedMatrix from_dense(const Eigen::MatrixXd& dense, std::size_t lower_bw,
                                   std::size_t upper_bw);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t lower_bw() const noexcept { return lower_; }
    std::size_t upper_bw() const noexcept { return upper_; }

    bool in_band(std::size_t i, std::size_t j) const noexcept {
        return i < rows_ && j < cols_ && j + lower_ >= i && i + upper_ >= j;
    }

    /// Entry (i, j); zero outside the band.
    double operator()(std::size_t i, std::size_t j) const noexcept {
        return in_band(i, j) ? data_[slot(i, j)] : 0.0;
    }

    /// Mutable access to an in-band entry; throws `std::out_of_range` otherwise.
    double& at(std::size_t i, std::size_t j);

    /// The stored run for diagonal `offset = j - i`, indexed by row.
    std::span<const double> diagonal(std::ptrdiff_t offset) const;
    std::span<double> diagonal(std::ptrdiff_t offset);

    Eigen::MatrixXd to_dense() const;

private:
    std::size_t slot(std::size_t i, std::size_t j) const noexcept {
        // d + lower >= 0 by the band test
        return (j + lower_ - i) * rows_ + i;
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t lower_ = 0;
    std::size_t upper_ = 0;
    std::vector<double> data_;
};

/// A * v in O(rows * bandwidth).
Eigen::VectorXd band_matvec(const BandedMatrix& a, const Eigen::VectorXd& v);

/// A^T * v in O(rows * bandwidth).
Eigen::VectorXd band_matvec_transpose(const BandedMatrix& a, const Eigen::VectorXd& v);

/// A * A^T, symmetric with half-bandwidth lower_bw + upper_bw.
BandedMatrix band_gram(const BandedMatrix& a);

/// A^T * A, symmetric with half-bandwidth lower_bw + upper_bw.
BandedMatrix band_gram_transpose(const BandedMatrix& a);

/// A^T with the lower and upper bandwidths swapped.
BandedMatrix band_transpose(const BandedMatrix& a);

/// alpha * A + beta * B for equally shaped operands; the result carries the
/// union of the two bands.
BandedMatrix band_combine(double alpha, const BandedMatrix& a, double beta, const BandedMatrix& b);

/**
 * Cholesky factor L (A = L L^T) of a symmetric positive-definite banded
 * matrix. Only the lower band of the input is read. No pivoting: a
 * non-positive pivot raises NotPositiveDefinite. The factor is an immutable
 * value and may be reused for any number of right-hand sides.
 */
class BandCholesky {
public:
    explicit BandCholesky(const BandedMatrix& a);

    /**
     * Cholesky factor of B^T B + diag(d), d >= 0, computed by Givens QR of the
     * stacked matrix [B; diag(sqrt(d))] without forming B^T B. The small
     * singular values of the factor are then resolved to about eps * ||B||
     * rather than eps * ||B||^2, which matters when B^T B is close to singular.
     * Bandwidth of the result is B's lower plus upper bandwidth.
     */
    static BandCholesky from_rows(const BandedMatrix& b, const Eigen::VectorXd& d);

    /// Cholesky factor of B^T B + C^T C by the same row-wise QR.
    static BandCholesky from_rows(const BandedMatrix& b, const BandedMatrix& c);

    std::size_t size() const noexcept { return n_; }
    std::size_t bandwidth() const noexcept { return bw_; }

    /// L(i, j) for 0 <= i - j <= bandwidth.
    double factor(std::size_t i, std::size_t j) const noexcept {
        return l_[(i - j) * n_ + i];
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

    /// Entries of A^{-1} inside the band of A, as a symmetric banded matrix.
    /// O(n * bandwidth^2); no dense inverse is formed.
    BandedMatrix inverse_band() const;

    /// Number of multiply-subtract updates made while factoring. Grows as
    /// O(n * bandwidth^2).
    std::uint64_t update_count() const noexcept { return updates_; }

private:
    BandCholesky() = default;
    static BandCholesky from_row_blocks(const std::vector<const BandedMatrix*>& blocks);

    std::size_t n_ = 0;
    std::size_t bw_ = 0;
    std::vector<double> l_;  // diagonal-major, l_[d * n + i] = L(i, i - d)
    std::uint64_t updates_ = 0;
};

/// Convenience: factor and solve once.
Eigen::VectorXd band_cholesky_solve(const BandedMatrix& a, const Eigen::VectorXd& b);

}  // namespace tf
