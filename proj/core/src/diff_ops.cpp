#include "tf/diff_ops.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace tf {

DiffOp::DiffOp(std::size_t n, std::size_t order) : n_(n), order_(order) {
    if (order == 0 || order > kMaxOrder + 1)
        throw std::invalid_argument("DiffOp: order must lie in [1, " + std::to_string(kMaxOrder + 1) + "]");
    if (n < order + 1)
        throw std::invalid_argument("DiffOp: need n >= order + 1 (n = " + std::to_string(n) +
                                    ", order = " + std::to_string(order) + ")");

    // D^(1) = [-1, 1]; (D^(1) D^(k))(r, r+m) = -c_m + c_{m-1}.
    coeffs_ = {-1, 1};
    for (std::size_t o = 2; o <= order; ++o) {
        std::vector<std::int64_t> next(o + 1, 0);
        for (std::size_t m = 0; m <= o; ++m) {
            const std::int64_t cur = m < coeffs_.size() ? coeffs_[m] : 0;
            const std::int64_t prev = m > 0 ? coeffs_[m - 1] : 0;
            next[m] = prev - cur;
        }
        coeffs_ = std::move(next);
    }

    matrix_ = BandedMatrix(rows(), n_, 0, order_);
    for (std::size_t m = 0; m <= order_; ++m) {
        auto diag = matrix_.diagonal(static_cast<std::ptrdiff_t>(m));
        for (std::size_t i = 0; i < rows(); ++i) diag[i] = static_cast<double>(coeffs_[m]);
    }
}

Eigen::VectorXd DiffOp::apply(const Eigen::VectorXd& beta) const {
    if (static_cast<std::size_t>(beta.size()) != n_)
        throw DimensionError("DiffOp::apply: vector length does not match n");
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows()));
    for (std::size_t i = 0; i < rows(); ++i) {
        double s = 0.0;
        for (std::size_t m = 0; m <= order_; ++m)
            s += static_cast<double>(coeffs_[m]) * beta[static_cast<Eigen::Index>(i + m)];
        out[static_cast<Eigen::Index>(i)] = s;
    }
    return out;
}

Eigen::VectorXd DiffOp::apply_transpose(const Eigen::VectorXd& v) const {
    if (static_cast<std::size_t>(v.size()) != rows())
        throw DimensionError("DiffOp::apply_transpose: vector length does not match row count");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < rows(); ++i) {
        const double vi = v[static_cast<Eigen::Index>(i)];
        for (std::size_t m = 0; m <= order_; ++m)
            out[static_cast<Eigen::Index>(i + m)] += static_cast<double>(coeffs_[m]) * vi;
    }
    return out;
}

BandedMatrix DiffOp::gram() const { return band_gram(matrix_); }

BandedMatrix DiffOp::gram_transpose() const { return band_gram_transpose(matrix_); }

Eigen::VectorXd DiffOp::solve_transpose(const Eigen::VectorXd& r) const {
    if (static_cast<std::size_t>(r.size()) != n_)
        throw DimensionError("DiffOp::solve_transpose: vector length does not match n");
    // Row i of D^T holds c_{i-j} at column j for i - order <= j <= i; the
    // diagonal coefficient c_0 is +-1.
    const std::size_t m = rows();
    Eigen::VectorXd v(static_cast<Eigen::Index>(m));
    const double lead = static_cast<double>(coeffs_[0]);
    for (std::size_t i = 0; i < m; ++i) {
        double s = r[static_cast<Eigen::Index>(i)];
        const std::size_t back = std::min(order_, i);
        for (std::size_t d = 1; d <= back; ++d)
            s -= static_cast<double>(coeffs_[d]) * v[static_cast<Eigen::Index>(i - d)];
        v[static_cast<Eigen::Index>(i)] = s / lead;
    }
    return v;
}

DiffOp make_diff_op(std::size_t n, std::size_t order) { return DiffOp(n, order); }

std::vector<double> cumsum_table(std::size_t count, std::size_t k) {
    std::vector<double> sigma(count, 1.0);
    for (std::size_t level = 1; level <= k; ++level) {
        double run = 0.0;
        for (double& s : sigma) {
            run += s;
            s = run;
        }
    }
    return sigma;
}

double cumsum_k(std::size_t i, std::size_t k) {
    if (i == 0) throw std::invalid_argument("cumsum_k: index is 1-based");
    return cumsum_table(i, k).back();
}

Eigen::MatrixXd poly_null_basis(std::size_t n, std::size_t k) {
    if (n < k + 1) throw std::invalid_argument("poly_null_basis: need n >= k + 1");
    const auto rows = static_cast<Eigen::Index>(n);
    const auto cols = static_cast<Eigen::Index>(k + 1);
    // Monomials in t = 2x - 1 span the same nested subspaces as monomials in
    // x but are far better conditioned on [0, 1].
    Eigen::MatrixXd v(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double t = 2.0 * static_cast<double>(i + 1) / static_cast<double>(n) - 1.0;
        double p = 1.0;
        for (Eigen::Index j = 0; j < cols; ++j) {
            v(i, j) = p;
            p *= t;
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
    const auto r = qr.matrixQR();
    for (Eigen::Index j = 0; j < cols; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

Eigen::VectorXd polynomial_projection(const Eigen::VectorXd& y, std::size_t k) {
    const Eigen::MatrixXd q = poly_null_basis(static_cast<std::size_t>(y.size()), k);
    return q * (q.transpose() * y);
}

}  // namespace tf
