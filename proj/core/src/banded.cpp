#include "tf/banded.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace tf {

namespace {

std::size_t clamp_bw(std::size_t bw, std::size_t dim) { return std::min(bw, dim - 1); }

}  // namespace

NotPositiveDefinite::NotPositiveDefinite(std::size_t pivot, double value)
    : std::runtime_error("banded Cholesky: non-positive pivot " + std::to_string(value) +
                         " at row " + std::to_string(pivot)),
      pivot_(pivot),
      value_(value) {}

BandedMatrix::BandedMatrix(std::size_t rows, std::size_t cols, std::size_t lower_bw,
                           std::size_t upper_bw)
    : rows_(rows), cols_(cols), lower_(lower_bw), upper_(upper_bw) {
    if (rows == 0 || cols == 0) throw DimensionError("BandedMatrix: empty shape");
    if (lower_bw >= rows || upper_bw >= cols)
        throw DimensionError("BandedMatrix: bandwidth must be smaller than the dimension");
    data_.assign((lower_ + upper_ + 1) * rows_, 0.0);
}

BandedMatrix BandedMatrix::identity(std::size_t n) {
    BandedMatrix m(n, n, 0, 0);
    std::fill(m.data_.begin(), m.data_.end(), 1.0);
    return m;
}

BandedMatrix BandedMatrix::from_dense(const Eigen::MatrixXd& dense, std::size_t lower_bw,
                                      std::size_t upper_bw) {
    const auto r = static_cast<std::size_t>(dense.rows());
    const auto c = static_cast<std::size_t>(dense.cols());
    BandedMatrix m(r, c, lower_bw, upper_bw);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            const double v = dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (m.in_band(i, j))
                m.data_[m.slot(i, j)] = v;
            else if (v != 0.0)
                throw DimensionError("BandedMatrix::from_dense: nonzero entry outside the band");
        }
    }
    return m;
}

double& BandedMatrix::at(std::size_t i, std::size_t j) {
    if (!in_band(i, j)) throw std::out_of_range("BandedMatrix::at: entry outside the band");
    return data_[slot(i, j)];
}

std::span<const double> BandedMatrix::diagonal(std::ptrdiff_t offset) const {
    if (offset < -static_cast<std::ptrdiff_t>(lower_) || offset > static_cast<std::ptrdiff_t>(upper_))
        throw std::out_of_range("BandedMatrix::diagonal: offset outside the band");
    const auto base = static_cast<std::size_t>(offset + static_cast<std::ptrdiff_t>(lower_)) * rows_;
    return {data_.data() + base, rows_};
}

std::span<double> BandedMatrix::diagonal(std::ptrdiff_t offset) {
    auto run = std::as_const(*this).diagonal(offset);
    return {const_cast<double*>(run.data()), run.size()};
}

Eigen::MatrixXd BandedMatrix::to_dense() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_),
                                                static_cast<Eigen::Index>(cols_));
    for (std::size_t i = 0; i < rows_; ++i) {
        const std::size_t j0 = i > lower_ ? i - lower_ : 0;
        const std::size_t j1 = std::min(cols_ - 1, i + upper_);
        for (std::size_t j = j0; j <= j1; ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data_[slot(i, j)];
    }
    return out;
}

Eigen::VectorXd band_matvec(const BandedMatrix& a, const Eigen::VectorXd& v) {
    if (static_cast<std::size_t>(v.size()) != a.cols())
        throw DimensionError("band_matvec: vector length does not match column count");
    const std::size_t rows = a.rows(), cols = a.cols();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows));
    const auto lo = static_cast<std::ptrdiff_t>(a.lower_bw());
    const auto up = static_cast<std::ptrdiff_t>(a.upper_bw());
    for (std::ptrdiff_t d = -lo; d <= up; ++d) {
        const auto diag = a.diagonal(d);
        const std::size_t i0 = d < 0 ? static_cast<std::size_t>(-d) : 0;
        const std::size_t i1 = std::min(rows, static_cast<std::size_t>(static_cast<std::ptrdiff_t>(cols) - d));
        for (std::size_t i = i0; i < i1; ++i)
            out[static_cast<Eigen::Index>(i)] +=
                diag[i] * v[static_cast<Eigen::Index>(static_cast<std::ptrdiff_t>(i) + d)];
    }
    return out;
}

Eigen::VectorXd band_matvec_transpose(const BandedMatrix& a, const Eigen::VectorXd& v) {
    if (static_cast<std::size_t>(v.size()) != a.rows())
        throw DimensionError("band_matvec_transpose: vector length does not match row count");
    const std::size_t rows = a.rows(), cols = a.cols();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols));
    const auto lo = static_cast<std::ptrdiff_t>(a.lower_bw());
    const auto up = static_cast<std::ptrdiff_t>(a.upper_bw());
    for (std::ptrdiff_t d = -lo; d <= up; ++d) {
        const auto diag = a.diagonal(d);
        const std::size_t i0 = d < 0 ? static_cast<std::size_t>(-d) : 0;
        const std::size_t i1 = std::min(rows, static_cast<std::size_t>(static_cast<std::ptrdiff_t>(cols) - d));
        for (std::size_t i = i0; i < i1; ++i)
            out[static_cast<Eigen::Index>(static_cast<std::ptrdiff_t>(i) + d)] +=
                diag[i] * v[static_cast<Eigen::Index>(i)];
    }
    return out;
}

BandedMatrix band_gram(const BandedMatrix& a) {
    // (A A^T)(i, l) = sum_j A(i, j) A(l, j)
    const std::size_t m = a.rows();
    const std::size_t bw = clamp_bw(a.lower_bw() + a.upper_bw(), m);
    BandedMatrix out(m, m, bw, bw);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j0 = i > a.lower_bw() ? i - a.lower_bw() : 0;
        const std::size_t j1 = std::min(a.cols() - 1, i + a.upper_bw());
        for (std::size_t l = i; l < m && l <= i + bw; ++l) {
            double s = 0.0;
            for (std::size_t j = j0; j <= j1; ++j) s += a(i, j) * a(l, j);
            out.at(i, l) = s;
            out.at(l, i) = s;
        }
    }
    return out;
}

BandedMatrix band_gram_transpose(const BandedMatrix& a) {
    // (A^T A)(j, l) = sum_i A(i, j) A(i, l)
    const std::size_t n = a.cols();
    const std::size_t bw = clamp_bw(a.lower_bw() + a.upper_bw(), n);
    BandedMatrix out(n, n, bw, bw);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const std::size_t j0 = i > a.lower_bw() ? i - a.lower_bw() : 0;
        const std::size_t j1 = std::min(n - 1, i + a.upper_bw());
        for (std::size_t j = j0; j <= j1; ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            for (std::size_t l = j; l <= j1; ++l) {
                const double v = aij * a(i, l);
                out.at(j, l) += v;
                if (l != j) out.at(l, j) += v;
            }
        }
    }
    return out;
}

BandedMatrix band_transpose(const BandedMatrix& a) {
    BandedMatrix out(a.cols(), a.rows(), a.upper_bw(), a.lower_bw());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const std::size_t j0 = i > a.lower_bw() ? i - a.lower_bw() : 0;
        const std::size_t j1 = std::min(a.cols() - 1, i + a.upper_bw());
        for (std::size_t j = j0; j <= j1; ++j) out.at(j, i) = a(i, j);
    }
    return out;
}

BandedMatrix band_combine(double alpha, const BandedMatrix& a, double beta, const BandedMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("band_combine: shape mismatch");
    BandedMatrix out(a.rows(), a.cols(), std::max(a.lower_bw(), b.lower_bw()),
                     std::max(a.upper_bw(), b.upper_bw()));
    for (std::size_t i = 0; i < out.rows(); ++i) {
        const std::size_t j0 = i > out.lower_bw() ? i - out.lower_bw() : 0;
        const std::size_t j1 = std::min(out.cols() - 1, i + out.upper_bw());
        for (std::size_t j = j0; j <= j1; ++j) out.at(i, j) = alpha * a(i, j) + beta * b(i, j);
    }
    return out;
}

BandCholesky::BandCholesky(const BandedMatrix& a) : n_(a.rows()), bw_(a.lower_bw()) {
    if (a.rows() != a.cols()) throw DimensionError("BandCholesky: matrix must be square");
    const std::size_t n = n_, p = bw_;
    l_.assign((p + 1) * n, 0.0);
    for (std::size_t d = 0; d <= p; ++d) {
        const auto src = a.diagonal(-static_cast<std::ptrdiff_t>(d));
        std::copy(src.begin(), src.end(), l_.begin() + static_cast<std::ptrdiff_t>(d * n));
    }

    // Right-looking factorization: after column j is scaled, the trailing
    // (p+1)x(p+1) window is updated one diagonal at a time, so the innermost
    // loop walks a contiguous diagonal run.
    for (std::size_t j = 0; j < n; ++j) {
        const double pivot = l_[j];
        if (!(pivot > 0.0) || !std::isfinite(pivot)) throw NotPositiveDefinite(j, pivot);
        const double ljj = std::sqrt(pivot);
        l_[j] = ljj;
        const std::size_t last = std::min(n - 1, j + p);
        for (std::size_t i = j + 1; i <= last; ++i) l_[(i - j) * n + i] /= ljj;
        for (std::size_t d = 0; d + j + 1 <= last; ++d) {
            double* run = l_.data() + d * n;
            for (std::size_t i = j + 1 + d; i <= last; ++i) {
                run[i] -= l_[(i - j) * n + i] * l_[(i - d - j) * n + (i - d)];
                ++updates_;
            }
        }
    }
}

BandCholesky BandCholesky::from_rows(const BandedMatrix& b, const Eigen::VectorXd& d) {
    const std::size_t n = b.cols();
    if (static_cast<std::size_t>(d.size()) != n)
        throw DimensionError("BandCholesky::from_rows: diagonal length must match the column count");
    BandedMatrix root(n, n, 0, 0);
    for (std::size_t j = 0; j < n; ++j) {
        const double dj = d[static_cast<Eigen::Index>(j)];
        if (dj < 0.0) throw std::invalid_argument("BandCholesky::from_rows: diagonal must be nonnegative");
        root.at(j, j) = std::sqrt(dj);
    }
    return from_row_blocks({&b, &root});
}

BandCholesky BandCholesky::from_rows(const BandedMatrix& b, const BandedMatrix& c) {
    if (b.cols() != c.cols()) throw DimensionError("BandCholesky::from_rows: blocks disagree on the column count");
    return from_row_blocks({&b, &c});
}

BandCholesky BandCholesky::from_row_blocks(const std::vector<const BandedMatrix*>& blocks) {
    const std::size_t n = blocks.front()->cols();
    std::size_t p = 0;
    for (const BandedMatrix* blk : blocks) p = std::max(p, blk->lower_bw() + blk->upper_bw());
    p = std::min(p, n - 1);

    // R is upper triangular with bandwidth p, stored r[q * n + i] = R(i, i + q).
    std::vector<double> r((p + 1) * n, 0.0);
    std::vector<bool> filled(n, false);
    std::vector<double> v(n, 0.0);
    BandCholesky out;
    out.n_ = n;
    out.bw_ = p;

    // Rotate the sparse row held in v (nonzeros in [lo, hi]) into R.
    auto absorb = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j <= hi; ++j) {
            if (v[j] == 0.0) continue;
            const std::size_t last = std::min(n - 1, j + p);
            if (!filled[j]) {
                for (std::size_t q = j; q <= last; ++q) {
                    r[(q - j) * n + j] = v[q];
                    v[q] = 0.0;
                }
                filled[j] = true;
                return;
            }
            const double a = r[j], bj = v[j];
            const double h = std::hypot(a, bj);
            const double c = a / h, s = bj / h;
            r[j] = h;
            v[j] = 0.0;
            for (std::size_t q = j + 1; q <= last; ++q) {
                const double rq = r[(q - j) * n + j], vq = v[q];
                r[(q - j) * n + j] = c * rq + s * vq;
                v[q] = c * vq - s * rq;
                ++out.updates_;
            }
            hi = std::max(hi, last);
        }
    };

    // Rows enter in order of their leading column, which keeps each cascade
    // of rotations within the band.
    std::vector<std::size_t> next(blocks.size(), 0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
            const BandedMatrix& blk = *blocks[bi];
            std::size_t& row = next[bi];
            for (; row < blk.rows() && (row > blk.lower_bw() ? row - blk.lower_bw() : 0) <= j; ++row) {
                const std::size_t lo = row > blk.lower_bw() ? row - blk.lower_bw() : 0;
                const std::size_t hi = std::min(n - 1, row + blk.upper_bw());
                if (lo > hi) continue;
                for (std::size_t q = lo; q <= hi; ++q) v[q] = blk(row, q);
                absorb(lo, hi);
            }
        }
    }
    out.l_.assign((p + 1) * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double sign = r[i] < 0.0 ? -1.0 : 1.0;
        if (!(r[i] != 0.0) || !std::isfinite(r[i])) throw NotPositiveDefinite(i, r[i]);
        for (std::size_t q = 0; q <= p && i + q < n; ++q) out.l_[q * n + i + q] = sign * r[q * n + i];
    }
    return out;
}

Eigen::VectorXd BandCholesky::solve(const Eigen::VectorXd& b) const {
    if (static_cast<std::size_t>(b.size()) != n_)
        throw DimensionError("BandCholesky::solve: right-hand side has the wrong length");
    const std::size_t n = n_, p = bw_;
    Eigen::VectorXd x = b;
    for (std::size_t i = 0; i < n; ++i) {
        double s = x[static_cast<Eigen::Index>(i)];
        const std::size_t dmax = std::min(p, i);
        for (std::size_t d = 1; d <= dmax; ++d) s -= l_[d * n + i] * x[static_cast<Eigen::Index>(i - d)];
        x[static_cast<Eigen::Index>(i)] = s / l_[i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[static_cast<Eigen::Index>(ii)];
        const std::size_t dmax = std::min(p, n - 1 - ii);
        for (std::size_t d = 1; d <= dmax; ++d)
            s -= l_[d * n + ii + d] * x[static_cast<Eigen::Index>(ii + d)];
        x[static_cast<Eigen::Index>(ii)] = s / l_[ii];
    }
    return x;
}

BandedMatrix BandCholesky::inverse_band() const {
    // From L^T S = L^{-1}: S(i,j) = (delta_ij / L(i,i) - sum_{k>i} L(k,i) S(k,j)) / L(i,i)
    // for j >= i. Rows are filled bottom-up, columns right-to-left, so every
    // S(k, j) referenced is already known and lies inside the band.
    const std::size_t n = n_, p = bw_;
    BandedMatrix s(n, n, p, p);
    for (std::size_t i = n; i-- > 0;) {
        const std::size_t last = std::min(n - 1, i + p);
        const double lii = l_[i];
        for (std::size_t j = last + 1; j-- > i;) {
            double acc = (i == j) ? 1.0 / lii : 0.0;
            for (std::size_t k = i + 1; k <= last; ++k) acc -= l_[(k - i) * n + k] * s(k, j);
            const double v = acc / lii;
            s.at(i, j) = v;
            s.at(j, i) = v;
        }
    }
    return s;
}

Eigen::VectorXd band_cholesky_solve(const BandedMatrix& a, const Eigen::VectorXd& b) {
    if (a.rows() != static_cast<std::size_t>(b.size()))
        throw DimensionError("band_cholesky_solve: right-hand side has the wrong length");
    return BandCholesky(a).solve(b);
}

}  // namespace tf
