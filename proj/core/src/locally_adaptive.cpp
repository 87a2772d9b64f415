#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "compensated.hpp"
#include "tf/banded.hpp"
#include "tf/bases.hpp"
#include "tf/diff_ops.hpp"
#include "tf/estimators.hpp"

namespace tf {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

// The hinge columns of G are ((i + s - j)_+)^k / n^k in integer arithmetic
// (k = 0 uses the indicator of i >= j). Their (k+1)-st differences vanish
// unless the difference window straddles the kink, so M = D^(k+1) G_hinge
// is square and banded, and theta_hinge = M^{-1} D^(k+1) G theta.
struct HingeOperator {
    std::size_t n, k, shift;
    DiffOp d;
    BandedMatrix m;
    Eigen::SparseLU<SparseMatrix> lu, lut;

    HingeOperator(std::size_t n_, std::size_t k_)
        : n(n_), k(k_), shift(k_ == 0 ? 1 : (k_ % 2 == 0 ? k_ / 2 : (k_ + 1) / 2)), d(n_, k_ + 1) {
        const std::size_t size = n - k - 1;
        const auto coeffs = d.coefficients();
        // Entry (r, h) for hinge column j = h + k + 2 (1-based) and rows
        // r = 0..size-1 covering inputs r+1..r+k+2.
        const auto entry = [&](std::ptrdiff_t r, std::ptrdiff_t h) {
            const std::ptrdiff_t j = h + static_cast<std::ptrdiff_t>(k) + 2;
            std::int64_t acc = 0;
            for (std::size_t q = 0; q <= k + 1; ++q) {
                const std::ptrdiff_t p = r + 1 + static_cast<std::ptrdiff_t>(q + shift) - j;
                if (p <= 0) continue;
                std::int64_t v = 1;
                for (std::size_t e = 0; e < k; ++e) v *= p;
                acc += coeffs[q] * v;
            }
            return acc;
        };
        std::ptrdiff_t lower = 0, upper = 0;
        const auto kk = static_cast<std::ptrdiff_t>(k) + 2;
        for (std::ptrdiff_t off = -kk; off <= kk; ++off) {
            const std::ptrdiff_t h = kk, r = h + off;  // away from the boundary
            if (entry(r, h) != 0) {
                lower = std::max(lower, off);
                upper = std::max(upper, -off);
            }
        }
        const double scale = std::pow(static_cast<double>(n), -static_cast<double>(k));
        m = BandedMatrix(size, size, static_cast<std::size_t>(lower), static_cast<std::size_t>(upper));
        std::vector<Eigen::Triplet<double>> trips;
        for (std::size_t h = 0; h < size; ++h) {
            const std::size_t r0 = h > static_cast<std::size_t>(upper) ? h - static_cast<std::size_t>(upper) : 0;
            const std::size_t r1 = std::min(size - 1, h + static_cast<std::size_t>(lower));
            for (std::size_t r = r0; r <= r1; ++r) {
                const auto v = entry(static_cast<std::ptrdiff_t>(r), static_cast<std::ptrdiff_t>(h));
                if (v == 0) continue;
                m.at(r, h) = static_cast<double>(v) * scale;
                trips.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(h), m(r, h));
            }
        }
        SparseMatrix sm(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
        sm.setFromTriplets(trips.begin(), trips.end());
        lu.compute(sm);
        SparseMatrix smt = sm.transpose();
        lut.compute(smt);
        if (lu.info() != Eigen::Success || lut.info() != Eigen::Success)
            throw std::runtime_error("locally adaptive spline: hinge operator is singular");
    }

    // theta_hinge of beta: M^{-1} D beta.
    Eigen::VectorXd penalty(const Eigen::VectorXd& beta) { return lu.solve(d.apply(beta)); }
    // A^T z = D^T M^{-T} z.
    Eigen::VectorXd adjoint(const Eigen::VectorXd& z) { return d.apply_transpose(lut.solve(z)); }

    // G_hinge theta_hinge without forming G.
    Eigen::VectorXd hinge_sum(const Eigen::VectorXd& theta) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        const double nk = std::pow(static_cast<double>(n), static_cast<double>(k));
        for (Eigen::Index h = 0; h < theta.size(); ++h) {
            if (theta[h] == 0.0) continue;
            const auto j = static_cast<std::size_t>(h) + k + 2;
            for (std::size_t i = j > shift ? j - shift + 1 : 1; i <= n; ++i)
                out[static_cast<Eigen::Index>(i - 1)] +=
                    theta[h] * std::pow(static_cast<double>(i + shift - j), static_cast<double>(k)) / nk;
        }
        return out;
    }
};

struct GeneralizedSolution {
    Eigen::VectorXd beta, w, z;
    bool polynomial = false;
};

// Dual interior point method for min 1/2 ||y - b||^2 + lambda ||M^{-1} D b||_1,
// mirroring solve_tf_pdip. The dual variable z = M^T u enters through u, so
// b = y - D^T u and the compensated evaluation of trend filtering carries
// over. The Newton system (M^{-1} D D^T M^{-T} + S) dz = r becomes
// (D D^T + M S M^T) du = M r with dz = M^T du.
GeneralizedSolution solve_hinge_pdip(HingeOperator& op, const Eigen::VectorXd& y, double lam, const FitConfig& cfg) {
    const auto mi = static_cast<Eigen::Index>(op.n - op.k - 1);
    GeneralizedSolution sol;

    const Eigen::VectorXd poly = polynomial_projection(y, op.k);
    const Eigen::VectorXd zmax = band_matvec_transpose(op.m, op.d.solve_transpose(y - poly));
    if (zmax.lpNorm<Eigen::Infinity>() <= lam) {
        sol.beta = poly;
        sol.w = Eigen::VectorXd::Zero(mi);
        sol.z = zmax;
        sol.polynomial = true;
        return sol;
    }

    const BandedMatrix dt = band_transpose(op.d.matrix());
    const BandedMatrix mt = band_transpose(op.m);
    const double two_m = 2.0 * static_cast<double>(mi);
    const auto dual_of = [&](const detail::DualIterate& u) {
        return Eigen::VectorXd(band_matvec(mt, u.hi) + band_matvec(mt, u.lo));
    };
    const auto state = [&](const detail::DualIterate& u, Eigen::VectorXd& beta, Eigen::VectorXd& w) {
        Eigen::VectorXd dbeta;
        detail::evaluate(op.d, y, u, beta, dbeta);
        w = op.lu.solve(dbeta);
    };

    detail::DualIterate u{Eigen::VectorXd::Zero(mi), Eigen::VectorXd::Zero(mi)};
    Eigen::VectorXd z = Eigen::VectorXd::Zero(mi);
    Eigen::VectorXd mu1 = Eigen::VectorXd::Ones(mi), mu2 = Eigen::VectorXd::Ones(mi);
    Eigen::VectorXd f1 = (z.array() - lam).matrix(), f2 = (-z.array() - lam).matrix();
    Eigen::VectorXd beta, w;
    state(u, beta, w);
    double t = 1e-10, step = std::numeric_limits<double>::infinity();
    const double tol = std::min(cfg.tol, cfg.knot_gap_tol);

    for (std::size_t iter = 0;; ++iter) {
        double gap = 0.0, l1 = 0.0;
        for (Eigen::Index i = 0; i < mi; ++i) {
            l1 += std::abs(w[i]);
            gap += lam * std::abs(w[i]) - z[i] * w[i];
        }
        const double pobj = 0.5 * (y - beta).squaredNorm() + lam * l1;
        if (gap <= tol * std::max(std::abs(pobj), std::abs(pobj - gap))) break;
        if (iter >= cfg.max_iter) {
            SolverDiagnostics dg;
            dg.iterations = iter;
            dg.duality_gap = gap;
            dg.primal_obj = pobj;
            dg.dual_obj = pobj - gap;
            throw ConvergenceError("locally adaptive spline: no convergence in " + std::to_string(cfg.max_iter) +
                                       " iterations (gap " + std::to_string(gap) + ")",
                                   dg);
        }
        if (step >= 0.2) t = std::max(two_m * cfg.barrier_mu / gap, 1.2 * t);
        const double inv_t = 1.0 / t;

        const Eigen::VectorXd sigma = -(mu1.array() / f1.array() + mu2.array() / f2.array()).matrix();
        BandedMatrix scaled = mt;
        for (std::size_t r = 0; r < scaled.rows(); ++r) {
            const double s = std::sqrt(sigma[static_cast<Eigen::Index>(r)]);
            const std::size_t c0 = r > scaled.lower_bw() ? r - scaled.lower_bw() : 0;
            const std::size_t c1 = std::min(scaled.cols() - 1, r + scaled.upper_bw());
            for (std::size_t c = c0; c <= c1; ++c) scaled.at(r, c) *= s;
        }
        const Eigen::VectorXd rhs = w + (inv_t / f1.array()).matrix() - (inv_t / f2.array()).matrix();
        const Eigen::VectorXd du = BandCholesky::from_rows(dt, scaled).solve(band_matvec(op.m, rhs));
        const Eigen::VectorXd dz = band_matvec(mt, du);
        const Eigen::VectorXd dmu1 = -(mu1.array() + (inv_t + dz.array() * mu1.array()) / f1.array()).matrix();
        const Eigen::VectorXd dmu2 = -(mu2.array() + (inv_t - dz.array() * mu2.array()) / f2.array()).matrix();

        const auto residual_norm = [&](const Eigen::VectorXd& w_, const Eigen::VectorXd& mu1_,
                                       const Eigen::VectorXd& mu2_, const Eigen::VectorXd& f1_,
                                       const Eigen::VectorXd& f2_) {
            const double rd = (mu1_ - mu2_ - w_).squaredNorm();
            const double rc1 = (-(mu1_.array() * f1_.array()) - inv_t).matrix().squaredNorm();
            const double rc2 = (-(mu2_.array() * f2_.array()) - inv_t).matrix().squaredNorm();
            return std::sqrt(rd + rc1 + rc2);
        };
        const double res0 = residual_norm(w, mu1, mu2, f1, f2);

        step = 1.0;
        for (Eigen::Index i = 0; i < mi; ++i) {
            if (dmu1[i] < 0.0) step = std::min(step, -0.99 * mu1[i] / dmu1[i]);
            if (dmu2[i] < 0.0) step = std::min(step, -0.99 * mu2[i] / dmu2[i]);
        }
        bool accepted = false;
        for (std::size_t ls = 0; ls < cfg.max_ls_iter; ++ls) {
            detail::DualIterate nu = u;
            nu.add_scaled(step, du);
            const Eigen::VectorXd nz = dual_of(nu);
            const Eigen::VectorXd nf1 = (nz.array() - lam).matrix(), nf2 = (-nz.array() - lam).matrix();
            if (nf1.maxCoeff() < 0.0 && nf2.maxCoeff() < 0.0) {
                const Eigen::VectorXd nmu1 = mu1 + step * dmu1, nmu2 = mu2 + step * dmu2;
                Eigen::VectorXd nbeta, nw;
                state(nu, nbeta, nw);
                if (residual_norm(nw, nmu1, nmu2, nf1, nf2) <= (1.0 - cfg.ls_alpha * step) * res0) {
                    u = std::move(nu);
                    z = nz;
                    mu1 = nmu1;
                    mu2 = nmu2;
                    f1 = nf1;
                    f2 = nf2;
                    beta = std::move(nbeta);
                    w = std::move(nw);
                    accepted = true;
                    break;
                }
            }
            step *= cfg.ls_beta;
        }
        if (!accepted) step = 0.0;
    }
    sol.beta = std::move(beta);
    sol.w = std::move(w);
    sol.z = std::move(z);
    return sol;
}

}  // namespace

LocallyAdaptiveFit fit_locally_adaptive_spline(const Eigen::VectorXd& y, std::size_t k, double lambda,
                                               const FitConfig& cfg) {
    const auto n = static_cast<std::size_t>(y.size());
    if (n > kDenseBasisCap)
        throw std::length_error("fit_locally_adaptive_spline: n exceeds the cap of " + std::to_string(kDenseBasisCap));
    if (k > kMaxOrder || n < k + 2) throw std::invalid_argument("fit_locally_adaptive_spline: need n >= k + 2");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("fit_locally_adaptive_spline: lambda must be finite and nonnegative");
    if (!y.allFinite()) throw std::invalid_argument("fit_locally_adaptive_spline: y contains non-finite values");

    LocallyAdaptiveFit fit;
    fit.lambda = lambda;
    HingeOperator op(n, k);
    Eigen::VectorXd hinge;
    if (lambda == 0.0) {
        fit.fitted = y;
        hinge = op.penalty(y);
    } else {
        GeneralizedSolution sol = solve_hinge_pdip(op, y, lambda, cfg);
        fit.fitted = std::move(sol.beta);
        hinge = std::move(sol.w);
        // Keep only the active hinges, by the same rule as trend filtering knots.
        const double wmax = hinge.lpNorm<Eigen::Infinity>();
        for (Eigen::Index i = 0; i < hinge.size(); ++i) {
            const double wrel = wmax > 0.0 ? std::abs(hinge[i]) / wmax : 0.0;
            const double slack = (lambda - std::abs(sol.z[i])) / lambda;
            if (sol.polynomial || wrel <= cfg.knot_tol || wrel <= slack) hinge[i] = 0.0;
        }
    }
    const auto nh = static_cast<Eigen::Index>(n - k - 1);
    fit.theta.resize(static_cast<Eigen::Index>(n));
    fit.theta.tail(nh) = hinge;
    // The polynomial block fits what the hinges leave over.
    const Eigen::VectorXd rest = fit.fitted - op.hinge_sum(hinge);
    Eigen::MatrixXd vander(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k + 1));
    for (Eigen::Index i = 0; i < vander.rows(); ++i)
        for (Eigen::Index j = 0; j < vander.cols(); ++j)
            vander(i, j) = std::pow(static_cast<double>(i + 1) / static_cast<double>(n), static_cast<double>(j));
    fit.theta.head(static_cast<Eigen::Index>(k + 1)) = vander.colPivHouseholderQr().solve(rest);
    fit.tv = hinge.lpNorm<1>();
    fit.df = k + 1 + static_cast<std::size_t>((hinge.array() != 0.0).count());
    return fit;
}

double lambda_max_locally_adaptive(const Eigen::VectorXd& y, std::size_t k) {
    const auto n = static_cast<std::size_t>(y.size());
    HingeOperator op(n, k);
    return band_matvec_transpose(op.m, op.d.solve_transpose(y - polynomial_projection(y, k))).lpNorm<Eigen::Infinity>();
}

LocallyAdaptiveFit tune_locally_adaptive_to_df(const Eigen::VectorXd& y, std::size_t k, std::size_t target_df,
                                               const FitConfig& cfg) {
    const auto n = static_cast<std::size_t>(y.size());
    if (target_df < k + 1 || target_df > n)
        throw std::invalid_argument("tune_locally_adaptive_to_df: target df must lie in [k + 1, n]");
    const auto dist = [target_df](std::size_t df) { return df > target_df ? df - target_df : target_df - df; };
    const auto better = [&](const LocallyAdaptiveFit& a, const LocallyAdaptiveFit& b) {
        return dist(a.df) < dist(b.df) || (dist(a.df) == dist(b.df) && a.lambda > b.lambda);
    };

    const double lmax = lambda_max_locally_adaptive(y, k);
    LocallyAdaptiveFit best = fit_locally_adaptive_spline(y, k, lmax, cfg);
    if (best.df == target_df || lmax == 0.0) return best;
    double lo = std::log(cfg.lambda_min_ratio * lmax), hi = std::log(lmax);
    const LocallyAdaptiveFit low = fit_locally_adaptive_spline(y, k, std::exp(lo), cfg);
    if (better(low, best)) best = low;
    if (low.df < target_df) {
        const LocallyAdaptiveFit zero = fit_locally_adaptive_spline(y, k, 0.0, cfg);
        if (better(zero, best)) best = zero;
        return best;
    }
    for (std::size_t it = 0; it < cfg.max_bisect && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        LocallyAdaptiveFit fit = fit_locally_adaptive_spline(y, k, std::exp(mid), cfg);
        if (better(fit, best)) best = fit;
        if (fit.df == target_df) break;
        if (fit.df > target_df) lo = mid;
        else hi = mid;
    }
    return best;
}

}  // namespace tf
