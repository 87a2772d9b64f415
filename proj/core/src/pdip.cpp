#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "compensated.hpp"
#include "tf/banded.hpp"
#include "tf/diff_ops.hpp"
#include "tf/solvers.hpp"

namespace tf {

using detail::DualIterate;
using detail::evaluate;

double lambda_scale_factor(std::size_t n, std::size_t k, LambdaScale scale) {
    if (scale == LambdaScale::Raw) return 1.0;
    double f = 1.0;
    for (std::size_t i = 1; i <= k; ++i) f *= static_cast<double>(n) / static_cast<double>(i);
    return f;
}

double TFProblem::effective_lambda() const {
    return lambda * lambda_scale_factor(static_cast<std::size_t>(y.size()), k, scale);
}

void TFProblem::validate() const {
    if (k > kMaxOrder) throw std::invalid_argument("TFProblem: order k too large");
    if (static_cast<std::size_t>(y.size()) < k + 2)
        throw std::invalid_argument("TFProblem: need n >= k + 2 observations");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("TFProblem: lambda must be a finite nonnegative number");
    if (!y.allFinite()) throw std::invalid_argument("TFProblem: y contains non-finite values");
}

Eigen::VectorXd polynomial_limit_dual(const Eigen::VectorXd& y, std::size_t k) {
    const auto n = static_cast<std::size_t>(y.size());
    const DiffOp d(n, k + 1);
    const Eigen::VectorXd r = y - polynomial_projection(y, k);
    return d.solve_transpose(r);
}

double lambda_max(const Eigen::VectorXd& y, std::size_t k) {
    return polynomial_limit_dual(y, k).lpNorm<Eigen::Infinity>();
}

TFSolution solve_tf_pdip(const TFProblem& problem, const FitConfig& cfg,
                         const std::optional<Eigen::VectorXd>& warm_dual) {
    problem.validate();
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("solve_tf_pdip: tolerance must be positive");
    const auto start = std::chrono::steady_clock::now();
    const auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    const Eigen::VectorXd& y = problem.y;
    const auto n = static_cast<std::size_t>(y.size());
    const std::size_t k = problem.k;
    const DiffOp d(n, k + 1);
    const std::size_t m = d.rows();
    const auto mi = static_cast<Eigen::Index>(m);
    const double lam = problem.effective_lambda();

    TFSolution sol;
    SolverDiagnostics& dg = sol.diagnostics;

    if (lam == 0.0) {
        sol.beta = y;
        sol.dual = Eigen::VectorXd::Zero(mi);
        dg.converged = true;
        dg.wall_time = elapsed();
        return sol;
    }

    Eigen::VectorXd beta, w;

    // At or beyond lambda_max the polynomial fit is optimal and its dual is
    // known in closed form; the duality gap certifies it.
    {
        Eigen::VectorXd zmax = polynomial_limit_dual(y, k);
        // The slack absorbs rounding when lambda is lambda_max converted between scales.
        const double zinf = zmax.lpNorm<Eigen::Infinity>();
        if (zinf <= lam * (1.0 + 1e-12)) {
            if (zinf > lam) zmax *= lam / zinf;
            evaluate(d, y, DualIterate{zmax, Eigen::VectorXd::Zero(mi)}, beta, w);
            sol.beta = polynomial_projection(y, k);
            dg.primal_obj = 0.5 * (y - sol.beta).squaredNorm() + lam * d.apply(sol.beta).lpNorm<1>();
            dg.dual_obj = 0.5 * (y.squaredNorm() - beta.squaredNorm());
            dg.duality_gap = std::max(0.0, dg.primal_obj - dg.dual_obj);
            dg.converged = true;
            dg.wall_time = elapsed();
            sol.dual = std::move(zmax);
            return sol;
        }
    }

    const BandedMatrix dt = band_transpose(d.matrix());
    const double two_m = 2.0 * static_cast<double>(m);

    DualIterate z{Eigen::VectorXd::Zero(mi), Eigen::VectorXd::Zero(mi)};
    if (warm_dual) {
        if (warm_dual->size() != mi) throw DimensionError("solve_tf_pdip: warm start has the wrong length");
        const double box = 0.99 * lam;
        z.hi = warm_dual->cwiseMax(-box).cwiseMin(box);
    }
    Eigen::VectorXd mu1 = Eigen::VectorXd::Ones(mi);
    Eigen::VectorXd mu2 = Eigen::VectorXd::Ones(mi);
    Eigen::VectorXd f1(mi), f2(mi);
    for (Eigen::Index i = 0; i < mi; ++i) {
        f1[i] = (z.hi[i] - lam) + z.lo[i];
        f2[i] = (-z.hi[i] - lam) - z.lo[i];
    }
    evaluate(d, y, z, beta, w);

    double t = 1e-10;
    double step = std::numeric_limits<double>::infinity();

    for (std::size_t iter = 0;; ++iter) {
        // With beta = y - D^T z the gap reduces to sum_i (lambda |w_i| - z_i w_i),
        // a sum of nonnegative terms that stays accurate as it shrinks.
        double gap = 0.0, l1 = 0.0;
        for (Eigen::Index i = 0; i < mi; ++i) {
            l1 += std::abs(w[i]);
            gap += lam * std::abs(w[i]) - z[i] * w[i];
        }
        dg.iterations = iter;
        dg.primal_obj = 0.5 * (y - beta).squaredNorm() + lam * l1;
        dg.duality_gap = gap;
        dg.dual_obj = dg.primal_obj - gap;
        if (gap <= cfg.tol * std::max(std::abs(dg.primal_obj), std::abs(dg.dual_obj))) {
            dg.converged = true;
            break;
        }
        if (iter >= cfg.max_iter) {
            dg.wall_time = elapsed();
            throw ConvergenceError("solve_tf_pdip: no convergence in " + std::to_string(cfg.max_iter) +
                                       " iterations (gap " + std::to_string(gap) + ")",
                                   dg);
        }

        if (step >= 0.2) t = std::max(two_m * cfg.barrier_mu / gap, 1.2 * t);
        const double inv_t = 1.0 / t;

        // Newton system (D D^T + diag(mu1/-f1 + mu2/-f2)) dz = r. The diagonal
        // becomes tiny away from the knots, so the factor is built from the
        // rows of [D^T; diag^(1/2)] instead of from D D^T itself.
        const Eigen::VectorXd sigma = -(mu1.array() / f1.array() + mu2.array() / f2.array()).matrix();
        const Eigen::VectorXd rhs = w + (inv_t / f1.array()).matrix() - (inv_t / f2.array()).matrix();
        const Eigen::VectorXd dz = BandCholesky::from_rows(dt, sigma).solve(rhs);
        const Eigen::VectorXd dmu1 =
            -(mu1.array() + (inv_t + dz.array() * mu1.array()) / f1.array()).matrix();
        const Eigen::VectorXd dmu2 =
            -(mu2.array() + (inv_t - dz.array() * mu2.array()) / f2.array()).matrix();

        const auto residual_norm = [&](const Eigen::VectorXd& w_, const Eigen::VectorXd& mu1_,
                                       const Eigen::VectorXd& mu2_, const Eigen::VectorXd& f1_,
                                       const Eigen::VectorXd& f2_) {
            const double rd = (mu1_ - mu2_ - w_).squaredNorm();
            const double rc1 = (-(mu1_.array() * f1_.array()) - inv_t).matrix().squaredNorm();
            const double rc2 = (-(mu2_.array() * f2_.array()) - inv_t).matrix().squaredNorm();
            return std::sqrt(rd + rc1 + rc2);
        };
        const double res0 = residual_norm(w, mu1, mu2, f1, f2);

        // Keep the multipliers strictly positive.
        step = 1.0;
        for (Eigen::Index i = 0; i < mi; ++i) {
            if (dmu1[i] < 0.0) step = std::min(step, -0.99 * mu1[i] / dmu1[i]);
            if (dmu2[i] < 0.0) step = std::min(step, -0.99 * mu2[i] / dmu2[i]);
        }

        DualIterate nz;
        Eigen::VectorXd nmu1, nmu2, nf1(mi), nf2(mi), nbeta, nw;
        bool feasible = false, accepted = false;
        for (std::size_t ls = 0; ls < cfg.max_ls_iter; ++ls) {
            nz = z;
            nz.add_scaled(step, dz);
            for (Eigen::Index i = 0; i < mi; ++i) {
                nf1[i] = (nz.hi[i] - lam) + nz.lo[i];
                nf2[i] = (-nz.hi[i] - lam) - nz.lo[i];
            }
            feasible = nf1.maxCoeff() < 0.0 && nf2.maxCoeff() < 0.0;
            if (feasible) {
                nmu1 = mu1 + step * dmu1;
                nmu2 = mu2 + step * dmu2;
                evaluate(d, y, nz, nbeta, nw);
                if (residual_norm(nw, nmu1, nmu2, nf1, nf2) <= (1.0 - cfg.ls_alpha * step) * res0) {
                    accepted = true;
                    break;
                }
            }
            step *= cfg.ls_beta;
        }
        // Without sufficient decrease, still take the last strictly feasible
        // trial point; otherwise stay put and let the barrier parameter move.
        if (!accepted && !feasible) {
            step = 0.0;
            continue;
        }
        z = std::move(nz);
        mu1 = std::move(nmu1);
        mu2 = std::move(nmu2);
        f1 = std::move(nf1);
        f2 = std::move(nf2);
        beta = std::move(nbeta);
        w = std::move(nw);
    }

    sol.beta = std::move(beta);
    sol.dual = z.hi + z.lo;
    dg.wall_time = elapsed();
    return sol;
}

}  // namespace tf
