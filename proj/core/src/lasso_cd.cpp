#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tf/banded.hpp"
#include "tf/solvers.hpp"

namespace tf {

namespace {

using Index = Eigen::Index;

double soft(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

struct Lasso {
    const Eigen::MatrixXd& x;  // penalized block, already profiled
    const Eigen::VectorXd& y;
    double lambda;
    Eigen::VectorXd col_sq;

    double objective(const Eigen::VectorXd& theta, const Eigen::VectorXd& resid) const {
        return 0.5 * resid.squaredNorm() + lambda * theta.lpNorm<1>();
    }

    double gap(const Eigen::VectorXd& theta, const Eigen::VectorXd& resid) const {
        const double corr = (x.transpose() * resid).lpNorm<Eigen::Infinity>();
        const double scale = corr > lambda ? lambda / corr : 1.0;
        const Eigen::VectorXd u = scale * resid;
        const double dual = 0.5 * y.squaredNorm() - 0.5 * (y - u).squaredNorm();
        return objective(theta, resid) - dual;
    }

    // One cyclic pass; returns the largest coefficient change.
    double sweep(Eigen::VectorXd& theta, Eigen::VectorXd& resid, bool active_only) const {
        double biggest = 0.0;
        for (Index j = 0; j < theta.size(); ++j) {
            if (col_sq[j] <= 0.0) continue;
            if (active_only && theta[j] == 0.0) continue;
            const double old = theta[j];
            const double rho = x.col(j).dot(resid) + col_sq[j] * old;
            const double next = soft(rho, lambda) / col_sq[j];
            if (next != old) {
                resid.noalias() -= (next - old) * x.col(j);
                theta[j] = next;
                biggest = std::max(biggest, std::abs(next - old) * std::sqrt(col_sq[j]));
            }
        }
        return biggest;
    }

    // Solve the stationarity equations on the current support with its signs
    // frozen. Accepts the result only if the signs survive and every inactive
    // coordinate satisfies the subgradient condition.
    bool refine(Eigen::VectorXd& theta, Eigen::VectorXd& resid) const {
        std::vector<Index> support;
        for (Index j = 0; j < theta.size(); ++j)
            if (theta[j] != 0.0) support.push_back(j);
        if (support.empty()) return false;
        const auto s = static_cast<Index>(support.size());
        if (s > x.rows()) return false;
        Eigen::MatrixXd xs(x.rows(), s);
        Eigen::VectorXd signs(s);
        for (Index c = 0; c < s; ++c) {
            xs.col(c) = x.col(support[static_cast<std::size_t>(c)]);
            signs[c] = theta[support[static_cast<std::size_t>(c)]] > 0.0 ? 1.0 : -1.0;
        }
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(xs);
        const auto r = qr.matrixQR().topRows(s).triangularView<Eigen::Upper>();
        for (Index c = 0; c < s; ++c)
            if (qr.matrixQR()(c, c) == 0.0) return false;
        const Eigen::VectorXd qty = (qr.householderQ().transpose() * y).head(s);
        const Eigen::VectorXd w = r.transpose().solve(signs);
        const Eigen::VectorXd ts = r.solve(qty - lambda * w);
        for (Index c = 0; c < s; ++c)
            if (ts[c] * signs[c] <= 0.0) return false;

        const Eigen::VectorXd new_resid = y - xs * ts;
        const Eigen::VectorXd corr = x.transpose() * new_resid;
        for (Index j = 0; j < theta.size(); ++j)
            if (std::abs(corr[j]) > lambda * (1.0 + 1e-9) + 1e-12) {
                bool in_support = std::binary_search(support.begin(), support.end(), j);
                if (!in_support) return false;
            }
        theta.setZero();
        for (Index c = 0; c < s; ++c) theta[support[static_cast<std::size_t>(c)]] = ts[c];
        resid = new_resid;
        return true;
    }
};

}  // namespace

Eigen::VectorXd solve_lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                               std::size_t first_penalized, const LassoOptions& options) {
    if (x.rows() != y.size()) throw DimensionError("solve_lasso_cd: X and y disagree on the row count");
    if (first_penalized > static_cast<std::size_t>(x.cols()))
        throw std::invalid_argument("solve_lasso_cd: first_penalized exceeds the column count");
    if (!(lambda >= 0.0)) throw std::invalid_argument("solve_lasso_cd: lambda must be nonnegative");

    const auto p0 = static_cast<Index>(first_penalized);
    const Index q = x.cols() - p0;

    if (lambda == 0.0) return x.colPivHouseholderQr().solve(y);

    // Profile out the unpenalized block: with Q1 an orthonormal basis of its
    // span, the penalized coefficients solve a plain lasso on (I - Q1 Q1^T).
    Eigen::HouseholderQR<Eigen::MatrixXd> qr1;
    Eigen::MatrixXd q1;
    Eigen::MatrixXd xt = x.rightCols(q);
    Eigen::VectorXd yt = y;
    if (p0 > 0) {
        qr1.compute(x.leftCols(p0));
        q1 = qr1.householderQ() * Eigen::MatrixXd::Identity(x.rows(), p0);
        xt -= q1 * (q1.transpose() * xt);
        yt -= q1 * (q1.transpose() * yt);
    }

    Lasso problem{xt, yt, lambda, xt.colwise().squaredNorm().transpose()};
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd resid = yt;

    bool done = q == 0;
    std::size_t sweeps = 0;
    double gap = 0.0;
    while (!done) {
        problem.sweep(theta, resid, false);
        ++sweeps;
        for (int inner = 0; inner < 200 && sweeps < options.max_sweeps; ++inner, ++sweeps)
            if (problem.sweep(theta, resid, true) <= 1e-13 * (1.0 + yt.norm())) break;

        gap = problem.gap(theta, resid);
        const double obj = problem.objective(theta, resid);
        if (gap <= options.rel_tol * (1.0 + std::abs(obj))) break;

        Eigen::VectorXd cand = theta, cand_resid = resid;
        if (problem.refine(cand, cand_resid)) {
            const double cgap = problem.gap(cand, cand_resid);
            if (cgap <= options.rel_tol * (1.0 + std::abs(problem.objective(cand, cand_resid)))) {
                theta = std::move(cand);
                resid = std::move(cand_resid);
                break;
            }
        }
        if (sweeps >= options.max_sweeps) {
            SolverDiagnostics dg;
            dg.iterations = sweeps;
            dg.duality_gap = gap;
            throw ConvergenceError("solve_lasso_cd: no convergence after " + std::to_string(sweeps) +
                                       " sweeps (gap " + std::to_string(gap) + ")",
                                   dg);
        }
    }

    Eigen::VectorXd out(x.cols());
    out.tail(q) = theta;
    if (p0 > 0) {
        const Eigen::VectorXd partial = y - x.rightCols(q) * theta;
        const Eigen::VectorXd qty = (qr1.householderQ().transpose() * partial).head(p0);
        out.head(p0) = qr1.matrixQR().topLeftCorner(p0, p0).triangularView<Eigen::Upper>().solve(qty);
    }
    return out;
}

}  // namespace tf
