#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "tf/banded.hpp"
#include "tf/diff_ops.hpp"
#include "tf/solvers.hpp"

namespace tf {

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
    return v.unaryExpr([t](double a) { return a > t ? a - t : (a < -t ? a + t : 0.0); });
}

namespace {

struct Penalty {
    BandedMatrix op;
    double weight;
};

// ADMM with one splitting variable per penalty:
//   min 1/2 ||y - b||^2 + sum_r w_r ||z_r||_1   s.t.  z_r = A_r b,
// scaled duals u_r, over-relaxation, and residual balancing on rho.
Eigen::VectorXd admm_split(const Eigen::VectorXd& y, std::vector<Penalty> penalties, const FitConfig& cfg) {
    std::erase_if(penalties, [](const Penalty& p) { return p.weight == 0.0; });
    if (penalties.empty()) return y;
    const auto start = std::chrono::steady_clock::now();

    const auto n = static_cast<std::size_t>(y.size());
    const double abs_thresh = cfg.admm_abs_tol * std::sqrt(static_cast<double>(n));
    const BandedMatrix eye = BandedMatrix::identity(n);

    BandedMatrix ata = band_gram_transpose(penalties.front().op);
    for (std::size_t r = 1; r < penalties.size(); ++r)
        ata = band_combine(1.0, ata, 1.0, band_gram_transpose(penalties[r].op));

    double rho = cfg.admm_rho;
    auto factor = [&] { return BandCholesky(band_combine(1.0, eye, rho, ata)); };
    BandCholesky chol = factor();

    std::vector<Eigen::VectorXd> z, u, zold;
    for (const auto& p : penalties) {
        z.push_back(band_matvec(p.op, y));
        u.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.op.rows())));
    }
    zold = z;

    Eigen::VectorXd beta = y;
    std::vector<double> history;
    SolverDiagnostics dg;
    const double relax = cfg.admm_relaxation;
    std::vector<Eigen::VectorXd> ab(penalties.size());
    for (std::size_t iter = 1; iter <= cfg.admm_max_iter; ++iter) {
        Eigen::VectorXd rhs = y;
        for (std::size_t r = 0; r < penalties.size(); ++r)
            rhs += rho * band_matvec_transpose(penalties[r].op, z[r] - u[r]);
        beta = chol.solve(rhs);

        double prim_sq = 0.0, ab_sq = 0.0, z_sq = 0.0;
        Eigen::VectorXd dual_vec = Eigen::VectorXd::Zero(y.size());
        Eigen::VectorXd scaled_dual = Eigen::VectorXd::Zero(y.size());
        for (std::size_t r = 0; r < penalties.size(); ++r) {
            ab[r] = band_matvec(penalties[r].op, beta);
            const Eigen::VectorXd mixed = relax * ab[r] + (1.0 - relax) * z[r];
            zold[r] = z[r];
            z[r] = soft_threshold(mixed + u[r], penalties[r].weight / rho);
            u[r] += mixed - z[r];
            prim_sq += (ab[r] - z[r]).squaredNorm();
            ab_sq += ab[r].squaredNorm();
            z_sq += z[r].squaredNorm();
            dual_vec += band_matvec_transpose(penalties[r].op, z[r] - zold[r]);
            scaled_dual += band_matvec_transpose(penalties[r].op, u[r]);
        }
        const double prim = std::sqrt(prim_sq);
        const double dual = rho * dual_vec.norm();
        history.push_back(std::max(prim, dual));
        dg.iterations = iter;

        // Absolute plus relative tolerances in the usual scaled form.
        const double prim_tol = abs_thresh + cfg.admm_tol * std::max(std::sqrt(ab_sq), std::sqrt(z_sq));
        const double dual_tol = abs_thresh + cfg.admm_tol * rho * scaled_dual.norm();
        if (prim <= prim_tol && dual <= dual_tol) return beta;

        if (iter % 10 == 0) {
            if (prim / prim_tol > 10.0 * dual / dual_tol) {
                rho *= 2.0;
                for (auto& ur : u) ur /= 2.0;
                chol = factor();
            } else if (dual / dual_tol > 10.0 * prim / prim_tol) {
                rho /= 2.0;
                for (auto& ur : u) ur *= 2.0;
                chol = factor();
            }
        }
    }
    dg.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    dg.duality_gap = history.empty() ? 0.0 : history.back();
    throw ConvergenceError("ADMM: no convergence in " + std::to_string(cfg.admm_max_iter) + " iterations",
                           dg, std::move(history));
}

void check_lambdas(double lambda1, double lambda2, const char* who) {
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0))
        throw std::invalid_argument(std::string(who) + ": penalties must be nonnegative");
}

}  // namespace

Eigen::VectorXd solve_sparse_tf(const Eigen::VectorXd& y, std::size_t k, double lambda1,
                                double lambda2, const FitConfig& cfg) {
    check_lambdas(lambda1, lambda2, "solve_sparse_tf");
    const auto n = static_cast<std::size_t>(y.size());
    if (k > kMaxOrder || n < k + 2) throw std::invalid_argument("solve_sparse_tf: need n >= k + 2");
    // Without the difference penalty the problem is the l1 proximal map.
    if (lambda1 == 0.0) return soft_threshold(y, lambda2);
    const DiffOp d(n, k + 1);
    return admm_split(y, {{d.matrix(), lambda1}, {BandedMatrix::identity(n), lambda2}}, cfg);
}

Eigen::VectorXd solve_mixed_tf(const Eigen::VectorXd& y, std::size_t k1, std::size_t k2,
                               double lambda1, double lambda2, const FitConfig& cfg) {
    check_lambdas(lambda1, lambda2, "solve_mixed_tf");
    if (k1 == k2) throw std::invalid_argument("solve_mixed_tf: the two orders must differ");
    const auto n = static_cast<std::size_t>(y.size());
    const std::size_t kmax = std::max(k1, k2);
    if (kmax > kMaxOrder || n < kmax + 2) throw std::invalid_argument("solve_mixed_tf: need n >= max(k1, k2) + 2");
    const DiffOp d1(n, k1 + 1), d2(n, k2 + 1);
    return admm_split(y, {{d1.matrix(), lambda1}, {d2.matrix(), lambda2}}, cfg);
}

}  // namespace tf
