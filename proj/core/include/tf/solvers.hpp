#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tf {

/// Whether the n^k / k! factor multiplies the tuning parameter.
enum class LambdaScale { PaperScaled, Raw };

/// Solver and estimator knobs. Defaults are the interior-point and ADMM
/// settings used throughout the library.
struct FitConfig {
    // primal-dual interior point
    double tol = 1e-8;          // relative duality gap
    std::size_t max_iter = 200;
    double barrier_mu = 10.0;   // barrier parameter growth factor
    double ls_alpha = 0.01;     // sufficient-decrease slope
    double ls_beta = 0.5;       // backtracking factor
    std::size_t max_ls_iter = 60;

    // estimators
    double knot_tol = 1e-5;     // relative to max |D^(k+1) beta|
    double knot_gap_tol = 1e-10;  // fits solve to min(tol, knot_gap_tol) before counting knots
    LambdaScale scale = LambdaScale::PaperScaled;
    double lambda_min_ratio = 1e-6;
    std::size_t max_bisect = 60;

    // ADMM (sparse / mixed variants)
    double admm_tol = 1e-8;       // relative primal and dual residual tolerance
    double admm_abs_tol = 1e-12;  // absolute floor, scaled by sqrt(n)
    double admm_relaxation = 1.6;
    std::size_t admm_max_iter = 200000;
    double admm_rho = 1.0;
};

struct SolverDiagnostics {
    std::size_t iterations = 0;
    double duality_gap = 0.0;
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    bool converged = false;
    double wall_time = 0.0;  // seconds
};

/// Raised when an iterative solver stops without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, SolverDiagnostics diag,
                     std::vector<double> residual_history = {})
        : std::runtime_error(what), diag_(diag), history_(std::move(residual_history)) {}

    const SolverDiagnostics& diagnostics() const noexcept { return diag_; }
    const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    SolverDiagnostics diag_;
    std::vector<double> history_;
};

/// The trend filtering problem 1/2 ||y - beta||^2 + lambda_eff ||D^(k+1) beta||_1.
struct TFProblem {
    Eigen::VectorXd y;
    std::size_t k = 0;
    double lambda = 0.0;
    LambdaScale scale = LambdaScale::PaperScaled;

    /// lambda * n^k / k! (PaperScaled) or lambda (Raw).
    double effective_lambda() const;
    void validate() const;
};

/// n^k / k! for PaperScaled, 1 for Raw.
double lambda_scale_factor(std::size_t n, std::size_t k, LambdaScale scale);

/// Dual solution at the polynomial limit, v = (D D^T)^{-1} D y, computed as the
/// solution of D^T v = y - P y where P projects onto degree-k polynomials.
Eigen::VectorXd polynomial_limit_dual(const Eigen::VectorXd& y, std::size_t k);

/// Smallest effective (Raw) lambda at which the degree-k polynomial fit is
/// optimal: ||(D D^T)^{-1} D y||_inf.
double lambda_max(const Eigen::VectorXd& y, std::size_t k);

struct TFSolution {
    Eigen::VectorXd beta;
    Eigen::VectorXd dual;  // v with beta = y - D^T v, |v| <= lambda_eff
    SolverDiagnostics diagnostics;
};

/**
 * Primal-dual interior point method on the box-constrained dual
 *
 *     min_v 1/2 ||y - D^T v||^2   s.t.  ||v||_inf <= lambda_eff,
 *
 * recovering beta = y - D^T v. Every Newton step solves one banded SPD system
 * D D^T + diag(...) with half-bandwidth k+1, factored from the rows of
 * [D^T; diag^(1/2)] so D D^T is never formed. The dual iterate is carried in
 * compensated (double-double) form. `warm_dual`, when given, is clipped into
 * the box and used as the starting point.
 */
TFSolution solve_tf_pdip(const TFProblem& problem, const FitConfig& cfg = {},
                         const std::optional<Eigen::VectorXd>& warm_dual = std::nullopt);

struct LassoOptions {
    double rel_tol = 1e-10;           // duality gap <= rel_tol * (1 + |objective|)
    std::size_t max_sweeps = 100000;
};

/**
 * Coordinate descent for 1/2 ||y - X theta||^2 + lambda sum_{j >= first_penalized} |theta_j|.
 *
 * The unpenalized leading columns are profiled out exactly (projection onto
 * the orthogonal complement of their span), the remaining lasso is solved by
 * cyclic coordinate descent on the active set with an equality-constrained
 * refinement once the signs settle, and convergence is certified by the
 * lasso duality gap.
 */
Eigen::VectorXd solve_lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                               std::size_t first_penalized, const LassoOptions& options = {});

/// Exact 1-d total variation denoising: argmin 1/2 ||y - b||^2 + lambda sum |b_{i+1} - b_i|.
Eigen::VectorXd solve_tf_tautstring(const Eigen::VectorXd& y, double lambda);

/// 1/2 ||y - b||^2 + lambda1 ||D^(k+1) b||_1 + lambda2 ||b||_1 (lambdas are Raw).
Eigen::VectorXd solve_sparse_tf(const Eigen::VectorXd& y, std::size_t k, double lambda1,
                                double lambda2, const FitConfig& cfg = {});

/// 1/2 ||y - b||^2 + lambda1 ||D^(k1+1) b||_1 + lambda2 ||D^(k2+1) b||_1 (lambdas are Raw).
Eigen::VectorXd solve_mixed_tf(const Eigen::VectorXd& y, std::size_t k1, std::size_t k2,
                               double lambda1, double lambda2, const FitConfig& cfg = {});

/// Elementwise soft-thresholding.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t);

}  // namespace tf
