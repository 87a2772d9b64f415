#include "tf/bases.hpp"

#include <stdexcept>
#include <string>

#include "tf/diff_ops.hpp"

namespace tf {

namespace {

void check_dense(std::size_t n, std::size_t k, const char* who) {
    if (k > kMaxOrder) throw std::invalid_argument(std::string(who) + ": order k too large");
    if (n < k + 2) throw std::invalid_argument(std::string(who) + ": need n >= k + 2");
    if (n > kDenseBasisCap)
        throw std::invalid_argument(std::string(who) + ": n exceeds the dense basis cap of " +
                                    std::to_string(kDenseBasisCap));
}

double int_pow(double base, std::size_t e) {
    double r = 1.0;
    for (std::size_t i = 0; i < e; ++i) r *= base;
    return r;
}

double factorial(std::size_t k) {
    double f = 1.0;
    for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return f;
}

// Leading polynomial block i^{j-1} / n^{j-1}, shared by G and H.
void fill_polynomial_block(Eigen::MatrixXd& m, std::size_t n, std::size_t k) {
    const double dn = static_cast<double>(n);
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= k + 1; ++j)
            m(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) =
                int_pow(static_cast<double>(i), j - 1) / int_pow(dn, j - 1);
}

}  // namespace

KnotSet make_knots(std::size_t n, std::size_t k) {
    if (n < k + 2) throw std::invalid_argument("make_knots: need n >= k + 2");
    KnotSet set{{}, k, n};
    set.knots.reserve(n - k - 1);
    // ((k+2)/2 + i)/n for even k, ((k+1)/2 + i)/n for odd k; both offsets are integral.
    const std::size_t offset = (k % 2 == 0) ? (k + 2) / 2 : (k + 1) / 2;
    for (std::size_t i = 1; i <= n - k - 1; ++i)
        set.knots.push_back(static_cast<double>(offset + i) / static_cast<double>(n));
    return set;
}

BasisMatrix make_G(std::size_t n, std::size_t k) {
    check_dense(n, k, "make_G");
    BasisMatrix out{BasisKind::TruncatedPower, k, n, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    auto& g = out.entries;
    if (k == 0) {
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 1; j <= i; ++j)
                g(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) = 1.0;
        return out;
    }
    fill_polynomial_block(g, n, k);
    const std::size_t shift = (k % 2 == 0) ? k / 2 : (k + 1) / 2;
    const double nk = int_pow(static_cast<double>(n), k);
    for (std::size_t j = k + 2; j <= n; ++j) {
        // nonzero for i > j - shift, value (i - j + shift)^k / n^k
        for (std::size_t i = j - shift + 1; i <= n; ++i)
            g(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) =
                int_pow(static_cast<double>(i + shift - j), k) / nk;
    }
    return out;
}

BasisMatrix make_H(std::size_t n, std::size_t k) {
    check_dense(n, k, "make_H");
    BasisMatrix out{BasisKind::FallingFactorial, k, n, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    auto& h = out.entries;
    fill_polynomial_block(h, n, k);
    const std::vector<double> sigma = cumsum_table(n, k);
    const double nk = int_pow(static_cast<double>(n), k);
    const double kf = factorial(k);
    for (std::size_t j = k + 2; j <= n; ++j)
        for (std::size_t i = j; i <= n; ++i)
            h(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) =
                (sigma[i - j] * kf) / nk;
    return out;
}

Eigen::MatrixXd make_H_product(std::size_t n, std::size_t k) {
    check_dense(n, k, "make_H_product");
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    fill_polynomial_block(h, n, k);
    const double nk = int_pow(static_cast<double>(n), k);
    for (std::size_t j = k + 2; j <= n; ++j) {
        for (std::size_t i = j; i <= n; ++i) {
            double p = 1.0;
            for (std::size_t l = 1; l <= k; ++l)
                p *= static_cast<double>(i) - static_cast<double>(j - k - 1 + l);
            h(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) = p / nk;
        }
    }
    return h;
}

Eigen::MatrixXd make_H_evaluated(std::size_t n, std::size_t k) {
    check_dense(n, k, "make_H_evaluated");
    Eigen::MatrixXd h(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= n; ++j)
            h(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) =
                falling_factorial_basis(j, k, n, static_cast<double>(i) / static_cast<double>(n));
    return h;
}

double truncated_power_basis(std::size_t j, std::size_t k, std::size_t n, double x) {
    if (j == 0 || j > n) throw std::out_of_range("truncated_power_basis: j must lie in [1, n]");
    if (j <= k + 1) return int_pow(x, j - 1);
    const std::size_t offset = (k % 2 == 0) ? (k + 2) / 2 : (k + 1) / 2;
    const double t = static_cast<double>(offset + (j - k - 1)) / static_cast<double>(n);
    if (x < t) return 0.0;
    return int_pow(x - t, k);  // 0^0 = 1
}

double falling_factorial_basis(std::size_t j, std::size_t k, std::size_t n, double x) {
    if (j == 0 || j > n) throw std::out_of_range("falling_factorial_basis: j must lie in [1, n]");
    if (j <= k + 1) return int_pow(x, j - 1);
    const double dn = static_cast<double>(n);
    // Strict: at k = 0 the non-strict indicator would repeat the constant column.
    if (x <= static_cast<double>(j - 1) / dn) return 0.0;
    double p = 1.0;
    for (std::size_t l = 1; l <= k; ++l) p *= x - static_cast<double>(j - k - 1 + l) / dn;
    return p;
}

Eigen::VectorXd tf_coefficients(const Eigen::VectorXd& beta, std::size_t k) {
    const auto n = static_cast<std::size_t>(beta.size());
    if (k > kMaxOrder) throw std::invalid_argument("tf_coefficients: order k too large");
    if (n < k + 2) throw std::invalid_argument("tf_coefficients: need n >= k + 2");
    Eigen::VectorXd alpha(beta.size());

    const DiffOp d(n, k + 1);
    const double scale = int_pow(static_cast<double>(n), k) / factorial(k);
    alpha.tail(static_cast<Eigen::Index>(n - k - 1)) = scale * d.apply(beta);

    const auto p = static_cast<Eigen::Index>(k + 1);
    Eigen::MatrixXd v(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double x = static_cast<double>(i + 1) / static_cast<double>(n);
        double pw = 1.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            v(i, j) = pw;
            pw *= x;
        }
    }
    alpha.head(p) = v.partialPivLu().solve(beta.head(p));
    return alpha;
}

double eval_tf_function(const Eigen::VectorXd& alpha, std::size_t k, double x) {
    const auto n = static_cast<std::size_t>(alpha.size());
    if (n < k + 2) throw std::invalid_argument("eval_tf_function: need n >= k + 2 coefficients");
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("eval_tf_function: x must lie in [0, 1]");
    double f = 0.0;
    double pw = 1.0;
    for (std::size_t j = 0; j <= k; ++j) {
        f += alpha[static_cast<Eigen::Index>(j)] * pw;
        pw *= x;
    }
    for (std::size_t j = k + 2; j <= n; ++j) {
        const double a = alpha[static_cast<Eigen::Index>(j - 1)];
        if (a == 0.0) continue;
        f += a * falling_factorial_basis(j, k, n, x);
    }
    return f;
}

}  // namespace tf
