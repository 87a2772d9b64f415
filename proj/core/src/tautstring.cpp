#include <stdexcept>

#include "tf/solvers.hpp"

namespace tf {

// Direct (non-iterative) 1-d TV denoising, following the taut-string view:
// the output is built segment by segment, tracking the lowest and highest
// admissible segment values (vmin, vmax) and the running slack of the string
// against its lower and upper tubes (umin, umax). Each segment is emitted as
// soon as one of the tubes is hit; restarts resume at the breakpoint.
Eigen::VectorXd solve_tf_tautstring(const Eigen::VectorXd& y, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("solve_tf_tautstring: lambda must be nonnegative");
    const Eigen::Index n = y.size();
    Eigen::VectorXd out(n);
    if (n == 0) return out;
    if (lambda == 0.0 || n == 1) return y;

    const double twolambda = 2.0 * lambda;
    const double minlambda = -lambda;
    Eigen::Index k = 0, k0 = 0, kplus = 0, kminus = 0;
    double umin = lambda, umax = -lambda;
    double vmin = y[0] - lambda, vmax = y[0] + lambda;

    for (;;) {
        while (k == n - 1) {
            if (umin < 0.0) {
                do out[k0++] = vmin;
                while (k0 <= kminus);
                k = kminus = k0;
                vmin = y[k];
                umin = lambda;
                umax = vmin + umin - vmax;
            } else if (umax > 0.0) {
                do out[k0++] = vmax;
                while (k0 <= kplus);
                k = kplus = k0;
                vmax = y[k];
                umax = minlambda;
                umin = vmax + umax - vmin;
            } else {
                vmin += umin / static_cast<double>(k - k0 + 1);
                do out[k0++] = vmin;
                while (k0 <= k);
                return out;
            }
        }
        if ((umin += y[k + 1] - vmin) < minlambda) {
            do out[k0++] = vmin;
            while (k0 <= kminus);
            k = kplus = kminus = k0;
            vmin = y[k];
            vmax = vmin + twolambda;
            umin = lambda;
            umax = minlambda;
        } else if ((umax += y[k + 1] - vmax) > lambda) {
            do out[k0++] = vmax;
            while (k0 <= kplus);
            k = kplus = kminus = k0;
            vmax = y[k];
            vmin = vmax - twolambda;
            umin = lambda;
            umax = minlambda;
        } else {
            ++k;
            if (umin >= lambda) {
                kminus = k;
                vmin += (umin - lambda) / static_cast<double>(kminus - k0 + 1);
                umin = lambda;
            }
            if (umax <= minlambda) {
                kplus = k;
                vmax += (umax + lambda) / static_cast<double>(kplus - k0 + 1);
                umax = minlambda;
            }
        }
    }
}

}  // namespace tf
