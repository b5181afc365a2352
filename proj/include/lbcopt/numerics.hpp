#pragma once

#include <functional>
#include <span>
#include <vector>

namespace lbcopt::num {

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_depth = 60;
};

// Adaptive Gauss-Kronrod 15(7) on [a, b]. Subdivides until the local
// Kronrod-Gauss discrepancy meets the interval's share of the tolerance.
// Throws SolverError if the depth cap is hit before convergence.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opt = {});

struct RootOptions {
    double rel_tol = 1e-12;
    double abs_tol = 0.0;
    int max_iter = 200;
};

// Brent's method on a bracketing interval [lo, hi]; f(lo) and f(hi) must
// have opposite signs (a zero endpoint is returned as-is).
// Throws SolverError when the interval does not bracket a root.
double find_root_brent(const std::function<double(double)>& f, double lo, double hi,
                       const RootOptions& opt = {});

// Classical fixed-step RK4 along a node path. Integrates y' = rhs(x, y)
// starting from y0 at nodes[0], visiting every node in order (the path may
// run in either direction). The whole path is re-run with doubled substep
// counts until two successive refinements agree within tol at every node.
// Throws SolverError if the doubling cap is reached (step underflow).
std::vector<double> rk4_path(const std::function<double(double, double)>& rhs,
                             std::span<const double> nodes, double y0,
                             double tol = 1e-10, int max_doublings = 22);

// 2048 log-spaced points, endpoints included, lo < hi both positive.
std::vector<double> log_spaced(double lo, double hi, int n);

} // namespace lbcopt::num
