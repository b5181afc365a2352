#include "lbcopt/numerics.hpp"
#include "lbcopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lbcopt::num {

namespace {

// Gauss-Kronrod 15-point nodes on [0,1] half-interval (symmetric pairs).
// Odd-indexed nodes carry the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct GkResult {
    double kronrod;
    double err;
};

GkResult gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = kWgk[7] * fc;
    double resg = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double fsum = f(c - dx) + f(c + dx);
        resk += kWgk[j] * fsum;
        if (j % 2 == 1)
            resg += kWg[j / 2] * fsum;
    }
    return {resk * h, std::abs((resk - resg) * h)};
}

double integrate_rec(const std::function<double(double)>& f, double a, double b,
                     double tol, double rel_tol, int depth, int max_depth) {
    const GkResult r = gk15(f, a, b);
    if (r.err <= std::max(tol, rel_tol * std::abs(r.kronrod)))
        return r.kronrod;
    if (depth >= max_depth)
        throw SolverError("quadrature failed to converge (max depth reached)");
    const double c = 0.5 * (a + b);
    return integrate_rec(f, a, c, 0.5 * tol, rel_tol, depth + 1, max_depth) +
           integrate_rec(f, c, b, 0.5 * tol, rel_tol, depth + 1, max_depth);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opt) {
    if (a == b)
        return 0.0;
    return integrate_rec(f, a, b, opt.abs_tol, opt.rel_tol, 0, opt.max_depth);
}

double find_root_brent(const std::function<double(double)>& f, double lo, double hi,
                       const RootOptions& opt) {
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    if (fa == 0.0)
        return a;
    if (fb == 0.0)
        return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw SolverError("root is not bracketed");

    double c = a, fc = fa;
    double d = b - a, e = d;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 =
            2.0 * eps * std::abs(b) + 0.5 * std::max(opt.abs_tol, opt.rel_tol * std::abs(b));
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0)
            return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            // inverse quadratic / secant step
            const double s = fb / fa;
            double p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double rr = fb / fc;
                p = s * (2.0 * xm * qq * (qq - rr) - (b - a) * (rr - 1.0));
                q = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
            }
            if (p > 0.0)
                q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    throw SolverError("root finder failed to converge");
}

namespace {

std::vector<double> rk4_pass(const std::function<double(double, double)>& rhs,
                             std::span<const double> nodes, double y0, int substeps) {
    std::vector<double> y(nodes.size());
    y[0] = y0;
    double yc = y0;
    for (size_t i = 1; i < nodes.size(); ++i) {
        const double h = (nodes[i] - nodes[i - 1]) / substeps;
        double x = nodes[i - 1];
        for (int s = 0; s < substeps; ++s) {
            const double k1 = rhs(x, yc);
            const double k2 = rhs(x + 0.5 * h, yc + 0.5 * h * k1);
            const double k3 = rhs(x + 0.5 * h, yc + 0.5 * h * k2);
            const double k4 = rhs(x + h, yc + h * k3);
            yc += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            x += h;
        }
        y[i] = yc;
    }
    return y;
}

} // namespace

std::vector<double> rk4_path(const std::function<double(double, double)>& rhs,
                             std::span<const double> nodes, double y0, double tol,
                             int max_doublings) {
    if (nodes.size() < 2)
        throw std::invalid_argument("rk4_path: need at least two nodes");
    int substeps = 1;
    std::vector<double> prev = rk4_pass(rhs, nodes, y0, substeps);
    for (int k = 0; k < max_doublings; ++k) {
        substeps *= 2;
        std::vector<double> cur = rk4_pass(rhs, nodes, y0, substeps);
        double sup = 0.0;
        for (size_t i = 0; i < cur.size(); ++i)
            sup = std::max(sup, std::abs(cur[i] - prev[i]));
        if (sup < tol)
            return cur;
        prev = std::move(cur);
    }
    throw SolverError("rk4_path: step halving underflowed before convergence");
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2)
        throw std::invalid_argument("log_spaced: need 0 < lo < hi and n >= 2");
    std::vector<double> g(n);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n; ++i)
        g[i] = std::exp(llo + (lhi - llo) * i / (n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

} // namespace lbcopt::num
