#include "lbcopt/continuum.hpp"
#include "lbcopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lbcopt::continuum {

namespace {

void require_erlang(const FadingModel& m, const char* op) {
    if (!m.is_erlang())
        throw std::invalid_argument(std::string(op) + ": needs a density model");
}

void require_b(double b, const char* op) {
    if (!(b > 0.0) || !std::isfinite(b))
        throw std::invalid_argument(std::string(op) + ": bandwidth ratio must be > 0");
}

// log of the U-integrand kernel [s^2 f(s)]^(1/(1+b))
double log_u_kernel(const FadingModel& m, double b, double s) {
    return (2.0 * std::log(s) + m.log_pdf(s)) / (1.0 + b);
}

// log of the D integrating factor k(s) = [(s/go)^2 f(s)/f(go)]^(-b/(1+b))
double log_d_kernel(const FadingModel& m, double b, double s, double gamma_o,
                    double log_pdf_at_o) {
    return -(b / (1.0 + b)) *
           (2.0 * (std::log(s) - std::log(gamma_o)) + m.log_pdf(s) - log_pdf_at_o);
}

double u_integrand(const FadingModel& m, double b, double s) {
    const double pre = (2.0 / s + m.log_density_slope(s)) / s;
    return pre * std::exp(log_u_kernel(m, b, s));
}

void check_grid(const FadingModel& m, std::span<const double> grid, const char* op) {
    if (grid.size() < 2)
        throw std::invalid_argument(std::string(op) + ": grid needs at least two nodes");
    for (size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] < grid[i - 1]))
            throw std::invalid_argument(std::string(op) + ": grid must be strictly descending");
    if (grid.back() <= 1e-8 * m.mean_gain())
        throw SolverError(std::string(op) + ": grid reaches the gain -> 0 singularity");
}

} // namespace

GammaORoot solve_gamma_o(const FadingModel& model) {
    require_erlang(model, "solve_gamma_o");
    // Work with h(g) = log(g f(g)) - log(1 - F(g)); same roots as
    // g f(g) + F(g) - 1 but immune to exponential underflow in either term.
    const auto h = [&](double g) {
        return std::log(g) + model.log_pdf(g) -
               std::log(model.survival(g)); // survival > 0 on the scan range
    };
    const double lo = 1e-6 * model.mean_gain();
    const double hi = model.support_limit();
    const auto scan = num::log_spaced(lo, hi, 4096);

    GammaORoot root;
    int crossings = 0;
    double prev_x = scan[0];
    double prev_h = h(prev_x);
    for (size_t i = 1; i < scan.size(); ++i) {
        const double x = scan[i];
        const double hx = h(x);
        if ((prev_h <= 0.0 && hx > 0.0) || (prev_h >= 0.0 && hx < 0.0)) {
            ++crossings;
            root.value = num::find_root_brent(h, prev_x, x, {.rel_tol = 1e-12});
        }
        prev_x = x;
        prev_h = hx;
    }
    if (crossings == 0)
        throw SolverError("solve_gamma_o: no root of g*f(g) = 1 - F(g) in the scan range");
    root.multiple_roots = crossings > 1;
    return root;
}

double cumulative_power_u(const FadingModel& model, double bandwidth_ratio, double gain,
                          double gamma_o, const num::QuadratureOptions& quad) {
    require_erlang(model, "cumulative_power_u");
    require_b(bandwidth_ratio, "cumulative_power_u");
    if (!(gain > 0.0) || gain > gamma_o)
        throw std::domain_error("cumulative_power_u: gain must lie in (0, gamma_o]");
    if (gain == gamma_o)
        return 0.0;
    const double b = bandwidth_ratio;
    const double integral = num::integrate(
        [&](double s) { return u_integrand(model, b, s); }, gain, gamma_o, quad);
    return integral / ((1.0 + b) * std::exp(log_u_kernel(model, b, gain)));
}

std::vector<double> cumulative_power_u_ode(const FadingModel& model, double bandwidth_ratio,
                                           std::span<const double> grid, double ode_tol) {
    require_erlang(model, "cumulative_power_u_ode");
    require_b(bandwidth_ratio, "cumulative_power_u_ode");
    check_grid(model, grid, "cumulative_power_u_ode");
    const double b = bandwidth_ratio;
    return num::rk4_path(
        [&](double s, double u) {
            return -((2.0 / s + model.log_density_slope(s)) / (1.0 + b)) * (u + 1.0 / s);
        },
        grid, 0.0, ode_tol);
}

double power_density_rho(const FadingModel& model, double bandwidth_ratio, double gain,
                         double u_at_gain) {
    require_erlang(model, "power_density_rho");
    require_b(bandwidth_ratio, "power_density_rho");
    if (!(gain > 0.0))
        throw std::domain_error("power_density_rho: gain must be > 0");
    return ((2.0 / gain + model.log_density_slope(gain)) / (1.0 + bandwidth_ratio)) *
           (u_at_gain + 1.0 / gain);
}

double solve_gamma_p(const FadingModel& model, double bandwidth_ratio, double power,
                     double gamma_o) {
    require_erlang(model, "solve_gamma_p");
    require_b(bandwidth_ratio, "solve_gamma_p");
    if (!(power > 0.0))
        throw std::invalid_argument("solve_gamma_p: power must be > 0");
    const double gbar = model.mean_gain();
    const double floor = 1e-12 * gbar;
    const auto excess = [&](double g) {
        return cumulative_power_u(model, bandwidth_ratio, g, gamma_o) - power;
    };
    // U decreases toward 0 at gamma_o, so shrink the lower endpoint until the
    // budget is exceeded there. U diverges as g -> 0, but refuse to chase the
    // bracket below the floor rather than silently clamping.
    double lo = std::min(1e-3 * gbar, 0.5 * gamma_o);
    while (excess(lo) <= 0.0) {
        lo *= 0.5;
        if (lo < floor)
            throw SolverError("solve_gamma_p: no bracket above 1e-12 * mean gain");
    }
    return num::find_root_brent(excess, lo, gamma_o, {.rel_tol = 1e-12});
}

double distortion_profile_d(const FadingModel& model, double bandwidth_ratio, double gain,
                            double gamma_o, const num::QuadratureOptions& quad) {
    require_erlang(model, "distortion_profile_d");
    require_b(bandwidth_ratio, "distortion_profile_d");
    if (!(gain > 0.0) || gain > gamma_o)
        throw std::domain_error("distortion_profile_d: gain must lie in (0, gamma_o]");
    const double b = bandwidth_ratio;
    const double lpo = model.log_pdf(gamma_o);
    const double boundary = gamma_o * std::exp(lpo);
    if (gain == gamma_o)
        return boundary;
    const double integral = num::integrate(
        [&](double s) {
            return std::exp(model.log_pdf(s) + log_d_kernel(model, b, s, gamma_o, lpo));
        },
        gain, gamma_o, quad);
    return (integral + boundary) * std::exp(-log_d_kernel(model, b, gain, gamma_o, lpo));
}

std::vector<double> distortion_profile_d_ode(const FadingModel& model, double bandwidth_ratio,
                                             std::span<const double> grid, double ode_tol) {
    require_erlang(model, "distortion_profile_d_ode");
    require_b(bandwidth_ratio, "distortion_profile_d_ode");
    check_grid(model, grid, "distortion_profile_d_ode");
    const double b = bandwidth_ratio;
    const double d0 = grid[0] * model.pdf(grid[0]);
    return num::rk4_path(
        [&](double s, double d) {
            return (b / (1.0 + b)) * (2.0 / s + model.log_density_slope(s)) * d - model.pdf(s);
        },
        grid, d0, ode_tol);
}

double weight_w(const FadingModel& model, double bandwidth_ratio, double gain,
                double u_at_gain, double gamma_o) {
    require_erlang(model, "weight_w");
    require_b(bandwidth_ratio, "weight_w");
    if (!(gain > 0.0))
        throw std::domain_error("weight_w: gain must be > 0");
    if (gain >= gamma_o)
        return model.survival(gain);
    return gain * model.pdf(gain) *
           std::exp((1.0 + bandwidth_ratio) * std::log1p(gain * u_at_gain));
}

ContinuumSolution solve(const ChannelConfig& config) {
    config.validate();
    require_erlang(config.fading, "continuum solve");
    const FadingModel& m = config.fading;
    const double b = config.bandwidth_ratio;
    const double p = config.power;

    ContinuumSolution sol;
    sol.config = config;
    const GammaORoot root = solve_gamma_o(m);
    sol.gamma_o = root.value;
    sol.multiple_gamma_o_roots = root.multiple_roots;
    sol.gamma_p = (p > 0.0) ? solve_gamma_p(m, b, p, sol.gamma_o) : sol.gamma_o;

    // Log grid over the active region plus margins, with both boundaries as
    // exact nodes so the profile arrays expose them directly.
    const double lo = std::max(0.5 * sol.gamma_p, 1e-6 * m.mean_gain());
    const double hi = 1.5 * sol.gamma_o;
    std::vector<double> grid = num::log_spaced(lo, hi, 2048);
    for (double boundary : {sol.gamma_p, sol.gamma_o}) {
        const auto it = std::lower_bound(grid.begin(), grid.end(), boundary);
        if (it == grid.end() || std::abs(*it - boundary) > 1e-15 * boundary)
            grid.insert(it, boundary);
    }
    const size_t n = grid.size();
    sol.grid = grid;
    sol.cumulative_power.assign(n, 0.0);
    sol.power_density.assign(n, 0.0);
    sol.distortion.assign(n, 0.0);
    sol.weight.assign(n, 0.0);

    const size_t i_p = static_cast<size_t>(
        std::lower_bound(grid.begin(), grid.end(), sol.gamma_p) - grid.begin());
    const size_t i_o = static_cast<size_t>(
        std::lower_bound(grid.begin(), grid.end(), sol.gamma_o) - grid.begin());

    // Both closed-form profiles share the structure value(g) = (integral from
    // g to gamma_o + boundary) / kernel(g), so accumulate each integral once
    // over the grid segments instead of re-integrating from every node.
    const num::QuadratureOptions seg{.abs_tol = 1e-14, .rel_tol = 1e-12};
    const double lpo = m.log_pdf(sol.gamma_o);
    double acc_u = 0.0, acc_d = 0.0;
    double d_at_p = sol.gamma_o * std::exp(lpo);
    for (size_t k = i_o; k-- > i_p;) {
        const double a = grid[k], c = grid[k + 1];
        acc_u += num::integrate([&](double s) { return u_integrand(m, b, s); }, a, c, seg);
        acc_d += num::integrate(
            [&](double s) {
                return std::exp(m.log_pdf(s) + log_d_kernel(m, b, s, sol.gamma_o, lpo));
            },
            a, c, seg);
        const double u = acc_u / ((1.0 + b) * std::exp(log_u_kernel(m, b, a)));
        sol.cumulative_power[k] = u;
        sol.power_density[k] = power_density_rho(m, b, a, u);
        sol.distortion[k] = (acc_d + sol.gamma_o * std::exp(lpo)) *
                            std::exp(-log_d_kernel(m, b, a, sol.gamma_o, lpo));
        if (k == i_p)
            d_at_p = sol.distortion[k];
    }
    sol.distortion[i_o] = sol.gamma_o * std::exp(lpo);
    if (i_o > i_p) // one-sided active limit; stays 0 when no region is active
        sol.power_density[i_o] = power_density_rho(m, b, sol.gamma_o, 0.0);

    const double surv_p = m.survival(sol.gamma_p);
    for (size_t k = 0; k < i_p; ++k) {
        // exhausted region: all the budget, no density, distortion grows by
        // the undecodable mass between g and gamma_P
        sol.cumulative_power[k] = p;
        sol.distortion[k] = d_at_p + (m.survival(grid[k]) - surv_p);
        sol.weight[k] = weight_w(m, b, grid[k], p, sol.gamma_o);
    }
    for (size_t k = i_p; k <= i_o; ++k)
        sol.weight[k] = weight_w(m, b, grid[k], sol.cumulative_power[k], sol.gamma_o);
    for (size_t k = i_o + 1; k < n; ++k) {
        sol.weight[k] = m.survival(grid[k]);
        sol.distortion[k] = m.survival(grid[k]);
    }

    sol.expected_distortion = m.cdf(sol.gamma_p) + d_at_p;
    return sol;
}

} // namespace lbcopt::continuum
