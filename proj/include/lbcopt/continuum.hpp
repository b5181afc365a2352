#pragma once

#include "lbcopt/channel.hpp"
#include "lbcopt/fading.hpp"
#include "lbcopt/numerics.hpp"

#include <span>
#include <vector>

namespace lbcopt::continuum {

// Continuum limit of the layered allocation: one infinitesimal layer per
// gain value. The optimal cumulative power T*(g) has three regions,
//
//     T*(g) = P          g <  gamma_P   (budget exhausted)
//     T*(g) = U(g)       gamma_P <= g <= gamma_o
//     T*(g) = 0          g >  gamma_o   (gains beyond the boundary are idle)
//
// where U is the unconstrained profile vanishing at gamma_o and gamma_P is
// where it meets the budget.

struct GammaORoot {
    double value = 0.0;        // largest root when several exist
    bool multiple_roots = false;
};

// Upper boundary of the active gain region: largest root of
// g*f(g) - (1 - F(g)) = 0, located by a 4096-point log-grid sign scan
// followed by Brent refinement to 1e-12 relative.
GammaORoot solve_gamma_o(const FadingModel& model);

// Unconstrained cumulative power at gain g in (0, gamma_o], by adaptive
// quadrature of the closed-form integral
//   U(g) = Int_g^gamma_o (1/s)(2/s + f'/f) [s^2 f(s)]^(1/(1+b)) ds
//          / ((1+b) [g^2 f(g)]^(1/(1+b))).
// The kernel is evaluated in log space.
double cumulative_power_u(const FadingModel& model, double bandwidth_ratio, double gain,
                          double gamma_o, const num::QuadratureOptions& quad = {});

// Same profile from the governing ODE
//   U' = -((2/g + f'/f)/(1+b)) (U + 1/g),  U(gamma_o) = 0,
// integrated by RK4 with step halving along `grid` (strictly descending,
// grid[0] = gamma_o). An independent cross-check of the quadrature route;
// the grid must stay above 1e-8 * mean gain to keep clear of the g -> 0
// singularity.
std::vector<double> cumulative_power_u_ode(const FadingModel& model, double bandwidth_ratio,
                                           std::span<const double> grid, double ode_tol = 1e-10);

// Power density rho*(g) = -dT*/dg on the active region, analytic in U:
//   rho = ((2/g + f'/f)/(1+b)) (U + 1/g).
double power_density_rho(const FadingModel& model, double bandwidth_ratio, double gain,
                         double u_at_gain);

// Budget boundary: the gain where U(g) = P. Brackets by shrinking the lower
// endpoint geometrically from 1e-3 * mean gain; throws SolverError if no
// bracket is found above the hard floor 1e-12 * mean gain.
double solve_gamma_p(const FadingModel& model, double bandwidth_ratio, double power,
                     double gamma_o);

// Cumulative distortion D(g) carried by layers at gains >= g, closed form
//   D(g) = (Int_g^gamma_o f(s) k(s) ds + gamma_o f(gamma_o)) / k(g),
//   k(s) = [(s/gamma_o)^2 f(s)/f(gamma_o)]^(-b/(1+b)),
// with D(gamma_o) = gamma_o f(gamma_o).
double distortion_profile_d(const FadingModel& model, double bandwidth_ratio, double gain,
                            double gamma_o, const num::QuadratureOptions& quad = {});

// ODE route for the same profile: D' = (b/(1+b))(2/g + f'/f) D - f along a
// strictly descending grid starting at gamma_o.
std::vector<double> distortion_profile_d_ode(const FadingModel& model, double bandwidth_ratio,
                                             std::span<const double> grid,
                                             double ode_tol = 1e-10);

// Marginal-utility weight of the layer at gain g: g f(g) (1 + g U)^(1+b)
// on the active region, 1 - F(g) on the idle region above gamma_o. The two
// branches meet at gamma_o.
double weight_w(const FadingModel& model, double bandwidth_ratio, double gain,
                double u_at_gain, double gamma_o);

struct ContinuumSolution {
    double gamma_o = 0.0;
    double gamma_p = 0.0;
    double expected_distortion = 1.0; // F(gamma_P) + D(gamma_P)
    bool multiple_gamma_o_roots = false;

    // Profiles sampled on an ascending log grid spanning
    // [max(gamma_P/2, 1e-6*mean), 1.5*gamma_o] with gamma_P and gamma_o
    // inserted as exact nodes. cumulative_power holds the clamped T*.
    std::vector<double> grid;
    std::vector<double> cumulative_power;
    std::vector<double> power_density;   // 0 outside [gamma_P, gamma_o]
    std::vector<double> distortion;      // D, extended by F below gamma_P and 1-F above gamma_o
    std::vector<double> weight;

    ChannelConfig config;
};

// Full solve: boundary roots, profile sampling, minimum expected distortion.
ContinuumSolution solve(const ChannelConfig& config);

} // namespace lbcopt::continuum
