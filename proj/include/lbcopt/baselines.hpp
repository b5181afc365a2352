#pragma once

#include "lbcopt/channel.hpp"
#include "lbcopt/fading.hpp"

#include <span>
#include <vector>

namespace lbcopt::baselines {

// Lower bound on any broadcast strategy: with the gain known at the
// transmitter the source is coded at exactly the realized capacity, giving
//   E[D] = Int f(g) (1 + g P)^(-b) dg
// over the truncated support.
double csit_expected_distortion(const ChannelConfig& config);

// Limit of infinitely many diversity branches: the gain hardens at its mean,
// distortion (1 + gbar P)^(-b).
double infinite_diversity_distortion(const ChannelConfig& config);

// Cumulative power profile that maximizes expected capacity instead of
// minimizing distortion (the b -> 0 limit of the distortion-optimal U):
//   T(g) = max(0, (1 - F(g) - g f(g)) / (g^2 f(g))).
double capacity_max_cumulative_power(const FadingModel& model, double gain);

// Realized rate r(g) in nats: the integral Int_0^g s rho(s)/(1 + s T(s)) ds
// accumulated per grid segment as log((1 + m T_lo)/(1 + m T_hi)) at the
// segment midpoint m. Keying off the continuous T keeps segments where T is
// flat at exactly zero rate, so the discontinuities of rho at the region
// boundaries cannot leak in. Zero below the sampled range, saturating above.
class RateProfile {
public:
    RateProfile(std::span<const double> grid, std::span<const double> cumulative_power,
                std::span<const double> power_density);
    double at(double gain) const;
    double total() const { return prefix_.back(); }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& prefix() const { return prefix_; }

private:
    std::vector<double> grid_, t_, rho_, prefix_;
};

double realized_rate(std::span<const double> grid, std::span<const double> cumulative_power,
                     std::span<const double> power_density, double gain);

// E[C] = Int f(g) r(g) dg, trapezoid on the profile grid plus the saturated
// tail r_total * (1 - F(grid_max)).
double expected_capacity(const FadingModel& model, const RateProfile& rate);

struct SweepPoint {
    double power;
    double expected_distortion;
};

// Least-squares slope of -ln E[D] against ln P over the top half of the
// log-power range. Needs at least 4 ascending points spanning >= 20 dB and
// at least 2 points in the top half; throws std::invalid_argument otherwise.
double fit_distortion_exponent(std::span<const SweepPoint> sweep);

} // namespace lbcopt::baselines
