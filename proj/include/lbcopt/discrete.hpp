#pragma once

#include "lbcopt/fading.hpp"

#include <optional>
#include <span>
#include <vector>

namespace lbcopt::discrete {

// Optimal superposition power split for a finite fading-state list. Layer i
// targets state gain_i; a receiver that realizes gain g decodes every layer
// with gain_i <= g, stripping decoded layers and treating the rest as noise.
//
// cumulative_power[i] is the power spent on layers i..M-1 (so [0] is the
// whole budget and the implied element past the end is 0); layer_power and
// rate_bits are per layer. Rates use the realized gain of the layer's own
// target state.
struct DiscreteLayering {
    std::vector<double> gains;
    std::vector<double> probabilities;
    std::vector<double> cumulative_power;
    std::vector<double> layer_power;
    std::vector<double> rate_bits;
    std::vector<double> weights;  // top-down recursion weights W_i
    double expected_distortion = 1.0;
    double power_budget = 0.0;
    double bandwidth_ratio = 1.0;
    bool used_fallback = false;          // coordinate descent had to refine
    bool power_exhausted_at_top = false; // budget ran out at the highest layer
};

// Shannon rate of one layer in bits per channel use: the layer's power is
// seen at gain `gain` against noise 1 plus the power of the layers above it.
double layer_rate(double gain, double layer_power, double interference);

// Mean end-to-end distortion of an arbitrary feasible allocation
// (cumulative_power nonincreasing, trailing implied 0). Accumulates the
// per-state log-distortions so long state lists do not lose precision.
double expected_distortion_of_allocation(std::span<const double> gains,
                                         std::span<const double> probabilities,
                                         std::span<const double> cumulative_power,
                                         double bandwidth_ratio);

// Stationary point of the two-layer subproblem: power T shared between a
// lower layer (gain_low, probability mass p_low) and everything above it
// (gain_high, aggregated weight w_high):
//     T* = (1/gain_high) * ([w_high*(gain_high-gain_low)/(gain_low*p_low)]^(1/(1+b)) - 1)
// clamped at 0 when the bracket is <= 1. Returns nullopt when gain_low = 0,
// where the objective is strictly decreasing in T and the caller must clamp
// to the power it has available.
std::optional<double> unconstrained_step(double gain_low, double p_low, double gain_high,
                                         double w_high, double bandwidth_ratio);

// Weight carried one layer down the recursion once the layer boundary power
// T is fixed: w_low = (1 + gain_low*T)^b * (p_low + (1 + gain_high*T)^-b * w_high).
double weight_update(double gain_low, double p_low, double gain_high, double w_high,
                     double boundary_power, double bandwidth_ratio);

// Full solve for a tabulated model: top-down unconstrained recursion, then
// budget clamping from the bottom. If the unconstrained boundary powers come
// out non-monotone (beyond 1e-10 relative) the result is refined by exact
// per-coordinate descent and flagged, not failed.
DiscreteLayering solve_discrete(const FadingModel& states, double power_budget,
                                double bandwidth_ratio);

// Exhaustive nested grid search over the layer boundaries, M <= 4 states
// (cost grows as grid_points^(M-1)). Independent of the recursion; exists to
// validate it.
DiscreteLayering brute_force_oracle(const FadingModel& states, double power_budget,
                                    double bandwidth_ratio, int grid_points);

} // namespace lbcopt::discrete
