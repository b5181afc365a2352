#pragma once

#include "lbcopt/continuum.hpp"
#include "lbcopt/discrete.hpp"
#include "lbcopt/fading.hpp"

#include <cstdint>
#include <random>

namespace lbcopt::mc {

// Randomness contract: every estimate derives its draws from mt19937_64
// generators seeded through splitmix64, one per fixed substream, so results
// are bit-reproducible for a given seed on any platform and independent of
// how the substreams are scheduled.
inline constexpr const char* kRngAlgorithm =
    "mt19937_64 / splitmix64 substream seeding / inverse-cdf exponential";
inline constexpr int kSubstreams = 64;

std::uint64_t splitmix64(std::uint64_t x);
std::mt19937_64 substream_rng(std::uint64_t seed, std::uint64_t substream);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
};

// One channel power-gain draw. Erlang models average L unit exponentials
// (scaled to the mean gain); tabulated models pick a state by inverse cdf.
double sample_gain(const FadingModel& model, std::mt19937_64& rng);

// End-to-end distortion seen by a receiver realizing gain g.
// Discrete: 2^(-b * sum of decodable layer rates), layers with gain_i <= g.
// Continuum: exp(-b * realized rate in nats) off the sampled profiles.
double realized_distortion(const discrete::DiscreteLayering& layering, double gain);
double realized_distortion(const continuum::ContinuumSolution& solution, double gain);

// Sample mean and standard error over n draws from the channel in
// solution.config / `channel`.
McEstimate estimate_expected_distortion(const continuum::ContinuumSolution& solution,
                                        std::uint64_t n_samples, std::uint64_t seed);
McEstimate estimate_expected_distortion(const discrete::DiscreteLayering& layering,
                                        const FadingModel& channel, std::uint64_t n_samples,
                                        std::uint64_t seed);

} // namespace lbcopt::mc
