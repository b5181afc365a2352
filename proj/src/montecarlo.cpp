#include "lbcopt/montecarlo.hpp"
#include "lbcopt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace lbcopt::mc {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::mt19937_64 substream_rng(std::uint64_t seed, std::uint64_t substream) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(substream)));
}

namespace {

// uniform in (0, 1], then inverse cdf; avoids distribution objects so the
// draw sequence is pinned down by the standard's mt19937_64 definition
double unit_exponential(std::mt19937_64& rng) {
    const double u = ((rng() >> 11) + 1.0) * 0x1.0p-53;
    return -std::log(u);
}

McEstimate run_chunks(const std::function<double(std::mt19937_64&)>& draw_one,
                      std::uint64_t n_samples, std::uint64_t seed) {
    if (n_samples == 0)
        throw std::invalid_argument("estimate_expected_distortion: need at least one sample");
    double sums[kSubstreams] = {};
    double sumsqs[kSubstreams] = {};
    const std::uint64_t base = n_samples / kSubstreams;
    const std::uint64_t extra = n_samples % kSubstreams;
    for (int c = 0; c < kSubstreams; ++c) {
        const std::uint64_t cnt = base + (static_cast<std::uint64_t>(c) < extra ? 1 : 0);
        auto rng = substream_rng(seed, static_cast<std::uint64_t>(c));
        double s = 0.0, s2 = 0.0;
        for (std::uint64_t i = 0; i < cnt; ++i) {
            const double d = draw_one(rng);
            s += d;
            s2 += d * d;
        }
        sums[c] = s;
        sumsqs[c] = s2;
    }
    double sum = 0.0, sumsq = 0.0;
    for (int c = 0; c < kSubstreams; ++c) {
        sum += sums[c];
        sumsq += sumsqs[c];
    }
    McEstimate est;
    est.samples = n_samples;
    est.seed = seed;
    est.mean = sum / static_cast<double>(n_samples);
    if (n_samples > 1) {
        const double nd = static_cast<double>(n_samples);
        const double var = std::max(0.0, (sumsq - nd * est.mean * est.mean) / (nd - 1.0));
        est.std_error = std::sqrt(var / nd);
    }
    return est;
}

} // namespace

double sample_gain(const FadingModel& model, std::mt19937_64& rng) {
    if (model.is_erlang()) {
        const int l = model.diversity();
        double acc = 0.0;
        for (int i = 0; i < l; ++i)
            acc += unit_exponential(rng);
        return acc * model.mean_gain() / l;
    }
    const double u = ((rng() >> 11) + 1.0) * 0x1.0p-53;
    const auto& p = model.probabilities();
    double cum = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        cum += p[i];
        if (u <= cum)
            return model.gains()[i];
    }
    return model.gains().back();
}

double realized_distortion(const discrete::DiscreteLayering& layering, double gain) {
    if (!(gain >= 0.0))
        throw std::domain_error("realized_distortion: gain must be >= 0");
    double rate_bits = 0.0;
    for (size_t i = 0; i < layering.gains.size() && layering.gains[i] <= gain; ++i)
        rate_bits += layering.rate_bits[i];
    return std::exp2(-layering.bandwidth_ratio * rate_bits);
}

double realized_distortion(const continuum::ContinuumSolution& solution, double gain) {
    const baselines::RateProfile rate(solution.grid, solution.cumulative_power,
                                      solution.power_density);
    return std::exp(-solution.config.bandwidth_ratio * rate.at(gain));
}

McEstimate estimate_expected_distortion(const continuum::ContinuumSolution& solution,
                                        std::uint64_t n_samples, std::uint64_t seed) {
    const baselines::RateProfile rate(solution.grid, solution.cumulative_power,
                                      solution.power_density);
    const FadingModel& channel = solution.config.fading;
    const double b = solution.config.bandwidth_ratio;
    return run_chunks(
        [&](std::mt19937_64& rng) {
            return std::exp(-b * rate.at(sample_gain(channel, rng)));
        },
        n_samples, seed);
}

McEstimate estimate_expected_distortion(const discrete::DiscreteLayering& layering,
                                        const FadingModel& channel, std::uint64_t n_samples,
                                        std::uint64_t seed) {
    return run_chunks(
        [&](std::mt19937_64& rng) {
            return realized_distortion(layering, sample_gain(channel, rng));
        },
        n_samples, seed);
}

} // namespace lbcopt::mc
