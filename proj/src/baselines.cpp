#include "lbcopt/baselines.hpp"
#include "lbcopt/errors.hpp"
#include "lbcopt/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lbcopt::baselines {

double csit_expected_distortion(const ChannelConfig& config) {
    config.validate();
    if (!config.fading.is_erlang())
        throw std::invalid_argument("csit_expected_distortion: needs a density model");
    const FadingModel& m = config.fading;
    const double p = config.power;
    const double b = config.bandwidth_ratio;
    return num::integrate(
        [&](double g) { return m.pdf(g) * std::exp(-b * std::log1p(g * p)); }, 0.0,
        m.support_limit());
}

double infinite_diversity_distortion(const ChannelConfig& config) {
    config.validate();
    if (!config.fading.is_erlang())
        throw std::invalid_argument("infinite_diversity_distortion: needs a density model");
    return std::exp(-config.bandwidth_ratio *
                    std::log1p(config.fading.mean_gain() * config.power));
}

double capacity_max_cumulative_power(const FadingModel& model, double gain) {
    if (!model.is_erlang())
        throw std::invalid_argument("capacity_max_cumulative_power: needs a density model");
    if (!(gain > 0.0))
        throw std::domain_error("capacity_max_cumulative_power: gain must be > 0");
    const double f = model.pdf(gain);
    if (f <= 0.0)
        throw std::domain_error("capacity_max_cumulative_power: density vanishes at this gain");
    return std::max(0.0, (model.survival(gain) - gain * f) / (gain * gain * f));
}

RateProfile::RateProfile(std::span<const double> grid, std::span<const double> cumulative_power,
                         std::span<const double> power_density)
    : grid_(grid.begin(), grid.end()),
      t_(cumulative_power.begin(), cumulative_power.end()),
      rho_(power_density.begin(), power_density.end()) {
    const size_t n = grid_.size();
    if (n < 2 || t_.size() != n || rho_.size() != n)
        throw std::invalid_argument("RateProfile: inconsistent profile sizes");
    for (size_t i = 1; i < n; ++i)
        if (!(grid_[i] > grid_[i - 1]))
            throw std::invalid_argument("RateProfile: grid must be strictly ascending");
    prefix_.resize(n);
    prefix_[0] = 0.0;
    // Integrate s*(-dT/ds)/(1 + s T) per segment as the log ratio at the
    // segment midpoint. Keying off the continuous T instead of the sampled
    // rho makes flat segments contribute exactly zero, so the jump of rho
    // at the region boundaries cannot leak spurious rate.
    for (size_t i = 1; i < n; ++i) {
        const double m = 0.5 * (grid_[i - 1] + grid_[i]);
        prefix_[i] = prefix_[i - 1] +
                     std::log1p(m * (t_[i - 1] - t_[i]) / (1.0 + m * t_[i]));
    }
}

double RateProfile::at(double gain) const {
    if (!(gain >= 0.0))
        throw std::domain_error("RateProfile::at: gain must be >= 0");
    if (gain <= grid_.front())
        return 0.0;
    if (gain >= grid_.back())
        return prefix_.back();
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), gain);
    const size_t i = static_cast<size_t>(it - grid_.begin()); // grid_[i-1] <= gain < grid_[i]
    const double w = (gain - grid_[i - 1]) / (grid_[i] - grid_[i - 1]);
    const double t = t_[i - 1] + w * (t_[i] - t_[i - 1]);
    const double m = 0.5 * (grid_[i - 1] + gain);
    return prefix_[i - 1] + std::log1p(m * (t_[i - 1] - t) / (1.0 + m * t));
}

double realized_rate(std::span<const double> grid, std::span<const double> cumulative_power,
                     std::span<const double> power_density, double gain) {
    return RateProfile(grid, cumulative_power, power_density).at(gain);
}

double expected_capacity(const FadingModel& model, const RateProfile& rate) {
    if (!model.is_erlang())
        throw std::invalid_argument("expected_capacity: needs a density model");
    const auto& g = rate.grid();
    const auto& r = rate.prefix();
    double acc = 0.0;
    double prev = model.pdf(g[0]) * r[0];
    for (size_t i = 1; i < g.size(); ++i) {
        const double cur = model.pdf(g[i]) * r[i];
        acc += 0.5 * (prev + cur) * (g[i] - g[i - 1]);
        prev = cur;
    }
    return acc + rate.total() * model.survival(g.back());
}

double fit_distortion_exponent(std::span<const SweepPoint> sweep) {
    if (sweep.size() < 4)
        throw std::invalid_argument("fit_distortion_exponent: need at least 4 sweep points");
    for (size_t i = 0; i < sweep.size(); ++i) {
        if (!(sweep[i].power > 0.0) || !(sweep[i].expected_distortion > 0.0))
            throw std::invalid_argument(
                "fit_distortion_exponent: powers and distortions must be > 0");
        if (i > 0 && !(sweep[i].power > sweep[i - 1].power))
            throw std::invalid_argument("fit_distortion_exponent: powers must be ascending");
    }
    const double l_min = std::log10(sweep.front().power);
    const double l_max = std::log10(sweep.back().power);
    if (l_max - l_min < 2.0 - 1e-12)
        throw std::invalid_argument(
            "fit_distortion_exponent: sweep must span at least 20 dB of power");
    const double cut = 0.5 * (l_min + l_max) - 1e-12;

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (const auto& pt : sweep) {
        if (std::log10(pt.power) < cut)
            continue;
        const double x = std::log(pt.power);
        const double y = -std::log(pt.expected_distortion);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2)
        throw std::invalid_argument(
            "fit_distortion_exponent: fewer than 2 points in the top half of the range");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace lbcopt::baselines
