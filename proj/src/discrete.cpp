#include "lbcopt/discrete.hpp"
#include "lbcopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lbcopt::discrete {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_tabulated(const FadingModel& m, const char* op) {
    if (m.kind() != FadingKind::tabulated_discrete)
        throw std::invalid_argument(std::string(op) + ": needs a tabulated discrete model");
}

void require_b(double b, const char* op) {
    if (!(b > 0.0) || !std::isfinite(b))
        throw std::invalid_argument(std::string(op) + ": bandwidth ratio must be > 0");
}

// Exact 1-D minimizer of (1+gl*T)^b * (pl + (1+gh*T)^-b * wh) over T >= 0.
// Shared by the recursion step and the coordinate-descent fallback.
std::optional<double> step_impl(double gl, double pl, double gh, double wh, double b) {
    if (gl == 0.0)
        return std::nullopt; // objective strictly decreasing, caller clamps
    const double bracket = wh * (gh - gl) / (gl * pl);
    if (bracket <= 1.0)
        return 0.0;
    return std::expm1(std::log(bracket) / (1.0 + b)) / gh;
}

double distortion_of(std::span<const double> g, std::span<const double> p,
                     std::span<const double> T, double b) {
    double log_prod = 0.0, total = 0.0;
    const std::size_t m = g.size();
    for (std::size_t i = 0; i < m; ++i) {
        const double t_next = (i + 1 < m) ? T[i + 1] : 0.0;
        log_prod += -b * (std::log1p(g[i] * T[i]) - std::log1p(g[i] * t_next));
        total += p[i] * std::exp(log_prod);
    }
    return total;
}

void fill_derived(DiscreteLayering& out) {
    const std::size_t m = out.gains.size();
    out.layer_power.resize(m);
    out.rate_bits.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double t_next = (i + 1 < m) ? out.cumulative_power[i + 1] : 0.0;
        out.layer_power[i] = std::max(0.0, out.cumulative_power[i] - t_next);
        out.rate_bits[i] = layer_rate(out.gains[i], out.layer_power[i], t_next);
    }
    out.expected_distortion = distortion_of(out.gains, out.probabilities,
                                            out.cumulative_power, out.bandwidth_ratio);
}

// One refinement sweep over the interior boundaries T_1..T_{M-1} (T_0 stays
// at the budget): a per-coordinate Gauss-Seidel pass followed by a pass that
// moves each maximal run of tied boundaries as a single block. Both are
// needed: the coordinate step cannot descend along a ridge where adjacent
// boundaries coincide (there the pooled two-layer objective governs the
// common value), and the block step cannot split a tie that should separate.
// Every update is an exact 1-D minimization over its feasible segment, so
// the objective never increases. Returns the distortion after the sweep.
//
// Both passes run top-down keeping the aggregate weight of the layers above,
// S_k = p_k + r_{k+1}^{-b} S_{k+1}, updated incrementally (O(M) per sweep).
double refine_sweep(std::span<const double> g, std::span<const double> p,
                    std::vector<double>& T, double b) {
    const std::size_t m = g.size();
    const auto ratio_pow = [&](std::size_t k, double t_k, double t_k1) {
        return std::exp(-b * (std::log1p(g[k] * t_k) - std::log1p(g[k] * t_k1)));
    };

    double s_above = 0.0; // S_{i+1} entering iteration i
    for (std::size_t i = m - 1; i >= 1; --i) {
        const double t_next = (i + 1 < m) ? T[i + 1] : 0.0;
        const double t_next2 = (i + 2 < m) ? T[i + 2] : 0.0;
        const double s_i =
            (i + 1 < m) ? p[i] + ratio_pow(i + 1, t_next, t_next2) * s_above : p[i];
        const double w_eff = s_i * std::exp(b * std::log1p(g[i] * t_next));
        const auto t_star = step_impl(g[i - 1], p[i - 1], g[i], w_eff, b);
        T[i] = t_star ? std::clamp(*t_star, t_next, T[i - 1]) : T[i - 1];
        s_above = s_i;
    }

    s_above = 0.0; // S_{j+1} entering the block whose top boundary is j
    std::size_t j = m - 1;
    while (j >= 1) {
        std::size_t i = j;
        while (i > 1 && T[i - 1] == T[j])
            --i;
        const double t_below = (j + 1 < m) ? T[j + 1] : 0.0;
        const double t_below2 = (j + 2 < m) ? T[j + 2] : 0.0;
        const double s_j =
            (j + 1 < m) ? p[j] + ratio_pow(j + 1, t_below, t_below2) * s_above : p[j];
        double pool = 0.0;
        for (std::size_t k = i - 1; k < j; ++k)
            pool += p[k];
        const double w_eff = s_j * std::exp(b * std::log1p(g[j] * t_below));
        const auto t_star = step_impl(g[i - 1], pool, g[j], w_eff, b);
        const double t = t_star ? std::clamp(*t_star, t_below, T[i - 1]) : T[i - 1];
        for (std::size_t k = i; k <= j; ++k)
            T[k] = t;
        double s = s_j;
        for (std::size_t k = j; k-- > i;)
            s = p[k] + ratio_pow(k + 1, T[k + 1], (k + 2 < m) ? T[k + 2] : 0.0) * s;
        s_above = s;
        j = i - 1;
    }
    return distortion_of(g, p, T, b);
}

} // namespace

double layer_rate(double gain, double layer_power, double interference) {
    if (!(gain >= 0.0) || !(layer_power >= 0.0) || !(interference >= 0.0))
        throw std::domain_error("layer_rate: gain, power, interference must be >= 0");
    return std::log2(1.0 + gain * layer_power / (1.0 + gain * interference));
}

double expected_distortion_of_allocation(std::span<const double> gains,
                                         std::span<const double> probabilities,
                                         std::span<const double> cumulative_power,
                                         double bandwidth_ratio) {
    require_b(bandwidth_ratio, "expected_distortion_of_allocation");
    const std::size_t m = gains.size();
    if (m == 0 || probabilities.size() != m || cumulative_power.size() != m)
        throw std::invalid_argument(
            "expected_distortion_of_allocation: inconsistent state/allocation sizes");
    const double scale = std::max(1.0, cumulative_power[0]);
    for (std::size_t i = 0; i + 1 < m; ++i)
        if (cumulative_power[i + 1] > cumulative_power[i] + 1e-9 * scale)
            throw std::invalid_argument(
                "expected_distortion_of_allocation: cumulative power must be nonincreasing");
    return distortion_of(gains, probabilities, cumulative_power, bandwidth_ratio);
}

std::optional<double> unconstrained_step(double gain_low, double p_low, double gain_high,
                                         double w_high, double bandwidth_ratio) {
    require_b(bandwidth_ratio, "unconstrained_step");
    if (!(gain_low >= 0.0) || !(gain_high > gain_low))
        throw std::invalid_argument("unconstrained_step: need 0 <= gain_low < gain_high");
    if (!(p_low > 0.0) || !(w_high > 0.0))
        throw std::invalid_argument("unconstrained_step: p_low and w_high must be > 0");
    return step_impl(gain_low, p_low, gain_high, w_high, bandwidth_ratio);
}

double weight_update(double gain_low, double p_low, double gain_high, double w_high,
                     double boundary_power, double bandwidth_ratio) {
    require_b(bandwidth_ratio, "weight_update");
    if (!(gain_low >= 0.0) || !(gain_high > gain_low))
        throw std::invalid_argument("weight_update: need 0 <= gain_low < gain_high");
    if (!(p_low > 0.0) || !(w_high > 0.0) || !(boundary_power >= 0.0))
        throw std::invalid_argument("weight_update: p_low, w_high > 0 and boundary power >= 0");
    const double b = bandwidth_ratio;
    return std::exp(b * std::log1p(gain_low * boundary_power)) *
           (p_low + std::exp(-b * std::log1p(gain_high * boundary_power)) * w_high);
}

DiscreteLayering solve_discrete(const FadingModel& states, double power_budget,
                                double bandwidth_ratio) {
    require_tabulated(states, "solve_discrete");
    require_b(bandwidth_ratio, "solve_discrete");
    if (!(power_budget >= 0.0) || !std::isfinite(power_budget))
        throw std::invalid_argument("solve_discrete: power budget must be >= 0 and finite");

    DiscreteLayering out;
    out.gains = states.gains();
    out.probabilities = states.probabilities();
    out.power_budget = power_budget;
    out.bandwidth_ratio = bandwidth_ratio;
    const std::size_t m = out.gains.size();
    const auto& g = out.gains;
    const auto& p = out.probabilities;

    out.weights.assign(m, 0.0);
    out.weights[m - 1] = p[m - 1];
    std::vector<double> uhat(m, kInf); // uhat[i]: unconstrained power for layers i..M-1
    for (std::size_t i = m - 1; i >= 1; --i) {
        const auto step = step_impl(g[i - 1], p[i - 1], g[i], out.weights[i], bandwidth_ratio);
        uhat[i] = step ? *step : kInf;
        if (step)
            out.weights[i - 1] = weight_update(g[i - 1], p[i - 1], g[i], out.weights[i], *step,
                                               bandwidth_ratio);
        // gain_low = 0 can only be the bottom boundary; its weight is filled
        // in below once the clamped power there is known.
    }

    // The recursion is optimal when the unconstrained boundary powers are
    // nonincreasing toward higher gains (mirrors the continuum profile).
    bool monotone = true;
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double tol = 1e-10 * std::max({uhat[i], uhat[i + 1], 1e-300});
        if (uhat[i + 1] > uhat[i] + tol) {
            monotone = false;
            break;
        }
    }

    out.cumulative_power.assign(m, power_budget);
    for (std::size_t i = 1; i < m; ++i)
        out.cumulative_power[i] = std::min(uhat[i], out.cumulative_power[i - 1]);

    if (!monotone) {
        out.used_fallback = true;
        double prev = distortion_of(g, p, out.cumulative_power, bandwidth_ratio);
        for (int sweep = 0; sweep < 200; ++sweep) {
            const double cur = refine_sweep(g, p, out.cumulative_power, bandwidth_ratio);
            if (prev - cur <= 1e-14 * std::max(1.0, prev))
                break;
            prev = cur;
        }
    }

    if (g[0] == 0.0 && m >= 2)
        out.weights[0] = weight_update(g[0], p[0], g[1], out.weights[1],
                                       out.cumulative_power[1], bandwidth_ratio);
    out.power_exhausted_at_top =
        m >= 2 && out.cumulative_power[m - 1] >= power_budget && power_budget > 0.0;
    fill_derived(out);
    return out;
}

DiscreteLayering brute_force_oracle(const FadingModel& states, double power_budget,
                                    double bandwidth_ratio, int grid_points) {
    require_tabulated(states, "brute_force_oracle");
    require_b(bandwidth_ratio, "brute_force_oracle");
    if (!(power_budget >= 0.0) || !std::isfinite(power_budget))
        throw std::invalid_argument("brute_force_oracle: power budget must be >= 0 and finite");
    if (grid_points < 2)
        throw std::invalid_argument("brute_force_oracle: need at least 2 grid points");
    const std::size_t m = states.state_count();
    if (m > 4)
        throw std::invalid_argument("brute_force_oracle: limited to 4 states");

    const auto& g = states.gains();
    const auto& p = states.probabilities();
    const int n = grid_points;
    const double b = bandwidth_ratio;

    // Boundary powers live on a shared grid t_k = P*k/(n-1). Tabulating
    // (1+g_i t_k)^{+-b} once turns each candidate into a handful of
    // multiplies, which is what makes the exhaustive search affordable.
    std::vector<double> t(n);
    for (int k = 0; k < n; ++k)
        t[k] = power_budget * k / (n - 1);
    std::vector<std::vector<double>> up(m), dn(m);
    for (std::size_t i = 0; i < m; ++i) {
        up[i].resize(n);
        dn[i].resize(n);
        for (int k = 0; k < n; ++k) {
            const double l = std::log1p(g[i] * t[k]);
            up[i][k] = std::exp(b * l);
            dn[i][k] = std::exp(-b * l);
        }
    }

    double best = kInf;
    int best_k[4] = {n - 1, 0, 0, 0}; // T_0 fixed at the full budget
    const int top = n - 1;
    if (m == 1) {
        best = p[0] * dn[0][top];
    } else if (m == 2) {
        for (int k1 = 0; k1 <= top; ++k1) {
            const double a0 = dn[0][top] * up[0][k1];
            const double e = a0 * (p[0] + p[1] * dn[1][k1]);
            if (e < best) {
                best = e;
                best_k[1] = k1;
            }
        }
    } else if (m == 3) {
        for (int k1 = 0; k1 <= top; ++k1) {
            const double a0 = dn[0][top] * up[0][k1];
            for (int k2 = 0; k2 <= k1; ++k2) {
                const double a01 = a0 * dn[1][k1] * up[1][k2];
                const double e = a0 * p[0] + a01 * (p[1] + p[2] * dn[2][k2]);
                if (e < best) {
                    best = e;
                    best_k[1] = k1;
                    best_k[2] = k2;
                }
            }
        }
    } else {
        for (int k1 = 0; k1 <= top; ++k1) {
            const double a0 = dn[0][top] * up[0][k1];
            for (int k2 = 0; k2 <= k1; ++k2) {
                const double a01 = a0 * dn[1][k1] * up[1][k2];
                const double e01 = a0 * p[0] + a01 * p[1];
                for (int k3 = 0; k3 <= k2; ++k3) {
                    const double a012 = a01 * dn[2][k2] * up[2][k3];
                    const double e = e01 + a012 * (p[2] + p[3] * dn[3][k3]);
                    if (e < best) {
                        best = e;
                        best_k[1] = k1;
                        best_k[2] = k2;
                        best_k[3] = k3;
                    }
                }
            }
        }
    }

    DiscreteLayering out;
    out.gains = g;
    out.probabilities = p;
    out.power_budget = power_budget;
    out.bandwidth_ratio = b;
    out.cumulative_power.resize(m);
    for (std::size_t i = 0; i < m; ++i)
        out.cumulative_power[i] = t[best_k[i]];
    out.weights.assign(m, 0.0);
    out.power_exhausted_at_top =
        m >= 2 && out.cumulative_power[m - 1] >= power_budget && power_budget > 0.0;
    fill_derived(out);
    return out;
}

} // namespace lbcopt::discrete
