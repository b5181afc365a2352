#include "lbcopt/baselines.hpp"
#include "lbcopt/continuum.hpp"

#include "doctest.h"

#include <stdexcept>
#include "oracle_helpers.hpp"

#include <cmath>
#include <vector>

using namespace lbcopt;

TEST_CASE("full-CSI bound closed forms") {
    const auto ray = FadingModel::erlang(1, 1.0);
    CHECK(baselines::csit_expected_distortion({0.0, 1.0, ray}) ==
          doctest::Approx(1.0).epsilon(1e-10));
    // exp(1) * E1(1), the exponential-integral identity for unit power
    const double e1 = oracle::exp_integral_e1_at_one();
    CHECK(baselines::csit_expected_distortion({1.0, 1.0, ray}) ==
          doctest::Approx(std::exp(1.0) * e1).epsilon(1e-9));
    CHECK(std::abs(baselines::csit_expected_distortion({1.0, 1.0, ray}) -
                   0.5963473623231940) < 1e-12);
}

TEST_CASE("infinite diversity collapses the gain to its mean") {
    const auto ray = FadingModel::erlang(1, 1.0);
    CHECK(baselines::infinite_diversity_distortion({1.0, 2.0, ray}) == doctest::Approx(0.25));
    CHECK(baselines::infinite_diversity_distortion({0.0, 2.0, ray}) == 1.0);
    CHECK(baselines::infinite_diversity_distortion({9.0, 1.0, ray}) ==
          doctest::Approx(0.1).epsilon(1e-14));
    // the mean is what matters, not the diversity order
    CHECK(baselines::infinite_diversity_distortion({9.0, 1.0, FadingModel::erlang(4, 1.0)}) ==
          doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("capacity-maximizing cumulative power") {
    const auto ray = FadingModel::erlang(1, 1.0);
    CHECK(baselines::capacity_max_cumulative_power(ray, 0.5) ==
          doctest::Approx(2.0).epsilon(1e-12));
    const auto dual = FadingModel::erlang(2, 1.0);
    CHECK(baselines::capacity_max_cumulative_power(dual, 0.5) ==
          doctest::Approx(2.0).epsilon(1e-12));

    // shares the idle-boundary root: ~0 there, exactly 0 beyond
    const double go = continuum::solve_gamma_o(ray).value;
    CHECK(baselines::capacity_max_cumulative_power(ray, go) <= 1e-12);
    CHECK(baselines::capacity_max_cumulative_power(ray, go * 1.2) == 0.0);
    CHECK_THROWS_AS(baselines::capacity_max_cumulative_power(ray, 0.0), std::domain_error);
}

TEST_CASE("realized rate of a layered staircase matches the per-layer log sum") {
    // Piecewise-constant cumulative power with narrow linear ramps at the
    // layer gains. The ramp integral of s*rho/(1+s*T) telescopes to exactly
    // ln((1+g T_i)/(1+g T_{i+1})), so the accumulated rate must reproduce the
    // per-layer Shannon rates in nats.
    const std::vector<double> gains{0.5, 1.0, 2.0};
    const std::vector<double> T{1.0, 0.6, 0.25}; // cumulative, implied 0 after
    std::vector<double> grid, t_prof, rho_prof;
    grid.push_back(0.01);
    t_prof.push_back(T[0]);
    rho_prof.push_back(0.0);
    for (std::size_t i = 0; i < gains.size(); ++i) {
        const double t_next = (i + 1 < gains.size()) ? T[i + 1] : 0.0;
        const double width = 1e-7 * gains[i];
        const double lead = width * 1e-7; // plateau-to-ramp hand-off gap
        const double start = gains[i] - width;
        const double rho = (T[i] - t_next) / width;
        grid.push_back(start - lead);
        t_prof.push_back(T[i]);
        rho_prof.push_back(0.0);
        const int k_sub = 512;
        for (int k = 0; k <= k_sub; ++k) {
            const double s = start + width * k / k_sub;
            grid.push_back(s);
            t_prof.push_back(T[i] - rho * (s - start));
            rho_prof.push_back(rho);
        }
        grid.push_back(gains[i] + lead);
        t_prof.push_back(t_next);
        rho_prof.push_back(0.0);
    }
    grid.push_back(4.0);
    t_prof.push_back(0.0);
    rho_prof.push_back(0.0);

    const baselines::RateProfile rate(grid, t_prof, rho_prof);

    const auto log_sum = [&](std::size_t layers) {
        double nats = 0.0;
        for (std::size_t i = 0; i < layers; ++i) {
            const double t_next = (i + 1 < gains.size()) ? T[i + 1] : 0.0;
            nats += std::log1p(gains[i] * (T[i] - t_next) / (1.0 + gains[i] * t_next));
        }
        return nats;
    };
    CHECK(rate.at(0.2) == 0.0);                     // below every layer
    CHECK(std::abs(rate.at(0.7) - log_sum(1)) < 1e-6);
    CHECK(std::abs(rate.at(1.5) - log_sum(2)) < 1e-6);
    CHECK(std::abs(rate.at(3.0) - log_sum(3)) < 1e-6);
    CHECK(rate.at(50.0) == rate.at(4.0)); // saturates past the grid
    CHECK(rate.total() == doctest::Approx(log_sum(3)).epsilon(1e-6));
}

TEST_CASE("expected capacity and the small-ratio distortion expansion") {
    const auto ray = FadingModel::erlang(1, 1.0);

    SUBCASE("zero power carries zero capacity") {
        const auto sol = continuum::solve({0.0, 1.0, ray});
        const baselines::RateProfile rate(sol.grid, sol.cumulative_power, sol.power_density);
        CHECK(baselines::expected_capacity(ray, rate) == doctest::Approx(0.0));
    }
    SUBCASE("E[D] approaches 1 - b E[C] as b shrinks") {
        const double b = 1e-3;
        const auto sol = continuum::solve({1.0, b, ray});
        const baselines::RateProfile rate(sol.grid, sol.cumulative_power, sol.power_density);
        const double ec = baselines::expected_capacity(ray, rate);
        CHECK(ec > 0.0);
        CHECK(std::abs(sol.expected_distortion - (1.0 - b * ec)) <= 5.0 * b * b);
    }
    SUBCASE("the near-capacity-max profile carries more expected capacity") {
        const auto near_cap = continuum::solve({1.0, 1e-3, ray});
        const auto dist_min = continuum::solve({1.0, 2.0, ray});
        const baselines::RateProfile r_cap(near_cap.grid, near_cap.cumulative_power,
                                           near_cap.power_density);
        const baselines::RateProfile r_dist(dist_min.grid, dist_min.cumulative_power,
                                            dist_min.power_density);
        CHECK(baselines::expected_capacity(ray, r_cap) >
              baselines::expected_capacity(ray, r_dist));
    }
}

TEST_CASE("distortion exponent fitting") {
    SUBCASE("recovers an exact power law") {
        std::vector<baselines::SweepPoint> sweep;
        for (double db = 0.0; db <= 40.0; db += 5.0) {
            const double p = std::pow(10.0, db / 10.0);
            sweep.push_back({p, std::pow(p, -1.5)});
        }
        CHECK(baselines::fit_distortion_exponent(sweep) ==
              doctest::Approx(1.5).epsilon(1e-12));
    }
    SUBCASE("rejects narrow or short sweeps") {
        std::vector<baselines::SweepPoint> narrow;
        for (double db = 0.0; db <= 15.0; db += 5.0)
            narrow.push_back({std::pow(10.0, db / 10.0), 0.5});
        CHECK_THROWS_AS(baselines::fit_distortion_exponent(narrow), std::invalid_argument);

        std::vector<baselines::SweepPoint> few{{1.0, 0.5}, {10.0, 0.1}, {1000.0, 0.01}};
        CHECK_THROWS_AS(baselines::fit_distortion_exponent(few), std::invalid_argument);

        std::vector<baselines::SweepPoint> unsorted{
            {1.0, 0.5}, {100.0, 0.1}, {10.0, 0.2}, {1000.0, 0.01}};
        CHECK_THROWS_AS(baselines::fit_distortion_exponent(unsorted), std::invalid_argument);
    }
}
