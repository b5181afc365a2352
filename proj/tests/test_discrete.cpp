#include "lbcopt/discrete.hpp"
#include "lbcopt/fading.hpp"

#include "doctest.h"

#include <stdexcept>
#include "oracle_helpers.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace lbcopt;

namespace {

FadingModel states3(std::vector<double> g, std::vector<double> p) {
    return FadingModel::tabulated(std::move(g), std::move(p));
}

// The two-layer subproblem objective whose exact stationary point
// unconstrained_step returns: the weight carried below the boundary.
double boundary_objective(double gl, double pl, double gh, double wh, double b, double t) {
    return std::pow(1.0 + gl * t, b) * (pl + std::pow(1.0 + gh * t, -b) * wh);
}

} // namespace

TEST_CASE("layer rate closed forms") {
    CHECK(discrete::layer_rate(1.0, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(discrete::layer_rate(0.0, 5.0, 3.0) == 0.0);
    CHECK(discrete::layer_rate(1.0, 1.0, 1.0) ==
          doctest::Approx(0.5849625007211562).epsilon(1e-14)); // log2(1.5)
    CHECK_THROWS_AS(discrete::layer_rate(-1.0, 1.0, 0.0), std::domain_error);
}

TEST_CASE("expected distortion of a fixed allocation") {
    const std::vector<double> g{1.0, 2.0}, p{0.5, 0.5};

    SUBCASE("zero power gives distortion one") {
        const std::vector<double> t{0.0, 0.0};
        CHECK(discrete::expected_distortion_of_allocation(g, p, t, 1.0) == 1.0);
    }
    SUBCASE("single layer is (1+gP)^-b") {
        const std::vector<double> g1{1.0}, p1{1.0}, t1{1.0};
        CHECK(discrete::expected_distortion_of_allocation(g1, p1, t1, 1.0) ==
              doctest::Approx(0.5).epsilon(1e-14));
    }
    SUBCASE("two-layer value frozen from the direct per-receiver evaluation") {
        // gains {1,2}, T {1,0.5}, b=1: receiver 1 sees rate ln(4/3), receiver 2
        // adds ln 2, giving 0.5*(3/4) + 0.5*(3/8) = 0.5625
        const std::vector<double> t{1.0, 0.5};
        const double direct = oracle::layered_distortion_direct(g, p, t, 1.0);
        CHECK(direct == doctest::Approx(0.5625).epsilon(1e-14));
        CHECK(discrete::expected_distortion_of_allocation(g, p, t, 1.0) ==
              doctest::Approx(direct).epsilon(1e-13));
    }
    SUBCASE("stronger top receiver variant") {
        const std::vector<double> g2{1.0, 6.0}, t{1.0, 0.5};
        const double direct = oracle::layered_distortion_direct(g2, p, t, 1.0);
        CHECK(direct == doctest::Approx(0.46875).epsilon(1e-14));
        CHECK(discrete::expected_distortion_of_allocation(g2, p, t, 1.0) ==
              doctest::Approx(direct).epsilon(1e-13));
    }
    SUBCASE("rejects increasing cumulative power") {
        const std::vector<double> t{0.5, 1.0};
        CHECK_THROWS_AS(discrete::expected_distortion_of_allocation(g, p, t, 1.0),
                        std::invalid_argument);
    }
}

TEST_CASE("unconstrained step is the exact subproblem minimizer") {
    SUBCASE("bracket exactly one clamps to zero") {
        const auto t = discrete::unconstrained_step(1.0, 0.5, 2.0, 0.5, 1.0);
        REQUIRE(t.has_value());
        CHECK(*t == 0.0);
    }
    SUBCASE("below-boundary cases stay at zero") {
        // gain_low at or above w_high*(gain_high-gain_low)/p_low
        CHECK(*discrete::unconstrained_step(3.0, 0.5, 4.0, 1.0, 1.0) == 0.0);
        CHECK(*discrete::unconstrained_step(2.0, 1.0, 2.5, 2.0, 0.7) == 0.0);
    }
    SUBCASE("golden-section search confirms the closed form") {
        // bracket 4 at b=1: T* = (sqrt(4)-1)/2 = 0.5
        const auto t = discrete::unconstrained_step(1.0, 0.5, 2.0, 2.0, 1.0);
        REQUIRE(t.has_value());
        CHECK(*t == doctest::Approx(0.5).epsilon(1e-12));
        const double numeric = oracle::golden_section_minimize(
            [](double x) { return boundary_objective(1.0, 0.5, 2.0, 2.0, 1.0, x); }, 0.0, 10.0);
        CHECK(*t == doctest::Approx(numeric).epsilon(1e-6));
    }
    SUBCASE("halved aggregate weight shifts the boundary to (sqrt(2)-1)/2") {
        const auto t = discrete::unconstrained_step(1.0, 0.5, 2.0, 1.0, 1.0);
        REQUIRE(t.has_value());
        CHECK(*t == doctest::Approx(0.20710678118654752).epsilon(1e-12));
        const double numeric = oracle::golden_section_minimize(
            [](double x) { return boundary_objective(1.0, 0.5, 2.0, 1.0, 1.0, x); }, 0.0, 10.0);
        CHECK(*t == doctest::Approx(numeric).epsilon(1e-6));
    }
    SUBCASE("fractional bandwidth ratio") {
        const auto t = discrete::unconstrained_step(0.8, 0.3, 1.7, 0.9, 0.5);
        REQUIRE(t.has_value());
        const double numeric = oracle::golden_section_minimize(
            [](double x) { return boundary_objective(0.8, 0.3, 1.7, 0.9, 0.5, x); }, 0.0, 50.0);
        CHECK(*t == doctest::Approx(numeric).epsilon(1e-6));
    }
    SUBCASE("zero low gain has no finite minimizer") {
        CHECK_FALSE(discrete::unconstrained_step(0.0, 0.5, 1.0, 1.0, 1.0).has_value());
    }
    SUBCASE("argument validation") {
        CHECK_THROWS_AS(discrete::unconstrained_step(1.0, 0.0, 2.0, 1.0, 1.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(discrete::unconstrained_step(1.0, 0.5, 2.0, -1.0, 1.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(discrete::unconstrained_step(1.0, 0.5, 2.0, 1.0, 0.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(discrete::unconstrained_step(2.0, 0.5, 1.0, 1.0, 1.0),
                        std::invalid_argument);
    }
}

TEST_CASE("uniform-spacing specialization of the step is exact") {
    // With p_low = density * spacing and gain_high = gain_low + spacing, the
    // spacing cancels and the step's bracket reduces to w / (density *
    // gain_low). All inputs dyadic, so both routes must agree bit for bit.
    const double gain = 2.25, spacing = 0.25, density = 0.5, w = 3.0, b = 1.0;
    const double gain_low = gain - spacing; // 2.0
    const auto t = discrete::unconstrained_step(gain_low, density * spacing, gain, w, b);
    REQUIRE(t.has_value());
    const double reduced_bracket = w / (density * gain_low); // exactly 3.0
    const double expected = std::expm1(std::log(reduced_bracket) / (1.0 + b)) / gain;
    CHECK(*t == expected);
    CHECK(*t == doctest::Approx((std::sqrt(3.0) - 1.0) / 2.25).epsilon(1e-14));
}

TEST_CASE("weight update recursion") {
    CHECK(discrete::weight_update(1.0, 0.25, 2.0, 0.5, 0.0, 1.0) == doctest::Approx(0.75));
    // zero low gain drops the leading factor
    CHECK(discrete::weight_update(0.0, 0.25, 2.0, 1.0, 1.0, 1.0) ==
          doctest::Approx(0.25 + 1.0 / 3.0).epsilon(1e-14));
    // (1+1)^1 * (0.5 + 1/3) = 5/3
    CHECK(discrete::weight_update(1.0, 0.5, 2.0, 1.0, 1.0, 1.0) ==
          doctest::Approx(5.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("solve_discrete single layer takes the whole budget") {
    const auto sol = discrete::solve_discrete(states3({1.0}, {1.0}), 1.0, 1.0);
    CHECK(sol.cumulative_power[0] == 1.0);
    CHECK(sol.expected_distortion == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(sol.rate_bits[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_FALSE(sol.used_fallback);
}

TEST_CASE("solve_discrete matches the brute-force oracle") {
    SUBCASE("two states") {
        const auto states = states3({0.5, 2.0}, {0.5, 0.5});
        const auto sol = discrete::solve_discrete(states, 1.0, 1.0);
        const auto oracle_sol = discrete::brute_force_oracle(states, 1.0, 1.0, 2000);
        CHECK(sol.expected_distortion <= oracle_sol.expected_distortion + 1e-9);
        CHECK(std::abs(sol.expected_distortion - oracle_sol.expected_distortion) < 1e-5);
        // boundary within one grid cell of the closed form
        CHECK(std::abs(sol.cumulative_power[1] - oracle_sol.cumulative_power[1]) <
              1.0 / 1999.0 + 1e-12);
    }
    SUBCASE("three states") {
        const auto states = states3({0.3, 1.0, 3.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
        const auto sol = discrete::solve_discrete(states, 2.0, 1.0);
        const auto oracle_sol = discrete::brute_force_oracle(states, 2.0, 1.0, 2000);
        CHECK(sol.expected_distortion <= oracle_sol.expected_distortion + 1e-9);
        CHECK(std::abs(sol.expected_distortion - oracle_sol.expected_distortion) < 1e-5);
    }
    SUBCASE("four states, coarser grid") {
        const auto states = states3({0.2, 0.9, 1.8, 4.0}, {0.4, 0.3, 0.2, 0.1});
        const auto sol = discrete::solve_discrete(states, 1.5, 2.0);
        const auto oracle_sol = discrete::brute_force_oracle(states, 1.5, 2.0, 220);
        CHECK(sol.expected_distortion <= oracle_sol.expected_distortion + 1e-9);
        CHECK(std::abs(sol.expected_distortion - oracle_sol.expected_distortion) < 2e-4);
    }
    SUBCASE("oracle rejects more than four states") {
        const auto states = states3({0.1, 0.2, 0.3, 0.4, 0.5}, {0.2, 0.2, 0.2, 0.2, 0.2});
        CHECK_THROWS_AS(discrete::brute_force_oracle(states, 1.0, 1.0, 50),
                        std::invalid_argument);
    }
}

TEST_CASE("random instances: recursion never loses to the grid search") {
    std::mt19937_64 rng(20260814);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 2 + static_cast<int>(rng() % 2); // 2 or 3 states
        std::vector<double> g, p;
        double last = 0.05 + 0.4 * unif(rng);
        double psum = 0.0;
        for (int i = 0; i < m; ++i) {
            g.push_back(last);
            last += 0.15 + 1.2 * unif(rng);
            const double w = 0.1 + unif(rng);
            p.push_back(w);
            psum += w;
        }
        for (auto& x : p)
            x /= psum;
        const double budget = 0.25 + 1.75 * unif(rng);
        const double b = 0.5 + 1.5 * unif(rng);
        const auto states = FadingModel::tabulated(g, p);
        const auto sol = discrete::solve_discrete(states, budget, b);
        const auto oracle_sol = discrete::brute_force_oracle(states, budget, b, 2000);
        CHECK(sol.expected_distortion <= oracle_sol.expected_distortion + 1e-9);
        CHECK(std::abs(sol.expected_distortion - oracle_sol.expected_distortion) < 1e-5);
    }
}

TEST_CASE("distortion is nonincreasing in budget and bandwidth ratio") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> g, p;
        const int m = 2 + static_cast<int>(rng() % 4);
        double last = 0.1 + 0.3 * unif(rng);
        double psum = 0.0;
        for (int i = 0; i < m; ++i) {
            g.push_back(last);
            last += 0.1 + unif(rng);
            p.push_back(0.05 + unif(rng));
            psum += p.back();
        }
        for (auto& x : p)
            x /= psum;
        const auto states = FadingModel::tabulated(g, p);
        const double b = 0.5 + 2.0 * unif(rng);
        double prev = 2.0;
        for (double budget : {0.2, 0.5, 1.0, 2.0, 4.0}) {
            const double e = discrete::solve_discrete(states, budget, b).expected_distortion;
            CHECK(e <= prev + 1e-12);
            prev = e;
        }
        const double e_low_b = discrete::solve_discrete(states, 1.0, b).expected_distortion;
        const double e_high_b =
            discrete::solve_discrete(states, 1.0, b + 0.5).expected_distortion;
        CHECK(e_high_b <= e_low_b + 1e-12);
    }
}

TEST_CASE("gain/power rescaling leaves the distortion invariant") {
    const auto base = states3({0.4, 1.1, 2.6}, {0.3, 0.4, 0.3});
    const double e1 = discrete::solve_discrete(base, 1.3, 1.5).expected_distortion;
    const double c = 3.7;
    const auto scaled = states3({0.4 * c, 1.1 * c, 2.6 * c}, {0.3, 0.4, 0.3});
    const double e2 = discrete::solve_discrete(scaled, 1.3 / c, 1.5).expected_distortion;
    CHECK(e2 == doctest::Approx(e1).epsilon(1e-10));
}

TEST_CASE("zero-gain bottom state is harmless") {
    const auto states = states3({0.0, 1.0, 2.5}, {0.2, 0.5, 0.3});
    const auto sol = discrete::solve_discrete(states, 1.0, 1.0);
    CHECK(sol.rate_bits[0] == 0.0);
    CHECK(sol.cumulative_power[0] == 1.0);
    // all power flows to the positive-gain layers
    CHECK(sol.layer_power[0] == doctest::Approx(0.0));
    const auto oracle_sol = discrete::brute_force_oracle(states, 1.0, 1.0, 2000);
    CHECK(sol.expected_distortion <= oracle_sol.expected_distortion + 1e-9);
}

TEST_CASE("budget exhaustion at the top layer is flagged") {
    // overwhelming top state pulls every watt to the highest layer
    const auto states = states3({0.1, 8.0}, {0.05, 0.95});
    const auto sol = discrete::solve_discrete(states, 0.05, 1.0);
    CHECK(sol.power_exhausted_at_top);
    CHECK(sol.cumulative_power[1] == doctest::Approx(0.05));
    CHECK(sol.layer_power[0] == doctest::Approx(0.0));
}

TEST_CASE("non-monotone boundary candidates trigger the pooled fallback") {
    // A negligible middle state makes the raw recursion's boundary powers
    // cross: the optimum ties the two interior boundaries and moves them
    // together, which per-coordinate clamping alone cannot reach.
    const auto states = states3({1.0, 1.05, 8.0}, {0.699, 0.001, 0.3});
    const auto sol = discrete::solve_discrete(states, 2.0, 1.0);
    CHECK(sol.used_fallback);
    CHECK(sol.cumulative_power[1] == doctest::Approx(sol.cumulative_power[2]));
    const auto oracle_sol = discrete::brute_force_oracle(states, 2.0, 1.0, 2000);
    CHECK(sol.expected_distortion <= oracle_sol.expected_distortion + 1e-9);
    CHECK(std::abs(sol.expected_distortion - oracle_sol.expected_distortion) < 1e-5);
}
