#include <cmath>
#include <random>

#include "doctest.h"
#include "lastexit/mc_oracle.hpp"
#include "lastexit/model_core.hpp"

using namespace lastexit;

TEST_CASE("parameter invariants") {
    CHECK_THROWS_AS(MarketParams(0.0, 0.4), std::invalid_argument);
    CHECK_THROWS_AS(MarketParams(0.05, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Contract(2.0, 2.0, 1.0), std::invalid_argument);  // needs K > L
    CHECK_THROWS_AS(Contract(7.0, 2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Contract(-1.0, 2.0, 1.0), std::invalid_argument);

    const MarketParams p(0.05, 0.4);
    CHECK(p.alpha() == doctest::Approx(-0.375).epsilon(1e-15));
    CHECK_NOTHROW(p.require_perpetual_regime());
    CHECK_THROWS_AS(MarketParams(0.09, 0.4).require_perpetual_regime(), std::invalid_argument);

    const Contract perp(7.0, 2.0, std::nullopt);
    CHECK(perp.perpetual());
    CHECK_THROWS_AS(perp.expiry(), std::invalid_argument);
}

TEST_CASE("time grid") {
    CHECK_THROWS_AS(TimeGrid({0.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid({0.1, 1.0}), std::invalid_argument);
    const TimeGrid g = TimeGrid::sqrt_stretched(10.0, 100);
    CHECK(g.size() == 101);
    CHECK(g.nodes.front() == 0.0);
    CHECK(g.nodes.back() == 10.0);
    // uniform in sqrt(T - t)
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        const double d1 = std::sqrt(10.0 - g.nodes[i - 1]) - std::sqrt(10.0 - g.nodes[i]);
        const double d2 = std::sqrt(10.0 - g.nodes[i]) - std::sqrt(10.0 - g.nodes[i + 1]);
        CHECK(d1 == doctest::Approx(d2).epsilon(1e-9));
    }
}

TEST_CASE("normal cdf and pdf") {
    CHECK(norm_cdf(0.0) == 0.5);
    CHECK(norm_cdf(8.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm_cdf(-8.0) < 1e-12);
    // high-precision oracle value, frozen before the build
    CHECK(norm_cdf(1.0) == doctest::Approx(0.841344746068542949).epsilon(1e-14));
    CHECK(norm_pdf(0.0) == doctest::Approx(0.398942280401432678).epsilon(1e-14));
    CHECK(norm_pdf(3.0) == norm_pdf(-3.0));
    CHECK(norm_pdf(40.0) == 0.0);
    CHECK(norm_pdf(-40.0) == 0.0);

    // symmetry and monotonicity on a grid
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-6.0, 6.0);
    for (int i = 0; i < 200; ++i) {
        const double x = U(rng);
        CHECK(norm_cdf(-x) == doctest::Approx(1.0 - norm_cdf(x)).epsilon(1e-13));
        CHECK(norm_cdf(x + 1e-3) >= norm_cdf(x));
    }
}

TEST_CASE("cdf derivative matches pdf by central difference") {
    const double h = 1e-6;
    for (int i = -60; i <= 60; ++i) {
        const double x = i / 10.0;
        const double fd = (norm_cdf(x + h) - norm_cdf(x - h)) / (2 * h);
        CHECK(std::abs(fd - norm_pdf(x)) < 1e-6);
    }
}

TEST_CASE("lognormal partial expectation basics") {
    const MarketParams p(0.05, 0.4);
    CHECK_THROWS_AS(lognormal_partial_expectation(7.0, 1.0, 5.0, 4.0, 0, p),
                    std::invalid_argument);
    CHECK_THROWS_AS(lognormal_partial_expectation(7.0, 0.0, 0.0, std::nullopt, 0, p),
                    std::invalid_argument);

    // martingale property of the discounted price
    CHECK(lognormal_partial_expectation(7.0, 3.0, 0.0, std::nullopt, 1, p) ==
          doctest::Approx(7.0).epsilon(1e-14));
    // total discounted mass
    CHECK(lognormal_partial_expectation(7.0, 3.0, 0.0, std::nullopt, 0, p) ==
          doctest::Approx(std::exp(-0.05 * 3.0)).epsilon(1e-14));
    // nonnegative and below the discount bound
    CHECK(lognormal_partial_expectation(7.0, 1.0, 2.0, 7.0, 0, p) > 0.0);
    CHECK(lognormal_partial_expectation(7.0, 1.0, 2.0, 7.0, 0, p) <= std::exp(-0.05));
}

TEST_CASE("partial expectations over a partition sum to the whole") {
    const MarketParams p(0.03, 0.25);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.2, 5.0);
    for (int rep = 0; rep < 20; ++rep) {
        const double x0 = U(rng), u = 0.1 + U(rng);
        for (int pw : {0, 1}) {
            std::vector<double> cuts = {0.0, U(rng), U(rng) + 5.0, U(rng) + 10.0};
            double total = 0.0;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
                total += lognormal_partial_expectation(x0, u, cuts[i], cuts[i + 1], pw, p);
            total += lognormal_partial_expectation(x0, u, cuts.back(), std::nullopt, pw, p);
            const double whole =
                lognormal_partial_expectation(x0, u, 0.0, std::nullopt, pw, p);
            CHECK(std::abs(total - whole) < 1e-10);
        }
    }
}

TEST_CASE("partial expectation against a Monte Carlo oracle") {
    const MarketParams p(0.05, 0.4);
    const double x0 = 7.0, u = 1.0, a = 2.0, b = 7.0;
    McConfig mc;
    mc.n_paths = 1000000;
    mc.steps_per_year = 10;
    mc.seed = 99;
    const auto batch = simulate_paths(x0, u, mc, p);
    // one-step exact terminal draw: estimate E[e^{-ru} 1{a < X_u <= b}]
    double sum = 0.0, sum2 = 0.0;
    for (long j = 0; j < mc.n_paths; ++j) {
        const double xT = batch.path(j).back();
        const double v = (xT > a && xT <= b) ? std::exp(-p.r * u) : 0.0;
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / mc.n_paths;
    const double se =
        std::sqrt((sum2 / mc.n_paths - mean * mean) / (mc.n_paths - 1));
    const double exact = lognormal_partial_expectation(x0, u, a, b, 0, p);
    CHECK(std::abs(mean - exact) <= 3.0 * se);
}
