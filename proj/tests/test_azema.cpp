#include <cmath>
#include <random>

#include "doctest.h"
#include "lastexit/azema.hpp"

using namespace lastexit;

namespace {
const MarketParams params(0.05, 0.4);  // alpha = -0.375
const Contract contract(7.0, 2.0, 5.0);
}  // namespace

TEST_CASE("perpetual Z") {
    CHECK(z_perp(2.0, 2.0, params) == 1.0);
    CHECK(z_perp(4.0, 2.0, params) == 1.0);
    // frozen oracle: 2^{-0.375}
    CHECK(z_perp(1.0, 2.0, params) == doctest::Approx(0.771105412703970412).epsilon(1e-14));
    CHECK_THROWS_AS(z_perp(1.0, 2.0, MarketParams(0.09, 0.4)), std::invalid_argument);

    // Cauchy-Euler ODE residual with analytic derivatives, x < L
    for (double x : {0.2, 0.5, 1.0, 1.7, 1.99}) {
        const double res = params.r * x * z_perp_dx(x, 2.0, params) +
                           0.5 * params.sigma * params.sigma * x * x * z_perp_dxx(x, 2.0, params);
        CHECK(std::abs(res) < 1e-10);
    }
}

TEST_CASE("d1 d2") {
    CHECK_THROWS_AS(d1d2(5.0, 1.0, contract, params), std::invalid_argument);

    // frozen arithmetic oracle at r=0.05, sigma=0.4, L=2, x=1, T-t=1
    const auto d = d1d2(4.0, 1.0, contract, params);
    CHECK(d.d1 == doctest::Approx(-1.80786795139986327).epsilon(1e-14));
    CHECK(d.d2 == doctest::Approx(-1.65786795139986327).epsilon(1e-14));

    // at x = L the log term vanishes: d1 = (r - sigma^2/2) sqrt(T-t) / sigma, d2 = -d1
    const auto dl = d1d2(1.0, 2.0, contract, params);
    CHECK(dl.d1 == doctest::Approx(params.log_drift() * 2.0 / 0.4).epsilon(1e-13));
    CHECK(dl.d2 == doctest::Approx(-dl.d1).epsilon(1e-13));

    // identity e^{-d1^2/2} = (L/x)^alpha e^{-d2^2/2} on random points
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> Ux(0.05, 6.0), Ut(0.0, 4.99);
    for (int i = 0; i < 500; ++i) {
        const double x = Ux(rng), t = Ut(rng);
        const auto dd = d1d2(t, x, contract, params);
        const double lhs = std::exp(-0.5 * dd.d1 * dd.d1);
        const double rhs =
            std::pow(contract.level / x, params.alpha()) * std::exp(-0.5 * dd.d2 * dd.d2);
        CHECK(std::abs(lhs - rhs) < 1e-10);
    }
}

TEST_CASE("finite-horizon Z") {
    // terminal indicator
    CHECK(z(5.0, 0.9 * 2.0, contract, params) == 0.0);
    CHECK(z(5.0, 2.0, contract, params) == 1.0);
    CHECK(z(3.0, 3.0, contract, params) == 1.0);

    // in [0, 1]
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> Ux(0.05, 8.0), Ut(0.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const double v = z(Ut(rng), Ux(rng), contract, params);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }

    // long-horizon limit reaches the perpetual Z
    const Contract long_c(7.0, 2.0, 1e4);
    CHECK(std::abs(z(0.0, 1.0, long_c, params) - z_perp(1.0, 2.0, params)) < 1e-6);

    // monotone: nonincreasing in t, nondecreasing in x
    for (int i = 0; i < 200; ++i) {
        const double x = Ux(rng), t = std::min(Ut(rng), 4.9);
        CHECK(z(t + 0.05, x, contract, params) <= z(t, x, contract, params) + 1e-12);
        CHECK(z(t, x * 1.02, contract, params) >= z(t, x, contract, params) - 1e-12);
    }
}

TEST_CASE("Z derivatives") {
    CHECK_THROWS_AS(z_derivs(5.0, 2.0, contract, params), std::invalid_argument);

    const auto above = z_derivs(1.0, 4.0, contract, params);
    CHECK(above.z == 1.0);
    CHECK(above.z_t == 0.0);
    CHECK(above.z_x == 0.0);
    CHECK(above.z_xt == 0.0);
    CHECK_FALSE(above.left_limit_at_level);

    CHECK(z_derivs(1.0, 2.0, contract, params).left_limit_at_level);

    // frozen composition at r=0.05, sigma=0.4, L=2, x=1, T-t=1
    const auto zd = z_derivs(4.0, 1.0, contract, params);
    const auto d = d1d2(4.0, 1.0, contract, params);
    const double want = std::sqrt(2.0 / M_PI) * std::exp(-0.5 * d.d1 * d.d1) / 0.4 +
                        0.375 * std::pow(2.0, -0.375) * norm_cdf(d.d2);
    CHECK(zd.z_x == doctest::Approx(want).epsilon(1e-13));

    // signs and finite-difference cross-checks on a random grid
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> Ux(0.2, 1.95), Ut(0.0, 4.5);
    for (int i = 0; i < 200; ++i) {
        const double x = Ux(rng), t = Ut(rng);
        const auto g = z_derivs(t, x, contract, params);
        CHECK(g.z_x >= 0.0);
        CHECK(g.z_t <= 0.0);
        const double hx = 1e-5 * x;
        const double fd_x = (z(t, x + hx, contract, params) - z(t, x - hx, contract, params)) /
                            (2 * hx);
        CHECK(std::abs(fd_x - g.z_x) < 1e-6 * std::max(1.0, std::abs(g.z_x)));
        const double ht = 1e-6;
        const double fd_t = (z(t + ht, x, contract, params) - z(t - ht, x, contract, params)) /
                            (2 * ht);
        CHECK(std::abs(fd_t - g.z_t) < 1e-6 * std::max(1.0, std::abs(g.z_t)));
        const double fd_xt = (z_derivs(t + ht, x, contract, params).z_x -
                              z_derivs(t - ht, x, contract, params).z_x) /
                             (2 * ht);
        CHECK(std::abs(fd_xt - g.z_xt) < 1e-5 * std::max(1.0, std::abs(g.z_xt)));
    }
}

TEST_CASE("Z solves the pricing PDE") {
    // z_t + r x z_x + 0.5 sigma^2 x^2 z_xx = 0, z_xx by second central difference
    for (double t = 0.0; t <= 0.9 * 5.0 + 1e-12; t += 0.45) {
        for (double x = 0.1; x < 1.9; x += 0.09) {
            if (std::abs(x - 2.0) / 2.0 <= 0.05) continue;
            const double h = 1e-4 * std::max(x, 1.0);
            const auto g = z_derivs(t, x, contract, params);
            const double zxx = (z(t, x + h, contract, params) - 2.0 * z(t, x, contract, params) +
                                z(t, x - h, contract, params)) /
                               (h * h);
            const double res = g.z_t + params.r * x * g.z_x +
                               0.5 * params.sigma * params.sigma * x * x * zxx;
            CHECK(std::abs(res) < 1e-5);
        }
    }
}

TEST_CASE("Z_x left limit at the level and its bound") {
    const double t = 1.0;
    const auto at_level = z_derivs(t, 2.0, contract, params);
    CHECK(z_x_at_level_left(t, contract, params) ==
          doctest::Approx(at_level.z_x).epsilon(1e-13));
    // approach from below
    CHECK(z_derivs(t, 2.0 * (1 - 1e-9), contract, params).z_x ==
          doctest::Approx(at_level.z_x).epsilon(1e-6));

    // explicit bound dominates Z_x for t <= t_delta, x <= L
    const double t_delta = 4.0;
    for (double td = 0.0; td <= t_delta; td += 0.8) {
        for (double x = 0.1; x <= 2.0; x += 0.12) {
            CHECK(z_derivs(td, std::min(x, 2.0), contract, params).z_x <=
                  z_x_bound(t_delta, std::min(x, 2.0), contract, params) * (1 + 1e-12));
        }
    }
}
