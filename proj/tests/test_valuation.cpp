#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "lastexit/azema.hpp"
#include "lastexit/mc_oracle.hpp"
#include "lastexit/valuation.hpp"

using namespace lastexit;

namespace {
const MarketParams params(0.05, 0.4);
const Contract contract(7.0, 2.0, 10.0);
const QuadratureSpec quad(64, 6, 1e-8 * 7.0, 200, 7.0);

struct Solved {
    BoundaryCurve curve;
    BoundaryCurve classical;
};
const Solved& solved() {
    static const Solved s = [] {
        const TimeGrid grid = TimeGrid::sqrt_stretched(10.0, 120);
        return Solved{solve_boundary(contract, params, grid, quad, Instance::LastExit),
                      solve_boundary(contract, params, grid, quad, Instance::Classical)};
    }();
    return s;
}
}  // namespace

TEST_CASE("terminal and pasting") {
    CHECK(value(10.0, 1.0, solved().curve, contract, params, quad) == 0.0);
    CHECK(value(10.0, 3.0, solved().curve, contract, params, quad) ==
          doctest::Approx(4.0).epsilon(1e-14));

    // pasting at the boundary: value equals gain within the residual budget
    for (double t : {0.0, 3.0, 7.0}) {
        const double b = solved().curve.value_at(t);
        const double v = value(t, b, solved().curve, contract, params, quad);
        CHECK(std::abs(v - gain(t, b, contract, params)) <= 2.0 * quad.root_tol);
    }
}

TEST_CASE("value against Monte Carlo policy evaluation") {
    McConfig mc;
    mc.n_paths = 200000;
    mc.steps_per_year = 100;
    mc.seed = 3131;
    const auto batch = simulate_paths(4.0, 10.0, mc, params);
    const auto est = payoff_z_weighted(batch, BoundaryRule{solved().curve}, contract, params);
    const double v = value(0.0, 4.0, solved().curve, contract, params, quad);
    CHECK(std::abs(v - est.mean) <= 3.0 * est.std_error + 1e-3);
}

TEST_CASE("surface invariants") {
    std::vector<double> times, prices;
    for (int i = 0; i <= 24; ++i) times.push_back(10.0 * i / 24);
    for (int j = 0; j <= 30; ++j) prices.push_back(0.4 + 13.0 * j / 30);
    const auto surf = value_surface(times, prices, solved().curve, contract, params, quad);
    const auto surf_cl =
        value_surface(times, prices, solved().classical, contract, params, quad);

    for (std::size_t i = 0; i < times.size(); ++i) {
        for (std::size_t j = 0; j < prices.size(); ++j) {
            const double v = surf.at(i, j);
            CHECK(v >= gain(times[i], prices[j], contract, params) - 1e-8 * 7.0);
            CHECK(v <= surf_cl.at(i, j) + 2.0 * quad.root_tol + 1e-9);
            CHECK(v >= 0.0);
            CHECK(v <= 7.0);
            if (prices[j] <= solved().curve.value_at(times[i]))
                CHECK(v == gain(times[i], prices[j], contract, params));
        }
    }
    // worthless deep out-of-the-money
    CHECK(value(0.0, 5000.0, solved().curve, contract, params, quad) < 1e-5);

    // nonincreasing in t at fixed x
    for (std::size_t j = 0; j < prices.size(); ++j)
        for (std::size_t i = 0; i + 1 < times.size(); ++i)
            CHECK(surf.at(i + 1, j) <= surf.at(i, j) + 1e-5 * 7.0);
}

TEST_CASE("pde residual in the continuation region") {
    // uniform grids for the finite differences
    const int nt = 40, nx = 60;
    std::vector<double> times(nt + 1), prices(nx + 1);
    for (int i = 0; i <= nt; ++i) times[std::size_t(i)] = 9.0 * i / nt;
    for (int j = 0; j <= nx; ++j) prices[std::size_t(j)] = 1.0 + 8.0 * j / nx;
    const auto surf = value_surface(times, prices, solved().curve, contract, params, quad);
    const double dt = times[1] - times[0], dx = prices[1] - prices[0];
    const double bound = 1e-2 * params.r * 7.0;

    int checked = 0;
    for (int i = 1; i < nt; ++i) {
        for (int j = 3; j + 3 < nx + 1; ++j) {
            const double t = times[std::size_t(i)], x = prices[std::size_t(j)];
            // stay well inside the continuation region and away from L
            if (x <= solved().curve.value_at(t) + 3.5 * dx) continue;
            if (std::abs(x - contract.level) <= 3.5 * dx) continue;
            const double vt = (surf.at(i + 1, j) - surf.at(i - 1, j)) / (2 * dt);
            const double vx = (surf.at(i, j + 1) - surf.at(i, j - 1)) / (2 * dx);
            const double vxx =
                (surf.at(i, j + 1) - 2 * surf.at(i, j) + surf.at(i, j - 1)) / (dx * dx);
            const double res = vt + params.r * x * vx +
                               0.5 * params.sigma * params.sigma * x * x * vxx -
                               params.r * surf.at(i, j);
            CHECK(std::abs(res) < bound);
            ++checked;
        }
    }
    CHECK(checked > 200);
}

TEST_CASE("surface csv") {
    std::vector<double> times = {0.0, 5.0, 10.0};
    std::vector<double> prices = {1.0, 4.0, 8.0};
    const auto surf = value_surface(times, prices, solved().curve, contract, params, quad);
    const auto surf_cl =
        value_surface(times, prices, solved().classical, contract, params, quad);
    const std::string path = "surface_test.csv";
    write_surface_csv(path, surf, surf_cl, contract, params);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,x,V,G,VA");
    int rows = 0;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) ++rows;
    CHECK(rows == 9);
    std::remove(path.c_str());
}
