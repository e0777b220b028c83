#include "lastexit/valuation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "lastexit/azema.hpp"

namespace lastexit {

namespace {

double boundary_gain(double t, double x, const BoundaryCurve& boundary,
                     const Contract& contract, const MarketParams& params) {
    if (boundary.instance == Instance::Classical) return std::max(contract.strike - x, 0.0);
    return gain(t, x, contract, params);
}

}  // namespace

double value(double t, double x, const BoundaryCurve& boundary, const Contract& contract,
             const MarketParams& params, const QuadratureSpec& quad, Exec exec) {
    if (!(x > 0.0)) throw std::invalid_argument("value: x must be > 0");
    const double expiry = contract.expiry();
    if (!(t >= 0.0) || t > expiry) throw std::invalid_argument("value: requires 0 <= t <= T");
    if (t == expiry || x <= boundary.value_at(t))
        return boundary_gain(t, x, boundary, contract, params);
    const auto tail = BoundarySegment::from_curve(boundary, t);
    return eep_rhs(t, x, tail, contract, params, quad, boundary.instance, exec);
}

ValueSurface value_surface(const std::vector<double>& times, const std::vector<double>& prices,
                           const BoundaryCurve& boundary, const Contract& contract,
                           const MarketParams& params, const QuadratureSpec& quad,
                           Exec exec) {
    if (times.empty() || prices.empty())
        throw std::invalid_argument("value_surface: empty grid");
    ValueSurface surf{times, prices, std::vector<double>(times.size() * prices.size(), 0.0)};
    const std::ptrdiff_t nt = std::ptrdiff_t(times.size());
    auto fill_row = [&](std::ptrdiff_t i) {
        for (std::size_t j = 0; j < prices.size(); ++j)
            surf.values[std::size_t(i) * prices.size() + j] =
                value(times[std::size_t(i)], prices[j], boundary, contract, params, quad,
                      Exec::serial);
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < nt; ++i) fill_row(i);
    } else {
        for (std::ptrdiff_t i = 0; i < nt; ++i) fill_row(i);
    }
    for (double v : surf.values) {
        if (!std::isfinite(v) || v < -1e-6 * contract.strike ||
            v > contract.strike * (1.0 + 1e-6))
            throw QuadratureError("value_surface: entry outside [0, K]");
    }
    return surf;
}

void write_surface_csv(const std::string& path, const ValueSurface& surface,
                       const ValueSurface& classical_surface, const Contract& contract,
                       const MarketParams& params) {
    if (surface.times != classical_surface.times || surface.prices != classical_surface.prices)
        throw std::invalid_argument("write_surface_csv: surfaces on different grids");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_surface_csv: cannot open " + path);
    out << "t,x,V,G,VA\n";
    char buf[160];
    for (std::size_t i = 0; i < surface.times.size(); ++i) {
        for (std::size_t j = 0; j < surface.prices.size(); ++j) {
            const double t = surface.times[i], x = surface.prices[j];
            std::snprintf(buf, sizeof buf, "%.11e,%.11e,%.11e,%.11e,%.11e\n", t, x,
                          surface.at(i, j), gain(t, x, contract, params),
                          classical_surface.at(i, j));
            out << buf;
        }
    }
}

}  // namespace lastexit
