// Value function from the early-exercise-premium representation, plus value
// surfaces on rectangular grids.
#pragma once

#include "lastexit/fb_solver.hpp"

namespace lastexit {

struct ValueSurface {
    std::vector<double> times;
    std::vector<double> prices;
    std::vector<double> values;  // row-major, [i_t * prices.size() + i_x]

    double at(std::size_t i_t, std::size_t i_x) const {
        return values[i_t * prices.size() + i_x];
    }
};

// V(t, x): the gain below the boundary, eep_rhs of the boundary tail above.
double value(double t, double x, const BoundaryCurve& boundary, const Contract& contract,
             const MarketParams& params, const QuadratureSpec& quad,
             Exec exec = Exec::serial);

// Surface of value() on times x prices; rows are independent and run in
// parallel under Exec::parallel.
ValueSurface value_surface(const std::vector<double>& times, const std::vector<double>& prices,
                           const BoundaryCurve& boundary, const Contract& contract,
                           const MarketParams& params, const QuadratureSpec& quad,
                           Exec exec = Exec::parallel);

// CSV rows "t,x,V,G,VA" at 12 significant digits; the two surfaces must share
// their grids.
void write_surface_csv(const std::string& path, const ValueSurface& surface,
                       const ValueSurface& classical_surface, const Contract& contract,
                       const MarketParams& params);

}  // namespace lastexit
