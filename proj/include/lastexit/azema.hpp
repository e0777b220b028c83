// The Azema supermartingale Z of the last exit time of the price at level L,
// in perpetual and finite-horizon form, with its analytic partial derivatives.
#pragma once

#include "lastexit/model_core.hpp"

namespace lastexit {

// Z and its partials at one point.  When x == L the x-derivatives jump;
// the reported z_x / z_xt are then the limits from below and
// left_limit_at_level is set.
struct ZDerivatives {
    double z;     // in [0, 1]
    double z_t;   // <= 0
    double z_x;   // >= 0
    double z_xt;
    bool left_limit_at_level = false;
};

// Perpetual Z(x) = (L/x)^alpha ^ 1.  Requires alpha < 0.
double z_perp(double x, double level, const MarketParams& params);
// Analytic d/dx and d2/dx2 of the perpetual Z (0 for x > L; left limits at L).
double z_perp_dx(double x, double level, const MarketParams& params);
double z_perp_dxx(double x, double level, const MarketParams& params);

// d1/d2 of the finite-horizon Z.  Requires t < T.
struct D1D2 {
    double d1;
    double d2;
};
D1D2 d1d2(double t, double x, const Contract& contract, const MarketParams& params);

// Finite-horizon Z(t, x) = (Phi(d1) + (L/x)^alpha Phi(d2)) ^ 1 for x < L,
// 1 for x >= L; at t == T the indicator 1{x >= L}.
double z(double t, double x, const Contract& contract, const MarketParams& params);

// All partial derivatives; rejects the singular corner (t, x) == (T, L).
ZDerivatives z_derivs(double t, double x, const Contract& contract, const MarketParams& params);

// Z_x(t, L-), the left limit entering every local-time formula.
double z_x_at_level_left(double t, const Contract& contract, const MarketParams& params);

// Explicit bound C2 with Z_x(t, x) <= C2 for all t <= t_delta < T and x <= L.
// Built from the same two-term split as the analytic Z_x, with the Gaussian
// factor and Phi saturated at 1.
double z_x_bound(double t_delta, double x, const Contract& contract, const MarketParams& params);

}  // namespace lastexit
