// Backward-induction solver for the early-exercise-premium integral equation.
// The LastExit instance solves the level-truncated put boundary b(t); the
// Classical instance (Z == 1) recovers the standard American put boundary B(t)
// with the same machinery.
#pragma once

#include <cstddef>
#include <string>

#include "lastexit/model_core.hpp"
#include "lastexit/numerics.hpp"

namespace lastexit {

enum class Instance { Classical, LastExit };

struct QuadratureSpec {
    int n_space = 64;       // Gauss-Legendre nodes for the lognormal space integrals
    int n_time = 8;         // sub-nodes per time step for premium/local-time integrals
    double root_tol;        // currency tolerance on the boundary-equation residual
    int max_bisect = 200;

    QuadratureSpec(int n_space_, int n_time_, double root_tol_, int max_bisect_, double strike)
        : n_space(n_space_), n_time(n_time_), root_tol(root_tol_), max_bisect(max_bisect_) {
        if (n_space < 4 || n_time < 2 || max_bisect < 8)
            throw std::invalid_argument("QuadratureSpec: node/iteration counts too small");
        if (!(root_tol >= 1e-10 * strike))
            throw std::invalid_argument("QuadratureSpec: root_tol must be >= 1e-10 * strike");
    }
    static QuadratureSpec defaults(double strike) {
        return QuadratureSpec(64, 8, 1e-8 * strike, 200, strike);
    }
};

struct NoRootError : std::runtime_error {
    std::size_t node;
    double lo, hi;
    NoRootError(std::size_t node_, double lo_, double hi_);
};

struct NonMonotoneError : std::runtime_error {
    std::size_t node;
    explicit NonMonotoneError(std::size_t node_, double prev, double next);
};

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Discretized optimal stopping boundary on a time grid.
struct BoundaryCurve {
    TimeGrid grid;
    std::vector<double> values;
    std::vector<char> at_level;  // 1 where the solved value is pinned to L
    Instance instance = Instance::LastExit;

    // Linear interpolation; clamped to the end values outside the grid.
    double value_at(double t) const;

    // CSV round-trip, header "t,b,at_level", 12 significant digits.
    void write_csv(const std::string& path) const;
    static BoundaryCurve read_csv(const std::string& path,
                                  Instance instance = Instance::LastExit);
};

// Piecewise-linear boundary knots covering [times.front(), T]; the view
// eep_rhs integrates against.
struct BoundarySegment {
    std::vector<double> times;   // strictly increasing, last one = T
    std::vector<double> values;

    double value_at(double s) const;
    static BoundarySegment from_curve(const BoundaryCurve& curve, double t);
};

// Gain G(t, x) = (K - x)^+ Z(t, x);  t == T uses the terminal Z indicator.
double gain(double t, double x, const Contract& contract, const MarketParams& params);

// H = -rG + G_t + L_X G: (-rKZ - sigma^2 x^2 Z_x) below L, -rK on [L, K), 0 above K.
double h_fn(double t, double x, const Contract& contract, const MarketParams& params);

// Analytic dH/dt (0 on (L, K) where H is constant; the closed form below L).
double h_time_deriv(double t, double x, const Contract& contract, const MarketParams& params);

// Maximizer of x -> G(t, x) over (0, L], by golden-section search.
double x_star(double t, const Contract& contract, const MarketParams& params, double tol);

// Density of u -> dE_{t,x0}[l_u^L]: (sigma L / sqrt(u)) phi((log(L/x0) - (r - sigma^2/2)u)
// / (sigma sqrt(u))).
double local_time_density(double x0, double u, const Contract& contract,
                          const MarketParams& params);

// Right side of the early-exercise-premium representation at (t, x) given the
// boundary tail on [t, T]: closed-form terminal term, time quadrature of the
// H-premium space integrals, and the level local-time integrals.
double eep_rhs(double t, double x, const BoundarySegment& tail, const Contract& contract,
               const MarketParams& params, const QuadratureSpec& quad, Instance instance,
               Exec exec = Exec::parallel);

// Backward induction: b(t_N) = K, then per node the value-matching root of
// G(t_i, b) = eep_rhs(t_i, b, tail) by bracketed bisection.
BoundaryCurve solve_boundary(const Contract& contract, const MarketParams& params,
                             const TimeGrid& grid, const QuadratureSpec& quad,
                             Instance instance, Exec exec = Exec::parallel);

// First time the classical boundary reaches the level: 0 if B(0) > L, else the
// unique crossing time of the interpolated curve.
double t_star(const BoundaryCurve& classical, double level);

// Pinned stretch [t_b, t^b] read off the at_level flags (t_b = 0 when the
// whole curve sits at or above L).  Returns false when no node is pinned.
bool pinned_interval(const BoundaryCurve& curve, double level, double* t_lo, double* t_hi);

// Numerical check of the sufficient assumption that t -> H(t, x) is
// nonincreasing on [0,t*] x [x*(t),inf) u [t*,T] x [B(t),inf) u {t*} x [x*(t*), L].
// Failure is a warning, not an error.
bool h_monotone_check(const Contract& contract, const MarketParams& params,
                      const BoundaryCurve& classical, double t_star_value,
                      std::string* detail = nullptr);

}  // namespace lastexit
