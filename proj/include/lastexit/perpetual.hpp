// Closed-form solution of the perpetual contract: optimal exercise level b
// and value function V.
#pragma once

#include "lastexit/model_core.hpp"

namespace lastexit {

// The two regimes of the closed form: exercise level below or above L.
enum class PerpetualCase { BelowL, AboveL };

// Parameter gap not covered by the closed form (neither strict regime holds).
struct AmbiguousRegime : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PerpetualSolution {
    double b;                // optimal exercise level
    PerpetualCase case_tag;
    double c2;               // coefficient of x^{-2r/sigma^2} in the continuation value
    bool boundary_at_level;  // K == 2L tie resolved to BelowL with b == L
};

// Perpetual gain G(x) = (K - x)^+ Z(x).
double perpetual_gain(double x, const Contract& contract, const MarketParams& params);

// b = K/2 when K < 2L (BelowL); b = 2rK/(2r + sigma^2) when 2rK > L(sigma^2 + 2r)
// (AboveL).  Exactly one regime holds for alpha < 0; the uncovered gap throws
// AmbiguousRegime.  K == 2L resolves to BelowL with boundary_at_level set.
PerpetualSolution solve_perpetual(const Contract& contract, const MarketParams& params);

// V(x) for the solved regime: the gain below b, c2 x^{-2r/sigma^2} above.
double perpetual_value(double x, const PerpetualSolution& sol, const Contract& contract,
                       const MarketParams& params);

}  // namespace lastexit
