#include "lastexit/perpetual.hpp"

#include <cmath>

#include "lastexit/azema.hpp"

namespace lastexit {

double perpetual_gain(double x, const Contract& contract, const MarketParams& params) {
    if (!(x > 0.0)) throw std::invalid_argument("perpetual_gain: x must be > 0");
    const double intrinsic = contract.strike - x;
    if (intrinsic <= 0.0) return 0.0;
    return intrinsic * z_perp(x, contract.level, params);
}

PerpetualSolution solve_perpetual(const Contract& contract, const MarketParams& params) {
    params.require_perpetual_regime();
    const double K = contract.strike;
    const double L = contract.level;
    const double r = params.r;
    const double s2 = params.sigma * params.sigma;
    const double q = 2.0 * r / s2;  // -p2, the decaying Cauchy-Euler exponent

    const double b_above = 2.0 * r * K / (2.0 * r + s2);
    if (b_above > L) {
        return {b_above, PerpetualCase::AboveL, (K - b_above) * std::pow(b_above, q), false};
    }
    const double b_below = 0.5 * K;
    if (b_below < L || b_below == L) {
        // K == 2L sits on the case boundary; resolved to BelowL with b pinned at L.
        const double c2 = (K - b_below) * std::pow(L, q - 1.0) * b_below;  // = L^alpha K^2/4
        return {b_below, PerpetualCase::BelowL, c2, b_below == L};
    }
    throw AmbiguousRegime("solve_perpetual: K >= 2L and 2rK <= L(sigma^2 + 2r); "
                          "the closed form covers neither regime here");
}

double perpetual_value(double x, const PerpetualSolution& sol, const Contract& contract,
                       const MarketParams& params) {
    if (!(x > 0.0)) throw std::invalid_argument("perpetual_value: x must be > 0");
    const double q = 2.0 * params.r / (params.sigma * params.sigma);
    if (x <= sol.b) return perpetual_gain(x, contract, params);
    return sol.c2 * std::pow(x, -q);
}

}  // namespace lastexit
