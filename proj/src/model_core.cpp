#include "lastexit/model_core.hpp"

#include <algorithm>
#include <cmath>

namespace lastexit {

TimeGrid::TimeGrid(std::vector<double> nodes_) : nodes(std::move(nodes_)) {
    if (nodes.size() < 2) throw std::invalid_argument("TimeGrid: needs at least two nodes");
    if (nodes.front() != 0.0) throw std::invalid_argument("TimeGrid: first node must be 0");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1]))
            throw std::invalid_argument("TimeGrid: nodes must be strictly increasing");
}

TimeGrid TimeGrid::sqrt_stretched(double horizon, int n_steps) {
    if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be > 0");
    if (n_steps < 2) throw std::invalid_argument("TimeGrid: need at least 2 steps");
    std::vector<double> t(n_steps + 1);
    for (int i = 0; i <= n_steps; ++i) {
        const double s = 1.0 - double(i) / n_steps;  // sqrt(T-t)/sqrt(T), equally spaced
        t[i] = horizon * (1.0 - s * s);
    }
    t[0] = 0.0;
    t[n_steps] = horizon;
    return TimeGrid(std::move(t));
}

double norm_cdf(double x) {
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

double norm_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double lognormal_partial_expectation(double x0, double u, double a, std::optional<double> b,
                                     int p, const MarketParams& params) {
    if (!(x0 > 0.0)) throw std::invalid_argument("lognormal_partial_expectation: x0 must be > 0");
    if (!(u > 0.0)) throw std::invalid_argument("lognormal_partial_expectation: u must be > 0");
    if (a < 0.0) throw std::invalid_argument("lognormal_partial_expectation: a must be >= 0");
    if (b && !(*b > a)) throw std::invalid_argument("lognormal_partial_expectation: requires a < b");
    if (p != 0 && p != 1) throw std::invalid_argument("lognormal_partial_expectation: p must be 0 or 1");

    const double s = params.sigma * std::sqrt(u);
    const double m = std::log(x0) + params.log_drift() * u;  // mean of log X_u
    // P(X_u <= y) = Phi(dm(y)); shift by -s for the X_u-weighted measure.
    const double shift = (p == 1) ? s : 0.0;
    const double lo = (a == 0.0) ? 0.0 : norm_cdf((std::log(a) - m) / s - shift);
    const double hi = b ? norm_cdf((std::log(*b) - m) / s - shift) : 1.0;
    const double mass = std::max(hi - lo, 0.0);
    if (p == 0) return std::exp(-params.r * u) * mass;
    return x0 * mass;  // e^{-ru} E[X_u 1{.}] = x0 (Phi difference), discounted price is a martingale
}

}  // namespace lastexit
