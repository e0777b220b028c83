// Market/contract parameterization and the Gaussian / lognormal building
// blocks shared by every other layer of the pricer.
#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

namespace lastexit {

// Risk-neutral GBM market: dX = r X dt + sigma X dW.
struct MarketParams {
    double r;      // interest rate per year, > 0
    double sigma;  // volatility per sqrt-year, > 0

    MarketParams(double r_, double sigma_) : r(r_), sigma(sigma_) {
        if (!(r > 0.0)) throw std::invalid_argument("MarketParams: r must be > 0");
        if (!(sigma > 0.0)) throw std::invalid_argument("MarketParams: sigma must be > 0");
    }

    // alpha = 2r/sigma^2 - 1, always recomputed from (r, sigma).
    double alpha() const { return 2.0 * r / (sigma * sigma) - 1.0; }
    // log-price drift r - sigma^2/2
    double log_drift() const { return r - 0.5 * sigma * sigma; }
    // Perpetual-mode formulas additionally require alpha < 0 (2r < sigma^2).
    void require_perpetual_regime() const {
        if (!(alpha() < 0.0))
            throw std::invalid_argument("perpetual regime requires alpha = 2r/sigma^2 - 1 < 0");
    }
};

// Put contract truncated at the last exit time of the price at level L.
// maturity == nullopt marks the perpetual contract.
struct Contract {
    double strike;                   // K > 0
    double level;                    // L > 0, K > L
    std::optional<double> maturity;  // T in years, > 0 when finite

    Contract(double strike_, double level_, std::optional<double> maturity_)
        : strike(strike_), level(level_), maturity(maturity_) {
        if (!(strike > 0.0)) throw std::invalid_argument("Contract: strike must be > 0");
        if (!(level > 0.0)) throw std::invalid_argument("Contract: level must be > 0");
        if (!(strike > level)) throw std::invalid_argument("Contract: requires K > L");
        if (maturity && !(*maturity > 0.0))
            throw std::invalid_argument("Contract: maturity must be > 0");
    }

    bool perpetual() const { return !maturity.has_value(); }
    double expiry() const {
        if (!maturity) throw std::invalid_argument("Contract: perpetual contract has no maturity");
        return *maturity;
    }
};

// Strictly increasing time nodes t_0 = 0 < ... < t_N = T.
struct TimeGrid {
    std::vector<double> nodes;

    explicit TimeGrid(std::vector<double> nodes_);

    // Uniform in sqrt(T - t): concentrates nodes near maturity where the
    // boundary has infinite slope.
    static TimeGrid sqrt_stretched(double horizon, int n_steps);

    std::size_t size() const { return nodes.size(); }
    double horizon() const { return nodes.back(); }
};

// Standard normal CDF, absolute error below 1e-15 (erfc based).
double norm_cdf(double x);
// Standard normal density.
double norm_pdf(double x);

// E[e^{-ru} X_u^p 1{a < X_u <= b}] for X_u = x0 exp((r - sigma^2/2)u + sigma W_u),
// p in {0, 1}.  b == nullopt marks an unbounded upper limit.
double lognormal_partial_expectation(double x0, double u, double a, std::optional<double> b,
                                     int p, const MarketParams& params);

}  // namespace lastexit
