// Monte Carlo verification layer: exact GBM path simulation on a step grid,
// the raw last-exit payoff, the Z-weighted reduction, and level-crossing
// probabilities, all with Brownian-bridge debiasing of discrete monitoring.
//
// Parallelism: per-path payoffs are generated from counter-based streams
// (order independent) and aggregated by index-ordered pairwise summation, so
// serial and OpenMP execution give bit-identical estimates.
#pragma once

#include <cstdint>
#include <variant>

#include "lastexit/fb_solver.hpp"
#include "lastexit/model_core.hpp"
#include "lastexit/numerics.hpp"

namespace lastexit {

struct McConfig {
    long n_paths = 100000;
    int steps_per_year = 50;
    std::uint64_t seed = 1;
    bool antithetic = false;
    bool bridge_correction = true;

    void validate() const {
        if (n_paths < 100) throw std::invalid_argument("McConfig: n_paths must be >= 100");
        if (steps_per_year < 10)
            throw std::invalid_argument("McConfig: steps_per_year must be >= 10");
        if (antithetic && n_paths % 2 != 0)
            throw std::invalid_argument("McConfig: antithetic needs an even n_paths");
    }
};

struct McEstimate {
    double mean;
    double std_error;
    long n_paths;
};

// Stopping rules of the path filtration (no look-ahead).
struct FixedTime {
    double t;
};
struct Threshold {
    double level;
    bool from_above;  // true: stop when X <= level; false: stop when X >= level
};
struct BoundaryRule {
    BoundaryCurve curve;  // stop when X_t <= curve(t), t in contract time
};
using StoppingRule = std::variant<FixedTime, Threshold, BoundaryRule>;

// Descriptor of a deterministic batch of exact-GBM paths; path j is
// regenerated on demand from the (seed, j) stream.
struct PathBatch {
    double x0;
    double horizon;
    int n_steps;  // total steps over the horizon
    double dt;
    McConfig config;
    MarketParams params;

    // Materialized path j (values at the n_steps+1 grid times), for tests.
    std::vector<double> path(long j) const;
};

PathBatch simulate_paths(double x0, double horizon, const McConfig& config,
                         const MarketParams& params);

// Discounted e^{-r tau}(K - X_tau)^+ paid only if the path still visits the
// set {X >= L} at or after tau (the discrete analog of {tau < theta}); with
// bridge correction the between-step visit probability replaces the naive
// grid indicator.
McEstimate payoff_last_exit(const PathBatch& batch, const StoppingRule& rule,
                            const Contract& contract, const MarketParams& params,
                            Exec exec = Exec::parallel);

// Discounted e^{-r tau}(K - X_tau)^+ Z(tau, X_tau); the filtration-enlargement
// twin of payoff_last_exit.  Perpetual contracts use the perpetual Z.
McEstimate payoff_z_weighted(const PathBatch& batch, const StoppingRule& rule,
                             const Contract& contract, const MarketParams& params,
                             Exec exec = Exec::parallel);

// P(max over [0, horizon] of the path >= level).
McEstimate prob_max_exceeds(double x0, double horizon, double level, const McConfig& config,
                            const MarketParams& params, Exec exec = Exec::parallel);

}  // namespace lastexit
