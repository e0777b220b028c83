#include "lastexit/mc_oracle.hpp"

#include <cmath>

#include "lastexit/azema.hpp"

namespace lastexit {

namespace {

// Stateless stream derivation + splitmix64 stepping: path j's draws depend
// only on (seed, j), so generation order never matters.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 33;
    z *= 0xff51afd7ed558ccdULL;
    z ^= z >> 33;
    z *= 0xc4ceb9fe1a85ec53ULL;
    z ^= z >> 33;
    return z;
}

struct CounterRng {
    std::uint64_t state;
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : state(mix64(seed + mix64(stream * 0x9e3779b97f4a7c15ULL + 0xbf58476d1ce4e5b9ULL))) {}
    std::uint64_t next_u64() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }
    double uniform() {  // strictly inside (0, 1)
        return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }
};

// Wichura's AS241 (PPND16) inverse normal CDF; relative error ~1e-15.
double norm_inv(double p) {
    const double q = p - 0.5;
    double r, num, den;
    if (std::abs(q) <= 0.425) {
        r = 0.180625 - q * q;
        num = (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                    6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                  1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
        den = (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                    3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                  5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                4.2313330701600911252e+1) * r + 1.0);
        return q * num / den;
    }
    r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    if (r <= 5.0) {
        r -= 1.6;
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                  3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    const double v = num / den;
    return (q < 0.0) ? -v : v;
}

struct RuleState {
    int fixed_idx = -1;                    // FixedTime: grid index
    double level = 0.0;
    bool from_above = true;
    const std::vector<double>* bt = nullptr;  // BoundaryRule: per-step boundary
    int kind;                              // variant index

    bool fires(int k, double x) const {
        switch (kind) {
            case 0: return k == fixed_idx;
            case 1: return from_above ? (x <= level) : (x >= level);
            default: return x <= (*bt)[std::size_t(k)];
        }
    }
};

RuleState prepare_rule(const StoppingRule& rule, const PathBatch& batch, double t0,
                       std::vector<double>& bt_storage) {
    RuleState st;
    st.kind = int(rule.index());
    if (const auto* f = std::get_if<FixedTime>(&rule)) {
        if (!(f->t >= 0.0) || f->t > batch.horizon + 1e-12)
            throw std::invalid_argument("FixedTime rule outside [0, horizon]");
        st.fixed_idx = int(std::lround(f->t / batch.dt));
        st.fixed_idx = std::min(std::max(st.fixed_idx, 0), batch.n_steps);
    } else if (const auto* th = std::get_if<Threshold>(&rule)) {
        st.level = th->level;
        st.from_above = th->from_above;
    } else {
        const auto& curve = std::get<BoundaryRule>(rule).curve;
        bt_storage.resize(std::size_t(batch.n_steps) + 1);
        for (int k = 0; k <= batch.n_steps; ++k)
            bt_storage[std::size_t(k)] = curve.value_at(t0 + k * batch.dt);
        st.bt = &bt_storage;
    }
    return st;
}

// Aggregates per-item values (items = paths, or antithetic pairs) with
// index-ordered pairwise sums; identical for serial and parallel fills.
template <class ItemFn>
McEstimate aggregate(const McConfig& config, Exec exec, ItemFn item) {
    const bool anti = config.antithetic;
    const long items = anti ? config.n_paths / 2 : config.n_paths;
    std::vector<double> vals(static_cast<std::size_t>(items));
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (long j = 0; j < items; ++j)
            vals[std::size_t(j)] = anti ? 0.5 * (item(j, false) + item(j, true))
                                        : item(j, false);
    } else {
        for (long j = 0; j < items; ++j)
            vals[std::size_t(j)] = anti ? 0.5 * (item(j, false) + item(j, true))
                                        : item(j, false);
    }
    const double mean = pairwise_sum(vals) / double(items);
    for (double& v : vals) v = (v - mean) * (v - mean);
    const double var = (items > 1) ? pairwise_sum(vals) / (double(items) * (items - 1)) : 0.0;
    return {mean, std::sqrt(std::max(var, 0.0)), config.n_paths};
}

// Bridge probability that the level is visited inside a step whose endpoints
// sit strictly below it.
inline double bridge_visit_prob(double l0, double l1, double sig2dt) {
    return std::exp(-2.0 * l0 * l1 / sig2dt);
}

}  // namespace

std::vector<double> PathBatch::path(long j) const {
    if (j < 0 || j >= config.n_paths) throw std::invalid_argument("PathBatch: bad path index");
    const bool flip = config.antithetic && (j % 2 == 1);
    const long stream = config.antithetic ? j / 2 : j;
    CounterRng rng(config.seed, std::uint64_t(stream));
    std::vector<double> out(std::size_t(n_steps) + 1);
    out[0] = x0;
    const double drift = params.log_drift() * dt;
    const double vol = params.sigma * std::sqrt(dt);
    double x = x0;
    for (int k = 1; k <= n_steps; ++k) {
        double zdraw = norm_inv(rng.uniform());
        if (flip) zdraw = -zdraw;
        x *= std::exp(drift + vol * zdraw);
        out[std::size_t(k)] = x;
    }
    return out;
}

PathBatch simulate_paths(double x0, double horizon, const McConfig& config,
                         const MarketParams& params) {
    if (!(x0 > 0.0)) throw std::invalid_argument("simulate_paths: x0 must be > 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("simulate_paths: horizon must be > 0");
    config.validate();
    const int n_steps = std::max(1, int(std::lround(config.steps_per_year * horizon)));
    return {x0, horizon, n_steps, horizon / n_steps, config, params};
}

McEstimate payoff_last_exit(const PathBatch& batch, const StoppingRule& rule,
                            const Contract& contract, const MarketParams& params,
                            Exec exec) {
    const double t0 = contract.perpetual() ? 0.0 : contract.expiry() - batch.horizon;
    if (!contract.perpetual() && t0 < -1e-9)
        throw std::invalid_argument("payoff_last_exit: horizon exceeds the maturity");
    std::vector<double> bt_storage;
    const RuleState st = prepare_rule(rule, batch, t0, bt_storage);
    const double L = contract.level;
    const double K = contract.strike;
    const double drift = params.log_drift() * batch.dt;
    const double vol = params.sigma * std::sqrt(batch.dt);
    const double sig2dt = params.sigma * params.sigma * batch.dt;
    const bool bridge = batch.config.bridge_correction;

    auto one = [&](long stream, bool flip) -> double {
        CounterRng rng(batch.config.seed, std::uint64_t(stream));
        double x = batch.x0;
        double x_tau = 0.0, tau = 0.0;
        bool stopped = false, visited = false;
        double log_survive = 0.0;  // log prod (1 - p_k) over steps after tau
        for (int k = 0; k <= batch.n_steps; ++k) {
            if (!stopped && (st.fires(k, x) || k == batch.n_steps)) {
                stopped = true;
                x_tau = x;
                tau = k * batch.dt;
                if (x >= L) visited = true;
            }
            if (k == batch.n_steps) break;
            double zdraw = norm_inv(rng.uniform());
            if (flip) zdraw = -zdraw;
            const double x_next = x * std::exp(drift + vol * zdraw);
            if (stopped && !visited) {
                if (x >= L || x_next >= L) {
                    visited = true;
                } else if (bridge) {
                    const double p =
                        bridge_visit_prob(std::log(L / x), std::log(L / x_next), sig2dt);
                    log_survive += std::log1p(-p);
                }
            }
            x = x_next;
        }
        const double intrinsic = std::max(K - x_tau, 0.0);
        if (intrinsic == 0.0) return 0.0;
        const double q = visited ? 1.0 : (bridge ? -std::expm1(log_survive) : 0.0);
        return std::exp(-params.r * tau) * intrinsic * q;
    };
    return aggregate(batch.config, exec, one);
}

McEstimate payoff_z_weighted(const PathBatch& batch, const StoppingRule& rule,
                             const Contract& contract, const MarketParams& params,
                             Exec exec) {
    const double t0 = contract.perpetual() ? 0.0 : contract.expiry() - batch.horizon;
    if (!contract.perpetual() && t0 < -1e-9)
        throw std::invalid_argument("payoff_z_weighted: horizon exceeds the maturity");
    std::vector<double> bt_storage;
    const RuleState st = prepare_rule(rule, batch, t0, bt_storage);
    const double K = contract.strike;
    const double drift = params.log_drift() * batch.dt;
    const double vol = params.sigma * std::sqrt(batch.dt);

    auto one = [&](long stream, bool flip) -> double {
        CounterRng rng(batch.config.seed, std::uint64_t(stream));
        double x = batch.x0;
        int k = 0;
        while (k < batch.n_steps && !st.fires(k, x)) {
            double zdraw = norm_inv(rng.uniform());
            if (flip) zdraw = -zdraw;
            x *= std::exp(drift + vol * zdraw);
            ++k;
        }
        const double tau = k * batch.dt;
        const double intrinsic = std::max(K - x, 0.0);
        if (intrinsic == 0.0) return 0.0;
        const double w = contract.perpetual() ? z_perp(x, contract.level, params)
                                              : z(t0 + tau, x, contract, params);
        return std::exp(-params.r * tau) * intrinsic * w;
    };
    return aggregate(batch.config, exec, one);
}

McEstimate prob_max_exceeds(double x0, double horizon, double level, const McConfig& config,
                            const MarketParams& params, Exec exec) {
    if (!(level > 0.0)) throw std::invalid_argument("prob_max_exceeds: level must be > 0");
    const PathBatch batch = simulate_paths(x0, horizon, config, params);
    const double drift = params.log_drift() * batch.dt;
    const double vol = params.sigma * std::sqrt(batch.dt);
    const double sig2dt = params.sigma * params.sigma * batch.dt;
    const bool bridge = config.bridge_correction;

    auto one = [&](long stream, bool flip) -> double {
        if (batch.x0 >= level) return 1.0;
        CounterRng rng(config.seed, std::uint64_t(stream));
        double x = batch.x0;
        double log_survive = 0.0;
        for (int k = 0; k < batch.n_steps; ++k) {
            double zdraw = norm_inv(rng.uniform());
            if (flip) zdraw = -zdraw;
            const double x_next = x * std::exp(drift + vol * zdraw);
            if (x >= level || x_next >= level) return 1.0;
            if (bridge) {
                const double p =
                    bridge_visit_prob(std::log(level / x), std::log(level / x_next), sig2dt);
                log_survive += std::log1p(-p);
            }
            x = x_next;
        }
        return bridge ? -std::expm1(log_survive) : 0.0;
    };
    return aggregate(config, exec, one);
}

}  // namespace lastexit
