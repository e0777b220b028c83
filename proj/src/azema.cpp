#include "lastexit/azema.hpp"

#include <cmath>

namespace lastexit {

namespace {

constexpr double sqrt_2_over_pi = 0.7978845608028653559;
constexpr double inv_sqrt_2pi = 0.3989422804014326779;

void check_time(double t, double expiry, const char* who) {
    if (!(t >= 0.0) || !(t < expiry))
        throw std::invalid_argument(std::string(who) + ": requires 0 <= t < T");
}

}  // namespace

double z_perp(double x, double level, const MarketParams& params) {
    if (!(x > 0.0)) throw std::invalid_argument("z_perp: x must be > 0");
    if (!(level > 0.0)) throw std::invalid_argument("z_perp: level must be > 0");
    params.require_perpetual_regime();
    if (x >= level) return 1.0;
    return std::pow(level / x, params.alpha());
}

double z_perp_dx(double x, double level, const MarketParams& params) {
    params.require_perpetual_regime();
    if (!(x > 0.0)) throw std::invalid_argument("z_perp_dx: x must be > 0");
    if (x > level) return 0.0;
    const double a = params.alpha();
    return -a * std::pow(level / x, a) / x;
}

double z_perp_dxx(double x, double level, const MarketParams& params) {
    params.require_perpetual_regime();
    if (!(x > 0.0)) throw std::invalid_argument("z_perp_dxx: x must be > 0");
    if (x > level) return 0.0;
    const double a = params.alpha();
    return a * (a + 1.0) * std::pow(level / x, a) / (x * x);
}

D1D2 d1d2(double t, double x, const Contract& contract, const MarketParams& params) {
    const double expiry = contract.expiry();
    check_time(t, expiry, "d1d2");
    if (!(x > 0.0)) throw std::invalid_argument("d1d2: x must be > 0");
    const double tau = expiry - t;
    const double st = params.sigma * std::sqrt(tau);
    const double l = std::log(contract.level / x);
    const double drift = params.log_drift() * tau;
    return {(-l + drift) / st, (-l - drift) / st};
}

double z(double t, double x, const Contract& contract, const MarketParams& params) {
    const double expiry = contract.expiry();
    if (!(x > 0.0)) throw std::invalid_argument("z: x must be > 0");
    if (!(t >= 0.0) || !(t <= expiry)) throw std::invalid_argument("z: requires 0 <= t <= T");
    if (x >= contract.level) return 1.0;
    if (t == expiry) return 0.0;  // terminal indicator, x < L branch
    const auto d = d1d2(t, x, contract, params);
    const double v = norm_cdf(d.d1) +
                     std::pow(contract.level / x, params.alpha()) * norm_cdf(d.d2);
    return std::min(v, 1.0);
}

ZDerivatives z_derivs(double t, double x, const Contract& contract, const MarketParams& params) {
    const double expiry = contract.expiry();
    if (!(x > 0.0)) throw std::invalid_argument("z_derivs: x must be > 0");
    if (x == contract.level && t >= expiry)
        throw std::invalid_argument("z_derivs: (L, T) is the singular corner");
    check_time(t, expiry, "z_derivs");

    ZDerivatives out{};
    if (x > contract.level) {
        out.z = 1.0;
        return out;  // Z identically 1 above the level
    }

    const double L = contract.level;
    const double alpha = params.alpha();
    const double tau = expiry - t;
    const double sig = params.sigma;
    const double l = std::log(L / x);
    const auto d = d1d2(t, x, contract, params);
    const double e1 = std::exp(-0.5 * d.d1 * d.d1);
    const double phi2 = norm_cdf(d.d2);
    const double ratio_a = std::pow(L / x, alpha);

    out.z = (x == L) ? 1.0 : std::min(norm_cdf(d.d1) + ratio_a * phi2, 1.0);
    out.z_t = -inv_sqrt_2pi * l * e1 / (sig * std::pow(tau, 1.5));
    out.z_x = sqrt_2_over_pi * e1 / (x * sig * std::sqrt(tau)) - alpha * ratio_a * phi2 / x;
    out.z_xt = inv_sqrt_2pi * e1 / (x * sig * std::pow(tau, 1.5)) *
               (1.0 - l * l / (sig * sig * tau) + l * params.log_drift() / (sig * sig));
    out.left_limit_at_level = (x == L);
    return out;
}

double z_x_at_level_left(double t, const Contract& contract, const MarketParams& params) {
    const double expiry = contract.expiry();
    check_time(t, expiry, "z_x_at_level_left");
    const double tau = expiry - t;
    const double sig = params.sigma;
    const double d1 = params.log_drift() * std::sqrt(tau) / sig;  // log term vanishes at L
    return sqrt_2_over_pi * std::exp(-0.5 * d1 * d1) / (contract.level * sig * std::sqrt(tau)) -
           params.alpha() * norm_cdf(-d1) / contract.level;
}

double z_x_bound(double t_delta, double x, const Contract& contract, const MarketParams& params) {
    const double expiry = contract.expiry();
    check_time(t_delta, expiry, "z_x_bound");
    if (!(x > 0.0) || x > contract.level)
        throw std::invalid_argument("z_x_bound: requires 0 < x <= L");
    const double alpha = params.alpha();
    const double q = alpha + 1.0;  // 2r/sigma^2
    return sqrt_2_over_pi / (params.sigma * std::sqrt(expiry - t_delta) * x) -
           alpha * std::pow(contract.level, alpha) * std::pow(x, -q);
}

}  // namespace lastexit
