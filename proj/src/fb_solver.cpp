#include "lastexit/fb_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lastexit/azema.hpp"

namespace lastexit {

namespace {

// Sign of the 1{b(t+u) = L} local-time term in the value representation; the
// 1{b(t+u) > L} term always enters with +.
constexpr double pinned_local_time_sign = -1.0;

// |b - L| tolerance for the discretized 1{b = L} indicator.
double at_level_band(double strike) { return 1e-6 * strike; }

double instance_gain(Instance inst, double t, double x, const Contract& c,
                     const MarketParams& p) {
    if (inst == Instance::Classical) return std::max(c.strike - x, 0.0);
    return gain(t, x, c, p);
}

// One quadrature node of a transformed time integral: point s and weight
// (Gauss-Legendre weight times the substitution jacobian).
struct TimeNode {
    double s;
    double w;
};

// Fills nodes for one knot interval [a, b] of a tail anchored at time t.
// Everything up to the final interval integrates in v = sqrt(s - t), which
// both neutralizes the 1/sqrt(u) local-time kernel and linearizes its
// near-level peak; the final interval integrates in w = sqrt(T - s) against
// the 1/sqrt(T - s) blow-up of Z_x(., L-).
void time_nodes(double t, double expiry, double a, double b, bool first, bool last, int n,
                std::vector<TimeNode>& out) {
    const auto& gl = gauss_legendre(n);
    auto from_left = [&](double aa, double bb) {  // v = sqrt(s - t)
        const double va = std::sqrt(aa - t), vb = std::sqrt(bb - t);
        const double mid = 0.5 * (va + vb), half = 0.5 * (vb - va);
        for (int k = 0; k < n; ++k) {
            const double v = mid + half * gl.nodes[k];
            out.push_back({t + v * v, half * gl.weights[k] * 2.0 * v});
        }
    };
    auto from_right = [&](double aa, double bb) {  // w = sqrt(T - s)
        const double wa = std::sqrt(expiry - bb), wb = std::sqrt(expiry - aa);
        const double mid = 0.5 * (wa + wb), half = 0.5 * (wb - wa);
        for (int k = 0; k < n; ++k) {
            const double w = mid + half * gl.nodes[k];
            out.push_back({expiry - w * w, half * gl.weights[k] * 2.0 * w});
        }
    };
    if (first && last) {
        const double mid = 0.5 * (a + b);
        from_left(a, mid);
        from_right(mid, b);
    } else if (last) {
        from_right(a, b);
    } else {
        from_left(a, b);
    }
    (void)first;
}

// Integral over (0, U) of (rK Z + sigma^2 y^2 Z_x)(s, y) against the
// lognormal density of X_u started at x.  Runs in the standardized Gaussian
// coordinate q = (log y - m)/(sigma sqrt(u)), which keeps the density
// resolved down to u -> 0.  When U reaches L, the Z_x boundary layer of
// width ~ sigma sqrt(T - s) below L gets its own panel.
double space_premium(double s, double u, double x, double U, const Contract& c,
                     const MarketParams& p, int n_space) {
    const double expiry = c.expiry();
    const double eps = c.level * std::exp(-8.0 * p.sigma * std::sqrt(expiry));
    if (U <= eps) return 0.0;
    const double su = p.sigma * std::sqrt(u);
    const double m = std::log(x) + p.log_drift() * u;
    const double qa = std::max((std::log(eps) - m) / su, -8.0);
    const double qb = std::min((std::log(U) - m) / su, 8.0);
    if (!(qb > qa)) return 0.0;

    double panels[3] = {qa, qb, qb};
    int n_panels = 1;
    if (U >= c.level * (1.0 - 1e-12)) {
        const double layer = 5.0 * p.sigma * std::sqrt(expiry - s);
        const double q_edge = (std::log(c.level) - layer - m) / su;
        if (q_edge > qa && q_edge < qb) {
            panels[1] = q_edge;
            panels[2] = qb;
            n_panels = 2;
        }
    }
    const auto& gl = gauss_legendre(n_space);
    const double rK = p.r * c.strike;
    double total = 0.0;
    for (int pi = 0; pi < n_panels; ++pi) {
        const double mid = 0.5 * (panels[pi] + panels[pi + 1]);
        const double half = 0.5 * (panels[pi + 1] - panels[pi]);
        for (int k = 0; k < n_space; ++k) {
            const double q = mid + half * gl.nodes[k];
            const double y = std::exp(m + su * q);
            const auto zd = z_derivs(s, std::min(y, c.level), c, p);
            const double g = rK * zd.z + p.sigma * p.sigma * y * y * zd.z_x;
            total += half * gl.weights[k] * g * norm_pdf(q);
        }
    }
    return total;
}

struct RhsContext {
    const Contract& contract;
    const MarketParams& params;
    const QuadratureSpec& quad;
    Instance instance;
    double t;
    double x;
};

// Premium + local-time contribution of one knot interval of the tail.
double interval_contribution(const RhsContext& ctx, const BoundarySegment& tail,
                             std::size_t j) {
    const Contract& c = ctx.contract;
    const MarketParams& p = ctx.params;
    const double expiry = c.expiry();
    const double a = tail.times[j], b = tail.times[j + 1];
    const bool first = (j == 0), last = (j + 2 == tail.times.size());
    std::vector<TimeNode> nodes;
    nodes.reserve(2 * ctx.quad.n_time);
    time_nodes(ctx.t, expiry, a, b, first, last, ctx.quad.n_time, nodes);

    const double va = tail.values[j], vb = tail.values[j + 1];
    const double slope = (vb - va) / (b - a);
    double total = 0.0;
    for (const TimeNode& nd : nodes) {
        const double u = nd.s - ctx.t;
        if (!(u > 0.0) || nd.s >= expiry) continue;
        const double bq = va + slope * (nd.s - a);
        double val = 0.0;
        if (ctx.instance == Instance::Classical) {
            val += p.r * c.strike *
                   lognormal_partial_expectation(ctx.x, u, 0.0, bq, 0, p);
        } else {
            if (bq > c.level)
                val += p.r * c.strike *
                       lognormal_partial_expectation(ctx.x, u, c.level, bq, 0, p);
            val += std::exp(-p.r * u) *
                   space_premium(nd.s, u, ctx.x, std::min(c.level, bq), c, p,
                                 ctx.quad.n_space);
        }
        total += nd.w * val;
    }

    // The level local-time term is one-dimensional and cheap but carries the
    // sharpest u-dependence; it gets its own denser node set.
    if (ctx.instance == Instance::LastExit) {
        const double band = at_level_band(c.strike);
        std::vector<TimeNode> lt_nodes;
        const int n_lt = std::max(32, 2 * ctx.quad.n_time);
        lt_nodes.reserve(2 * n_lt);
        time_nodes(ctx.t, expiry, a, b, first, last, n_lt, lt_nodes);
        for (const TimeNode& nd : lt_nodes) {
            const double u = nd.s - ctx.t;
            if (!(u > 0.0) || nd.s >= expiry) continue;
            const double bq = va + slope * (nd.s - a);
            double sign = 0.0;
            if (bq > c.level + band)
                sign = 1.0;
            else if (std::abs(bq - c.level) <= band)
                sign = pinned_local_time_sign;
            if (sign != 0.0)
                total += nd.w * sign * 0.5 * (c.strike - c.level) *
                         z_x_at_level_left(nd.s, c, p) *
                         local_time_density(ctx.x, u, c, p) * std::exp(-p.r * u);
        }
    }
    if (!std::isfinite(total))
        throw QuadratureError("eep_rhs: non-finite integrand contribution");
    return total;
}

}  // namespace

NoRootError::NoRootError(std::size_t node_, double lo_, double hi_)
    : std::runtime_error("solve_boundary: no bracketed root at node " + std::to_string(node_) +
                         " in [" + std::to_string(lo_) + ", " + std::to_string(hi_) + "]"),
      node(node_), lo(lo_), hi(hi_) {}

NonMonotoneError::NonMonotoneError(std::size_t node_, double prev, double next)
    : std::runtime_error("solve_boundary: boundary not monotone at node " +
                         std::to_string(node_) + " (" + std::to_string(prev) + " -> " +
                         std::to_string(next) + ")"),
      node(node_) {}

double BoundaryCurve::value_at(double t) const {
    const auto& tn = grid.nodes;
    if (t <= tn.front()) return values.front();
    if (t >= tn.back()) return values.back();
    const auto it = std::upper_bound(tn.begin(), tn.end(), t);
    const std::size_t i = std::size_t(it - tn.begin());
    const double w = (t - tn[i - 1]) / (tn[i] - tn[i - 1]);
    return values[i - 1] + w * (values[i] - values[i - 1]);
}

void BoundaryCurve::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("BoundaryCurve: cannot open " + path);
    out << "t,b,at_level\n";
    char buf[80];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.11e,%.11e,%d\n", grid.nodes[i], values[i],
                      int(at_level[i]));
        out << buf;
    }
}

BoundaryCurve BoundaryCurve::read_csv(const std::string& path, Instance instance) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("BoundaryCurve: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,b,at_level", 0) != 0)
        throw std::runtime_error("BoundaryCurve: bad header in " + path);
    std::vector<double> t, b;
    std::vector<char> lev;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double ti, bi;
        int li;
        if (std::sscanf(line.c_str(), "%lf,%lf,%d", &ti, &bi, &li) != 3)
            throw std::runtime_error("BoundaryCurve: bad row in " + path + ": " + line);
        t.push_back(ti);
        b.push_back(bi);
        lev.push_back(char(li != 0));
    }
    BoundaryCurve curve{TimeGrid(std::move(t)), std::move(b), std::move(lev), instance};
    if (curve.values.size() != curve.grid.size())
        throw std::runtime_error("BoundaryCurve: inconsistent row count");
    return curve;
}

double BoundarySegment::value_at(double s) const {
    if (s <= times.front()) return values.front();
    if (s >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), s);
    const std::size_t i = std::size_t(it - times.begin());
    const double w = (s - times[i - 1]) / (times[i] - times[i - 1]);
    return values[i - 1] + w * (values[i] - values[i - 1]);
}

BoundarySegment BoundarySegment::from_curve(const BoundaryCurve& curve, double t) {
    const auto& tn = curve.grid.nodes;
    if (t > tn.back()) throw std::invalid_argument("BoundarySegment: t beyond the grid");
    BoundarySegment seg;
    if (t == tn.back()) {
        seg.times = {t};
        seg.values = {curve.values.back()};
        return seg;
    }
    seg.times.push_back(t);
    seg.values.push_back(curve.value_at(t));
    for (std::size_t i = 0; i < tn.size(); ++i) {
        if (tn[i] > t) {
            seg.times.push_back(tn[i]);
            seg.values.push_back(curve.values[i]);
        }
    }
    return seg;
}

double gain(double t, double x, const Contract& contract, const MarketParams& params) {
    if (!(x > 0.0)) throw std::invalid_argument("gain: x must be > 0");
    const double intrinsic = contract.strike - x;
    if (intrinsic <= 0.0) return 0.0;
    return intrinsic * z(t, x, contract, params);
}

double h_fn(double t, double x, const Contract& contract, const MarketParams& params) {
    if (!(x > 0.0)) throw std::invalid_argument("h_fn: x must be > 0");
    if (!(t >= 0.0) || !(t < contract.expiry()))
        throw std::invalid_argument("h_fn: requires 0 <= t < T");
    if (x >= contract.strike) return 0.0;
    if (x >= contract.level) return -params.r * contract.strike;
    const auto zd = z_derivs(t, x, contract, params);
    return -params.r * contract.strike * zd.z - params.sigma * params.sigma * x * x * zd.z_x;
}

double h_time_deriv(double t, double x, const Contract& contract, const MarketParams& params) {
    if (!(x > 0.0)) throw std::invalid_argument("h_time_deriv: x must be > 0");
    if (!(t >= 0.0) || !(t < contract.expiry()))
        throw std::invalid_argument("h_time_deriv: requires 0 <= t < T");
    if (x >= contract.level) return 0.0;  // H constant (or zero) at and above L
    const auto zd = z_derivs(t, x, contract, params);
    return -params.r * contract.strike * zd.z_t - params.sigma * params.sigma * x * x * zd.z_xt;
}

double x_star(double t, const Contract& contract, const MarketParams& params, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("x_star: tol must be > 0");
    const double L = contract.level;
    double lo = 1e-8 * L, hi = L;
    const double inv_phi = 0.6180339887498949;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double gc = gain(t, c, contract, params);
    double gd = gain(t, d, contract, params);
    while (hi - lo > tol) {
        if (gc > gd) {
            hi = d;
            d = c;
            gd = gc;
            c = hi - inv_phi * (hi - lo);
            gc = gain(t, c, contract, params);
        } else {
            lo = c;
            c = d;
            gc = gd;
            d = lo + inv_phi * (hi - lo);
            gd = gain(t, d, contract, params);
        }
    }
    return 0.5 * (lo + hi);
}

double local_time_density(double x0, double u, const Contract& contract,
                          const MarketParams& params) {
    if (!(x0 > 0.0)) throw std::invalid_argument("local_time_density: x0 must be > 0");
    if (!(u > 0.0)) throw std::invalid_argument("local_time_density: u must be > 0");
    const double su = params.sigma * std::sqrt(u);
    const double arg = (std::log(contract.level / x0) - params.log_drift() * u) / su;
    return params.sigma * contract.level / std::sqrt(u) * norm_pdf(arg);
}

double eep_rhs(double t, double x, const BoundarySegment& tail, const Contract& contract,
               const MarketParams& params, const QuadratureSpec& quad, Instance instance,
               Exec exec) {
    if (!(x > 0.0)) throw std::invalid_argument("eep_rhs: x must be > 0");
    const double expiry = contract.expiry();
    const double tau = expiry - t;
    if (tau <= 0.0) return instance_gain(instance, expiry, x, contract, params);
    if (tail.times.size() < 2 || std::abs(tail.times.front() - t) > 1e-12 * expiry ||
        std::abs(tail.times.back() - expiry) > 1e-12 * expiry)
        throw std::invalid_argument("eep_rhs: tail must cover [t, T]");

    // terminal term: E[e^{-r tau} (K - X_T)^+ Z(T, X_T)] in closed form
    const double low = (instance == Instance::LastExit) ? contract.level : 0.0;
    const double K = contract.strike;
    double rhs = K * lognormal_partial_expectation(x, tau, low, K, 0, params) -
                 lognormal_partial_expectation(x, tau, low, K, 1, params);

    const RhsContext ctx{contract, params, quad, instance, t, x};
    const std::size_t m = tail.times.size() - 1;
    std::vector<double> contrib(m);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t j = 0; j < std::ptrdiff_t(m); ++j)
            contrib[j] = interval_contribution(ctx, tail, std::size_t(j));
    } else {
        for (std::size_t j = 0; j < m; ++j) contrib[j] = interval_contribution(ctx, tail, j);
    }
    rhs += pairwise_sum(contrib);
    if (!std::isfinite(rhs)) throw QuadratureError("eep_rhs: non-finite result");
    return rhs;
}

namespace {

struct NodeSolver {
    const Contract& contract;
    const MarketParams& params;
    const QuadratureSpec& quad;
    Instance instance;
    Exec exec;
    const TimeGrid& grid;
    std::vector<double>& values;
    std::size_t i;
    BoundarySegment seg;  // knots (t_i, trial), (t_{i+1}, b_{i+1}), ..., (T, K)

    double operator()(double trial) {
        seg.values[0] = trial;
        return instance_gain(instance, grid.nodes[i], trial, contract, params) -
               eep_rhs(grid.nodes[i], trial, seg, contract, params, quad, instance, exec);
    }
};

// Bracketed bisection of F, converging on the residual; F(lo) > 0 >= F(hi).
// A sign change squeezed onto the 1{b = L} indicator band cannot drive the
// residual down; it reports as pinned instead.
struct NodeRoot {
    double b;
    bool pinned;
};
NodeRoot bisect_node(NodeSolver& F, double lo, double hi, double level,
                     const QuadratureSpec& quad, std::size_t node, double strike) {
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < quad.max_bisect; ++it) {
        mid = 0.5 * (lo + hi);
        const double fm = F(mid);
        if (std::abs(fm) < 0.4 * quad.root_tol) return {mid, false};
        if (fm > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14 * strike) break;
    }
    const double fm = F(mid);
    if (std::abs(fm) < quad.root_tol) return {mid, false};
    if (std::abs(mid - level) <= 2.0 * at_level_band(strike)) return {level, true};
    throw NoRootError(node, lo, hi);
}

}  // namespace

BoundaryCurve solve_boundary(const Contract& contract, const MarketParams& params,
                             const TimeGrid& grid, const QuadratureSpec& quad,
                             Instance instance, Exec exec) {
    const double expiry = contract.expiry();
    if (std::abs(grid.horizon() - expiry) > 1e-12 * expiry)
        throw std::invalid_argument("solve_boundary: grid horizon must equal the maturity");
    const double K = contract.strike;
    const double L = contract.level;
    const double band = at_level_band(contract.strike);
    const std::size_t n = grid.size();

    BoundaryCurve curve{grid, std::vector<double>(n, 0.0), std::vector<char>(n, 0), instance};
    curve.values[n - 1] = K;

    for (std::size_t idx = n - 1; idx-- > 0;) {
        const std::size_t i = idx;
        const double t_i = grid.nodes[i];
        const double hi = curve.values[i + 1];

        NodeSolver F{contract, params, quad, instance, exec, grid, curve.values, i, {}};
        F.seg.times.assign(grid.nodes.begin() + i, grid.nodes.end());
        F.seg.values.assign(curve.values.begin() + i, curve.values.end());

        // b is the supremum of the stopping set, so hunt the highest sign
        // change: march down from b_{i+1} to the first point with F > 0,
        // then bisect inside that bracket.  Marching from above also keeps
        // the probes away from the degenerate zone deep inside the stopping
        // region where F is flat at quadrature-noise scale.
        const double xs = (instance == Instance::LastExit)
                              ? x_star(t_i, contract, params, 1e-9 * K)
                              : 1e-3 * K;
        const double floor_b = std::max(xs, 0.30 * hi);
        double solved;
        bool pinned = false;
        if (F(hi) > 0.0) {
            solved = hi;
        } else {
            const int n_probe = 24;
            double above = hi, below = floor_b;
            bool bracketed = false;
            for (int k = 1; k <= n_probe; ++k) {
                const double x_k = hi + (floor_b - hi) * k / n_probe;
                if (F(x_k) > 0.0) {
                    below = x_k;
                    bracketed = true;
                    break;
                }
                above = x_k;
            }
            if (!bracketed) {
                if (instance == Instance::LastExit) {
                    solved = xs;  // b1 branch: the x* lower bound binds
                } else {
                    throw NoRootError(i, floor_b, hi);
                }
            } else {
                const NodeRoot root = bisect_node(F, below, above, L, quad, i, K);
                solved = root.b;
                pinned = root.pinned;
            }
        }
        if (instance == Instance::LastExit && std::abs(solved - L) <= band) {
            solved = L;
            pinned = true;
        }
        curve.at_level[i] = pinned ? 1 : 0;
        curve.values[i] = solved;
    }

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (curve.values[i + 1] < curve.values[i] - 1e-8 * K)
            throw NonMonotoneError(i, curve.values[i], curve.values[i + 1]);
        if (!(curve.values[i] > 0.0) || curve.values[i] > K)
            throw NoRootError(i, 0.0, K);
    }
    return curve;
}

double t_star(const BoundaryCurve& classical, double level) {
    const auto& t = classical.grid.nodes;
    const auto& b = classical.values;
    if (b.front() > level) return 0.0;
    for (std::size_t i = 1; i < b.size(); ++i) {
        if (b[i] >= level) {
            if (b[i] == b[i - 1]) return t[i];
            const double w = (level - b[i - 1]) / (b[i] - b[i - 1]);
            return t[i - 1] + w * (t[i] - t[i - 1]);
        }
    }
    return t.back();  // unreachable for K > L: b(T) = K > L
}

bool pinned_interval(const BoundaryCurve& curve, double /*level*/, double* t_lo, double* t_hi) {
    std::size_t first = curve.values.size(), last = 0;
    bool any = false;
    for (std::size_t i = 0; i < curve.values.size(); ++i) {
        if (curve.at_level[i]) {
            if (!any) first = i;
            last = i;
            any = true;
        }
    }
    if (!any) return false;
    if (t_lo) *t_lo = curve.grid.nodes[first];
    if (t_hi) *t_hi = curve.grid.nodes[last];
    return true;
}

bool h_monotone_check(const Contract& contract, const MarketParams& params,
                      const BoundaryCurve& classical, double t_star_value,
                      std::string* detail) {
    // Below L the assumption has content: dH/dt <= 0 on x in [x*(t), L),
    // t in [0, t*].  At and above L, H is -rK or 0, trivially nonincreasing.
    const double tol = 1e-9 * params.r * contract.strike;
    const int nt = 25, nx = 25;
    const double t_hi = (t_star_value > 0.0) ? t_star_value
                                             : 0.5 * contract.expiry();
    (void)classical;
    for (int a = 0; a <= nt; ++a) {
        const double t = t_hi * a / nt;
        if (t >= contract.expiry()) continue;
        const double xs = x_star(t, contract, params, 1e-9 * contract.strike);
        for (int k = 0; k <= nx; ++k) {
            const double x = xs + (contract.level - xs) * k / nx;
            if (!(x > 0.0) || x >= contract.level) continue;
            const double d = h_time_deriv(t, x, contract, params);
            if (d > tol) {
                if (detail) {
                    std::ostringstream os;
                    os << "dH/dt = " << d << " > 0 at (t, x) = (" << t << ", " << x << ")";
                    *detail = os.str();
                }
                return false;
            }
        }
    }
    return true;
}

}  // namespace lastexit
