// lastexit-put: command-line front end.
//   perpetual  closed-form exercise level and value curve
//   boundary   finite-horizon boundaries b(t), B(t), x*(t)
//   value      V(t, x) with gain and classical-put comparison
//   verify     self-checks (MC reductions, boundary residuals)
// Exit codes: 0 ok, 1 invalid config, 2 regime gap, 3 solver failure,
// 4 verification failure.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lastexit/azema.hpp"
#include "lastexit/mc_oracle.hpp"
#include "lastexit/perpetual.hpp"
#include "lastexit/run_config.hpp"
#include "lastexit/valuation.hpp"

using namespace lastexit;

namespace {

std::string join(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    return dir + "/" + name;
}

int cmd_perpetual(const RunConfig& cfg) {
    const auto sol = solve_perpetual(cfg.contract, cfg.params);
    std::printf("case: %s%s\n", sol.case_tag == PerpetualCase::AboveL ? "AboveL" : "BelowL",
                sol.boundary_at_level ? " (boundary pinned at L)" : "");
    std::printf("b = %.6g\n", sol.b);
    std::printf("c2 = %.6g\n", sol.c2);

    const std::string path = join(cfg.out_dir, "perpetual.csv");
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open " + path);
    out << "x,V,G\n";
    char buf[120];
    for (double x : cfg.price_grid()) {
        std::snprintf(buf, sizeof buf, "%.11e,%.11e,%.11e\n", x,
                      perpetual_value(x, sol, cfg.contract, cfg.params),
                      perpetual_gain(x, cfg.contract, cfg.params));
        out << buf;
    }
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

int cmd_boundary(const RunConfig& cfg) {
    const TimeGrid grid = cfg.make_grid();
    const auto classical =
        solve_boundary(cfg.contract, cfg.params, grid, cfg.quad, Instance::Classical);
    const auto curve =
        solve_boundary(cfg.contract, cfg.params, grid, cfg.quad, Instance::LastExit);
    const double ts = t_star(classical, cfg.contract.level);
    std::printf("t_star = %.6g\n", ts);
    double tb = 0.0, tB = 0.0;
    if (pinned_interval(curve, cfg.contract.level, &tb, &tB))
        std::printf("pinned interval: t_b = %.6g, t^b = %.6g\n", tb, tB);
    else
        std::printf("pinned interval: none detected\n");
    std::string why;
    if (!h_monotone_check(cfg.contract, cfg.params, classical, ts, &why))
        std::printf("warning: H time-monotonicity assumption fails (%s)\n", why.c_str());

    const std::string path = join(cfg.out_dir, "boundary.csv");
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open " + path);
    out << "t,b,B,x_star,at_level\n";
    char buf[200];
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid.nodes[i];
        std::string xs;
        if (t <= ts && t < cfg.contract.expiry()) {
            std::snprintf(buf, sizeof buf, "%.11e",
                          x_star(t, cfg.contract, cfg.params, 1e-9 * cfg.contract.strike));
            xs = buf;
        }
        std::snprintf(buf, sizeof buf, "%.11e,%.11e,%.11e,%s,%d\n", t, curve.values[i],
                      classical.values[i], xs.c_str(), int(curve.at_level[i]));
        out << buf;
    }
    curve.write_csv(join(cfg.out_dir, "curve_b.csv"));
    std::printf("wrote %s and %s\n", path.c_str(), join(cfg.out_dir, "curve_b.csv").c_str());
    return 0;
}

int cmd_value(const RunConfig& cfg, double t, double x) {
    const TimeGrid grid = cfg.make_grid();
    const auto curve =
        solve_boundary(cfg.contract, cfg.params, grid, cfg.quad, Instance::LastExit);
    const auto classical =
        solve_boundary(cfg.contract, cfg.params, grid, cfg.quad, Instance::Classical);
    const double v = value(t, x, curve, cfg.contract, cfg.params, cfg.quad, Exec::parallel);
    const double g = gain(t, x, cfg.contract, cfg.params);
    const double va = value(t, x, classical, cfg.contract, cfg.params, cfg.quad, Exec::parallel);
    std::printf("b(t) = %.6g\n", curve.value_at(t));
    std::printf("V(t,x) = %.6g\n", v);
    std::printf("G(t,x) = %.6g\n", g);
    std::printf("VA(t,x) = %.6g\n", va);
    std::printf("region: %s\n", x <= curve.value_at(t) ? "stop" : "continue");

    if (cfg.surface) {
        const double T = cfg.contract.expiry();
        std::vector<double> times(51);
        for (int i = 0; i <= 50; ++i) times[std::size_t(i)] = T * i / 50;
        const auto prices = cfg.price_grid();
        const auto surf = value_surface(times, prices, curve, cfg.contract, cfg.params, cfg.quad);
        const auto surfA =
            value_surface(times, prices, classical, cfg.contract, cfg.params, cfg.quad);
        const std::string path = join(cfg.out_dir, "value_surface.csv");
        write_surface_csv(path, surf, surfA, cfg.contract, cfg.params);
        std::printf("wrote %s\n", path.c_str());
    }
    return 0;
}

struct Verifier {
    bool all_pass = true;
    void check(const std::string& name, bool pass, const std::string& detail) {
        std::printf("%s %s (%s)\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
        all_pass = all_pass && pass;
    }
};

int cmd_verify(const RunConfig& cfg) {
    Verifier v;
    const double T = cfg.contract.expiry();
    const double K = cfg.contract.strike;
    const double L = cfg.contract.level;
    char buf[256];

    // Azema vs MC level-crossing probability
    for (double frac : {0.55, 0.85}) {
        const double x0 = frac * L;
        const double h = 0.5 * T;
        const auto est = prob_max_exceeds(x0, h, L, cfg.mc, cfg.params);
        const double zt = z(T - h, x0, cfg.contract, cfg.params);
        const double se = std::max(est.std_error, 1e-12);
        std::snprintf(buf, sizeof buf, "mc %.6g vs z %.6g, se %.2g", est.mean, zt,
                      est.std_error);
        v.check("z vs prob_max_exceeds at x0=" + std::to_string(x0),
                std::abs(est.mean - zt) <= 3.0 * se, buf);
    }

    // Boundary: load or solve, then residuals
    const TimeGrid grid = cfg.make_grid();
    BoundaryCurve curve = cfg.boundary_csv.empty()
                              ? solve_boundary(cfg.contract, cfg.params, grid, cfg.quad,
                                               Instance::LastExit)
                              : BoundaryCurve::read_csv(cfg.boundary_csv);
    {
        double worst = 0.0;
        for (std::size_t i = 0; i + 1 < curve.grid.size(); ++i) {
            const double t = curve.grid.nodes[i];
            BoundarySegment tail = BoundarySegment::from_curve(curve, t);
            tail.values[0] = curve.values[i];
            const double res =
                std::abs(gain(t, curve.values[i], cfg.contract, cfg.params) -
                         eep_rhs(t, curve.values[i], tail, cfg.contract, cfg.params, cfg.quad,
                                 Instance::LastExit));
            worst = std::max(worst, res);
        }
        std::snprintf(buf, sizeof buf, "max residual %.3g, bound %.3g", worst,
                      2.0 * cfg.quad.root_tol);
        v.check("boundary integral-equation residual", worst < 2.0 * cfg.quad.root_tol, buf);
        v.check("boundary terminal value", curve.values.back() == K, "b(T) == K");
    }

    // Reduction equivalence for a few rules
    const double x0 = 0.8 * K;
    const auto batch = simulate_paths(x0, T, cfg.mc, cfg.params);
    const std::vector<std::pair<std::string, StoppingRule>> rules = {
        {"FixedTime(T/2)", FixedTime{0.5 * T}},
        {"Threshold(0.9 x0)", Threshold{0.9 * x0, true}},
        {"Boundary(b)", BoundaryRule{curve}},
    };
    double boundary_mean = 0.0, boundary_se = 0.0;
    for (const auto& [name, rule] : rules) {
        const auto a = payoff_last_exit(batch, rule, cfg.contract, cfg.params);
        const auto b = payoff_z_weighted(batch, rule, cfg.contract, cfg.params);
        const double se = std::max(std::hypot(a.std_error, b.std_error), 1e-12);
        std::snprintf(buf, sizeof buf, "last-exit %.6g vs z-weighted %.6g, combined se %.2g",
                      a.mean, b.mean, se);
        v.check("reduction equivalence, " + name, std::abs(a.mean - b.mean) <= 3.0 * se, buf);
        if (name == "Boundary(b)") {
            boundary_mean = b.mean;
            boundary_se = b.std_error;
        }
    }

    // Policy dominance of the solved boundary
    for (double lev : {0.8 * x0, 0.6 * x0}) {
        const auto thr = payoff_z_weighted(batch, Threshold{lev, true}, cfg.contract, cfg.params);
        const double se = std::max(std::hypot(boundary_se, thr.std_error), 1e-12);
        std::snprintf(buf, sizeof buf, "boundary %.6g vs threshold %.6g, combined se %.2g",
                      boundary_mean, thr.mean, se);
        v.check("policy dominance vs threshold " + std::to_string(lev),
                boundary_mean >= thr.mean - 2.0 * se, buf);
    }

    std::printf("%s\n", v.all_pass ? "ALL PASS" : "FAILURES PRESENT");
    return v.all_pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"American put truncated at the last exit time of the price at a level"};
    app.require_subcommand(1);
    std::string config_path, out_override;
    double t = 0.0, x = 0.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_override, "output directory override");
    };
    auto* sub_perp = app.add_subcommand("perpetual", "closed-form perpetual solution");
    add_common(sub_perp);
    auto* sub_bound = app.add_subcommand("boundary", "solve b(t), B(t), x*(t)");
    add_common(sub_bound);
    auto* sub_value = app.add_subcommand("value", "value V(t, x)");
    add_common(sub_value);
    auto* opt_t = sub_value->add_option("--t", t, "valuation time in years");
    auto* opt_x = sub_value->add_option("--x", x, "price");
    auto* sub_verify = app.add_subcommand("verify", "run self-checks");
    add_common(sub_verify);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = RunConfig::load(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (sub_perp->parsed()) return cmd_perpetual(cfg);
        if (sub_bound->parsed()) return cmd_boundary(cfg);
        if (sub_value->parsed()) {
            if (opt_t->count() == 0 || opt_x->count() == 0)
                throw std::invalid_argument("value: --t and --x are required");
            return cmd_value(cfg, t, x);
        }
        return cmd_verify(cfg);
    } catch (const AmbiguousRegime& e) {
        std::fprintf(stderr, "error (regime gap): %s\n", e.what());
        return 2;
    } catch (const NoRootError& e) {
        std::fprintf(stderr, "error (solver): %s\n", e.what());
        return 3;
    } catch (const NonMonotoneError& e) {
        std::fprintf(stderr, "error (solver): %s\n", e.what());
        return 3;
    } catch (const QuadratureError& e) {
        std::fprintf(stderr, "error (solver): %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
