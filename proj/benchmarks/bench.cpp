// Timing comparison of the OpenMP kernels against their serial reference
// implementations.  Also asserts bit-identical results for each pair.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lastexit/mc_oracle.hpp"
#include "lastexit/valuation.hpp"

using namespace lastexit;

namespace {

double time_ms(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-28s serial %9.1f ms   openmp %9.1f ms   speedup %5.2fx   %s\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms,
                identical ? "bit-identical" : "MISMATCH");
    if (!identical) std::exit(1);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both columns run serially\n");
#endif
    const MarketParams params(0.05, 0.4);
    const Contract contract(7.0, 2.0, 10.0);
    const QuadratureSpec quad = QuadratureSpec::defaults(contract.strike);

    McConfig mc;
    mc.n_paths = 200000;
    mc.steps_per_year = 50;
    mc.seed = 20240501;
    const auto batch = simulate_paths(4.0, 10.0, mc, params);
    const StoppingRule rule = Threshold{3.0, true};

    McEstimate a{}, b{};
    const double t_ser =
        time_ms([&] { a = payoff_last_exit(batch, rule, contract, params, Exec::serial); });
    const double t_par =
        time_ms([&] { b = payoff_last_exit(batch, rule, contract, params, Exec::parallel); });
    report("payoff_last_exit", t_ser, t_par, a.mean == b.mean && a.std_error == b.std_error);

    const double t_ser2 =
        time_ms([&] { a = payoff_z_weighted(batch, rule, contract, params, Exec::serial); });
    const double t_par2 =
        time_ms([&] { b = payoff_z_weighted(batch, rule, contract, params, Exec::parallel); });
    report("payoff_z_weighted", t_ser2, t_par2, a.mean == b.mean && a.std_error == b.std_error);

    const double t_ser3 = time_ms(
        [&] { a = prob_max_exceeds(1.0, 10.0, 2.0, mc, params, Exec::serial); });
    const double t_par3 = time_ms(
        [&] { b = prob_max_exceeds(1.0, 10.0, 2.0, mc, params, Exec::parallel); });
    report("prob_max_exceeds", t_ser3, t_par3, a.mean == b.mean && a.std_error == b.std_error);

    const TimeGrid grid = TimeGrid::sqrt_stretched(10.0, 120);
    const auto curve = solve_boundary(contract, params, grid, quad, Instance::LastExit);
    const BoundarySegment tail = BoundarySegment::from_curve(curve, 0.0);
    double va = 0.0, vb = 0.0;
    const double t_ser4 = time_ms([&] {
        for (int k = 0; k < 20; ++k)
            va = eep_rhs(0.0, 4.0 + 0.01 * k, tail, contract, params, quad,
                         Instance::LastExit, Exec::serial);
    });
    const double t_par4 = time_ms([&] {
        for (int k = 0; k < 20; ++k)
            vb = eep_rhs(0.0, 4.0 + 0.01 * k, tail, contract, params, quad,
                         Instance::LastExit, Exec::parallel);
    });
    report("eep_rhs x20", t_ser4, t_par4, va == vb);

    std::vector<double> times, prices;
    for (int i = 0; i < 12; ++i) times.push_back(10.0 * i / 12);
    for (int j = 0; j < 12; ++j) prices.push_back(1.0 + j);
    ValueSurface sa, sb;
    const double t_ser5 = time_ms([&] {
        sa = value_surface(times, prices, curve, contract, params, quad, Exec::serial);
    });
    const double t_par5 = time_ms([&] {
        sb = value_surface(times, prices, curve, contract, params, quad, Exec::parallel);
    });
    report("value_surface 12x12", t_ser5, t_par5, sa.values == sb.values);
    return 0;
}
