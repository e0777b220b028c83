// Flat key = value run configuration shared by the CLI commands.
#pragma once

#include <string>

#include "lastexit/fb_solver.hpp"
#include "lastexit/mc_oracle.hpp"

namespace lastexit {

struct RunConfig {
    MarketParams params;
    Contract contract;
    int grid_nodes;
    QuadratureSpec quad;
    McConfig mc;
    double x_min, x_max;
    int x_count;
    bool surface;
    std::string boundary_csv;  // optional input for the verify command
    std::string out_dir;

    // Parses "key = value" lines ('#' comments, blank lines ignored).
    // Unknown keys are rejected.  maturity = inf (or absent) selects the
    // perpetual contract.
    static RunConfig load(const std::string& path);

    TimeGrid make_grid() const { return TimeGrid::sqrt_stretched(contract.expiry(), grid_nodes); }
    std::vector<double> price_grid() const;
};

}  // namespace lastexit
