#include "lastexit/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace lastexit {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: bad boolean for " + key + ": " + v);
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " is not key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    static const char* known[] = {"r", "sigma", "strike", "level", "maturity", "grid_nodes",
                                  "quad_space", "quad_time", "root_tol", "max_bisect",
                                  "mc_paths", "mc_steps_per_year", "mc_seed", "mc_antithetic",
                                  "mc_bridge", "x_min", "x_max", "x_count", "surface",
                                  "boundary_csv", "out"};
    for (const auto& [k, v] : kv) {
        (void)v;
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* s) { return k == s; }) == std::end(known))
            throw std::invalid_argument("config: unknown key " + k);
    }

    auto get = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto require = [&](const char* key) -> const std::string& {
        const std::string* v = get(key);
        if (!v) throw std::invalid_argument(std::string("config: missing key ") + key);
        return *v;
    };
    auto as_double = [&](const std::string& v, const char* key) {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(std::string("config: bad number for ") + key);
        return x;
    };

    MarketParams params(as_double(require("r"), "r"), as_double(require("sigma"), "sigma"));
    std::optional<double> maturity;
    if (const std::string* m = get("maturity"); m && *m != "inf")
        maturity = as_double(*m, "maturity");
    Contract contract(as_double(require("strike"), "strike"),
                      as_double(require("level"), "level"), maturity);
    const double K = contract.strike;

    const int grid_nodes = get("grid_nodes") ? int(as_double(*get("grid_nodes"), "grid_nodes")) : 200;
    QuadratureSpec quad(get("quad_space") ? int(as_double(*get("quad_space"), "quad_space")) : 64,
                        get("quad_time") ? int(as_double(*get("quad_time"), "quad_time")) : 8,
                        get("root_tol") ? as_double(*get("root_tol"), "root_tol") : 1e-8 * K,
                        get("max_bisect") ? int(as_double(*get("max_bisect"), "max_bisect")) : 200,
                        K);
    McConfig mc;
    if (get("mc_paths")) mc.n_paths = long(as_double(*get("mc_paths"), "mc_paths"));
    if (get("mc_steps_per_year"))
        mc.steps_per_year = int(as_double(*get("mc_steps_per_year"), "mc_steps_per_year"));
    if (get("mc_seed")) mc.seed = std::uint64_t(as_double(*get("mc_seed"), "mc_seed"));
    if (get("mc_antithetic")) mc.antithetic = parse_bool(*get("mc_antithetic"), "mc_antithetic");
    if (get("mc_bridge")) mc.bridge_correction = parse_bool(*get("mc_bridge"), "mc_bridge");
    mc.validate();

    RunConfig cfg{params,
                  contract,
                  grid_nodes,
                  quad,
                  mc,
                  get("x_min") ? as_double(*get("x_min"), "x_min") : 0.05 * K,
                  get("x_max") ? as_double(*get("x_max"), "x_max") : 2.0 * K,
                  get("x_count") ? int(as_double(*get("x_count"), "x_count")) : 201,
                  get("surface") ? parse_bool(*get("surface"), "surface") : false,
                  get("boundary_csv") ? *get("boundary_csv") : "",
                  get("out") ? *get("out") : "."};
    if (grid_nodes < 8) throw std::invalid_argument("config: grid_nodes must be >= 8");
    if (!(cfg.x_min > 0.0) || !(cfg.x_max > cfg.x_min) || cfg.x_count < 2)
        throw std::invalid_argument("config: bad price grid");
    return cfg;
}

std::vector<double> RunConfig::price_grid() const {
    std::vector<double> xs(static_cast<std::size_t>(x_count));
    for (int i = 0; i < x_count; ++i)
        xs[std::size_t(i)] = x_min + (x_max - x_min) * i / (x_count - 1);
    return xs;
}

}  // namespace lastexit
