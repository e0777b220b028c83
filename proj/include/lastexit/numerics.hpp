// Small numeric kernels shared across modules: execution policy for the
// OpenMP-parallel loops, order-independent pairwise summation, and
// Gauss-Legendre rules.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lastexit {

// Every parallel kernel has a serial twin that must produce bit-identical
// results; tests and the benchmark target compare the two.
enum class Exec { serial, parallel };

// Pairwise summation in index order: the same value regardless of how the
// entries were produced (serial loop or OpenMP fill).
double pairwise_sum(std::span<const double> v);

struct GaussLegendre {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;
};

// Nodes/weights for an n-point rule (cached per n, thread-safe).
const GaussLegendre& gauss_legendre(int n);

}  // namespace lastexit
