#pragma once

#include <cstdint>
#include <string>

#include "distlab/grid.hpp"
#include "distlab/parallel.hpp"
#include "distlab/rng.hpp"

namespace distlab {

// Random valid distribution on the grid: exponential weights over a random
// support mask (so the 0/0 and disjoint-support paths get exercised).
grid_categorical random_distribution(grid_spec grid, rng& gen, double keep_prob = 0.7);

struct divergence_audit_config {
    long pairs = 10000;
    int min_atoms = 2;
    int max_atoms = 51;
    std::uint64_t seed = 0;
    double tol = 1e-9;
};

struct divergence_audit_result {
    long pairs = 0;
    long violations = 0;
    double max_violation = 0.0; // largest slack overshoot observed
    std::string worst_check;

    [[nodiscard]] bool clean() const { return violations == 0; }
};

// Checks, per random pair (f,g) on a random grid size:
//   2 H^2 <= D_tri <= 4 H^2,
//   |mean f - mean g| <= sqrt((mean f + mean g) D_tri)          (tri_1)
//   |mean f - mean g| <= sqrt(4 mean g + D_tri) sqrt(D_tri)     (tri_2)
//   H^2 <= TV <= sqrt(2) H,  H <= sqrt(KL) when KL is finite.
// Pair i is generated from a stream derived from (seed, i), so serial and
// OpenMP runs audit the same pairs and report identical results.
divergence_audit_result divergence_audit(const divergence_audit_config& cfg,
                                         par::mode mode = par::global_mode());

} // namespace distlab
