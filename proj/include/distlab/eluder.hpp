#pragma once

#include <vector>

#include "distlab/errors.hpp"

namespace distlab {

// Abstract instance for the eluder-dimension search: a finite point set, a
// matrix of test functions over it, and a matrix of distribution rows.
struct eluder_instance {
    std::vector<std::vector<double>> psi;   // |Psi| x S
    std::vector<std::vector<double>> dists; // |D| x S, each row sums to 1

    [[nodiscard]] int point_count() const {
        return psi.empty() ? 0 : static_cast<int>(psi.front().size());
    }
    [[nodiscard]] int function_count() const { return static_cast<int>(psi.size()); }
    [[nodiscard]] int dist_count() const { return static_cast<int>(dists.size()); }

    void validate() const;

    // |E_d f| matrix, indexed [d][f].
    [[nodiscard]] std::vector<std::vector<double>> abs_expectations() const;

    // Envelope C = max_{d,f} |E_d f|.
    [[nodiscard]] double envelope() const;
};

// Exhaustive lp distributional eluder dimension: the length of the longest
// sequence from the distribution set (repetition allowed) such that for some
// threshold eps' >= eps every element has a witness function exceeding eps'
// whose lp-aggregated signal over the predecessors stays within eps'. The
// sup over eps' is exact: the feasible eps' region of any witness assignment
// is an interval [max prefix norm, min witness value), so it suffices to
// test eps itself plus a point just below each achievable |E_d f| value.
int de_dimension(const eluder_instance& inst, double eps, int p);

struct pigeonhole_result {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

// Evaluates both sides of the eluder pigeonhole bound on a concrete
// function/distribution sequence: lhs = sum_t |E_{d^(t)} f^(t)|, rhs =
// inf over a finite eps grid of DE_1(eps)(2C + beta log(C/eps)) + k eps.
// The precondition sum_{i<k} |E_{d^(i)} f^(k)| <= beta is verified first.
pigeonhole_result pigeonhole_check(const eluder_instance& inst, const std::vector<int>& f_seq,
                                   const std::vector<int>& d_seq, double beta);

} // namespace distlab
