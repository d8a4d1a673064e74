#pragma once

#include <optional>
#include <vector>

#include "distlab/mdp.hpp"

namespace distlab {

// One hypothesis: a tuple (f_1,...,f_H) of per-step conditional distribution
// tables; f_{H+1} is the implicit dirac-at-zero table.
using dist_member = std::vector<cond_dist_table>;

struct dist_function_class {
    grid_spec grid;
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    std::vector<dist_member> members;

    [[nodiscard]] int size() const { return static_cast<int>(members.size()); }
    [[nodiscard]] const grid_categorical& table(int member, int h, int x, int a) const {
        return members[static_cast<std::size_t>(member)][static_cast<std::size_t>(h)]
                      [static_cast<std::size_t>(x)][static_cast<std::size_t>(a)];
    }
};

// Greedy policy of a member: per-(h,x) argmin of means (argmax under
// small_return), ties to the lowest action index.
markov_policy greedy_policy(const dist_member& member, bool small_return = false);

// Bellman-complete class by suffix closure: members are the Z-functions of
// all non-stationary policy sequences composable from policy_set, so every
// backup by a policy in the set lands back in the class. Deduplicated at
// 1e-12 per atom.
dist_function_class build_suffix_class(const tabular_mdp& mdp,
                                       const std::vector<markov_policy>& policy_set,
                                       long size_guard = 100000);

struct bc_violation {
    int member = -1;
    int policy = -1;
    int step = -1;
};

struct bc_check_result {
    bool complete = true;
    std::optional<bc_violation> first_violation;
};

// Brute-force audit of distributional Bellman completeness: every backup
// T^{pi,D}_h f_{h+1} must match some layer-h table within tol per atom.
bc_check_result check_distributional_bc(const dist_function_class& cls, const tabular_mdp& mdp,
                                        const std::vector<markov_policy>& policy_set,
                                        double tol = 1e-10);

// Index of the member equal to the given tuple within tol per atom, if any.
std::optional<int> find_member(const dist_function_class& cls, const dist_member& target,
                               double tol = 1e-9);

} // namespace distlab
