#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "distlab/grid.hpp"
#include "distlab/rng.hpp"

namespace distlab {

// Conditional distribution table for one step: one grid_categorical per
// (state, action) cell.
using cond_dist_table = std::vector<std::vector<grid_categorical>>;

// Per-step real table [x][a] (means, Q-values, occupancies, ...).
using real_table = std::vector<std::vector<double>>;

// Markov policy: probs[h][x] is a distribution over actions, one row per
// step 1..H (stored 0-based).
struct markov_policy {
    std::vector<std::vector<std::vector<double>>> probs;

    [[nodiscard]] int horizon() const { return static_cast<int>(probs.size()); }
    [[nodiscard]] const std::vector<double>& row(int h, int x) const {
        return probs[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)];
    }
    // Deterministic action at (h,x); requires a one-hot row.
    [[nodiscard]] int action_at(int h, int x) const;

    static markov_policy deterministic(int horizon, int num_states, int num_actions,
                                       const std::vector<std::vector<int>>& actions);
    static markov_policy uniform(int horizon, int num_states, int num_actions);
};

// Finite-horizon tabular MDP with exact grid-based cost distributions.
// Construction validates transition rows, grid consistency and the
// normalization guard H * (max per-step cost atom) <= 1, which keeps every
// return distribution on the grid. Immutable afterwards.
class tabular_mdp {
  public:
    tabular_mdp(int num_states, int num_actions, int horizon, int initial_state, grid_spec grid,
                std::vector<std::vector<std::vector<std::vector<double>>>> transitions,
                std::vector<std::vector<std::vector<grid_categorical>>> costs);

    [[nodiscard]] int num_states() const { return x_; }
    [[nodiscard]] int num_actions() const { return a_; }
    [[nodiscard]] int horizon() const { return h_; }
    [[nodiscard]] int initial_state() const { return x1_; }
    [[nodiscard]] const grid_spec& grid() const { return grid_; }

    [[nodiscard]] const std::vector<double>& transition_row(int h, int x, int a) const {
        return transitions_[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                           [static_cast<std::size_t>(a)];
    }
    [[nodiscard]] const grid_categorical& cost(int h, int x, int a) const {
        return costs_[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                     [static_cast<std::size_t>(a)];
    }
    [[nodiscard]] double cost_mean(int h, int x, int a) const {
        return cost_means_[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                          [static_cast<std::size_t>(a)];
    }

    [[nodiscard]] cond_dist_table dirac_zero_table() const;

  private:
    int x_, a_, h_, x1_;
    grid_spec grid_;
    std::vector<std::vector<std::vector<std::vector<double>>>> transitions_;
    std::vector<std::vector<std::vector<grid_categorical>>> costs_;
    std::vector<real_table> cost_means_;
};

// One step of the distributional Bellman operator for policy pi:
// convolve(C_h(x,a), mixture over x'~P_h(x,a), a'~pi_{h+1}(x') of
// d_next(x',a')). h is 0-based; for the terminal step the successor action
// distribution is irrelevant whenever d_next is the dirac-at-zero table.
cond_dist_table dist_backup_pi(const tabular_mdp& mdp, int h, const cond_dist_table& d_next,
                               const markov_policy& pi);

// Optimality variant: a' = argmin_a mean(d_next(x',a)) (argmax under
// small_return); ties break to the lowest index.
cond_dist_table dist_backup_star(const tabular_mdp& mdp, int h, const cond_dist_table& d_next,
                                 bool small_return = false);

// Z^pi layers 1..H via the exact backward recursion from dirac-at-zero.
std::vector<cond_dist_table> return_distribution(const tabular_mdp& mdp,
                                                 const markov_policy& pi);

// Scalar Bellman recursions on means.
std::vector<real_table> q_values(const tabular_mdp& mdp, const markov_policy& pi);
double value(const tabular_mdp& mdp, const markov_policy& pi);

struct optimal_policy_result {
    markov_policy policy;
    double value;
};
optimal_policy_result optimal_policy(const tabular_mdp& mdp, bool small_return = false);

// Visitation distribution over (x,a) per step; each layer sums to 1.
std::vector<real_table> occupancy(const tabular_mdp& mdp, const markov_policy& pi);

// Occupancy layers conditioned on starting from (x,a) at step h0 and then
// following pi; layer index t >= h0. Used by the self-bounding diagnostics.
std::vector<real_table> occupancy_from(const tabular_mdp& mdp, const markov_policy& pi, int h0,
                                       int x0, int a0);

// max_{h,x,a} d^pi_h(x,a) / nu_h(x,a) with 0/0 = 0 and positive/0 = +inf.
double coverage_coefficient(const tabular_mdp& mdp, const markov_policy& pi_tilde,
                            const std::vector<real_table>& nu);

struct rl_transition {
    int x = 0;
    int a = 0;
    int cost_idx = 0;
    int x_next = 0;
    [[nodiscard]] double cost_value(const grid_spec& g) const { return g.atom(cost_idx); }
};

// Full on-policy trajectory (one transition per step).
std::vector<rl_transition> sample_trajectory(const tabular_mdp& mdp, const markov_policy& pi,
                                             rng& gen);

// Uniform action exploration: one fresh partial rollout per step h, with
// x ~ d^pi_h, a ~ unif(A).
std::vector<rl_transition> sample_uae_tuples(const tabular_mdp& mdp, const markov_policy& pi,
                                             rng& gen);

// Exact value of the uniform mixture of a list of policies.
double mixture_value(const tabular_mdp& mdp, const std::vector<markov_policy>& policies);

} // namespace distlab
