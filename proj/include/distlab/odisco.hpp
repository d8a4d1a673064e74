#pragma once

#include <cstdint>
#include <vector>

#include "distlab/function_class.hpp"
#include "distlab/mdp.hpp"
#include "distlab/parallel.hpp"

namespace distlab {

// Per-step datasets of (x, a, c, x') tuples, grouped by cell so confidence
// sets can be scored from counts instead of replaying tuples.
class rl_dataset_counts {
  public:
    rl_dataset_counts(int num_states, int num_actions, int atom_count, int horizon);

    void add(int h, const rl_transition& t);
    [[nodiscard]] long size_per_h() const { return n_; }
    [[nodiscard]] long count(int h, int x, int a, int c, int xn) const {
        return counts_[static_cast<std::size_t>(h)][flat(x, a, c, xn)];
    }
    [[nodiscard]] const std::vector<long>& layer(int h) const {
        return counts_[static_cast<std::size_t>(h)];
    }
    [[nodiscard]] int num_states() const { return x_; }
    [[nodiscard]] int num_actions() const { return a_; }
    [[nodiscard]] int atom_count() const { return m_; }
    [[nodiscard]] int horizon() const { return h_; }

    [[nodiscard]] std::size_t flat(int x, int a, int c, int xn) const {
        return ((static_cast<std::size_t>(x) * static_cast<std::size_t>(a_) +
                 static_cast<std::size_t>(a)) *
                    static_cast<std::size_t>(m_) +
                static_cast<std::size_t>(c)) *
                   static_cast<std::size_t>(x_) +
               static_cast<std::size_t>(xn);
    }

    static rl_dataset_counts from_tuples(int num_states, int num_actions, int atom_count,
                                         const std::vector<std::vector<rl_transition>>& per_h);

  private:
    int x_, a_, m_, h_;
    long n_ = 0;
    std::vector<std::vector<long>> counts_;
};

// Precomputed scoring state for one function class: floored log-density
// tables, layer means, and greedy successor actions. The survivor scans are
// the data-parallel kernels (one slot per member); serial and OpenMP paths
// produce identical results.
class confidence_engine {
  public:
    confidence_engine(const dist_function_class& cls, bool small_return);

    [[nodiscard]] const dist_function_class& cls() const { return *cls_; }
    [[nodiscard]] bool small_return() const { return small_return_; }

    // TD targets z = c + y with y drawn from (or integrated over, when exact)
    // f_{h+1}(x', a') for the member's own greedy a'. Returns surviving
    // member indices under the 7*beta log-likelihood threshold per layer.
    [[nodiscard]] std::vector<int> survivors_greedy(const rl_dataset_counts& data, double beta,
                                                    bool exact, const rng& target_root,
                                                    par::mode mode = par::global_mode()) const;

    // Comparator-policy targets a' = pi_{h+1}(x').
    [[nodiscard]] std::vector<int> survivors_policy(const rl_dataset_counts& data,
                                                    const markov_policy& pi, double beta,
                                                    bool exact, const rng& target_root,
                                                    par::mode mode = par::global_mode()) const;

    // Greedy successor action of member f at step h (the action drawn for
    // targets of layer h-1 tuples landing in x').
    [[nodiscard]] int greedy_next_action(int member, int next_layer, int x) const {
        return next_action_[static_cast<std::size_t>(member)]
                           [static_cast<std::size_t>(next_layer)][static_cast<std::size_t>(x)];
    }

  private:
    [[nodiscard]] std::vector<int> survivors_impl(const rl_dataset_counts& data,
                                                  const markov_policy* pi, double beta,
                                                  bool exact, const rng& target_root,
                                                  par::mode mode) const;

    const dist_function_class* cls_;
    bool small_return_;
    int x_, a_, m_, h_;
    // log_tables_[f][h][x*A*m + a*m + z]
    std::vector<std::vector<std::vector<double>>> log_tables_;
    // means_[f][h][x*A + a]
    std::vector<std::vector<std::vector<double>>> means_;
    // next_action_[f][h][x]: arg-op_a means_[f][h][x][a] (layers 1..H-1);
    // index h is the layer whose table supplies targets.
    std::vector<std::vector<std::vector<int>>> next_action_;
};

// Spec-level wrappers over the engine (build per call; fine for tests).
std::vector<int> confidence_set(const dist_function_class& cls,
                                const std::vector<std::vector<rl_transition>>& datasets,
                                double beta, bool small_return, const rng& target_root,
                                bool exact);

// TD targets for one member and layer: z atom indices, one per tuple.
std::vector<int> td_targets(const dist_function_class& cls, int member, int h,
                            const std::vector<rl_transition>& tuples, bool small_return,
                            rng& gen);

// Arg-op over survivors of op_a mean f_1(x1, a); ties to the lowest index.
int optimistic_select(const dist_function_class& cls, const std::vector<int>& surviving, int x1,
                      bool small_return);

struct odisco_options {
    long episodes = 0;
    double beta = 0.0;
    bool uae = false;
    bool small_return = false;
    bool exact_targets = false;
    std::uint64_t seed = 0;
    par::mode mode = par::global_mode();
};

struct odisco_episode_log {
    int chosen_member = -1;
    double policy_value = 0.0;
    double optimistic_value = 0.0;
    int survivor_count = 0;
    bool truth_survives = false;
};

struct odisco_result {
    double v_star = 0.0;
    double mixture_value = 0.0;
    int truth_member = -1;
    std::vector<odisco_episode_log> episodes;
    std::vector<double> cum_regret;
    std::vector<int> final_survivors;
    std::vector<real_table> occupancy_sum; // sum_k d^{pi^k}_h
};

// Default threshold parameter log(H K |F| / delta).
double odisco_default_beta(int horizon, long episodes, int class_size, double delta);

odisco_result run_odisco(const tabular_mdp& mdp, const dist_function_class& cls,
                         const odisco_options& opts);

// Per-layer training error sum_{x,a} occ_sum_h(x,a) H^2(f_h(x,a) ||
// T^{*,D}_h f_{h+1}(x,a)) for one member, with occ_sum the summed
// occupancies of the played policies.
std::vector<double> training_error(const tabular_mdp& mdp, const dist_function_class& cls,
                                   int member, bool small_return,
                                   const std::vector<real_table>& occupancy_sum);

} // namespace distlab
