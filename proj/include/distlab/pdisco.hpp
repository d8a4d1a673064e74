#pragma once

#include <cstdint>
#include <vector>

#include "distlab/odisco.hpp"

namespace distlab {

// Offline data: N i.i.d. tuples per step drawn from (nu_h, C_h, P_h). The
// generating nu is kept when the data is synthetic so coverage coefficients
// can be reported exactly.
struct offline_dataset {
    long n_per_h = 0;
    std::vector<std::vector<rl_transition>> per_h;
    std::vector<real_table> nu; // empty when unknown
};

offline_dataset generate_offline_data(const tabular_mdp& mdp, const std::vector<real_table>& nu,
                                      long n, std::uint64_t seed);

// Per-policy confidence set: TD targets use the comparator policy's action
// at the successor state, threshold 7*beta per layer.
std::vector<int> policy_confidence_set(const dist_function_class& cls,
                                       const markov_policy& pi, const offline_dataset& data,
                                       double beta, const rng& target_root, bool exact);

struct pdisco_options {
    double beta = 0.0;
    bool small_return = false;
    bool exact_targets = false;
    std::uint64_t seed = 0;
    par::mode mode = par::global_mode();
};

struct pdisco_policy_report {
    int pessimistic_member = -1;
    double pessimistic_value = 0.0;
    int survivor_count = 0;
    double exact_value = 0.0;
    double coverage = 0.0; // C^pi against the dataset's nu; NaN when unknown
};

struct pdisco_result {
    int chosen_policy = -1;
    std::vector<pdisco_policy_report> per_policy;
};

// Default threshold parameter log(H |Pi| |F| / delta).
double pdisco_default_beta(int horizon, int policy_count, int class_size, double delta);

// Pessimistic selection: per policy, the confidence-set member with the
// worst-case initial value (max for costs, min under small_return); the
// output policy optimizes that pessimistic value (min for costs, max under
// small_return).
pdisco_result run_pdisco(const tabular_mdp& mdp, const offline_dataset& data,
                         const dist_function_class& cls,
                         const std::vector<markov_policy>& policies,
                         const pdisco_options& opts);

// 9 H sqrt(C V beta / N) + 30 H^2 C beta / N.
double offline_pac_bound(double c_cover, double v_tilde, int horizon, long n, double beta);

} // namespace distlab
