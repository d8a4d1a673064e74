#include "distlab/pdisco.hpp"

#include <cmath>
#include <limits>

namespace distlab {

offline_dataset generate_offline_data(const tabular_mdp& mdp, const std::vector<real_table>& nu,
                                      long n, std::uint64_t seed) {
    if (n < 0) throw parameter_error("generate_offline_data: negative sample count");
    if (static_cast<int>(nu.size()) != mdp.horizon())
        throw parameter_error("generate_offline_data: nu horizon mismatch");
    const int X = mdp.num_states();
    const int A = mdp.num_actions();
    offline_dataset data;
    data.n_per_h = n;
    data.nu = nu;
    data.per_h.assign(static_cast<std::size_t>(mdp.horizon()), {});
    rng root(seed);
    for (int h = 0; h < mdp.horizon(); ++h) {
        std::vector<double> flat(static_cast<std::size_t>(X * A), 0.0);
        double s = 0.0;
        for (int x = 0; x < X; ++x)
            for (int a = 0; a < A; ++a) {
                const double p = nu[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                                   [static_cast<std::size_t>(a)];
                if (!(p >= 0.0))
                    throw weight_error("generate_offline_data: negative nu mass");
                flat[static_cast<std::size_t>(x * A + a)] = p;
                s += p;
            }
        if (std::abs(s - 1.0) > 1e-9)
            throw weight_error("generate_offline_data: nu layer does not sum to 1");
        rng gen = root.derive({stream::data, static_cast<std::uint64_t>(h)});
        auto& layer = data.per_h[static_cast<std::size_t>(h)];
        layer.reserve(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) {
            const int cell = gen.sample_categorical(flat);
            const int x = cell / A;
            const int a = cell % A;
            const int c = gen.sample_categorical(mdp.cost(h, x, a).probs());
            const int xn = gen.sample_categorical(mdp.transition_row(h, x, a));
            layer.push_back({x, a, c, xn});
        }
    }
    return data;
}

std::vector<int> policy_confidence_set(const dist_function_class& cls,
                                       const markov_policy& pi, const offline_dataset& data,
                                       double beta, const rng& target_root, bool exact) {
    confidence_engine engine(cls, false);
    const auto counts = rl_dataset_counts::from_tuples(cls.num_states, cls.num_actions,
                                                       cls.grid.atom_count, data.per_h);
    return engine.survivors_policy(counts, pi, beta, exact, target_root);
}

double pdisco_default_beta(int horizon, int policy_count, int class_size, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw parameter_error("pdisco_default_beta: delta must be in (0,1)");
    return std::log(static_cast<double>(horizon) * static_cast<double>(policy_count) *
                    static_cast<double>(class_size) / delta);
}

pdisco_result run_pdisco(const tabular_mdp& mdp, const offline_dataset& data,
                         const dist_function_class& cls,
                         const std::vector<markov_policy>& policies,
                         const pdisco_options& opts) {
    if (policies.empty()) throw parameter_error("run_pdisco: empty policy class");
    if (cls.num_states != mdp.num_states() || cls.num_actions != mdp.num_actions() ||
        cls.horizon != mdp.horizon() || !(cls.grid == mdp.grid()))
        throw parameter_error("run_pdisco: class shape does not match the MDP");

    confidence_engine engine(cls, opts.small_return);
    const auto counts = rl_dataset_counts::from_tuples(mdp.num_states(), mdp.num_actions(),
                                                       mdp.grid().atom_count, data.per_h);
    rng root(opts.seed);

    const int P = static_cast<int>(policies.size());
    pdisco_result result;
    result.per_policy.assign(static_cast<std::size_t>(P), {});
    std::vector<signed char> empty_set(static_cast<std::size_t>(P), 0);

    // Per-policy confidence sets are independent; disjoint target streams
    // are derived from the run seed and the policy index.
    par::for_each_index(
        static_cast<std::size_t>(P),
        [&](std::size_t pi_idx) {
            const auto& pi = policies[pi_idx];
            const rng target_root =
                root.derive({stream::targets, static_cast<std::uint64_t>(pi_idx)});
            const auto survivors = engine.survivors_policy(counts, pi, opts.beta,
                                                           opts.exact_targets, target_root,
                                                           par::mode::serial);
            auto& report = result.per_policy[pi_idx];
            report.survivor_count = static_cast<int>(survivors.size());
            if (survivors.empty()) {
                empty_set[pi_idx] = 1;
                return;
            }
            const auto& arow = pi.row(0, mdp.initial_state());
            for (int f : survivors) {
                double v = 0.0;
                for (int a = 0; a < cls.num_actions; ++a)
                    v += arow[static_cast<std::size_t>(a)] *
                         mean(cls.table(f, 0, mdp.initial_state(), a));
                const bool better = report.pessimistic_member < 0 ||
                                    (opts.small_return ? v < report.pessimistic_value
                                                       : v > report.pessimistic_value);
                if (better) {
                    report.pessimistic_member = f;
                    report.pessimistic_value = v;
                }
            }
            report.exact_value = value(mdp, pi);
            report.coverage = data.nu.empty() ? std::numeric_limits<double>::quiet_NaN()
                                              : coverage_coefficient(mdp, pi, data.nu);
        },
        opts.mode);

    for (int p = 0; p < P; ++p)
        if (empty_set[static_cast<std::size_t>(p)])
            throw algorithm_failure("run_pdisco: empty confidence set for policy " +
                                    std::to_string(p));

    int chosen = 0;
    for (int p = 1; p < P; ++p) {
        const double cur = result.per_policy[static_cast<std::size_t>(p)].pessimistic_value;
        const double ref = result.per_policy[static_cast<std::size_t>(chosen)].pessimistic_value;
        if (opts.small_return ? cur > ref : cur < ref) chosen = p;
    }
    result.chosen_policy = chosen;
    return result;
}

double offline_pac_bound(double c_cover, double v_tilde, int horizon, long n, double beta) {
    if (n < 1) throw parameter_error("offline_pac_bound: N must be >= 1");
    if (c_cover < 0.0 || v_tilde < 0.0 || horizon < 0 || beta < 0.0)
        throw parameter_error("offline_pac_bound: inputs must be >= 0");
    const double nn = static_cast<double>(n);
    return 9.0 * horizon * std::sqrt(c_cover * v_tilde * beta / nn) +
           30.0 * horizon * horizon * c_cover * beta / nn;
}

} // namespace distlab
