#include "distlab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace distlab {

namespace {

int argext(const std::vector<double>& v, bool take_max) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i) {
        const double cur = v[static_cast<std::size_t>(i)];
        const double ref = v[static_cast<std::size_t>(best)];
        if (take_max ? cur > ref : cur < ref) best = i;
    }
    return best;
}

} // namespace

int markov_policy::action_at(int h, int x) const {
    const auto& r = row(h, x);
    for (int a = 0; a < static_cast<int>(r.size()); ++a)
        if (r[static_cast<std::size_t>(a)] == 1.0) return a;
    throw parameter_error("markov_policy::action_at on a stochastic row");
}

markov_policy markov_policy::deterministic(int horizon, int num_states, int num_actions,
                                           const std::vector<std::vector<int>>& actions) {
    markov_policy pi;
    pi.probs.assign(static_cast<std::size_t>(horizon),
                    std::vector<std::vector<double>>(
                        static_cast<std::size_t>(num_states),
                        std::vector<double>(static_cast<std::size_t>(num_actions), 0.0)));
    for (int h = 0; h < horizon; ++h)
        for (int x = 0; x < num_states; ++x) {
            const int a = actions[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)];
            if (a < 0 || a >= num_actions)
                throw parameter_error("markov_policy::deterministic: action out of range");
            pi.probs[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                    [static_cast<std::size_t>(a)] = 1.0;
        }
    return pi;
}

markov_policy markov_policy::uniform(int horizon, int num_states, int num_actions) {
    markov_policy pi;
    pi.probs.assign(static_cast<std::size_t>(horizon),
                    std::vector<std::vector<double>>(
                        static_cast<std::size_t>(num_states),
                        std::vector<double>(static_cast<std::size_t>(num_actions),
                                            1.0 / num_actions)));
    return pi;
}

tabular_mdp::tabular_mdp(int num_states, int num_actions, int horizon, int initial_state,
                         grid_spec grid,
                         std::vector<std::vector<std::vector<std::vector<double>>>> transitions,
                         std::vector<std::vector<std::vector<grid_categorical>>> costs)
    : x_(num_states), a_(num_actions), h_(horizon), x1_(initial_state), grid_(grid),
      transitions_(std::move(transitions)), costs_(std::move(costs)) {
    if (x_ < 1 || a_ < 1 || h_ < 1) throw parameter_error("tabular_mdp: empty shape");
    if (x1_ < 0 || x1_ >= x_) throw parameter_error("tabular_mdp: initial state out of range");
    if (static_cast<int>(transitions_.size()) != h_ || static_cast<int>(costs_.size()) != h_)
        throw parameter_error("tabular_mdp: horizon mismatch");
    int max_cost_idx = 0;
    for (int h = 0; h < h_; ++h) {
        if (static_cast<int>(transitions_[h].size()) != x_ ||
            static_cast<int>(costs_[h].size()) != x_)
            throw parameter_error("tabular_mdp: state dimension mismatch");
        for (int x = 0; x < x_; ++x) {
            if (static_cast<int>(transitions_[h][x].size()) != a_ ||
                static_cast<int>(costs_[h][x].size()) != a_)
                throw parameter_error("tabular_mdp: action dimension mismatch");
            for (int a = 0; a < a_; ++a) {
                const auto& row = transitions_[h][x][a];
                if (static_cast<int>(row.size()) != x_)
                    throw parameter_error("tabular_mdp: transition row size mismatch");
                double s = 0.0;
                for (double p : row) {
                    if (!(p >= 0.0))
                        throw normalization_error("tabular_mdp: negative transition mass");
                    s += p;
                }
                if (std::abs(s - 1.0) > 1e-12)
                    throw normalization_error("tabular_mdp: transition row sums to " +
                                              std::to_string(s));
                const auto& c = costs_[h][x][a];
                if (!(c.grid() == grid_))
                    throw grid_mismatch_error("tabular_mdp: cost grid mismatch");
                max_cost_idx = std::max(max_cost_idx, c.support_max());
            }
        }
    }
    // Cumulative-cost normalization: H * max per-step cost atom must stay on
    // the grid, so no convolution in any backup can overflow.
    if (static_cast<long>(h_) * max_cost_idx > grid_.atom_count - 1)
        throw normalization_error("tabular_mdp: horizon * max cost atom exceeds 1");
    cost_means_.assign(static_cast<std::size_t>(h_),
                       real_table(static_cast<std::size_t>(x_),
                                  std::vector<double>(static_cast<std::size_t>(a_), 0.0)));
    for (int h = 0; h < h_; ++h)
        for (int x = 0; x < x_; ++x)
            for (int a = 0; a < a_; ++a)
                cost_means_[h][x][a] = mean(costs_[h][x][a]);
}

cond_dist_table tabular_mdp::dirac_zero_table() const {
    return cond_dist_table(
        static_cast<std::size_t>(x_),
        std::vector<grid_categorical>(static_cast<std::size_t>(a_),
                                      grid_categorical::dirac(grid_, 0)));
}

namespace {

// Shared backup core: next_action_row(x') gives the successor action
// distribution.
template <class NextActionRow>
cond_dist_table dist_backup_impl(const tabular_mdp& mdp, int h, const cond_dist_table& d_next,
                                 NextActionRow&& next_action_row) {
    const int X = mdp.num_states();
    const int A = mdp.num_actions();
    if (static_cast<int>(d_next.size()) != X)
        throw parameter_error("dist_backup: d_next state dimension mismatch");

    // Successor mixture per x' is shared across (x,a); precompute.
    std::vector<grid_categorical> succ;
    succ.reserve(static_cast<std::size_t>(X));
    for (int xn = 0; xn < X; ++xn) {
        const std::vector<double>& arow = next_action_row(xn);
        std::vector<const grid_categorical*> comps;
        comps.reserve(static_cast<std::size_t>(A));
        for (int an = 0; an < A; ++an) comps.push_back(&d_next[xn][an]);
        succ.push_back(mixture(arow, comps));
    }

    cond_dist_table out;
    out.reserve(static_cast<std::size_t>(X));
    for (int x = 0; x < X; ++x) {
        std::vector<grid_categorical> row;
        row.reserve(static_cast<std::size_t>(A));
        for (int a = 0; a < A; ++a) {
            std::vector<const grid_categorical*> comps;
            comps.reserve(static_cast<std::size_t>(X));
            for (int xn = 0; xn < X; ++xn) comps.push_back(&succ[static_cast<std::size_t>(xn)]);
            grid_categorical next_mix = mixture(mdp.transition_row(h, x, a), comps);
            row.push_back(convolve(mdp.cost(h, x, a), next_mix));
        }
        out.push_back(std::move(row));
    }
    return out;
}

} // namespace

cond_dist_table dist_backup_pi(const tabular_mdp& mdp, int h, const cond_dist_table& d_next,
                               const markov_policy& pi) {
    const bool have_row = h + 1 < pi.horizon();
    const std::vector<double> fallback(static_cast<std::size_t>(mdp.num_actions()),
                                       1.0 / mdp.num_actions());
    return dist_backup_impl(mdp, h, d_next, [&](int xn) -> const std::vector<double>& {
        return have_row ? pi.row(h + 1, xn) : fallback;
    });
}

cond_dist_table dist_backup_star(const tabular_mdp& mdp, int h, const cond_dist_table& d_next,
                                 bool small_return) {
    const int A = mdp.num_actions();
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(mdp.num_states()),
                                          std::vector<double>(static_cast<std::size_t>(A), 0.0));
    for (int xn = 0; xn < mdp.num_states(); ++xn) {
        std::vector<double> means(static_cast<std::size_t>(A));
        for (int a = 0; a < A; ++a)
            means[static_cast<std::size_t>(a)] = mean(d_next[xn][a]);
        rows[static_cast<std::size_t>(xn)][static_cast<std::size_t>(argext(means, small_return))] =
            1.0;
    }
    return dist_backup_impl(mdp, h, d_next, [&](int xn) -> const std::vector<double>& {
        return rows[static_cast<std::size_t>(xn)];
    });
}

std::vector<cond_dist_table> return_distribution(const tabular_mdp& mdp,
                                                 const markov_policy& pi) {
    std::vector<cond_dist_table> z(static_cast<std::size_t>(mdp.horizon()));
    cond_dist_table next = mdp.dirac_zero_table();
    for (int h = mdp.horizon() - 1; h >= 0; --h) {
        z[static_cast<std::size_t>(h)] = dist_backup_pi(mdp, h, next, pi);
        next = z[static_cast<std::size_t>(h)];
    }
    return z;
}

std::vector<real_table> q_values(const tabular_mdp& mdp, const markov_policy& pi) {
    if (pi.horizon() != mdp.horizon())
        throw parameter_error("q_values: policy horizon does not match the MDP");
    const int X = mdp.num_states();
    const int A = mdp.num_actions();
    std::vector<real_table> q(static_cast<std::size_t>(mdp.horizon()),
                              real_table(static_cast<std::size_t>(X),
                                         std::vector<double>(static_cast<std::size_t>(A), 0.0)));
    std::vector<double> vnext(static_cast<std::size_t>(X), 0.0);
    for (int h = mdp.horizon() - 1; h >= 0; --h) {
        std::vector<double> v(static_cast<std::size_t>(X), 0.0);
        for (int x = 0; x < X; ++x) {
            for (int a = 0; a < A; ++a) {
                double tail = 0.0;
                const auto& row = mdp.transition_row(h, x, a);
                for (int xn = 0; xn < X; ++xn)
                    tail += row[static_cast<std::size_t>(xn)] * vnext[static_cast<std::size_t>(xn)];
                q[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                 [static_cast<std::size_t>(a)] = mdp.cost_mean(h, x, a) + tail;
            }
            const auto& arow = pi.row(h, x);
            double vx = 0.0;
            for (int a = 0; a < A; ++a)
                vx += arow[static_cast<std::size_t>(a)] *
                      q[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                       [static_cast<std::size_t>(a)];
            v[static_cast<std::size_t>(x)] = vx;
        }
        vnext = std::move(v);
    }
    return q;
}

double value(const tabular_mdp& mdp, const markov_policy& pi) {
    const auto q = q_values(mdp, pi);
    const auto& arow = pi.row(0, mdp.initial_state());
    double v = 0.0;
    for (int a = 0; a < mdp.num_actions(); ++a)
        v += arow[static_cast<std::size_t>(a)] *
             q[0][static_cast<std::size_t>(mdp.initial_state())][static_cast<std::size_t>(a)];
    return v;
}

optimal_policy_result optimal_policy(const tabular_mdp& mdp, bool small_return) {
    const int X = mdp.num_states();
    const int A = mdp.num_actions();
    const int H = mdp.horizon();
    std::vector<std::vector<int>> actions(static_cast<std::size_t>(H),
                                          std::vector<int>(static_cast<std::size_t>(X), 0));
    std::vector<double> vnext(static_cast<std::size_t>(X), 0.0);
    for (int h = H - 1; h >= 0; --h) {
        std::vector<double> v(static_cast<std::size_t>(X), 0.0);
        for (int x = 0; x < X; ++x) {
            std::vector<double> q(static_cast<std::size_t>(A), 0.0);
            for (int a = 0; a < A; ++a) {
                double tail = 0.0;
                const auto& row = mdp.transition_row(h, x, a);
                for (int xn = 0; xn < X; ++xn)
                    tail += row[static_cast<std::size_t>(xn)] * vnext[static_cast<std::size_t>(xn)];
                q[static_cast<std::size_t>(a)] = mdp.cost_mean(h, x, a) + tail;
            }
            const int best = argext(q, small_return);
            actions[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)] = best;
            v[static_cast<std::size_t>(x)] = q[static_cast<std::size_t>(best)];
        }
        vnext = std::move(v);
    }
    return {markov_policy::deterministic(H, X, A, actions),
            vnext[static_cast<std::size_t>(mdp.initial_state())]};
}

std::vector<real_table> occupancy(const tabular_mdp& mdp, const markov_policy& pi) {
    if (pi.horizon() != mdp.horizon())
        throw parameter_error("occupancy: policy horizon does not match the MDP");
    const int X = mdp.num_states();
    const int A = mdp.num_actions();
    const int H = mdp.horizon();
    std::vector<real_table> d(static_cast<std::size_t>(H),
                              real_table(static_cast<std::size_t>(X),
                                         std::vector<double>(static_cast<std::size_t>(A), 0.0)));
    std::vector<double> state_dist(static_cast<std::size_t>(X), 0.0);
    state_dist[static_cast<std::size_t>(mdp.initial_state())] = 1.0;
    for (int h = 0; h < H; ++h) {
        for (int x = 0; x < X; ++x) {
            const double px = state_dist[static_cast<std::size_t>(x)];
            if (px == 0.0) continue;
            const auto& arow = pi.row(h, x);
            for (int a = 0; a < A; ++a)
                d[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                 [static_cast<std::size_t>(a)] = px * arow[static_cast<std::size_t>(a)];
        }
        if (h + 1 < H) {
            std::vector<double> next(static_cast<std::size_t>(X), 0.0);
            for (int x = 0; x < X; ++x)
                for (int a = 0; a < A; ++a) {
                    const double pxa = d[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                                        [static_cast<std::size_t>(a)];
                    if (pxa == 0.0) continue;
                    const auto& row = mdp.transition_row(h, x, a);
                    for (int xn = 0; xn < X; ++xn)
                        next[static_cast<std::size_t>(xn)] += pxa * row[static_cast<std::size_t>(xn)];
                }
            state_dist = std::move(next);
        }
    }
    return d;
}

std::vector<real_table> occupancy_from(const tabular_mdp& mdp, const markov_policy& pi, int h0,
                                       int x0, int a0) {
    const int X = mdp.num_states();
    const int A = mdp.num_actions();
    const int H = mdp.horizon();
    std::vector<real_table> d(static_cast<std::size_t>(H),
                              real_table(static_cast<std::size_t>(X),
                                         std::vector<double>(static_cast<std::size_t>(A), 0.0)));
    d[static_cast<std::size_t>(h0)][static_cast<std::size_t>(x0)][static_cast<std::size_t>(a0)] =
        1.0;
    for (int h = h0; h + 1 < H; ++h) {
        std::vector<double> next(static_cast<std::size_t>(X), 0.0);
        for (int x = 0; x < X; ++x)
            for (int a = 0; a < A; ++a) {
                const double pxa = d[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                                    [static_cast<std::size_t>(a)];
                if (pxa == 0.0) continue;
                const auto& row = mdp.transition_row(h, x, a);
                for (int xn = 0; xn < X; ++xn)
                    next[static_cast<std::size_t>(xn)] += pxa * row[static_cast<std::size_t>(xn)];
            }
        for (int xn = 0; xn < X; ++xn) {
            const auto& arow = pi.row(h + 1, xn);
            for (int an = 0; an < A; ++an)
                d[static_cast<std::size_t>(h + 1)][static_cast<std::size_t>(xn)]
                 [static_cast<std::size_t>(an)] =
                    next[static_cast<std::size_t>(xn)] * arow[static_cast<std::size_t>(an)];
        }
    }
    return d;
}

double coverage_coefficient(const tabular_mdp& mdp, const markov_policy& pi_tilde,
                            const std::vector<real_table>& nu) {
    const auto d = occupancy(mdp, pi_tilde);
    double worst = 0.0;
    for (int h = 0; h < mdp.horizon(); ++h)
        for (int x = 0; x < mdp.num_states(); ++x)
            for (int a = 0; a < mdp.num_actions(); ++a) {
                const double num = d[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                                    [static_cast<std::size_t>(a)];
                const double den = nu[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                                     [static_cast<std::size_t>(a)];
                if (num == 0.0) continue;
                if (den == 0.0) return std::numeric_limits<double>::infinity();
                worst = std::max(worst, num / den);
            }
    return worst;
}

std::vector<rl_transition> sample_trajectory(const tabular_mdp& mdp, const markov_policy& pi,
                                             rng& gen) {
    std::vector<rl_transition> out;
    out.reserve(static_cast<std::size_t>(mdp.horizon()));
    int x = mdp.initial_state();
    for (int h = 0; h < mdp.horizon(); ++h) {
        const int a = gen.sample_categorical(pi.row(h, x));
        const int c = gen.sample_categorical(mdp.cost(h, x, a).probs());
        const int xn = gen.sample_categorical(mdp.transition_row(h, x, a));
        out.push_back({x, a, c, xn});
        x = xn;
    }
    return out;
}

std::vector<rl_transition> sample_uae_tuples(const tabular_mdp& mdp, const markov_policy& pi,
                                             rng& gen) {
    std::vector<rl_transition> out;
    out.reserve(static_cast<std::size_t>(mdp.horizon()));
    for (int h = 0; h < mdp.horizon(); ++h) {
        // Fresh partial rollout to step h; only transitions matter for the
        // roll-in visitation.
        int x = mdp.initial_state();
        for (int t = 0; t < h; ++t) {
            const int a = gen.sample_categorical(pi.row(t, x));
            x = gen.sample_categorical(mdp.transition_row(t, x, a));
        }
        const int a = gen.next_int(mdp.num_actions());
        const int c = gen.sample_categorical(mdp.cost(h, x, a).probs());
        const int xn = gen.sample_categorical(mdp.transition_row(h, x, a));
        out.push_back({x, a, c, xn});
    }
    return out;
}

double mixture_value(const tabular_mdp& mdp, const std::vector<markov_policy>& policies) {
    if (policies.empty()) throw parameter_error("mixture_value: empty policy list");
    double s = 0.0;
    for (const auto& pi : policies) s += value(mdp, pi);
    return s / static_cast<double>(policies.size());
}

} // namespace distlab
