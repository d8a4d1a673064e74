#include "distlab/odisco.hpp"

#include <algorithm>
#include <cmath>

#include "distlab/mle.hpp"

namespace distlab {

rl_dataset_counts::rl_dataset_counts(int num_states, int num_actions, int atom_count,
                                     int horizon)
    : x_(num_states), a_(num_actions), m_(atom_count), h_(horizon) {
    const std::size_t cells = static_cast<std::size_t>(x_) * static_cast<std::size_t>(a_) *
                              static_cast<std::size_t>(m_) * static_cast<std::size_t>(x_);
    counts_.assign(static_cast<std::size_t>(h_), std::vector<long>(cells, 0));
}

void rl_dataset_counts::add(int h, const rl_transition& t) {
    ++counts_[static_cast<std::size_t>(h)][flat(t.x, t.a, t.cost_idx, t.x_next)];
    if (h == 0) ++n_;
}

rl_dataset_counts rl_dataset_counts::from_tuples(
    int num_states, int num_actions, int atom_count,
    const std::vector<std::vector<rl_transition>>& per_h) {
    rl_dataset_counts out(num_states, num_actions, atom_count,
                          static_cast<int>(per_h.size()));
    for (int h = 0; h < static_cast<int>(per_h.size()); ++h)
        for (const auto& t : per_h[static_cast<std::size_t>(h)]) out.add(h, t);
    out.n_ = per_h.empty() ? 0 : static_cast<long>(per_h.front().size());
    return out;
}

confidence_engine::confidence_engine(const dist_function_class& cls, bool small_return)
    : cls_(&cls), small_return_(small_return), x_(cls.num_states), a_(cls.num_actions),
      m_(cls.grid.atom_count), h_(cls.horizon) {
    const int F = cls.size();
    log_tables_.resize(static_cast<std::size_t>(F));
    means_.resize(static_cast<std::size_t>(F));
    next_action_.resize(static_cast<std::size_t>(F));
    for (int f = 0; f < F; ++f) {
        auto& lt = log_tables_[static_cast<std::size_t>(f)];
        auto& mt = means_[static_cast<std::size_t>(f)];
        auto& na = next_action_[static_cast<std::size_t>(f)];
        lt.assign(static_cast<std::size_t>(h_),
                  std::vector<double>(static_cast<std::size_t>(x_ * a_ * m_), 0.0));
        mt.assign(static_cast<std::size_t>(h_),
                  std::vector<double>(static_cast<std::size_t>(x_ * a_), 0.0));
        na.assign(static_cast<std::size_t>(h_), std::vector<int>(static_cast<std::size_t>(x_), 0));
        for (int h = 0; h < h_; ++h) {
            for (int x = 0; x < x_; ++x)
                for (int a = 0; a < a_; ++a) {
                    const auto& d = cls.table(f, h, x, a);
                    mt[static_cast<std::size_t>(h)][static_cast<std::size_t>(x * a_ + a)] =
                        mean(d);
                    for (int z = 0; z < m_; ++z)
                        lt[static_cast<std::size_t>(h)]
                          [static_cast<std::size_t>((x * a_ + a) * m_ + z)] =
                            std::log(std::max(d.prob(z), kLogDensityFloor));
                }
            for (int x = 0; x < x_; ++x) {
                int best = 0;
                for (int a = 1; a < a_; ++a) {
                    const double cur = mt[static_cast<std::size_t>(h)]
                                         [static_cast<std::size_t>(x * a_ + a)];
                    const double ref = mt[static_cast<std::size_t>(h)]
                                         [static_cast<std::size_t>(x * a_ + best)];
                    if (small_return_ ? cur > ref : cur < ref) best = a;
                }
                na[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)] = best;
            }
        }
    }
}

std::vector<int> confidence_engine::survivors_impl(const rl_dataset_counts& data,
                                                   const markov_policy* pi, double beta,
                                                   bool exact, const rng& target_root,
                                                   par::mode mode) const {
    const int F = cls_->size();
    if (data.size_per_h() == 0) {
        std::vector<int> all(static_cast<std::size_t>(F));
        for (int f = 0; f < F; ++f) all[static_cast<std::size_t>(f)] = f;
        return all;
    }
    if (beta < 0.0) throw parameter_error("confidence set: beta must be >= 0");

    // worst_gap[f] = max over layers of (best layer score - f's own score)
    // on f's targets; survive iff worst_gap <= 7 beta.
    std::vector<double> worst_gap(static_cast<std::size_t>(F), 0.0);
    std::vector<signed char> failed(static_cast<std::size_t>(F), 0);

    par::for_each_index(
        static_cast<std::size_t>(F),
        [&](std::size_t fi) {
            const int f = static_cast<int>(fi);
            std::vector<double> weights(static_cast<std::size_t>(x_ * a_ * m_), 0.0);
            double gap = 0.0;
            for (int h = 0; h < h_ && !failed[fi]; ++h) {
                std::fill(weights.begin(), weights.end(), 0.0);
                rng draw = target_root.derive({static_cast<std::uint64_t>(f),
                                               static_cast<std::uint64_t>(h)});
                const auto& layer = data.layer(h);
                const bool terminal = (h == h_ - 1);
                for (int x = 0; x < x_; ++x)
                    for (int a = 0; a < a_; ++a)
                        for (int c = 0; c < m_; ++c)
                            for (int xn = 0; xn < x_; ++xn) {
                                const long n = layer[data.flat(x, a, c, xn)];
                                if (n == 0) continue;
                                const std::size_t base =
                                    static_cast<std::size_t>((x * a_ + a) * m_);
                                if (terminal) {
                                    // f_{H+1} is a dirac at zero: z = c.
                                    weights[base + static_cast<std::size_t>(c)] +=
                                        static_cast<double>(n);
                                    continue;
                                }
                                const int ap =
                                    pi ? pi->action_at(h + 1, xn)
                                       : next_action_[fi][static_cast<std::size_t>(h + 1)]
                                                     [static_cast<std::size_t>(xn)];
                                const auto& q = cls_->table(f, h + 1, xn, ap);
                                if (exact) {
                                    for (int y = 0; y < m_; ++y) {
                                        const double mass = q.prob(y);
                                        if (mass == 0.0) continue;
                                        const int z = c + y;
                                        if (z >= m_) {
                                            failed[fi] = 1;
                                            break;
                                        }
                                        weights[base + static_cast<std::size_t>(z)] +=
                                            static_cast<double>(n) * mass;
                                    }
                                } else {
                                    for (long i = 0; i < n; ++i) {
                                        const int y = draw.sample_categorical(q.probs());
                                        const int z = c + y;
                                        if (z >= m_) {
                                            failed[fi] = 1;
                                            break;
                                        }
                                        weights[base + static_cast<std::size_t>(z)] += 1.0;
                                    }
                                }
                                if (failed[fi]) break;
                            }
                if (failed[fi]) break;
                // Score every member's layer-h table on f's targets.
                double own = 0.0;
                double best = -std::numeric_limits<double>::infinity();
                for (int g = 0; g < F; ++g) {
                    const auto& lt = log_tables_[static_cast<std::size_t>(g)]
                                                [static_cast<std::size_t>(h)];
                    double s = 0.0;
                    for (std::size_t i = 0; i < weights.size(); ++i)
                        if (weights[i] != 0.0) s += weights[i] * lt[i];
                    if (g == f) own = s;
                    best = std::max(best, s);
                }
                gap = std::max(gap, best - own);
            }
            worst_gap[fi] = gap;
        },
        mode);

    for (int f = 0; f < F; ++f)
        if (failed[static_cast<std::size_t>(f)])
            throw normalization_error("confidence set: TD target escaped the grid");

    std::vector<int> out;
    for (int f = 0; f < F; ++f)
        if (worst_gap[static_cast<std::size_t>(f)] <= 7.0 * beta) out.push_back(f);
    return out;
}

std::vector<int> confidence_engine::survivors_greedy(const rl_dataset_counts& data, double beta,
                                                     bool exact, const rng& target_root,
                                                     par::mode mode) const {
    return survivors_impl(data, nullptr, beta, exact, target_root, mode);
}

std::vector<int> confidence_engine::survivors_policy(const rl_dataset_counts& data,
                                                     const markov_policy& pi, double beta,
                                                     bool exact, const rng& target_root,
                                                     par::mode mode) const {
    return survivors_impl(data, &pi, beta, exact, target_root, mode);
}

std::vector<int> confidence_set(const dist_function_class& cls,
                                const std::vector<std::vector<rl_transition>>& datasets,
                                double beta, bool small_return, const rng& target_root,
                                bool exact) {
    confidence_engine engine(cls, small_return);
    const auto counts = rl_dataset_counts::from_tuples(cls.num_states, cls.num_actions,
                                                       cls.grid.atom_count, datasets);
    return engine.survivors_greedy(counts, beta, exact, target_root);
}

std::vector<int> td_targets(const dist_function_class& cls, int member, int h,
                            const std::vector<rl_transition>& tuples, bool small_return,
                            rng& gen) {
    const int m = cls.grid.atom_count;
    const int H = cls.horizon;
    std::vector<int> out;
    out.reserve(tuples.size());
    for (const auto& t : tuples) {
        int z;
        if (h == H - 1) {
            z = t.cost_idx;
        } else {
            int best = 0;
            double best_mean = mean(cls.table(member, h + 1, t.x_next, 0));
            for (int a = 1; a < cls.num_actions; ++a) {
                const double cur = mean(cls.table(member, h + 1, t.x_next, a));
                if (small_return ? cur > best_mean : cur < best_mean) {
                    best = a;
                    best_mean = cur;
                }
            }
            const int y = gen.sample_categorical(cls.table(member, h + 1, t.x_next, best).probs());
            z = t.cost_idx + y;
        }
        if (z >= m) throw normalization_error("td_targets: target escaped the grid");
        out.push_back(z);
    }
    return out;
}

int optimistic_select(const dist_function_class& cls, const std::vector<int>& surviving, int x1,
                      bool small_return) {
    if (surviving.empty())
        throw algorithm_failure(
            "optimistic_select: empty confidence set (beta too small or class not realizable)");
    int best_member = -1;
    double best_value = 0.0;
    for (int f : surviving) {
        double v = mean(cls.table(f, 0, x1, 0));
        for (int a = 1; a < cls.num_actions; ++a) {
            const double cur = mean(cls.table(f, 0, x1, a));
            v = small_return ? std::max(v, cur) : std::min(v, cur);
        }
        if (best_member < 0 || (small_return ? v > best_value : v < best_value)) {
            best_member = f;
            best_value = v;
        }
    }
    return best_member;
}

double odisco_default_beta(int horizon, long episodes, int class_size, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw parameter_error("odisco_default_beta: delta must be in (0,1)");
    return std::log(static_cast<double>(horizon) * static_cast<double>(episodes) *
                    static_cast<double>(class_size) / delta);
}

odisco_result run_odisco(const tabular_mdp& mdp, const dist_function_class& cls,
                         const odisco_options& opts) {
    if (opts.episodes < 1) throw parameter_error("run_odisco: episodes must be >= 1");
    if (cls.num_states != mdp.num_states() || cls.num_actions != mdp.num_actions() ||
        cls.horizon != mdp.horizon() || !(cls.grid == mdp.grid()))
        throw parameter_error("run_odisco: class shape does not match the MDP");

    confidence_engine engine(cls, opts.small_return);
    rl_dataset_counts counts(mdp.num_states(), mdp.num_actions(), mdp.grid().atom_count,
                             mdp.horizon());
    rng root(opts.seed);

    odisco_result result;
    const auto opt = optimal_policy(mdp, opts.small_return);
    result.v_star = opt.value;
    result.truth_member = find_member(cls, return_distribution(mdp, opt.policy)).value_or(-1);
    result.occupancy_sum.assign(
        static_cast<std::size_t>(mdp.horizon()),
        real_table(static_cast<std::size_t>(mdp.num_states()),
                   std::vector<double>(static_cast<std::size_t>(mdp.num_actions()), 0.0)));

    std::vector<int> survivors(static_cast<std::size_t>(cls.size()));
    for (int f = 0; f < cls.size(); ++f) survivors[static_cast<std::size_t>(f)] = f;

    double value_sum = 0.0;
    for (long k = 1; k <= opts.episodes; ++k) {
        int chosen;
        try {
            chosen = optimistic_select(cls, survivors, mdp.initial_state(), opts.small_return);
        } catch (const algorithm_failure&) {
            throw algorithm_failure("run_odisco: empty confidence set at episode " +
                                    std::to_string(k));
        }
        const markov_policy pi_k =
            greedy_policy(cls.members[static_cast<std::size_t>(chosen)], opts.small_return);
        const double v_k = value(mdp, pi_k);
        value_sum += v_k;

        const auto occ = occupancy(mdp, pi_k);
        for (int h = 0; h < mdp.horizon(); ++h)
            for (int x = 0; x < mdp.num_states(); ++x)
                for (int a = 0; a < mdp.num_actions(); ++a)
                    result.occupancy_sum[static_cast<std::size_t>(h)]
                                        [static_cast<std::size_t>(x)]
                                        [static_cast<std::size_t>(a)] +=
                        occ[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                           [static_cast<std::size_t>(a)];

        rng data_rng = root.derive({stream::data, static_cast<std::uint64_t>(k)});
        const auto tuples = opts.uae ? sample_uae_tuples(mdp, pi_k, data_rng)
                                     : sample_trajectory(mdp, pi_k, data_rng);
        for (int h = 0; h < mdp.horizon(); ++h)
            counts.add(h, tuples[static_cast<std::size_t>(h)]);

        const rng target_root = root.derive({stream::targets, static_cast<std::uint64_t>(k)});
        survivors = engine.survivors_greedy(counts, opts.beta, opts.exact_targets, target_root,
                                            opts.mode);
        if (survivors.empty())
            throw algorithm_failure("run_odisco: empty confidence set at episode " +
                                    std::to_string(k));

        double opt_val = mean(cls.table(chosen, 0, mdp.initial_state(), 0));
        for (int a = 1; a < cls.num_actions; ++a) {
            const double cur = mean(cls.table(chosen, 0, mdp.initial_state(), a));
            opt_val = opts.small_return ? std::max(opt_val, cur) : std::min(opt_val, cur);
        }

        odisco_episode_log log;
        log.chosen_member = chosen;
        log.policy_value = v_k;
        log.optimistic_value = opt_val;
        log.survivor_count = static_cast<int>(survivors.size());
        log.truth_survives =
            result.truth_member >= 0 &&
            std::find(survivors.begin(), survivors.end(), result.truth_member) !=
                survivors.end();
        result.episodes.push_back(log);

        const double inst =
            opts.small_return ? result.v_star - v_k : v_k - result.v_star;
        result.cum_regret.push_back((result.cum_regret.empty() ? 0.0 : result.cum_regret.back()) +
                                    inst);
    }
    result.mixture_value = value_sum / static_cast<double>(opts.episodes);
    result.final_survivors = survivors;
    return result;
}

std::vector<double> training_error(const tabular_mdp& mdp, const dist_function_class& cls,
                                   int member, bool small_return,
                                   const std::vector<real_table>& occupancy_sum) {
    const int H = mdp.horizon();
    std::vector<double> per_h(static_cast<std::size_t>(H), 0.0);
    const cond_dist_table terminal = mdp.dirac_zero_table();
    for (int h = 0; h < H; ++h) {
        const cond_dist_table& next =
            (h == H - 1) ? terminal
                         : cls.members[static_cast<std::size_t>(member)]
                                      [static_cast<std::size_t>(h + 1)];
        const cond_dist_table backup = dist_backup_star(mdp, h, next, small_return);
        double s = 0.0;
        for (int x = 0; x < mdp.num_states(); ++x)
            for (int a = 0; a < mdp.num_actions(); ++a)
                s += occupancy_sum[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                                  [static_cast<std::size_t>(a)] *
                     hellinger_sq(cls.table(member, h, x, a),
                                  backup[static_cast<std::size_t>(x)]
                                        [static_cast<std::size_t>(a)]);
        per_h[static_cast<std::size_t>(h)] = s;
    }
    return per_h;
}

} // namespace distlab
