// Acceptance suite: one pass/fail line per criterion, each with a canonical
// digest. The final criterion re-runs everything with identical seeds and
// demands byte-identical digests.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "distlab/eluder.hpp"
#include "distlab/grid_batch.hpp"
#include "distlab/harness.hpp"
#include "distlab/odisco.hpp"
#include "distlab/parallel.hpp"
#include "distlab/pdisco.hpp"

using namespace distlab;

namespace {

struct criterion_result {
    bool pass = false;
    std::string detail;
    std::string digest;
    double seconds = 0.0;
};

std::string fmt(double v) { return format_double(v); }

markov_policy random_stochastic_policy(const tabular_mdp& mdp, rng& gen) {
    markov_policy pi;
    pi.probs.assign(static_cast<std::size_t>(mdp.horizon()),
                    std::vector<std::vector<double>>(
                        static_cast<std::size_t>(mdp.num_states()),
                        std::vector<double>(static_cast<std::size_t>(mdp.num_actions()), 0.0)));
    for (int h = 0; h < mdp.horizon(); ++h)
        for (int x = 0; x < mdp.num_states(); ++x) {
            double s = 0.0;
            for (int a = 0; a < mdp.num_actions(); ++a) {
                const double v = 0.05 + gen.next_double();
                pi.probs[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                        [static_cast<std::size_t>(a)] = v;
                s += v;
            }
            for (int a = 0; a < mdp.num_actions(); ++a)
                pi.probs[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                        [static_cast<std::size_t>(a)] /= s;
        }
    return pi;
}

dist_member random_member(const tabular_mdp& mdp, rng& gen) {
    const int m = mdp.grid().atom_count;
    const int cap = m - 1 - (m - 1) / mdp.horizon();
    dist_member member;
    for (int h = 0; h < mdp.horizon(); ++h) {
        cond_dist_table table;
        for (int x = 0; x < mdp.num_states(); ++x) {
            std::vector<grid_categorical> row;
            for (int a = 0; a < mdp.num_actions(); ++a) {
                std::vector<double> p(static_cast<std::size_t>(m), 0.0);
                double s = 0.0;
                for (int i = 0; i <= cap; ++i) {
                    p[static_cast<std::size_t>(i)] = 0.01 + gen.next_double();
                    s += p[static_cast<std::size_t>(i)];
                }
                for (double& v : p) v /= s;
                row.emplace_back(mdp.grid(), std::move(p));
            }
            table.push_back(std::move(row));
        }
        member.push_back(std::move(table));
    }
    return member;
}

// ---------------------------------------------------------------------------
// Criterion 1: divergence suite on 1e4 random pairs.
// ---------------------------------------------------------------------------
criterion_result criterion1() {
    criterion_result r;
    divergence_audit_config cfg;
    cfg.pairs = 10000;
    cfg.min_atoms = 2;
    cfg.max_atoms = 51;
    cfg.seed = 1001;
    cfg.tol = 1e-9;
    const auto res = divergence_audit(cfg);
    r.pass = res.violations == 0;
    r.detail = "violations=" + std::to_string(res.violations) + "/" +
               std::to_string(res.pairs);
    r.digest = std::to_string(res.violations) + "|" + fmt(res.max_violation) + "|" +
               res.worst_check;
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 2: Bellman identities on 100 random MDPs.
// ---------------------------------------------------------------------------
criterion_result criterion2() {
    criterion_result r;
    double max_commute = 0.0, max_pdl = 0.0, max_occ = 0.0, max_selfbound = -1.0;
    bool ok = true;
    for (int i = 0; i < 100 && ok; ++i) {
        const int X = 2 + i % 4;
        const int A = 1 + i % 3;
        const int H = 1 + i % 4;
        const int m = std::min(21, H * (2 + i % 4) + 1);
        const auto mdp = random_mdp(X, A, H, m, 9000 + static_cast<std::uint64_t>(i));
        rng t = rng(777).derive({static_cast<std::uint64_t>(i)});
        const auto pi = random_stochastic_policy(mdp, t);
        const auto pi_prime = random_stochastic_policy(mdp, t);
        const auto member = random_member(mdp, t);

        // Mean commutation for both operators at every layer.
        for (int h = 0; h < H; ++h) {
            const auto& d_next = h + 1 < H ? member[static_cast<std::size_t>(h + 1)]
                                           : mdp.dirac_zero_table();
            const auto bp = dist_backup_pi(mdp, h, d_next, pi);
            const auto bs = dist_backup_star(mdp, h, d_next, false);
            for (int x = 0; x < X; ++x)
                for (int a = 0; a < A; ++a) {
                    double tail_pi = 0.0, tail_star = 0.0;
                    const auto& row = mdp.transition_row(h, x, a);
                    for (int xn = 0; xn < X; ++xn) {
                        double vpi = 0.0, vstar = 2.0;
                        for (int an = 0; an < A; ++an) {
                            const double mn = mean(d_next[static_cast<std::size_t>(xn)]
                                                         [static_cast<std::size_t>(an)]);
                            vpi += (h + 1 < H
                                        ? pi.row(h + 1, xn)[static_cast<std::size_t>(an)]
                                        : 1.0 / A) *
                                   mn;
                            vstar = std::min(vstar, mn);
                        }
                        tail_pi += row[static_cast<std::size_t>(xn)] * vpi;
                        tail_star += row[static_cast<std::size_t>(xn)] * vstar;
                    }
                    max_commute = std::max(
                        max_commute,
                        std::abs(mean(bp[static_cast<std::size_t>(x)]
                                        [static_cast<std::size_t>(a)]) -
                                 (mdp.cost_mean(h, x, a) + tail_pi)));
                    max_commute = std::max(
                        max_commute,
                        std::abs(mean(bs[static_cast<std::size_t>(x)]
                                        [static_cast<std::size_t>(a)]) -
                                 (mdp.cost_mean(h, x, a) + tail_star)));
                }
        }

        // PDL with random scalar tables.
        std::vector<real_table> f(static_cast<std::size_t>(H),
                                  real_table(static_cast<std::size_t>(X),
                                             std::vector<double>(static_cast<std::size_t>(A),
                                                                 0.0)));
        for (auto& layer : f)
            for (auto& row : layer)
                for (double& v : row) v = t.next_double();
        const auto d = occupancy(mdp, pi);
        auto f_prime = [&](int h, int x) {
            double s = 0.0;
            for (int a = 0; a < A; ++a)
                s += pi_prime.row(h, x)[static_cast<std::size_t>(a)] *
                     f[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                      [static_cast<std::size_t>(a)];
            return s;
        };
        double rhs = 0.0;
        double v_occ = 0.0;
        for (int h = 0; h < H; ++h) {
            double layer_mass = 0.0;
            for (int x = 0; x < X; ++x)
                for (int a = 0; a < A; ++a) {
                    const double occ = d[static_cast<std::size_t>(h)]
                                        [static_cast<std::size_t>(x)]
                                        [static_cast<std::size_t>(a)];
                    layer_mass += occ;
                    v_occ += occ * mdp.cost_mean(h, x, a);
                    if (occ == 0.0) continue;
                    double backup = mdp.cost_mean(h, x, a);
                    if (h + 1 < H) {
                        const auto& row = mdp.transition_row(h, x, a);
                        for (int xn = 0; xn < X; ++xn)
                            backup += row[static_cast<std::size_t>(xn)] * f_prime(h + 1, xn);
                    }
                    rhs += occ * (backup - f_prime(h, x));
                }
            max_occ = std::max(max_occ, std::abs(layer_mass - 1.0));
        }
        double lhs = value(mdp, pi);
        max_occ = std::max(max_occ, std::abs(v_occ - lhs));
        for (int a = 0; a < A; ++a)
            lhs -= pi_prime.row(0, mdp.initial_state())[static_cast<std::size_t>(a)] *
                   f[0][static_cast<std::size_t>(mdp.initial_state())]
                    [static_cast<std::size_t>(a)];
        max_pdl = std::max(max_pdl, std::abs(lhs - rhs));

        // Self-bounding inequality.
        const auto q = q_values(mdp, pi);
        std::vector<real_table> delta(static_cast<std::size_t>(H));
        for (int h = 0; h < H; ++h) {
            const auto backup = dist_backup_pi(
                mdp, h, h + 1 < H ? member[static_cast<std::size_t>(h + 1)]
                                  : mdp.dirac_zero_table(),
                pi);
            delta[static_cast<std::size_t>(h)] =
                real_table(static_cast<std::size_t>(X),
                           std::vector<double>(static_cast<std::size_t>(A), 0.0));
            for (int x = 0; x < X; ++x)
                for (int a = 0; a < A; ++a)
                    delta[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                         [static_cast<std::size_t>(a)] =
                        d_triangle(member[static_cast<std::size_t>(h)]
                                         [static_cast<std::size_t>(x)]
                                         [static_cast<std::size_t>(a)],
                                   backup[static_cast<std::size_t>(x)]
                                         [static_cast<std::size_t>(a)]);
        }
        for (int h = 0; h < H && ok; ++h)
            for (int x = 0; x < X && ok; ++x)
                for (int a = 0; a < A && ok; ++a) {
                    const auto occ = occupancy_from(mdp, pi, h, x, a);
                    double tail = 0.0;
                    for (int tt = h; tt < H; ++tt)
                        for (int xx = 0; xx < X; ++xx)
                            for (int aa = 0; aa < A; ++aa)
                                tail += occ[static_cast<std::size_t>(tt)]
                                           [static_cast<std::size_t>(xx)]
                                           [static_cast<std::size_t>(aa)] *
                                        delta[static_cast<std::size_t>(tt)]
                                             [static_cast<std::size_t>(xx)]
                                             [static_cast<std::size_t>(aa)];
                    const double slack =
                        mean(member[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                                   [static_cast<std::size_t>(a)]) -
                        (std::exp(1.0) * q[static_cast<std::size_t>(h)]
                                          [static_cast<std::size_t>(x)]
                                          [static_cast<std::size_t>(a)] +
                         4.0 * H * tail);
                    max_selfbound = std::max(max_selfbound, slack);
                    if (slack > 1e-8) ok = false;
                }
    }
    r.pass = ok && max_commute <= 1e-12 && max_pdl <= 1e-8 && max_occ <= 1e-12;
    r.detail = "commute=" + fmt(max_commute) + " pdl=" + fmt(max_pdl) +
               " occ=" + fmt(max_occ) + " selfbound_slack=" + fmt(max_selfbound);
    r.digest = fmt(max_commute) + "|" + fmt(max_pdl) + "|" + fmt(max_occ) + "|" +
               fmt(max_selfbound);
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 3: exponential-weights log-regret <= log |F| on realizable
// sequences.
// ---------------------------------------------------------------------------
criterion_result criterion3() {
    criterion_result r;
    double worst_slack = -1e9;
    for (int run = 0; run < 50; ++run) {
        rng t = rng(3100).derive({static_cast<std::uint64_t>(run)});
        const int size = 2 + t.next_int(31);
        const int keys = 3 + t.next_int(4);
        const int atoms = 3 + t.next_int(5);
        const grid_spec g(atoms);
        std::vector<cond_key> key_list;
        for (int k = 0; k < keys; ++k) key_list.emplace_back(k, 0);
        std::vector<std::vector<grid_categorical>> members;
        for (int f = 0; f < size; ++f) {
            std::vector<grid_categorical> tables;
            for (int k = 0; k < keys; ++k) {
                std::vector<double> p(static_cast<std::size_t>(atoms));
                double s = 0.0;
                for (double& v : p) {
                    v = 0.02 + t.next_double();
                    s += v;
                }
                for (double& v : p) v /= s;
                tables.emplace_back(g, std::move(p));
            }
            members.push_back(std::move(tables));
        }
        const cond_dist_class cls(std::move(key_list), std::move(members));
        const int truth = t.next_int(size);
        likelihood_ledger ledger(size);
        for (int k = 0; k < 2000; ++k) {
            const cond_key key{t.next_int(keys), 0};
            ew_update(ledger, cls, key, t.sample_categorical(cls.at(truth, key).probs()));
        }
        worst_slack = std::max(worst_slack,
                               log_regret(ledger, cls, truth) - std::log(size));
    }
    r.pass = worst_slack <= 1e-9;
    r.detail = "max(log_regret - log|F|)=" + fmt(worst_slack);
    r.digest = fmt(worst_slack);
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 4: finite-class MLE version space containment and Hellinger sum.
// ---------------------------------------------------------------------------
criterion_result criterion4() {
    criterion_result r;
    const int size = 16, keys = 8, atoms = 4, n = 500, trials = 200;
    const double beta = std::log(size / 0.1);
    rng build = rng(4100).derive({stream::generator});
    const grid_spec g(atoms);
    std::vector<cond_key> key_list;
    for (int k = 0; k < keys; ++k) key_list.emplace_back(k, 0);
    std::vector<std::vector<grid_categorical>> members;
    for (int f = 0; f < size; ++f) {
        std::vector<grid_categorical> tables;
        for (int k = 0; k < keys; ++k) {
            std::vector<double> p(static_cast<std::size_t>(atoms));
            double s = 0.0;
            for (double& v : p) {
                v = 0.05 + build.next_double();
                s += v;
            }
            for (double& v : p) v /= s;
            tables.emplace_back(g, std::move(p));
        }
        members.push_back(std::move(tables));
    }
    const cond_dist_class cls(std::move(key_list), std::move(members));
    const int truth = 0;
    // Exact per-member Hellinger sums over the uniform key distribution.
    std::vector<double> hell_rate(static_cast<std::size_t>(size), 0.0);
    for (int f = 0; f < size; ++f) {
        double s = 0.0;
        for (int k = 0; k < keys; ++k)
            s += hellinger_sq(cls.table(f, k), cls.table(truth, k)) / keys;
        hell_rate[static_cast<std::size_t>(f)] = s;
    }

    std::vector<signed char> contained(trials, 0);
    std::vector<signed char> hell_ok(trials, 1);
    par::for_each_index(static_cast<std::size_t>(trials), [&](std::size_t trial) {
        rng t = rng(4200).derive({stream::trial, static_cast<std::uint64_t>(trial)});
        std::vector<std::pair<cond_key, int>> data;
        data.reserve(n);
        for (int i = 0; i < n; ++i) {
            const cond_key key{t.next_int(keys), 0};
            data.emplace_back(key, t.sample_categorical(cls.at(truth, key).probs()));
        }
        const auto survivors = version_space(cls, data, beta);
        bool has_truth = false;
        for (int f : survivors) has_truth = has_truth || f == truth;
        contained[trial] = has_truth ? 1 : 0;
        if (has_truth)
            for (int f : survivors)
                if (n * hell_rate[static_cast<std::size_t>(f)] > 22.0 * beta)
                    hell_ok[trial] = 0;
    });
    int contained_count = 0;
    bool hell_clean = true;
    for (int i = 0; i < trials; ++i) {
        contained_count += contained[static_cast<std::size_t>(i)];
        if (contained[static_cast<std::size_t>(i)] && !hell_ok[static_cast<std::size_t>(i)])
            hell_clean = false;
    }
    r.pass = contained_count >= 170 && hell_clean;
    r.detail = "containment=" + std::to_string(contained_count) + "/200 hellinger_ok=" +
               (hell_clean ? "yes" : "no");
    r.digest = std::to_string(contained_count) + "|" + (hell_clean ? "1" : "0");
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 5: DistCB small-loss scaling across a mean offset.
// ---------------------------------------------------------------------------
namespace c5 {

cb_environment paired_env(bool low) {
    const grid_spec g(21);
    auto two_point = [&](double mass_top, int top_atom) {
        std::vector<double> p(21, 0.0);
        p[static_cast<std::size_t>(top_atom)] = mass_top;
        p[0] = 1.0 - mass_top;
        return grid_categorical(g, std::move(p));
    };
    std::vector<std::vector<grid_categorical>> cost;
    if (low)
        cost.push_back({two_point(0.1, 2), two_point(0.2, 20)}); // means 0.01, 0.20
    else
        cost.push_back({two_point(0.5, 20), two_point(0.69, 20)}); // means 0.50, 0.69
    return cb_environment::build(g, {1.0}, std::move(cost));
}

std::shared_ptr<const cond_dist_class> env_class(const cb_environment& env) {
    // Truth plus 7 deterministic two-point decoys.
    std::vector<cb_environment> decoys;
    const grid_spec g(21);
    for (int j = 1; j <= 7; ++j) {
        auto two_point = [&](double mass_top, int top_atom) {
            std::vector<double> p(21, 0.0);
            p[static_cast<std::size_t>(top_atom)] = mass_top;
            p[0] = 1.0 - mass_top;
            return grid_categorical(g, std::move(p));
        };
        std::vector<std::vector<grid_categorical>> cost;
        cost.push_back({two_point(0.1 * j, 20), two_point(1.0 - 0.1 * j, 20)});
        decoys.push_back(cb_environment::build(g, {1.0}, std::move(cost)));
    }
    std::vector<const cb_environment*> ptrs;
    for (const auto& d : decoys) ptrs.push_back(&d);
    return make_cb_class(env, ptrs);
}

} // namespace c5

criterion_result criterion5() {
    criterion_result r;
    const long K = 20000;
    const double delta = 0.1;
    double sum_low = 0.0, sum_high = 0.0;
    std::uint64_t trace_hash = 0xcbf29ce484222325ULL;
    for (int variant = 0; variant < 2; ++variant) {
        const bool low = variant == 0;
        const auto env = c5::paired_env(low);
        const double gamma = gamma_theorem(
            2, env.best_mean[0] * static_cast<double>(K), std::log(8.0), delta);
        std::vector<double> finals(10, 0.0);
        std::vector<std::uint64_t> hashes(10, 0);
        par::for_each_index(10, [&](std::size_t seed) {
            const auto cls = c5::env_class(env);
            ew_cost_oracle oracle(cls, 2);
            const auto trace = run_distcb(env, oracle, gamma_schedule::constant(gamma), K,
                                          static_cast<std::uint64_t>(seed));
            finals[seed] = trace.final_cum_regret();
            hashes[seed] = fnv1a064(trace_to_csv(trace));
        });
        for (std::size_t s = 0; s < 10; ++s) {
            (low ? sum_low : sum_high) += finals[s];
            trace_hash ^= hashes[s] + 0x9e3779b97f4a7c15ULL + (trace_hash << 6);
        }
    }
    const double ratio = sum_low / sum_high;
    r.pass = ratio <= 0.5;
    r.detail = "regret_low=" + fmt(sum_low / 10) + " regret_high=" + fmt(sum_high / 10) +
               " ratio=" + fmt(ratio);
    r.digest = fmt(sum_low) + "|" + fmt(sum_high) + "|" + std::to_string(trace_hash);
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 6: DistCB vs SquareCB on the synthetic housing task.
// ---------------------------------------------------------------------------
criterion_result criterion6() {
    criterion_result r;
    housing_synth_params hp;
    hp.contexts = 20;
    hp.seed = 61;
    const auto env = build_housing_env_synthetic(hp);
    std::vector<cb_environment> decoys;
    for (int j = 1; j < 16; ++j) {
        housing_synth_params dp = hp;
        dp.seed = 6100 + static_cast<std::uint64_t>(j);
        decoys.push_back(build_housing_env_synthetic(dp));
    }
    std::vector<const cb_environment*> ptrs;
    for (const auto& d : decoys) ptrs.push_back(&d);
    const auto cls = make_cb_class(env, ptrs);

    const long K = 2000;
    const auto schedule = gamma_schedule::power(200.0, 0.25);
    std::vector<double> dist_costs(10, 0.0), square_costs(10, 0.0);
    std::vector<std::uint64_t> hashes(10, 0);
    par::for_each_index(10, [&](std::size_t seed) {
        ew_cost_oracle dist_oracle(cls, env.num_actions);
        const auto dist_trace =
            run_distcb(env, dist_oracle, schedule, K, static_cast<std::uint64_t>(seed));
        tabular_mean_oracle square_oracle(env.num_contexts, env.num_actions);
        const auto square_trace =
            run_squarecb(env, square_oracle, schedule, K, static_cast<std::uint64_t>(seed));
        dist_costs[seed] = dist_trace.average_cost();
        square_costs[seed] = square_trace.average_cost();
        hashes[seed] =
            fnv1a064(trace_to_csv(dist_trace)) ^ (fnv1a064(trace_to_csv(square_trace)) << 1);
    });
    double dist_mean = 0.0, square_mean = 0.0;
    std::uint64_t trace_hash = 0;
    for (std::size_t s = 0; s < 10; ++s) {
        dist_mean += dist_costs[s] / 10.0;
        square_mean += square_costs[s] / 10.0;
        trace_hash ^= hashes[s] + 0x9e3779b97f4a7c15ULL + (trace_hash << 6);
    }
    r.pass = dist_mean <= square_mean;
    r.detail = "distcb=" + fmt(dist_mean) + " squarecb=" + fmt(square_mean);
    r.digest = fmt(dist_mean) + "|" + fmt(square_mean) + "|" + std::to_string(trace_hash);
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 7: O-DISCO statistics on the acceptance MDP.
// ---------------------------------------------------------------------------
criterion_result criterion7() {
    criterion_result r;
    const auto mdp = acceptance_mdp();
    rng pg = rng(71).derive({stream::generator});
    std::vector<markov_policy> pset{optimal_policy(mdp).policy};
    for (int i = 0; i < 3; ++i)
        pset.push_back(random_deterministic_policy(4, 2, 3, pg));
    const auto cls = build_suffix_class(mdp, pset);
    const int runs = 100;
    const long K = 2000;
    const double delta = 0.1;
    const double beta = odisco_default_beta(3, K, cls.size(), delta);

    struct run_stats {
        long optimism_ok = 0;
        bool contained_throughout = false;
        bool training_ok = false;
        double subopt = 0.0;
        bool failed = false;
        std::uint64_t member_hash = 0;
    };
    std::vector<run_stats> stats(static_cast<std::size_t>(runs));
    par::for_each_index(static_cast<std::size_t>(runs), [&](std::size_t run) {
        odisco_options opts;
        opts.episodes = K;
        opts.beta = beta;
        opts.seed = static_cast<std::uint64_t>(run);
        opts.mode = par::mode::serial;
        auto& st = stats[run];
        try {
            const auto res = run_odisco(mdp, cls, opts);
            st.contained_throughout = true;
            std::string members;
            for (const auto& ep : res.episodes) {
                if (ep.optimistic_value <= res.v_star + 1e-9) ++st.optimism_ok;
                st.contained_throughout = st.contained_throughout && ep.truth_survives;
                members += std::to_string(ep.chosen_member);
                members += ',';
            }
            st.subopt = res.mixture_value - res.v_star;
            st.training_ok = true;
            for (int f : res.final_survivors) {
                const auto err = training_error(mdp, cls, f, false, res.occupancy_sum);
                for (double e : err) st.training_ok = st.training_ok && e <= 60.0 * beta;
            }
            st.member_hash = fnv1a064(members);
        } catch (const algorithm_failure&) {
            st.failed = true;
        }
    });

    long optimism_total = 0, contained_runs = 0, training_runs = 0, failures = 0;
    double subopt_sum = 0.0;
    std::uint64_t hash = 0;
    for (const auto& st : stats) {
        if (st.failed) {
            ++failures;
            continue;
        }
        optimism_total += st.optimism_ok;
        contained_runs += st.contained_throughout ? 1 : 0;
        training_runs += st.training_ok ? 1 : 0;
        subopt_sum += st.subopt;
        hash ^= st.member_hash + 0x9e3779b97f4a7c15ULL + (hash << 6);
    }
    const double episode_runs = static_cast<double>(runs) * static_cast<double>(K);
    const double optimism_rate = optimism_total / episode_runs;
    const double mean_subopt = subopt_sum / (runs - failures);
    r.pass = failures == 0 && optimism_rate >= 0.85 && contained_runs >= 85 &&
             mean_subopt <= 0.05 && training_runs >= 85;
    r.detail = "optimism=" + fmt(optimism_rate) + " containment=" +
               std::to_string(contained_runs) + "/100 subopt=" + fmt(mean_subopt) +
               " training_ok=" + std::to_string(training_runs) + "/100 |F|=" +
               std::to_string(cls.size());
    r.digest = fmt(optimism_rate) + "|" + std::to_string(contained_runs) + "|" +
               fmt(mean_subopt) + "|" + std::to_string(training_runs) + "|" +
               std::to_string(hash);
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 8: P-DISCO pessimism, PAC bound and coverage robustness.
// ---------------------------------------------------------------------------
criterion_result criterion8() {
    criterion_result r;
    const auto mdp = acceptance_mdp();
    rng pg = rng(81).derive({stream::generator});
    std::vector<markov_policy> policies{optimal_policy(mdp).policy};
    while (policies.size() < 8)
        policies.push_back(random_deterministic_policy(4, 2, 3, pg));
    const auto cls = build_suffix_class(mdp, policies);
    const long n = 5000;
    const int trials = 50;
    const double delta = 0.1;
    const double beta = pdisco_default_beta(3, 8, cls.size(), delta);

    // Main scenario: a mixture of all policy occupancies covers everyone.
    std::vector<real_table> nu_mix(3, real_table(4, std::vector<double>(2, 0.0)));
    for (const auto& pi : policies) {
        const auto occ = occupancy(mdp, pi);
        for (int h = 0; h < 3; ++h)
            for (int x = 0; x < 4; ++x)
                for (int a = 0; a < 2; ++a)
                    nu_mix[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                          [static_cast<std::size_t>(a)] +=
                        occ[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                           [static_cast<std::size_t>(a)] /
                        static_cast<double>(policies.size());
    }
    // Robustness scenario: nu covers only the small-loss comparator.
    const markov_policy& pi_tilde = policies.front();
    const auto nu_single = occupancy(mdp, pi_tilde);
    const double v_tilde = value(mdp, pi_tilde);

    std::vector<signed char> pess_ok(trials, 0), bound_ok(trials, 0), robust_ok(trials, 0);
    std::vector<signed char> failed(trials, 0);
    par::for_each_index(static_cast<std::size_t>(trials), [&](std::size_t trial) {
        try {
            pdisco_options opts;
            opts.beta = beta;
            opts.seed = 8000 + static_cast<std::uint64_t>(trial);
            opts.mode = par::mode::serial;
            const auto data =
                generate_offline_data(mdp, nu_mix, n, 8100 + static_cast<std::uint64_t>(trial));
            const auto res = run_pdisco(mdp, data, cls, policies, opts);
            bool pess = true, bounds = true;
            const double chosen_value =
                res.per_policy[static_cast<std::size_t>(res.chosen_policy)].exact_value;
            for (const auto& rep : res.per_policy) {
                if (rep.exact_value > rep.pessimistic_value + 1e-9) pess = false;
                const double bound =
                    offline_pac_bound(rep.coverage, rep.exact_value, 3, n, beta);
                if (chosen_value - rep.exact_value > bound + 1e-9) bounds = false;
            }
            pess_ok[trial] = pess ? 1 : 0;
            bound_ok[trial] = bounds ? 1 : 0;

            const auto data2 = generate_offline_data(
                mdp, nu_single, n, 8200 + static_cast<std::uint64_t>(trial));
            const auto res2 = run_pdisco(mdp, data2, cls, policies, opts);
            const double chosen2 =
                res2.per_policy[static_cast<std::size_t>(res2.chosen_policy)].exact_value;
            const double bound2 = offline_pac_bound(1.0, v_tilde, 3, n, beta);
            robust_ok[trial] = chosen2 - v_tilde <= bound2 + 1e-9 ? 1 : 0;
        } catch (const algorithm_failure&) {
            failed[trial] = 1;
        }
    });
    int pess_count = 0, bound_count = 0, robust_count = 0, failures = 0;
    for (int i = 0; i < trials; ++i) {
        failures += failed[static_cast<std::size_t>(i)];
        pess_count += pess_ok[static_cast<std::size_t>(i)];
        bound_count += bound_ok[static_cast<std::size_t>(i)];
        robust_count += robust_ok[static_cast<std::size_t>(i)];
    }
    const int threshold = static_cast<int>(std::ceil(0.85 * trials));
    r.pass = failures == 0 && pess_count >= threshold && bound_count >= threshold &&
             robust_count >= threshold;
    r.detail = "pessimism=" + std::to_string(pess_count) + "/50 bound=" +
               std::to_string(bound_count) + "/50 robustness=" +
               std::to_string(robust_count) + "/50 |F|=" + std::to_string(cls.size());
    r.digest = std::to_string(pess_count) + "|" + std::to_string(bound_count) + "|" +
               std::to_string(robust_count);
    return r;
}

// ---------------------------------------------------------------------------
// Criterion 9: eluder lattice audit, pigeonhole, indicator example.
// ---------------------------------------------------------------------------
criterion_result criterion9() {
    criterion_result r;
    // Enumerate psi rows over {0, 1/2, 1}^S and distribution rows with
    // entries in {0, 1/2, 1}.
    long instances = 0;
    long violations = 0;
    for (int S = 1; S <= 3; ++S) {
        std::vector<std::vector<double>> functions;
        const int total = static_cast<int>(std::pow(3, S));
        for (int code = 0; code < total; ++code) {
            std::vector<double> row(static_cast<std::size_t>(S));
            int c = code;
            for (int s = 0; s < S; ++s) {
                row[static_cast<std::size_t>(s)] = 0.5 * (c % 3);
                c /= 3;
            }
            functions.push_back(std::move(row));
        }
        std::vector<std::vector<double>> rows;
        for (int code = 0; code < total; ++code) {
            std::vector<double> row(static_cast<std::size_t>(S));
            double sum = 0.0;
            int c = code;
            for (int s = 0; s < S; ++s) {
                row[static_cast<std::size_t>(s)] = 0.5 * (c % 3);
                sum += row[static_cast<std::size_t>(s)];
                c /= 3;
            }
            if (std::abs(sum - 1.0) < 1e-12) rows.push_back(std::move(row));
        }
        // All psi subsets of size 1..3 and distribution subsets of size 1..3.
        const int nf = static_cast<int>(functions.size());
        const int nd = static_cast<int>(rows.size());
        std::vector<std::vector<int>> psi_sets, d_sets;
        for (int i = 0; i < nf; ++i) {
            psi_sets.push_back({i});
            for (int j = i + 1; j < nf; ++j) {
                psi_sets.push_back({i, j});
                for (int k = j + 1; k < nf; ++k) psi_sets.push_back({i, j, k});
            }
        }
        for (int i = 0; i < nd; ++i) {
            d_sets.push_back({i});
            for (int j = i + 1; j < nd; ++j) {
                d_sets.push_back({i, j});
                for (int k = j + 1; k < nd; ++k) d_sets.push_back({i, j, k});
            }
        }
        std::vector<long> viol(psi_sets.size(), 0);
        par::for_each_index(psi_sets.size(), [&](std::size_t pi_idx) {
            eluder_instance inst;
            for (int f : psi_sets[pi_idx]) inst.psi.push_back(functions[static_cast<std::size_t>(f)]);
            for (const auto& ds : d_sets) {
                inst.dists.clear();
                for (int d : ds) inst.dists.push_back(rows[static_cast<std::size_t>(d)]);
                for (double eps : {0.1, 0.3, 0.6})
                    if (de_dimension(inst, eps, 1) > de_dimension(inst, eps, 2))
                        ++viol[pi_idx];
            }
        });
        for (long v : viol) violations += v;
        instances += static_cast<long>(psi_sets.size()) * static_cast<long>(d_sets.size());
    }

    // Indicator example.
    eluder_instance indicator;
    indicator.psi = {{1.0, 0.0}, {0.0, 1.0}};
    indicator.dists = {{1.0, 0.0}, {0.0, 1.0}};
    const bool indicator_ok = de_dimension(indicator, 0.5, 1) == 2;

    // 50 random admissible pigeonhole instances.
    int pigeonhole_ok = 0;
    for (int trial = 0; trial < 50; ++trial) {
        rng t = rng(9100).derive({static_cast<std::uint64_t>(trial)});
        eluder_instance inst;
        const int S = 2 + t.next_int(3);
        for (int f = 0; f < 1 + t.next_int(3); ++f) {
            std::vector<double> row(static_cast<std::size_t>(S));
            for (double& v : row) v = 2.0 * t.next_double() - 1.0;
            inst.psi.push_back(std::move(row));
        }
        for (int d = 0; d < 1 + t.next_int(3); ++d) {
            std::vector<double> row(static_cast<std::size_t>(S));
            double s = 0.0;
            for (double& v : row) {
                v = 0.05 + t.next_double();
                s += v;
            }
            for (double& v : row) v /= s;
            inst.dists.push_back(std::move(row));
        }
        const int k = 2 + t.next_int(6);
        std::vector<int> f_seq, d_seq;
        for (int i = 0; i < k; ++i) {
            f_seq.push_back(t.next_int(inst.function_count()));
            d_seq.push_back(t.next_int(inst.dist_count()));
        }
        const auto e = inst.abs_expectations();
        double beta = 0.0;
        for (int tt = 0; tt < k; ++tt) {
            double prefix = 0.0;
            for (int i = 0; i < tt; ++i)
                prefix += e[static_cast<std::size_t>(d_seq[static_cast<std::size_t>(i)])]
                           [static_cast<std::size_t>(f_seq[static_cast<std::size_t>(tt)])];
            beta = std::max(beta, prefix);
        }
        if (pigeonhole_check(inst, f_seq, d_seq, beta).holds) ++pigeonhole_ok;
    }

    r.pass = violations == 0 && indicator_ok && pigeonhole_ok == 50;
    r.detail = "lattice=" + std::to_string(instances) + " violations=" +
               std::to_string(violations) + " pigeonhole=" + std::to_string(pigeonhole_ok) +
               "/50 indicator=" + (indicator_ok ? "2" : "wrong");
    r.digest = std::to_string(instances) + "|" + std::to_string(violations) + "|" +
               std::to_string(pigeonhole_ok) + "|" + (indicator_ok ? "1" : "0");
    return r;
}

using criterion_fn = std::function<criterion_result()>;

} // namespace

int main() {
    const std::vector<std::pair<std::string, criterion_fn>> criteria = {
        {"divergence suite", criterion1},
        {"Bellman identities", criterion2},
        {"exponential-weights log-regret", criterion3},
        {"MLE version space", criterion4},
        {"DistCB small-loss scaling", criterion5},
        {"DistCB vs SquareCB direction", criterion6},
        {"O-DISCO acceptance MDP", criterion7},
        {"P-DISCO pessimism and bounds", criterion8},
        {"eluder lattice and pigeonhole", criterion9},
    };
    const std::vector<double> runtime_caps = {10.0, 30.0, 60.0, 60.0, 120.0,
                                              120.0, 300.0, 300.0, 120.0};

    bool all_pass = true;
    std::vector<criterion_result> first_pass(criteria.size());
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        first_pass[i] = criteria[i].second();
        first_pass[i].seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool within_cap = first_pass[i].seconds <= runtime_caps[i];
        const bool pass = first_pass[i].pass && within_cap;
        all_pass = all_pass && pass;
        std::printf("[%s] criterion %zu: %s (%s)%s [%.1fs]\n", pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first.c_str(), first_pass[i].detail.c_str(),
                    within_cap ? "" : " [over runtime cap]", first_pass[i].seconds);
        std::fflush(stdout);
    }

    // Criterion 10: identical seeds reproduce byte-identical outputs.
    bool deterministic = true;
    std::string mismatch;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto again = criteria[i].second();
        if (again.digest != first_pass[i].digest) {
            deterministic = false;
            mismatch += " c" + std::to_string(i + 1);
        }
    }
    all_pass = all_pass && deterministic;
    std::printf("[%s] criterion 10: determinism (%s)\n", deterministic ? "PASS" : "FAIL",
                deterministic ? "all digests identical on re-run"
                              : ("mismatch at" + mismatch).c_str());
    return all_pass ? 0 : 1;
}
