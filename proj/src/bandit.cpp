#include "distlab/bandit.hpp"

#include <algorithm>
#include <cmath>

namespace distlab {

cb_environment cb_environment::build(grid_spec grid, std::vector<double> context_probs,
                                     std::vector<std::vector<grid_categorical>> cost,
                                     std::vector<std::vector<double>> features) {
    cb_environment env;
    env.grid = grid;
    env.num_contexts = static_cast<int>(cost.size());
    if (env.num_contexts == 0) throw parameter_error("cb_environment: no contexts");
    env.num_actions = static_cast<int>(cost.front().size());
    if (env.num_actions == 0) throw parameter_error("cb_environment: no actions");
    double psum = 0.0;
    for (double p : context_probs) {
        if (!(p >= 0.0)) throw weight_error("cb_environment: negative context probability");
        psum += p;
    }
    if (static_cast<int>(context_probs.size()) != env.num_contexts ||
        std::abs(psum - 1.0) > 1e-9)
        throw weight_error("cb_environment: context probabilities invalid");
    env.context_probs = std::move(context_probs);
    env.mean_table.resize(cost.size());
    env.best_mean.resize(cost.size());
    for (std::size_t x = 0; x < cost.size(); ++x) {
        if (static_cast<int>(cost[x].size()) != env.num_actions)
            throw parameter_error("cb_environment: ragged cost table");
        env.mean_table[x].resize(cost[x].size());
        double best = 2.0;
        for (std::size_t a = 0; a < cost[x].size(); ++a) {
            if (!(cost[x][a].grid() == grid))
                throw grid_mismatch_error("cb_environment: cost grid mismatch");
            env.mean_table[x][a] = mean(cost[x][a]);
            best = std::min(best, env.mean_table[x][a]);
        }
        env.best_mean[x] = best;
    }
    env.cost = std::move(cost);
    env.features = std::move(features);
    return env;
}

std::vector<double> reigw_weights(const std::vector<double>& fhat, double gamma) {
    const int A = static_cast<int>(fhat.size());
    if (A == 0) throw input_error("reigw_weights: empty prediction vector");
    if (!(gamma >= 2.0 * A))
        throw parameter_error("reigw_weights: gamma must be >= 2A");
    std::vector<double> f(fhat);
    for (double& v : f) {
        if (!std::isfinite(v)) throw input_error("reigw_weights: non-finite prediction");
        v = std::max(v, 1e-6);
    }
    int b = 0;
    for (int a = 1; a < A; ++a)
        if (f[static_cast<std::size_t>(a)] < f[static_cast<std::size_t>(b)]) b = a;
    const double fb = f[static_cast<std::size_t>(b)];
    std::vector<double> p(static_cast<std::size_t>(A), 0.0);
    double rest = 0.0;
    for (int a = 0; a < A; ++a) {
        if (a == b) continue;
        const double w = fb / (A * fb + gamma * (f[static_cast<std::size_t>(a)] - fb));
        p[static_cast<std::size_t>(a)] = w;
        rest += w;
    }
    p[static_cast<std::size_t>(b)] = 1.0 - rest;
    return p;
}

std::vector<double> igw_weights(const std::vector<double>& fhat, double gamma) {
    const int A = static_cast<int>(fhat.size());
    if (A == 0) throw input_error("igw_weights: empty prediction vector");
    if (!(gamma >= 0.0)) throw parameter_error("igw_weights: gamma must be >= 0");
    for (double v : fhat)
        if (!std::isfinite(v)) throw input_error("igw_weights: non-finite prediction");
    int b = 0;
    for (int a = 1; a < A; ++a)
        if (fhat[static_cast<std::size_t>(a)] < fhat[static_cast<std::size_t>(b)]) b = a;
    std::vector<double> p(static_cast<std::size_t>(A), 0.0);
    double rest = 0.0;
    for (int a = 0; a < A; ++a) {
        if (a == b) continue;
        const double w =
            1.0 / (A + gamma * (fhat[static_cast<std::size_t>(a)] -
                                fhat[static_cast<std::size_t>(b)]));
        p[static_cast<std::size_t>(a)] = w;
        rest += w;
    }
    p[static_cast<std::size_t>(b)] = 1.0 - rest;
    return p;
}

double gamma_theorem(int num_actions, double c_star, double regret_log, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw parameter_error("gamma_theorem: delta must be in (0,1)");
    if (num_actions < 0 || c_star < 0.0 || regret_log < 0.0)
        throw parameter_error("gamma_theorem: inputs must be >= 0");
    const double log_term = std::log(1.0 / delta);
    const double sqrt_branch =
        std::sqrt(40.0 * num_actions * (c_star + log_term) / (112.0 * (regret_log + log_term)));
    return std::max(10.0 * num_actions, sqrt_branch);
}

double gamma_schedule::value(long episode) const {
    if (episode < 1) throw parameter_error("gamma_schedule: episodes are 1-based");
    return exponent == 0.0 ? gamma0
                           : gamma0 * std::pow(static_cast<double>(episode), exponent);
}

ew_cost_oracle::ew_cost_oracle(std::shared_ptr<const cond_dist_class> cls, int num_actions)
    : cls_(std::move(cls)), num_actions_(num_actions), ledger_(cls_->size()) {}

std::vector<double> ew_cost_oracle::predict_means(int context) {
    const auto w = ledger_.posterior_weights();
    std::vector<double> means(static_cast<std::size_t>(num_actions_), 0.0);
    for (int a = 0; a < num_actions_; ++a) {
        const int kidx = cls_->key_index({context, a});
        double m = 0.0;
        for (int f = 0; f < cls_->size(); ++f)
            m += w[static_cast<std::size_t>(f)] * cls_->mean_at(f, kidx);
        means[static_cast<std::size_t>(a)] = m;
    }
    return means;
}

void ew_cost_oracle::update(int context, int action, int cost_atom, double) {
    ew_update(ledger_, *cls_, {context, action}, cost_atom);
}

tabular_mean_oracle::tabular_mean_oracle(int num_contexts, int num_actions, double init)
    : num_actions_(num_actions),
      est_(static_cast<std::size_t>(num_contexts),
           std::vector<double>(static_cast<std::size_t>(num_actions), init)),
      count_(static_cast<std::size_t>(num_contexts),
             std::vector<long>(static_cast<std::size_t>(num_actions), 0)) {}

std::vector<double> tabular_mean_oracle::predict_means(int context) {
    return est_[static_cast<std::size_t>(context)];
}

void tabular_mean_oracle::update(int context, int action, int, double cost_value) {
    auto& n = count_[static_cast<std::size_t>(context)][static_cast<std::size_t>(action)];
    auto& e = est_[static_cast<std::size_t>(context)][static_cast<std::size_t>(action)];
    ++n;
    e += (cost_value - e) / static_cast<double>(n);
}

tabular_logloss_oracle::tabular_logloss_oracle(int num_contexts, int num_actions, double step)
    : num_actions_(num_actions), step_(step),
      theta_(static_cast<std::size_t>(num_contexts),
             std::vector<double>(static_cast<std::size_t>(num_actions), 0.0)) {}

std::vector<double> tabular_logloss_oracle::predict_means(int context) {
    std::vector<double> means(static_cast<std::size_t>(num_actions_));
    for (int a = 0; a < num_actions_; ++a)
        means[static_cast<std::size_t>(a)] =
            1.0 / (1.0 + std::exp(-theta_[static_cast<std::size_t>(context)]
                                         [static_cast<std::size_t>(a)]));
    return means;
}

void tabular_logloss_oracle::update(int context, int action, int, double cost_value) {
    auto& th = theta_[static_cast<std::size_t>(context)][static_cast<std::size_t>(action)];
    const double pred = 1.0 / (1.0 + std::exp(-th));
    th += step_ * (cost_value - pred);
}

linear_mean_oracle::linear_mean_oracle(const cb_environment* env, double step)
    : env_(env), step_(step) {
    if (env_->features.empty())
        throw parameter_error("linear_mean_oracle: environment has no features");
    w_.assign(static_cast<std::size_t>(env_->num_actions),
              std::vector<double>(env_->features.front().size(), 0.0));
}

std::vector<double> linear_mean_oracle::predict_means(int context) {
    const auto& phi = env_->features[static_cast<std::size_t>(context)];
    std::vector<double> means(static_cast<std::size_t>(env_->num_actions));
    for (int a = 0; a < env_->num_actions; ++a) {
        double s = 0.0;
        for (std::size_t j = 0; j < phi.size(); ++j)
            s += w_[static_cast<std::size_t>(a)][j] * phi[j];
        means[static_cast<std::size_t>(a)] = std::clamp(s, 0.0, 1.0);
    }
    return means;
}

void linear_mean_oracle::update(int context, int action, int, double cost_value) {
    const auto& phi = env_->features[static_cast<std::size_t>(context)];
    double s = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j)
        s += w_[static_cast<std::size_t>(action)][j] * phi[j];
    const double err = cost_value - s;
    for (std::size_t j = 0; j < phi.size(); ++j)
        w_[static_cast<std::size_t>(action)][j] += step_ * err * phi[j];
}

linear_logloss_oracle::linear_logloss_oracle(const cb_environment* env, double step)
    : env_(env), step_(step) {
    if (env_->features.empty())
        throw parameter_error("linear_logloss_oracle: environment has no features");
    w_.assign(static_cast<std::size_t>(env_->num_actions),
              std::vector<double>(env_->features.front().size(), 0.0));
}

std::vector<double> linear_logloss_oracle::predict_means(int context) {
    const auto& phi = env_->features[static_cast<std::size_t>(context)];
    std::vector<double> means(static_cast<std::size_t>(env_->num_actions));
    for (int a = 0; a < env_->num_actions; ++a) {
        double s = 0.0;
        for (std::size_t j = 0; j < phi.size(); ++j)
            s += w_[static_cast<std::size_t>(a)][j] * phi[j];
        means[static_cast<std::size_t>(a)] = 1.0 / (1.0 + std::exp(-s));
    }
    return means;
}

void linear_logloss_oracle::update(int context, int action, int, double cost_value) {
    const auto& phi = env_->features[static_cast<std::size_t>(context)];
    double s = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j)
        s += w_[static_cast<std::size_t>(action)][j] * phi[j];
    const double pred = 1.0 / (1.0 + std::exp(-s));
    const double err = cost_value - pred;
    for (std::size_t j = 0; j < phi.size(); ++j)
        w_[static_cast<std::size_t>(action)][j] += step_ * err * phi[j];
}

softmax_dist_oracle::softmax_dist_oracle(const cb_environment* env, double step) : env_(env) {
    if (env_->features.empty())
        throw parameter_error("softmax_dist_oracle: environment has no features");
    const int dim = static_cast<int>(env_->features.front().size());
    per_action_.reserve(static_cast<std::size_t>(env_->num_actions));
    for (int a = 0; a < env_->num_actions; ++a)
        per_action_.emplace_back(dim, step, env_->grid.atom_count);
}

std::vector<double> softmax_dist_oracle::predict_means(int context) {
    const auto& phi = env_->features[static_cast<std::size_t>(context)];
    std::vector<double> means(static_cast<std::size_t>(env_->num_actions));
    for (int a = 0; a < env_->num_actions; ++a)
        means[static_cast<std::size_t>(a)] =
            mean(per_action_[static_cast<std::size_t>(a)].predict(phi));
    return means;
}

void softmax_dist_oracle::update(int context, int action, int cost_atom, double) {
    per_action_[static_cast<std::size_t>(action)].update(
        env_->features[static_cast<std::size_t>(context)], cost_atom);
}

double regret_trace::average_cost() const {
    if (cost.empty()) return 0.0;
    double s = 0.0;
    for (double c : cost) s += c;
    return s / static_cast<double>(cost.size());
}

double regret_trace::average_cost_last(long window) const {
    if (cost.empty()) return 0.0;
    const long n = static_cast<long>(cost.size());
    const long w = std::min(window, n);
    double s = 0.0;
    for (long i = n - w; i < n; ++i) s += cost[static_cast<std::size_t>(i)];
    return s / static_cast<double>(w);
}

void regret_trace::add(int a, double c, double inst, double best) {
    action.push_back(a);
    cost.push_back(c);
    inst_regret.push_back(inst);
    cum_regret.push_back(final_cum_regret() + inst);
    c_star_running.push_back((c_star_running.empty() ? 0.0 : c_star_running.back()) + best);
}

namespace {

enum class weight_rule { reigw, igw };

regret_trace run_cb(const cb_environment& env, cb_mean_oracle& oracle,
                    const gamma_schedule& schedule, long episodes, std::uint64_t seed, int batch,
                    weight_rule rule) {
    if (episodes < 0) throw parameter_error("run_cb: negative episode count");
    if (batch < 1) throw parameter_error("run_cb: batch must be >= 1");
    rng root(seed);
    rng ctx_rng = root.derive({stream::context});
    rng act_rng = root.derive({stream::action});
    rng cost_rng = root.derive({stream::cost});
    regret_trace trace;
    for (long k = 1; k <= episodes; ++k) {
        const int x = env.sample_context(ctx_rng);
        const auto means = oracle.predict_means(x);
        if (static_cast<int>(means.size()) != env.num_actions)
            throw parameter_error("run_cb: oracle prediction size mismatch");
        const double gamma = schedule.value(k);
        const auto p = rule == weight_rule::reigw ? reigw_weights(means, gamma)
                                                  : igw_weights(means, gamma);
        const int a = act_rng.sample_categorical(p);
        double cost_sum = 0.0;
        for (int b = 0; b < batch; ++b) {
            const int c_idx = cost_rng.sample_categorical(
                env.cost[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)].probs());
            const double c = env.grid.atom(c_idx);
            oracle.update(x, a, c_idx, c);
            cost_sum += c;
        }
        const double inst = env.mean_table[static_cast<std::size_t>(x)]
                                          [static_cast<std::size_t>(a)] -
                            env.best_mean[static_cast<std::size_t>(x)];
        trace.add(a, cost_sum / batch, inst, env.best_mean[static_cast<std::size_t>(x)]);
    }
    return trace;
}

} // namespace

regret_trace run_distcb(const cb_environment& env, cb_mean_oracle& oracle,
                        const gamma_schedule& schedule, long episodes, std::uint64_t seed,
                        int batch) {
    return run_cb(env, oracle, schedule, episodes, seed, batch, weight_rule::reigw);
}

regret_trace run_squarecb(const cb_environment& env, cb_mean_oracle& oracle,
                          const gamma_schedule& schedule, long episodes, std::uint64_t seed,
                          int batch) {
    return run_cb(env, oracle, schedule, episodes, seed, batch, weight_rule::igw);
}

regret_trace run_fastcb(const cb_environment& env, cb_mean_oracle& oracle,
                        const gamma_schedule& schedule, long episodes, std::uint64_t seed,
                        int batch) {
    return run_cb(env, oracle, schedule, episodes, seed, batch, weight_rule::reigw);
}

} // namespace distlab
