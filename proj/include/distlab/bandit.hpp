#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "distlab/grid.hpp"
#include "distlab/mle.hpp"
#include "distlab/rng.hpp"

namespace distlab {

// Contextual bandit simulator: finite contexts drawn from context_probs,
// ground-truth conditional cost distributions on one grid, and the exact
// mean table the regret accounting runs against. Optional per-context
// feature rows serve the featurized oracles.
struct cb_environment {
    int num_contexts = 0;
    int num_actions = 0;
    grid_spec grid;
    std::vector<double> context_probs;
    std::vector<std::vector<grid_categorical>> cost; // [x][a]
    std::vector<std::vector<double>> mean_table;     // [x][a]
    std::vector<double> best_mean;                   // min_a mean per context
    std::vector<std::vector<double>> features;       // optional, per context

    static cb_environment build(grid_spec grid, std::vector<double> context_probs,
                                std::vector<std::vector<grid_categorical>> cost,
                                std::vector<std::vector<double>> features = {});

    [[nodiscard]] int sample_context(rng& gen) const {
        return gen.sample_categorical(context_probs);
    }
};

// Reweighted inverse gap weighting (entries floored at 1e-6; b = argmin with
// lowest-index ties): for a != b, p(a) = f(b) / (A f(b) + gamma (f(a)-f(b)))
// and b receives the remainder. Requires gamma >= 2A.
std::vector<double> reigw_weights(const std::vector<double>& fhat, double gamma);

// Unweighted inverse gap weighting, p(a != b) = 1 / (A + gamma (f(a)-f(b))).
std::vector<double> igw_weights(const std::vector<double>& fhat, double gamma);

// gamma = max(10 A, sqrt(40 A (C* + log(1/delta)) / (112 (Regret_log + log(1/delta))))).
double gamma_theorem(int num_actions, double c_star, double regret_log, double delta);

// Episode-indexed exploration rate. Theorem mode is resolved by the caller
// into a constant via gamma_theorem (it needs the simulator's C*).
struct gamma_schedule {
    double gamma0 = 0.0;
    double exponent = 0.0;

    [[nodiscard]] double value(long episode) const;

    static gamma_schedule constant(double g) { return {g, 0.0}; }
    static gamma_schedule power(double g0, double p) { return {g0, p}; }
};

// Online oracle surface shared by all CB runners: per-context predicted
// means plus an update on the observed (context, action, cost) triple.
class cb_mean_oracle {
  public:
    virtual ~cb_mean_oracle() = default;
    virtual std::vector<double> predict_means(int context) = 0;
    virtual void update(int context, int action, int cost_atom, double cost_value) = 0;
};

// Exponential-weights posterior over a finite conditional-distribution class
// keyed by (context, action); means via the class's cached mean tables.
class ew_cost_oracle : public cb_mean_oracle {
  public:
    ew_cost_oracle(std::shared_ptr<const cond_dist_class> cls, int num_actions);

    std::vector<double> predict_means(int context) override;
    void update(int context, int action, int cost_atom, double cost_value) override;

    [[nodiscard]] const likelihood_ledger& ledger() const { return ledger_; }
    [[nodiscard]] const cond_dist_class& cls() const { return *cls_; }

  private:
    std::shared_ptr<const cond_dist_class> cls_;
    int num_actions_;
    likelihood_ledger ledger_;
};

// Squared-loss regression oracle: per-(x,a) running mean (the exact online
// ERM for the squared loss).
class tabular_mean_oracle : public cb_mean_oracle {
  public:
    tabular_mean_oracle(int num_contexts, int num_actions, double init = 0.5);
    std::vector<double> predict_means(int context) override;
    void update(int context, int action, int cost_atom, double cost_value) override;

  private:
    int num_actions_;
    std::vector<std::vector<double>> est_;
    std::vector<std::vector<long>> count_;
};

// Log-loss (binary cross-entropy) regression oracle with a sigmoid link,
// one SGD step per observation.
class tabular_logloss_oracle : public cb_mean_oracle {
  public:
    tabular_logloss_oracle(int num_contexts, int num_actions, double step = 0.5);
    std::vector<double> predict_means(int context) override;
    void update(int context, int action, int cost_atom, double cost_value) override;

  private:
    int num_actions_;
    double step_;
    std::vector<std::vector<double>> theta_;
};

// Featurized oracles for CSV tasks (linear in the environment's feature
// rows). Each action owns a weight vector.
class linear_mean_oracle : public cb_mean_oracle {
  public:
    linear_mean_oracle(const cb_environment* env, double step = 0.1);
    std::vector<double> predict_means(int context) override;
    void update(int context, int action, int cost_atom, double cost_value) override;

  private:
    const cb_environment* env_;
    double step_;
    std::vector<std::vector<double>> w_; // [action][feature]
};

class linear_logloss_oracle : public cb_mean_oracle {
  public:
    linear_logloss_oracle(const cb_environment* env, double step = 0.1);
    std::vector<double> predict_means(int context) override;
    void update(int context, int action, int cost_atom, double cost_value) override;

  private:
    const cb_environment* env_;
    double step_;
    std::vector<std::vector<double>> w_;
};

// Per-action linear-softmax cost distributions (the sgd_softmax_oracle of
// the MLE module); means of the predicted distributions feed ReIGW.
class softmax_dist_oracle : public cb_mean_oracle {
  public:
    softmax_dist_oracle(const cb_environment* env, double step = 0.5);
    std::vector<double> predict_means(int context) override;
    void update(int context, int action, int cost_atom, double cost_value) override;

  private:
    const cb_environment* env_;
    std::vector<sgd_softmax_oracle> per_action_;
};

// Per-episode record of a CB (or RL) run. Instantaneous regret is computed
// against simulator ground-truth means, never realized costs.
struct regret_trace {
    std::vector<int> action;
    std::vector<double> cost;
    std::vector<double> inst_regret;
    std::vector<double> cum_regret;
    std::vector<double> c_star_running;

    [[nodiscard]] long episodes() const { return static_cast<long>(action.size()); }
    [[nodiscard]] double final_cum_regret() const {
        return cum_regret.empty() ? 0.0 : cum_regret.back();
    }
    [[nodiscard]] double average_cost() const;
    [[nodiscard]] double average_cost_last(long window) const;

    void add(int a, double c, double inst, double best_mean);
};

regret_trace run_distcb(const cb_environment& env, cb_mean_oracle& oracle,
                        const gamma_schedule& schedule, long episodes, std::uint64_t seed,
                        int batch = 1);
regret_trace run_squarecb(const cb_environment& env, cb_mean_oracle& oracle,
                          const gamma_schedule& schedule, long episodes, std::uint64_t seed,
                          int batch = 1);
regret_trace run_fastcb(const cb_environment& env, cb_mean_oracle& oracle,
                        const gamma_schedule& schedule, long episodes, std::uint64_t seed,
                        int batch = 1);

} // namespace distlab
