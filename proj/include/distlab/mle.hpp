#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "distlab/grid.hpp"

namespace distlab {

// Floor applied to a density before taking its log. Keeps one zero-mass
// observation from sending a member's running sum to -infinity.
inline constexpr double kLogDensityFloor = 1e-12;

using cond_key = std::pair<int, int>;

// Finite class of conditional distributions: each member maps the shared key
// set (opaque (x,a) pairs) to a grid_categorical on the shared grid.
// Immutable and shareable once built.
class cond_dist_class {
  public:
    cond_dist_class(std::vector<cond_key> keys,
                    std::vector<std::vector<grid_categorical>> members);

    [[nodiscard]] int size() const { return static_cast<int>(members_.size()); }
    [[nodiscard]] int key_count() const { return static_cast<int>(keys_.size()); }
    [[nodiscard]] const std::vector<cond_key>& keys() const { return keys_; }
    [[nodiscard]] const grid_spec& grid() const { return grid_; }

    [[nodiscard]] int key_index(const cond_key& key) const;

    [[nodiscard]] const grid_categorical& table(int member, int key_idx) const {
        return members_[static_cast<std::size_t>(member)][static_cast<std::size_t>(key_idx)];
    }
    [[nodiscard]] const grid_categorical& at(int member, const cond_key& key) const {
        return table(member, key_index(key));
    }
    // Per-member mean tables, indexed [member][key]; cached at construction.
    [[nodiscard]] double mean_at(int member, int key_idx) const {
        return means_[static_cast<std::size_t>(member)][static_cast<std::size_t>(key_idx)];
    }

  private:
    std::vector<cond_key> keys_;
    std::map<cond_key, int> index_;
    std::vector<std::vector<grid_categorical>> members_;
    std::vector<std::vector<double>> means_;
    grid_spec grid_;
};

// Running log-likelihood account for every member of a class, plus the
// per-round log-density of the exponential-weights prediction (recorded so
// log_regret needs no replay). Single-owner mutable object.
class likelihood_ledger {
  public:
    explicit likelihood_ledger(int member_count)
        : loglik_(static_cast<std::size_t>(member_count), 0.0) {}

    [[nodiscard]] int member_count() const { return static_cast<int>(loglik_.size()); }
    [[nodiscard]] long observation_count() const { return n_; }
    [[nodiscard]] const std::vector<double>& loglik() const { return loglik_; }
    [[nodiscard]] const std::vector<double>& prediction_loglik() const {
        return prediction_loglik_;
    }

    // Posterior weights proportional to exp(loglik), computed with
    // max-subtraction.
    [[nodiscard]] std::vector<double> posterior_weights() const;

    void record(std::span<const double> member_log_density, double prediction_log_density);

  private:
    std::vector<double> loglik_;
    std::vector<double> prediction_loglik_;
    long n_ = 0;
};

// Posterior-mixture prediction of the exponentially weighted average
// forecaster at the given key.
grid_categorical ew_predict(const likelihood_ledger& ledger, const cond_dist_class& cls,
                            const cond_key& key);

// One online MLE step: every member's sum grows by its (floored) log-density
// of the observed grid atom; the mixture's own log-density is recorded for
// regret accounting.
void ew_update(likelihood_ledger& ledger, const cond_dist_class& cls, const cond_key& key,
               int observed_atom);

// sum_k log f_truth(c_k) - log prediction_k(c_k), both with the 1e-12 floor.
double log_regret(const likelihood_ledger& ledger, const cond_dist_class& cls, int truth_index);

// Batch MLE version space: members within 7*beta of the best total
// log-likelihood on (key, observed atom) data. Empty data keeps everyone.
std::vector<int> version_space(const cond_dist_class& cls,
                               const std::vector<std::pair<cond_key, int>>& data, double beta);

// Per-member total log-likelihoods on a batch (the scoring kernel behind
// version_space); exposed for tests and for the parallel/serial comparison.
std::vector<double> batch_loglik(const cond_dist_class& cls,
                                 const std::vector<std::pair<cond_key, int>>& data);

// Linear-softmax density model over grid atoms: predict returns
// softmax(W phi) and update takes one gradient step on the negative
// log-likelihood of the observed atom. Practical oracle for feature tasks
// where no finite class is available.
class sgd_softmax_oracle {
  public:
    sgd_softmax_oracle(int feature_dim, double step_size, int atom_count);

    [[nodiscard]] grid_categorical predict(std::span<const double> features) const;
    void update(std::span<const double> features, int observed_atom);
    [[nodiscard]] double nll(std::span<const double> features, int observed_atom) const;

    [[nodiscard]] int feature_dim() const { return dim_; }
    [[nodiscard]] const grid_spec& grid() const { return grid_; }
    [[nodiscard]] std::vector<double>& weights() { return w_; }

  private:
    [[nodiscard]] std::vector<double> softmax_probs(std::span<const double> features) const;

    int dim_;
    double step_;
    grid_spec grid_;
    std::vector<double> w_; // atom-major: w_[atom * dim_ + j]
};

} // namespace distlab
