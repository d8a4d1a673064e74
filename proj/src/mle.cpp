#include "distlab/mle.hpp"

#include <algorithm>
#include <cmath>

#include "distlab/parallel.hpp"

namespace distlab {

cond_dist_class::cond_dist_class(std::vector<cond_key> keys,
                                 std::vector<std::vector<grid_categorical>> members)
    : keys_(std::move(keys)), members_(std::move(members)) {
    if (members_.empty()) throw parameter_error("cond_dist_class: empty class");
    if (keys_.empty()) throw parameter_error("cond_dist_class: empty key set");
    grid_ = members_.front().front().grid();
    for (const auto& m : members_) {
        if (m.size() != keys_.size())
            throw parameter_error("cond_dist_class: member not defined on the full key set");
        for (const auto& d : m)
            if (!(d.grid() == grid_))
                throw grid_mismatch_error("cond_dist_class: mixed grids across members");
    }
    for (std::size_t i = 0; i < keys_.size(); ++i) {
        if (!index_.emplace(keys_[i], static_cast<int>(i)).second)
            throw parameter_error("cond_dist_class: duplicate key");
    }
    means_.reserve(members_.size());
    for (const auto& m : members_) {
        std::vector<double> row;
        row.reserve(m.size());
        for (const auto& d : m) row.push_back(mean(d));
        means_.push_back(std::move(row));
    }
}

int cond_dist_class::key_index(const cond_key& key) const {
    auto it = index_.find(key);
    if (it == index_.end())
        throw key_error("cond_dist_class: unknown key (" + std::to_string(key.first) + "," +
                        std::to_string(key.second) + ")");
    return it->second;
}

std::vector<double> likelihood_ledger::posterior_weights() const {
    const double mx = *std::max_element(loglik_.begin(), loglik_.end());
    std::vector<double> w(loglik_.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < loglik_.size(); ++i) {
        w[i] = std::exp(loglik_[i] - mx);
        sum += w[i];
    }
    for (double& x : w) x /= sum;
    return w;
}

void likelihood_ledger::record(std::span<const double> member_log_density,
                               double prediction_log_density) {
    if (member_log_density.size() != loglik_.size())
        throw parameter_error("likelihood_ledger: member count mismatch");
    for (std::size_t i = 0; i < loglik_.size(); ++i) loglik_[i] += member_log_density[i];
    prediction_loglik_.push_back(prediction_log_density);
    ++n_;
}

grid_categorical ew_predict(const likelihood_ledger& ledger, const cond_dist_class& cls,
                            const cond_key& key) {
    if (ledger.member_count() != cls.size())
        throw parameter_error("ew_predict: ledger/class size mismatch");
    const int kidx = cls.key_index(key);
    const auto w = ledger.posterior_weights();
    std::vector<double> probs(static_cast<std::size_t>(cls.grid().atom_count), 0.0);
    for (int f = 0; f < cls.size(); ++f) {
        const auto& d = cls.table(f, kidx);
        for (int i = 0; i < cls.grid().atom_count; ++i)
            probs[static_cast<std::size_t>(i)] += w[static_cast<std::size_t>(f)] * d.prob(i);
    }
    return {cls.grid(), std::move(probs)};
}

void ew_update(likelihood_ledger& ledger, const cond_dist_class& cls, const cond_key& key,
               int observed_atom) {
    if (observed_atom < 0 || observed_atom >= cls.grid().atom_count)
        throw parameter_error("ew_update: observed cost is off the grid");
    const int kidx = cls.key_index(key);
    const auto w = ledger.posterior_weights();
    std::vector<double> logs(static_cast<std::size_t>(cls.size()));
    // The recorded mixture density uses floored member densities so the
    // forecaster's telescoping identity stays exact under the log floor.
    double mix_density = 0.0;
    for (int f = 0; f < cls.size(); ++f) {
        const double density =
            std::max(cls.table(f, kidx).prob(observed_atom), kLogDensityFloor);
        logs[static_cast<std::size_t>(f)] = std::log(density);
        mix_density += w[static_cast<std::size_t>(f)] * density;
    }
    ledger.record(logs, std::log(mix_density));
}

double log_regret(const likelihood_ledger& ledger, const cond_dist_class& cls, int truth_index) {
    if (truth_index < 0 || truth_index >= cls.size())
        throw parameter_error("log_regret: truth index out of range");
    double pred_sum = 0.0;
    for (double v : ledger.prediction_loglik()) pred_sum += v;
    return ledger.loglik()[static_cast<std::size_t>(truth_index)] - pred_sum;
}

std::vector<double> batch_loglik(const cond_dist_class& cls,
                                 const std::vector<std::pair<cond_key, int>>& data) {
    // Group observations by (key, atom) once, then score members in parallel.
    std::map<std::pair<int, int>, long> counts;
    for (const auto& [key, atom] : data) {
        if (atom < 0 || atom >= cls.grid().atom_count)
            throw parameter_error("batch_loglik: sample off the grid");
        ++counts[{cls.key_index(key), atom}];
    }
    std::vector<std::tuple<int, int, long>> grouped;
    grouped.reserve(counts.size());
    for (const auto& [ka, n] : counts) grouped.emplace_back(ka.first, ka.second, n);

    std::vector<double> scores(static_cast<std::size_t>(cls.size()), 0.0);
    par::for_each_index(static_cast<std::size_t>(cls.size()), [&](std::size_t f) {
        double s = 0.0;
        for (const auto& [kidx, atom, n] : grouped) {
            const double density =
                std::max(cls.table(static_cast<int>(f), kidx).prob(atom), kLogDensityFloor);
            s += static_cast<double>(n) * std::log(density);
        }
        scores[f] = s;
    });
    return scores;
}

std::vector<int> version_space(const cond_dist_class& cls,
                               const std::vector<std::pair<cond_key, int>>& data, double beta) {
    if (beta < 0.0) throw parameter_error("version_space: beta must be >= 0");
    std::vector<int> out;
    if (data.empty()) {
        for (int f = 0; f < cls.size(); ++f) out.push_back(f);
        return out;
    }
    const auto scores = batch_loglik(cls, data);
    const double best = *std::max_element(scores.begin(), scores.end());
    const double threshold = best - 7.0 * beta;
    for (int f = 0; f < cls.size(); ++f)
        if (scores[static_cast<std::size_t>(f)] >= threshold) out.push_back(f);
    return out;
}

sgd_softmax_oracle::sgd_softmax_oracle(int feature_dim, double step_size, int atom_count)
    : dim_(feature_dim), step_(step_size), grid_(atom_count),
      w_(static_cast<std::size_t>(atom_count) * static_cast<std::size_t>(feature_dim), 0.0) {
    if (feature_dim < 1) throw parameter_error("sgd_softmax_oracle: feature_dim must be >= 1");
    if (!(step_size > 0.0)) throw parameter_error("sgd_softmax_oracle: step size must be > 0");
}

std::vector<double> sgd_softmax_oracle::softmax_probs(std::span<const double> features) const {
    if (static_cast<int>(features.size()) != dim_)
        throw input_error("sgd_softmax_oracle: feature dimension mismatch");
    const int m = grid_.atom_count;
    std::vector<double> logits(static_cast<std::size_t>(m), 0.0);
    for (int a = 0; a < m; ++a) {
        double s = 0.0;
        const double* row = &w_[static_cast<std::size_t>(a) * static_cast<std::size_t>(dim_)];
        for (int j = 0; j < dim_; ++j) s += row[j] * features[static_cast<std::size_t>(j)];
        logits[static_cast<std::size_t>(a)] = s;
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : logits) v /= sum;
    return logits;
}

grid_categorical sgd_softmax_oracle::predict(std::span<const double> features) const {
    return {grid_, softmax_probs(features)};
}

double sgd_softmax_oracle::nll(std::span<const double> features, int observed_atom) const {
    const auto p = softmax_probs(features);
    return -std::log(std::max(p[static_cast<std::size_t>(observed_atom)], kLogDensityFloor));
}

void sgd_softmax_oracle::update(std::span<const double> features, int observed_atom) {
    if (observed_atom < 0 || observed_atom >= grid_.atom_count)
        throw parameter_error("sgd_softmax_oracle: observed atom out of range");
    const auto p = softmax_probs(features);
    for (int a = 0; a < grid_.atom_count; ++a) {
        const double grad_coeff =
            p[static_cast<std::size_t>(a)] - (a == observed_atom ? 1.0 : 0.0);
        double* row = &w_[static_cast<std::size_t>(a) * static_cast<std::size_t>(dim_)];
        for (int j = 0; j < dim_; ++j)
            row[j] -= step_ * grad_coeff * features[static_cast<std::size_t>(j)];
    }
}

} // namespace distlab
