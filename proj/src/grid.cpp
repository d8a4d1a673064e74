#include "distlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace distlab {

grid_categorical::grid_categorical(grid_spec grid, std::vector<double> probs)
    : grid_(grid), probs_(std::move(probs)) {
    if (static_cast<int>(probs_.size()) != grid_.atom_count)
        throw parameter_error("grid_categorical: probs size does not match atom_count");
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0))
            throw normalization_error("grid_categorical: negative or non-finite mass");
        sum += p;
    }
    const double drift = std::abs(sum - 1.0);
    if (drift <= 1e-12) return;
    if (drift <= 1e-9) {
        for (double& p : probs_) p /= sum;
        return;
    }
    throw normalization_error("grid_categorical: masses sum to " + std::to_string(sum));
}

grid_categorical grid_categorical::dirac(grid_spec grid, int atom_index) {
    if (atom_index < 0 || atom_index >= grid.atom_count)
        throw parameter_error("grid_categorical::dirac: atom index out of range");
    std::vector<double> p(static_cast<std::size_t>(grid.atom_count), 0.0);
    p[static_cast<std::size_t>(atom_index)] = 1.0;
    return {grid, std::move(p)};
}

int grid_categorical::support_min() const {
    for (std::size_t i = 0; i < probs_.size(); ++i)
        if (probs_[i] > 0.0) return static_cast<int>(i);
    return 0;
}

int grid_categorical::support_max() const {
    for (std::size_t i = probs_.size(); i-- > 0;)
        if (probs_[i] > 0.0) return static_cast<int>(i);
    return 0;
}

double mean(const grid_categorical& d) {
    const int m = d.atom_count();
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += d.grid().atom(i) * d.prob(i);
    return std::clamp(s, 0.0, 1.0);
}

double d_triangle(const grid_categorical& f, const grid_categorical& g) {
    require_same_grid(f, g);
    double s = 0.0;
    for (int i = 0; i < f.atom_count(); ++i) {
        const double denom = f.prob(i) + g.prob(i);
        if (denom > 0.0) {
            const double diff = f.prob(i) - g.prob(i);
            s += diff * diff / denom;
        }
    }
    return s;
}

double hellinger_sq(const grid_categorical& f, const grid_categorical& g) {
    require_same_grid(f, g);
    double s = 0.0;
    for (int i = 0; i < f.atom_count(); ++i) {
        const double d = std::sqrt(f.prob(i)) - std::sqrt(g.prob(i));
        s += d * d;
    }
    return 0.5 * s;
}

double kl_div(const grid_categorical& f, const grid_categorical& g) {
    require_same_grid(f, g);
    double s = 0.0;
    for (int i = 0; i < f.atom_count(); ++i) {
        const double fi = f.prob(i);
        if (fi <= 0.0) continue;
        const double gi = g.prob(i);
        if (gi <= 0.0) return std::numeric_limits<double>::infinity();
        s += fi * std::log(fi / gi);
    }
    return std::max(s, 0.0);
}

double tv_dist(const grid_categorical& f, const grid_categorical& g) {
    require_same_grid(f, g);
    double s = 0.0;
    for (int i = 0; i < f.atom_count(); ++i) s += std::abs(f.prob(i) - g.prob(i));
    return 0.5 * s;
}

grid_categorical convolve(const grid_categorical& f, const grid_categorical& g) {
    require_same_grid(f, g);
    const int m = f.atom_count();
    std::vector<double> out(static_cast<std::size_t>(m), 0.0);
    double overflow = 0.0;
    for (int i = 0; i < m; ++i) {
        const double fi = f.prob(i);
        if (fi == 0.0) continue;
        for (int j = 0; j < m; ++j) {
            const double mass = fi * g.prob(j);
            if (mass == 0.0) continue;
            const int k = i + j;
            if (k < m)
                out[static_cast<std::size_t>(k)] += mass;
            else
                overflow += mass;
        }
    }
    if (overflow > 1e-12)
        throw normalization_error("convolve: summed support escapes the top atom (mass " +
                                  std::to_string(overflow) + ")");
    out[static_cast<std::size_t>(m - 1)] += overflow;
    return {f.grid(), std::move(out)};
}

grid_categorical mixture(const std::vector<double>& weights,
                         const std::vector<const grid_categorical*>& components) {
    if (weights.empty() || weights.size() != components.size())
        throw parameter_error("mixture: weights/components size mismatch");
    double wsum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw weight_error("mixture: negative weight");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9)
        throw weight_error("mixture: weights sum to " + std::to_string(wsum));
    const grid_spec grid = components.front()->grid();
    std::vector<double> out(static_cast<std::size_t>(grid.atom_count), 0.0);
    for (std::size_t c = 0; c < components.size(); ++c) {
        if (!(components[c]->grid() == grid))
            throw grid_mismatch_error("mixture: component grids differ");
        const double w = weights[c];
        if (w == 0.0) continue;
        for (int i = 0; i < grid.atom_count; ++i)
            out[static_cast<std::size_t>(i)] += w * components[c]->prob(i);
    }
    return {grid, std::move(out)};
}

grid_categorical mixture(const std::vector<double>& weights,
                         const std::vector<grid_categorical>& components) {
    std::vector<const grid_categorical*> ptrs;
    ptrs.reserve(components.size());
    for (const auto& c : components) ptrs.push_back(&c);
    return mixture(weights, ptrs);
}

} // namespace distlab
