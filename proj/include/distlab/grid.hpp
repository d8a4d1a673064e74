#pragma once

#include <cstddef>
#include <vector>

#include "distlab/errors.hpp"

namespace distlab {

// Uniform grid on [0,1] with atoms at i/(m-1); a single atom sits at 0 when
// m = 1. The grid realizes the dominating measure as a counting measure and
// is closed under addition of supports, so convolution stays exact.
struct grid_spec {
    int atom_count = 1;

    grid_spec() = default;
    explicit grid_spec(int m) : atom_count(m) {
        if (m < 1) throw parameter_error("grid_spec: atom_count must be >= 1");
    }

    [[nodiscard]] double atom(int i) const {
        return atom_count == 1 ? 0.0 : static_cast<double>(i) / (atom_count - 1);
    }
    [[nodiscard]] double spacing() const {
        return atom_count == 1 ? 0.0 : 1.0 / (atom_count - 1);
    }
    friend bool operator==(const grid_spec& a, const grid_spec& b) {
        return a.atom_count == b.atom_count;
    }
};

// Categorical distribution over a grid_spec. Immutable after construction;
// construction renormalizes drift in (1e-12, 1e-9] and rejects anything
// worse, so downstream code never sees an invalid mass vector.
class grid_categorical {
  public:
    grid_categorical(grid_spec grid, std::vector<double> probs);

    static grid_categorical dirac(grid_spec grid, int atom_index);

    [[nodiscard]] const grid_spec& grid() const { return grid_; }
    [[nodiscard]] const std::vector<double>& probs() const { return probs_; }
    [[nodiscard]] int atom_count() const { return grid_.atom_count; }
    [[nodiscard]] double prob(int i) const { return probs_[static_cast<std::size_t>(i)]; }

    // Smallest/largest atom index carrying positive mass.
    [[nodiscard]] int support_min() const;
    [[nodiscard]] int support_max() const;

  private:
    grid_spec grid_;
    std::vector<double> probs_;
};

double mean(const grid_categorical& d);

// Triangular discrimination sum_i (f_i-g_i)^2/(f_i+g_i); atoms where both
// masses vanish contribute 0. Range [0,2].
double d_triangle(const grid_categorical& f, const grid_categorical& g);

// Squared Hellinger distance (returns H^2, not H).
double hellinger_sq(const grid_categorical& f, const grid_categorical& g);

// KL divergence; +infinity when f puts mass where g has none.
double kl_div(const grid_categorical& f, const grid_categorical& g);

double tv_dist(const grid_categorical& f, const grid_categorical& g);

// Exact law of the sum of independent draws. Overflow past the top atom with
// mass above 1e-12 signals an environment whose cumulative cost exceeds 1.
grid_categorical convolve(const grid_categorical& f, const grid_categorical& g);

grid_categorical mixture(const std::vector<double>& weights,
                         const std::vector<const grid_categorical*>& components);
grid_categorical mixture(const std::vector<double>& weights,
                         const std::vector<grid_categorical>& components);

inline void require_same_grid(const grid_categorical& f, const grid_categorical& g) {
    if (!(f.grid() == g.grid()))
        throw grid_mismatch_error("distributions live on different grids");
}

} // namespace distlab
