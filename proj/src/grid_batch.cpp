#include "distlab/grid_batch.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace distlab {

grid_categorical random_distribution(grid_spec grid, rng& gen, double keep_prob) {
    const int m = grid.atom_count;
    std::vector<double> w(static_cast<std::size_t>(m), 0.0);
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        if (gen.next_double() < keep_prob) {
            const double v = -std::log(1.0 - gen.next_double());
            w[static_cast<std::size_t>(i)] = v;
            sum += v;
        }
    }
    if (sum == 0.0) {
        w[static_cast<std::size_t>(gen.next_int(m))] = 1.0;
        sum = 1.0;
    }
    for (double& v : w) v /= sum;
    return {grid, std::move(w)};
}

namespace {

struct pair_report {
    double violation = 0.0;
    const char* check = "";
};

void worse(pair_report& r, double slack, const char* name) {
    if (slack > r.violation) {
        r.violation = slack;
        r.check = name;
    }
}

pair_report audit_pair(std::uint64_t seed, long index, int min_atoms, int max_atoms) {
    rng gen = rng(seed).derive({stream::trial, static_cast<std::uint64_t>(index)});
    const int m = min_atoms + gen.next_int(max_atoms - min_atoms + 1);
    const grid_spec grid(m);
    const grid_categorical f = random_distribution(grid, gen);
    const grid_categorical g = random_distribution(grid, gen);

    const double tri = d_triangle(f, g);
    const double h2 = hellinger_sq(f, g);
    const double h = std::sqrt(h2);
    const double tv = tv_dist(f, g);
    const double kl = kl_div(f, g);
    const double mf = mean(f);
    const double mg = mean(g);
    const double gap = std::abs(mf - mg);

    pair_report r;
    worse(r, 2.0 * h2 - tri, "sandwich_lower");
    worse(r, tri - 4.0 * h2, "sandwich_upper");
    worse(r, gap - std::sqrt((mf + mg) * tri), "tri_1");
    worse(r, gap - std::sqrt(4.0 * mg + tri) * std::sqrt(tri), "tri_2");
    worse(r, h2 - tv, "h2_le_tv");
    worse(r, tv - std::sqrt(2.0) * h, "tv_le_sqrt2_h");
    if (std::isfinite(kl)) worse(r, h - std::sqrt(kl), "h_le_sqrt_kl");
    return r;
}

} // namespace

divergence_audit_result divergence_audit(const divergence_audit_config& cfg, par::mode mode) {
    if (cfg.pairs < 0 || cfg.min_atoms < 1 || cfg.max_atoms < cfg.min_atoms)
        throw parameter_error("divergence_audit: invalid configuration");
    std::vector<pair_report> reports(static_cast<std::size_t>(cfg.pairs));
    par::for_each_index(
        static_cast<std::size_t>(cfg.pairs),
        [&](std::size_t i) {
            reports[i] = audit_pair(cfg.seed, static_cast<long>(i), cfg.min_atoms,
                                    cfg.max_atoms);
        },
        mode);

    divergence_audit_result out;
    out.pairs = cfg.pairs;
    for (const auto& r : reports) {
        if (r.violation > cfg.tol) ++out.violations;
        if (r.violation > out.max_violation) {
            out.max_violation = r.violation;
            out.worst_check = r.check;
        }
    }
    return out;
}

} // namespace distlab
