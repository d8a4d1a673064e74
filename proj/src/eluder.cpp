#include "distlab/eluder.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace distlab {

namespace {

constexpr int kMaxDists = 6;
constexpr int kMaxDepth = 8;
constexpr double kTieTol = 1e-12;

// Candidate threshold semantics: AT tests eps' = tau exactly (value > tau,
// prefix <= tau); BELOW tests eps' infinitesimally below tau (value >= tau,
// prefix < tau).
struct candidate {
    double tau;
    bool below;
};

struct search_state {
    const std::vector<std::vector<double>>* e; // [d][f]
    int p = 1;
    candidate cand{0.0, false};
    int best = 0;
};

bool value_ok(double v, const candidate& c) {
    return c.below ? v >= c.tau - kTieTol : v > c.tau;
}

bool prefix_ok(double acc, const candidate& c, int p) {
    const double limit = p == 2 ? c.tau * c.tau : c.tau;
    return c.below ? acc < limit - kTieTol : acc <= limit + kTieTol;
}

void dfs(search_state& st, std::vector<double>& acc, int depth) {
    st.best = std::max(st.best, depth);
    if (depth > kMaxDepth)
        throw instance_too_large("de_dimension: eluder sequence exceeds the depth guard");
    const auto& e = *st.e;
    const int D = static_cast<int>(e.size());
    const int F = static_cast<int>(e.front().size());
    for (int d = 0; d < D; ++d) {
        bool feasible = false;
        for (int f = 0; f < F && !feasible; ++f)
            feasible = value_ok(e[static_cast<std::size_t>(d)][static_cast<std::size_t>(f)],
                                st.cand) &&
                       prefix_ok(acc[static_cast<std::size_t>(f)], st.cand, st.p);
        if (!feasible) continue;
        std::vector<double> next(acc);
        for (int f = 0; f < F; ++f) {
            const double v = e[static_cast<std::size_t>(d)][static_cast<std::size_t>(f)];
            next[static_cast<std::size_t>(f)] += st.p == 2 ? v * v : v;
        }
        dfs(st, next, depth + 1);
    }
}

} // namespace

void eluder_instance::validate() const {
    if (psi.empty() || dists.empty())
        throw parameter_error("eluder_instance: empty function or distribution set");
    const std::size_t s = psi.front().size();
    if (s == 0) throw parameter_error("eluder_instance: empty point set");
    for (const auto& row : psi) {
        if (row.size() != s) throw parameter_error("eluder_instance: ragged psi matrix");
        for (double v : row)
            if (!std::isfinite(v)) throw input_error("eluder_instance: non-finite psi value");
    }
    for (const auto& row : dists) {
        if (row.size() != s) throw parameter_error("eluder_instance: ragged dists matrix");
        double sum = 0.0;
        for (double v : row) {
            if (!(v >= 0.0)) throw weight_error("eluder_instance: negative distribution mass");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw weight_error("eluder_instance: distribution row sums to " +
                               std::to_string(sum));
    }
}

std::vector<std::vector<double>> eluder_instance::abs_expectations() const {
    std::vector<std::vector<double>> e(dists.size(), std::vector<double>(psi.size(), 0.0));
    for (std::size_t d = 0; d < dists.size(); ++d)
        for (std::size_t f = 0; f < psi.size(); ++f) {
            double s = 0.0;
            for (std::size_t i = 0; i < dists[d].size(); ++i) s += dists[d][i] * psi[f][i];
            e[d][f] = std::abs(s);
        }
    return e;
}

double eluder_instance::envelope() const {
    double c = 0.0;
    for (const auto& row : abs_expectations())
        for (double v : row) c = std::max(c, v);
    return c;
}

int de_dimension(const eluder_instance& inst, double eps, int p) {
    inst.validate();
    if (!(eps > 0.0)) throw parameter_error("de_dimension: eps must be > 0");
    if (p != 1 && p != 2) throw parameter_error("de_dimension: p must be 1 or 2");
    if (inst.dist_count() > kMaxDists)
        throw instance_too_large("de_dimension: more than 6 distributions");

    const auto e = inst.abs_expectations();
    std::set<double> achievable;
    for (const auto& row : e)
        for (double v : row)
            if (v > eps + kTieTol) achievable.insert(v);

    std::vector<candidate> candidates;
    candidates.push_back({eps, false});
    for (double v : achievable) candidates.push_back({v, true});

    int best = 0;
    for (const auto& cand : candidates) {
        search_state st;
        st.e = &e;
        st.p = p;
        st.cand = cand;
        std::vector<double> acc(static_cast<std::size_t>(inst.function_count()), 0.0);
        dfs(st, acc, 0);
        best = std::max(best, st.best);
    }
    return best;
}

pigeonhole_result pigeonhole_check(const eluder_instance& inst, const std::vector<int>& f_seq,
                                   const std::vector<int>& d_seq, double beta) {
    inst.validate();
    if (f_seq.size() != d_seq.size() || f_seq.empty())
        throw parameter_error("pigeonhole_check: sequence sizes invalid");
    if (beta < 0.0) throw parameter_error("pigeonhole_check: beta must be >= 0");
    const long k = static_cast<long>(f_seq.size());
    for (long t = 0; t < k; ++t) {
        if (f_seq[static_cast<std::size_t>(t)] < 0 ||
            f_seq[static_cast<std::size_t>(t)] >= inst.function_count() ||
            d_seq[static_cast<std::size_t>(t)] < 0 ||
            d_seq[static_cast<std::size_t>(t)] >= inst.dist_count())
            throw parameter_error("pigeonhole_check: sequence index out of range");
    }
    const auto e = inst.abs_expectations();

    for (long t = 0; t < k; ++t) {
        double prefix = 0.0;
        for (long i = 0; i < t; ++i)
            prefix += e[static_cast<std::size_t>(d_seq[static_cast<std::size_t>(i)])]
                       [static_cast<std::size_t>(f_seq[static_cast<std::size_t>(t)])];
        if (prefix > beta + 1e-12)
            throw parameter_error("pigeonhole_check: precondition violated at k=" +
                                  std::to_string(t + 1));
    }

    pigeonhole_result out;
    for (long t = 0; t < k; ++t)
        out.lhs += e[static_cast<std::size_t>(d_seq[static_cast<std::size_t>(t)])]
                    [static_cast<std::size_t>(f_seq[static_cast<std::size_t>(t)])];

    const double envelope = inst.envelope();
    std::set<double> grid;
    grid.insert(1.0);
    for (const auto& row : e)
        for (double v : row)
            if (v > 0.0) {
                grid.insert(std::min(v, 1.0));
                grid.insert(std::min(v + 1e-9, 1.0));
            }

    double rhs = std::numeric_limits<double>::infinity();
    for (double eps : grid) {
        const int d1 = de_dimension(inst, eps, 1);
        const double term =
            d1 == 0 ? 0.0
                    : d1 * (2.0 * envelope + beta * std::log(envelope / eps));
        rhs = std::min(rhs, term + static_cast<double>(k) * eps);
    }
    out.rhs = rhs;
    out.holds = out.lhs <= out.rhs + 1e-9;
    return out;
}

} // namespace distlab
