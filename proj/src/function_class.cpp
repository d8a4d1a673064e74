#include "distlab/function_class.hpp"

#include <cmath>
#include <map>

namespace distlab {

namespace {

bool tables_close(const cond_dist_table& a, const cond_dist_table& b, double tol) {
    for (std::size_t x = 0; x < a.size(); ++x)
        for (std::size_t ac = 0; ac < a[x].size(); ++ac)
            for (int i = 0; i < a[x][ac].atom_count(); ++i)
                if (std::abs(a[x][ac].prob(i) - b[x][ac].prob(i)) > tol) return false;
    return true;
}

bool members_close(const dist_member& a, const dist_member& b, double tol) {
    for (std::size_t h = 0; h < a.size(); ++h)
        if (!tables_close(a[h], b[h], tol)) return false;
    return true;
}

} // namespace

markov_policy greedy_policy(const dist_member& member, bool small_return) {
    const int H = static_cast<int>(member.size());
    const int X = static_cast<int>(member.front().size());
    const int A = static_cast<int>(member.front().front().size());
    std::vector<std::vector<int>> actions(static_cast<std::size_t>(H),
                                          std::vector<int>(static_cast<std::size_t>(X), 0));
    for (int h = 0; h < H; ++h)
        for (int x = 0; x < X; ++x) {
            int best = 0;
            double best_mean = mean(member[static_cast<std::size_t>(h)]
                                          [static_cast<std::size_t>(x)][0]);
            for (int a = 1; a < A; ++a) {
                const double m = mean(member[static_cast<std::size_t>(h)]
                                            [static_cast<std::size_t>(x)]
                                            [static_cast<std::size_t>(a)]);
                if (small_return ? m > best_mean : m < best_mean) {
                    best = a;
                    best_mean = m;
                }
            }
            actions[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)] = best;
        }
    return markov_policy::deterministic(H, X, A, actions);
}

dist_function_class build_suffix_class(const tabular_mdp& mdp,
                                       const std::vector<markov_policy>& policy_set,
                                       long size_guard) {
    if (policy_set.empty()) throw parameter_error("build_suffix_class: empty policy set");
    const int H = mdp.horizon();
    const long P = static_cast<long>(policy_set.size());

    // Z_h(x,a) conditions on the step-h action, so a suffix table at step h
    // is determined by the policies chosen for steps h+1..H only. chains
    // therefore range over P^(H-1) digit strings, one digit per step 2..H.
    long chain_count = 1;
    for (int t = 1; t < H; ++t) {
        chain_count *= P;
        if (chain_count > size_guard)
            throw instance_too_large("build_suffix_class: suffix count exceeds the guard");
    }

    // tables[h][key]: Z-table at 0-based step h for the suffix encoded by
    // key in base P (least-significant digit = policy at step h+1).
    std::vector<std::map<long, cond_dist_table>> tables(static_cast<std::size_t>(H));
    const cond_dist_table terminal = mdp.dirac_zero_table();
    tables[static_cast<std::size_t>(H - 1)][0] =
        dist_backup_pi(mdp, H - 1, terminal, policy_set.front());
    long suffix_count = 1;
    for (int h = H - 2; h >= 0; --h) {
        suffix_count *= P;
        for (long key = 0; key < suffix_count; ++key) {
            const int next_pi = static_cast<int>(key % P);
            const long tail = key / P;
            tables[static_cast<std::size_t>(h)][key] =
                dist_backup_pi(mdp, h, tables[static_cast<std::size_t>(h + 1)].at(tail),
                               policy_set[static_cast<std::size_t>(next_pi)]);
        }
    }

    dist_function_class cls;
    cls.grid = mdp.grid();
    cls.num_states = mdp.num_states();
    cls.num_actions = mdp.num_actions();
    cls.horizon = H;

    for (long chain = 0; chain < chain_count; ++chain) {
        // digit t (0-based, t = 0..H-2) is the policy index for step t+2
        // (1-based); the key for layer h drops the first h digits.
        std::vector<int> digits(static_cast<std::size_t>(H - 1), 0);
        long rest = chain;
        for (int t = 0; t < H - 1; ++t) {
            digits[static_cast<std::size_t>(t)] = static_cast<int>(rest % P);
            rest /= P;
        }
        dist_member member;
        member.reserve(static_cast<std::size_t>(H));
        for (int h = 0; h < H; ++h) {
            long key = 0;
            for (int t = H - 2; t >= h; --t) key = key * P + digits[static_cast<std::size_t>(t)];
            member.push_back(tables[static_cast<std::size_t>(h)].at(key));
        }
        bool duplicate = false;
        for (const auto& existing : cls.members)
            if (members_close(existing, member, 1e-12)) {
                duplicate = true;
                break;
            }
        if (!duplicate) cls.members.push_back(std::move(member));
    }
    return cls;
}

bc_check_result check_distributional_bc(const dist_function_class& cls, const tabular_mdp& mdp,
                                        const std::vector<markov_policy>& policy_set,
                                        double tol) {
    const int H = cls.horizon;
    const cond_dist_table terminal = mdp.dirac_zero_table();
    for (int f = 0; f < cls.size(); ++f) {
        for (int p = 0; p < static_cast<int>(policy_set.size()); ++p) {
            for (int h = 0; h < H; ++h) {
                const cond_dist_table& next =
                    (h == H - 1) ? terminal
                                 : cls.members[static_cast<std::size_t>(f)]
                                              [static_cast<std::size_t>(h + 1)];
                const cond_dist_table backup =
                    dist_backup_pi(mdp, h, next, policy_set[static_cast<std::size_t>(p)]);
                bool found = false;
                for (const auto& g : cls.members)
                    if (tables_close(g[static_cast<std::size_t>(h)], backup, tol)) {
                        found = true;
                        break;
                    }
                if (!found) return {false, bc_violation{f, p, h}};
            }
        }
    }
    return {true, std::nullopt};
}

std::optional<int> find_member(const dist_function_class& cls, const dist_member& target,
                               double tol) {
    for (int f = 0; f < cls.size(); ++f)
        if (members_close(cls.members[static_cast<std::size_t>(f)], target, tol)) return f;
    return std::nullopt;
}

} // namespace distlab
