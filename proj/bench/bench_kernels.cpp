// Timing comparison of the serial reference paths against the OpenMP
// kernels: divergence batch audit, confidence-set member scan, and a
// multi-seed CB sweep. Prints one row per kernel with the speedup.

#include <chrono>
#include <cstdio>
#include <functional>

#include "distlab/grid_batch.hpp"
#include "distlab/harness.hpp"
#include "distlab/odisco.hpp"
#include "distlab/parallel.hpp"

using namespace distlab;

namespace {

double time_ms(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const char* name, double serial_ms, double omp_ms) {
    std::printf("%-28s serial %9.1f ms   openmp %9.1f ms   speedup %.2fx\n", name, serial_ms,
                omp_ms, omp_ms > 0 ? serial_ms / omp_ms : 0.0);
}

} // namespace

int main() {
    std::printf("threads available: %d\n\n", par::max_threads());

    {
        divergence_audit_config cfg;
        cfg.pairs = 200000;
        cfg.seed = 11;
        divergence_audit_result rs, rp;
        const double ts = time_ms([&] { rs = divergence_audit(cfg, par::mode::serial); });
        const double tp = time_ms([&] { rp = divergence_audit(cfg, par::mode::openmp); });
        report("divergence_audit", ts, tp);
        if (rs.violations != rp.violations) std::printf("  MISMATCH in audit results!\n");
    }

    {
        const tabular_mdp mdp = acceptance_mdp();
        rng pg = rng(3).derive({stream::generator});
        std::vector<markov_policy> pset{optimal_policy(mdp).policy};
        for (int i = 0; i < 3; ++i)
            pset.push_back(random_deterministic_policy(mdp.num_states(), mdp.num_actions(),
                                                       mdp.horizon(), pg));
        const dist_function_class cls = build_suffix_class(mdp, pset);
        confidence_engine engine(cls, false);
        rl_dataset_counts counts(mdp.num_states(), mdp.num_actions(), mdp.grid().atom_count,
                                 mdp.horizon());
        rng data_rng = rng(5).derive({stream::data});
        const markov_policy roll = markov_policy::uniform(mdp.horizon(), mdp.num_states(),
                                                          mdp.num_actions());
        for (int k = 0; k < 4000; ++k) {
            const auto tuples = sample_trajectory(mdp, roll, data_rng);
            for (int h = 0; h < mdp.horizon(); ++h)
                counts.add(h, tuples[static_cast<std::size_t>(h)]);
        }
        const rng target_root = rng(9).derive({stream::targets});
        std::vector<int> ss, sp;
        const double ts = time_ms([&] {
            for (int rep = 0; rep < 20; ++rep)
                ss = engine.survivors_greedy(counts, 15.0, false, target_root,
                                             par::mode::serial);
        });
        const double tp = time_ms([&] {
            for (int rep = 0; rep < 20; ++rep)
                sp = engine.survivors_greedy(counts, 15.0, false, target_root,
                                             par::mode::openmp);
        });
        report("confidence_set_scan", ts, tp);
        if (ss != sp) std::printf("  MISMATCH in survivor sets!\n");
    }

    {
        json cfg_json{{"schema_version", 1},
                      {"kind", "distcb"},
                      {"seeds", "0..7"},
                      {"env", {{"task", "housing"}, {"contexts", 10}}},
                      {"algorithm",
                       {{"episodes", 2000}, {"class_size", 8}, {"gamma0", 200.0},
                        {"gamma_power", 0.25}}}};
        const experiment_config cfg = parse_config(cfg_json);
        experiment_outcome os, op;
        par::set_global_mode(par::mode::serial);
        const double ts = time_ms([&] { os = run_experiment(cfg); });
        par::set_global_mode(par::mode::openmp);
        const double tp = time_ms([&] { op = run_experiment(cfg); });
        report("cb_seed_sweep", ts, tp);
        if (aggregate_csv(os) != aggregate_csv(op)) std::printf("  MISMATCH in aggregates!\n");
    }

    return 0;
}
