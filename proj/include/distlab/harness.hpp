#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "distlab/bandit.hpp"
#include "distlab/serialize.hpp"

namespace distlab {

// ---------------------------------------------------------------------------
// Cost constructions. Each builder produces exact grid-atom costs; the three
// synthetic generators make the experiment suite hermetic, the CSV builders
// ingest real tables (features + label column).
// ---------------------------------------------------------------------------

struct csv_task_spec {
    std::string path;
    std::vector<std::string> feature_columns;
    std::string label_column;
    std::string superclass_column; // superclass construction only
    int num_actions = 100;         // housing price grid
};

// Price prediction: 100 evenly spaced prices in [0.01, 1.0]; cost 1.0 on
// overprediction, otherwise 1.0 - price; grid m = 101.
cb_environment build_housing_env(const csv_task_spec& spec);

// Risk levels 1..8; cost 1.0 on overprediction, otherwise 0.1 (y - yhat);
// grid m = 11.
cb_environment build_insurance_env(const csv_task_spec& spec);

// Class prediction with superclasses; cost 0 / 0.5 / 1; grid m = 3.
cb_environment build_superclass_env(const csv_task_spec& spec);

struct housing_synth_params {
    int contexts = 20;
    int actions = 100;
    std::uint64_t seed = 0;
    double level_lo = 0.55; // range of per-context label levels
    double level_hi = 0.95;
};
cb_environment build_housing_env_synthetic(const housing_synth_params& p);

struct insurance_synth_params {
    int contexts = 20;
    std::uint64_t seed = 0;
};
cb_environment build_insurance_env_synthetic(const insurance_synth_params& p);

struct superclass_synth_params {
    int contexts = 50;
    int classes = 10;
    int superclasses = 5;
    std::uint64_t seed = 0;
};
cb_environment build_superclass_env_synthetic(const superclass_synth_params& p);

// Finite realizable class for the EW oracle: member 0 is the environment's
// own cost table, the rest are the cost tables of decoy environments.
std::shared_ptr<const cond_dist_class> make_cb_class(
    const cb_environment& truth, const std::vector<const cb_environment*>& decoys);

// ---------------------------------------------------------------------------
// Synthetic MDPs.
// ---------------------------------------------------------------------------

// Random valid MDP: per-step costs supported on atoms <= (m-1)/H so every
// return distribution stays on the grid.
tabular_mdp random_mdp(int num_states, int num_actions, int horizon, int atom_count,
                       std::uint64_t seed);

markov_policy random_deterministic_policy(int num_states, int num_actions, int horizon,
                                          rng& gen);

// The fixed 4-state / 2-action / horizon-3 instance used by the RL
// experiment suites; shipped as fixtures/acceptance_mdp.json.
tabular_mdp acceptance_mdp();

// ---------------------------------------------------------------------------
// Experiment orchestration.
// ---------------------------------------------------------------------------

struct experiment_config {
    int schema_version = 1;
    std::string kind; // distcb | squarecb | fastcb | odisco | pdisco | eluder | proptest
    std::vector<std::uint64_t> seeds;
    std::string out_dir = "out";
    json env;       // environment spec
    json algorithm; // algorithm parameters
};

experiment_config parse_config(const json& j);

// "0..9" or "0,4,7".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

struct seed_outcome {
    std::uint64_t seed = 0;
    bool failed = false;
    std::string failure;
    std::map<std::string, double> metrics;
    std::string trace_csv;  // per-seed CSV body
    std::string extra_json; // per-seed JSON/JSONL sidecar (may be empty)
};

struct experiment_outcome {
    std::vector<seed_outcome> seeds;
    std::vector<std::string> metric_order;
    std::map<std::string, std::string> metric_flags;
    [[nodiscard]] bool any_failed() const {
        for (const auto& s : seeds)
            if (s.failed) return true;
        return false;
    }
};

// Runs all seeds (in parallel workers) without touching the filesystem.
experiment_outcome run_experiment(const experiment_config& cfg);

// Writes per-seed CSVs, aggregate.csv and run_meta.json under cfg.out_dir.
// Returns the process exit code (0 ok, 3 when a seed hit algorithm-failure).
int run_experiment_to_files(const experiment_config& cfg);

// mean / standard error (sample sd / sqrt(n)) per metric, in metric_order.
std::string aggregate_csv(const experiment_outcome& outcome);

std::string trace_to_csv(const regret_trace& trace);

} // namespace distlab
