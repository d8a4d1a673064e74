#include "distlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "distlab/eluder.hpp"
#include "distlab/grid_batch.hpp"
#include "distlab/odisco.hpp"
#include "distlab/pdisco.hpp"

namespace distlab {

namespace {

// ---------------------------------------------------------------- CSV input

struct csv_table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] int col(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw config_error("CSV column '" + name + "' not found");
    }
};

csv_table read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    csv_table table;
    std::string line;
    if (!std::getline(in, line)) throw config_error("CSV file " + path + " is empty");
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.header.push_back(cell);
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw config_error("CSV " + path + " line " + std::to_string(line_no) +
                                   ": non-numeric cell '" + cell + "'");
            }
        }
        if (row.size() != table.header.size())
            throw config_error("CSV " + path + " line " + std::to_string(line_no) +
                               ": column count mismatch");
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) throw config_error("CSV file " + path + " has no data rows");
    return table;
}

std::vector<std::vector<double>> extract_features(const csv_table& table,
                                                  const std::vector<std::string>& columns) {
    std::vector<int> idx;
    idx.reserve(columns.size());
    for (const auto& name : columns) idx.push_back(table.col(name));
    std::vector<std::vector<double>> features;
    features.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        std::vector<double> f;
        f.reserve(idx.size() + 1);
        for (int i : idx) f.push_back(row[static_cast<std::size_t>(i)]);
        f.push_back(1.0); // bias
        features.push_back(std::move(f));
    }
    return features;
}

std::vector<double> uniform_probs(int n) {
    return std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
}

// ---------------------------------------------- housing cost construction

// Action j (0-based) is the price (j+1)/100. Cost of playing price a on
// label y: 1.0 when a > y, else 1 - a; all costs are atoms of the m=101
// grid (atom k = k/100).
grid_categorical housing_cost_dist(const std::vector<double>& label_idx_probs, int action_j) {
    const grid_spec grid(101);
    std::vector<double> probs(101, 0.0);
    double p_over = 0.0;
    for (int y = 0; y <= 100; ++y) {
        const double py = label_idx_probs[static_cast<std::size_t>(y)];
        if (py == 0.0) continue;
        if (y <= action_j) // price (j+1)/100 > label y/100
            p_over += py;
        else
            probs[static_cast<std::size_t>(100 - (action_j + 1))] += py;
    }
    probs[100] += p_over;
    return {grid, std::move(probs)};
}

} // namespace

cb_environment build_housing_env(const csv_task_spec& spec) {
    if (spec.num_actions != 100)
        throw config_error("housing construction uses 100 evenly spaced prices");
    const csv_table table = read_csv(spec.path);
    const int label_col = table.col(spec.label_column);
    const grid_spec grid(101);
    std::vector<std::vector<grid_categorical>> cost;
    cost.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        const double y = row[static_cast<std::size_t>(label_col)];
        if (!(y >= 0.0 && y <= 1.0))
            throw input_error("housing label out of range [0,1]: " + std::to_string(y));
        std::vector<grid_categorical> per_action;
        per_action.reserve(100);
        for (int j = 0; j < 100; ++j) {
            const double a = (j + 1) / 100.0;
            const int atom = a > y ? 100 : 100 - (j + 1);
            per_action.push_back(grid_categorical::dirac(grid, atom));
        }
        cost.push_back(std::move(per_action));
    }
    return cb_environment::build(grid, uniform_probs(static_cast<int>(table.rows.size())),
                                 std::move(cost),
                                 extract_features(table, spec.feature_columns));
}

cb_environment build_insurance_env(const csv_task_spec& spec) {
    const csv_table table = read_csv(spec.path);
    const int label_col = table.col(spec.label_column);
    const grid_spec grid(11);
    std::vector<std::vector<grid_categorical>> cost;
    cost.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        const double yd = row[static_cast<std::size_t>(label_col)];
        const int y = static_cast<int>(yd);
        if (yd != y || y < 1 || y > 8)
            throw input_error("insurance label must be an integer in [1,8]");
        std::vector<grid_categorical> per_action;
        per_action.reserve(8);
        for (int yhat = 1; yhat <= 8; ++yhat) {
            const int atom = yhat > y ? 10 : y - yhat; // cost 0.1 (y - yhat)
            per_action.push_back(grid_categorical::dirac(grid, atom));
        }
        cost.push_back(std::move(per_action));
    }
    return cb_environment::build(grid, uniform_probs(static_cast<int>(table.rows.size())),
                                 std::move(cost),
                                 extract_features(table, spec.feature_columns));
}

cb_environment build_superclass_env(const csv_task_spec& spec) {
    const csv_table table = read_csv(spec.path);
    const int class_col = table.col(spec.label_column);
    const int super_col = table.col(spec.superclass_column);
    int num_classes = 0;
    std::map<int, int> class_to_super;
    for (const auto& row : table.rows) {
        const int c = static_cast<int>(row[static_cast<std::size_t>(class_col)]);
        const int s = static_cast<int>(row[static_cast<std::size_t>(super_col)]);
        if (c < 0) throw input_error("superclass construction: negative class id");
        num_classes = std::max(num_classes, c + 1);
        auto [it, inserted] = class_to_super.emplace(c, s);
        if (!inserted && it->second != s)
            throw input_error("inconsistent class to superclass map for class " +
                              std::to_string(c));
    }
    const grid_spec grid(3);
    std::vector<std::vector<grid_categorical>> cost;
    cost.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        const int c = static_cast<int>(row[static_cast<std::size_t>(class_col)]);
        const int s = static_cast<int>(row[static_cast<std::size_t>(super_col)]);
        std::vector<grid_categorical> per_action;
        per_action.reserve(static_cast<std::size_t>(num_classes));
        for (int a = 0; a < num_classes; ++a) {
            int atom = 2;
            if (a == c)
                atom = 0;
            else if (class_to_super.count(a) && class_to_super.at(a) == s)
                atom = 1;
            per_action.push_back(grid_categorical::dirac(grid, atom));
        }
        cost.push_back(std::move(per_action));
    }
    return cb_environment::build(grid, uniform_probs(static_cast<int>(table.rows.size())),
                                 std::move(cost),
                                 extract_features(table, spec.feature_columns));
}

cb_environment build_housing_env_synthetic(const housing_synth_params& p) {
    if (p.actions != 100)
        throw config_error("housing construction uses 100 evenly spaced prices");
    rng gen = rng(p.seed).derive({stream::generator});
    const grid_spec grid(101);
    std::vector<std::vector<grid_categorical>> cost;
    std::vector<std::vector<double>> features;
    cost.reserve(static_cast<std::size_t>(p.contexts));
    for (int x = 0; x < p.contexts; ++x) {
        // Per-context label level with a three-point spread around it.
        const double frac = p.contexts == 1 ? 0.5 : static_cast<double>(x) / (p.contexts - 1);
        const double level = p.level_lo + frac * (p.level_hi - p.level_lo) +
                             0.02 * (gen.next_double() - 0.5);
        const int center = std::clamp(static_cast<int>(std::lround(level * 100.0)), 6, 95);
        std::vector<double> label_probs(101, 0.0);
        label_probs[static_cast<std::size_t>(center - 5)] = 0.25;
        label_probs[static_cast<std::size_t>(center)] = 0.5;
        label_probs[static_cast<std::size_t>(center + 5)] = 0.25;
        std::vector<grid_categorical> per_action;
        per_action.reserve(100);
        for (int j = 0; j < 100; ++j) per_action.push_back(housing_cost_dist(label_probs, j));
        cost.push_back(std::move(per_action));
        std::vector<double> onehot(static_cast<std::size_t>(p.contexts) + 1, 0.0);
        onehot[static_cast<std::size_t>(x)] = 1.0;
        onehot.back() = 1.0;
        features.push_back(std::move(onehot));
    }
    return cb_environment::build(grid, uniform_probs(p.contexts), std::move(cost),
                                 std::move(features));
}

cb_environment build_insurance_env_synthetic(const insurance_synth_params& p) {
    rng gen = rng(p.seed).derive({stream::generator});
    const grid_spec grid(11);
    std::vector<std::vector<grid_categorical>> cost;
    std::vector<std::vector<double>> features;
    for (int x = 0; x < p.contexts; ++x) {
        const int level = 1 + (x + gen.next_int(2)) % 8;
        std::vector<double> label_probs(9, 0.0); // index 1..8
        label_probs[static_cast<std::size_t>(level)] = 0.6;
        label_probs[static_cast<std::size_t>(std::max(1, level - 1))] += 0.2;
        label_probs[static_cast<std::size_t>(std::min(8, level + 1))] += 0.2;
        std::vector<grid_categorical> per_action;
        for (int yhat = 1; yhat <= 8; ++yhat) {
            std::vector<double> probs(11, 0.0);
            for (int y = 1; y <= 8; ++y) {
                const double py = label_probs[static_cast<std::size_t>(y)];
                if (py == 0.0) continue;
                const int atom = yhat > y ? 10 : y - yhat;
                probs[static_cast<std::size_t>(atom)] += py;
            }
            per_action.emplace_back(grid, std::move(probs));
        }
        cost.push_back(std::move(per_action));
        std::vector<double> onehot(static_cast<std::size_t>(p.contexts) + 1, 0.0);
        onehot[static_cast<std::size_t>(x)] = 1.0;
        onehot.back() = 1.0;
        features.push_back(std::move(onehot));
    }
    return cb_environment::build(grid, uniform_probs(p.contexts), std::move(cost),
                                 std::move(features));
}

cb_environment build_superclass_env_synthetic(const superclass_synth_params& p) {
    if (p.classes < 1 || p.superclasses < 1 || p.superclasses > p.classes)
        throw config_error("superclass synthetic: invalid class counts");
    rng gen = rng(p.seed).derive({stream::generator});
    const grid_spec grid(3);
    std::vector<std::vector<grid_categorical>> cost;
    std::vector<std::vector<double>> features;
    for (int x = 0; x < p.contexts; ++x) {
        const int cls = gen.next_int(p.classes);
        const int super = cls % p.superclasses;
        std::vector<grid_categorical> per_action;
        per_action.reserve(static_cast<std::size_t>(p.classes));
        for (int a = 0; a < p.classes; ++a) {
            int atom = 2;
            if (a == cls)
                atom = 0;
            else if (a % p.superclasses == super)
                atom = 1;
            per_action.push_back(grid_categorical::dirac(grid, atom));
        }
        cost.push_back(std::move(per_action));
        std::vector<double> onehot(static_cast<std::size_t>(p.contexts) + 1, 0.0);
        onehot[static_cast<std::size_t>(x)] = 1.0;
        onehot.back() = 1.0;
        features.push_back(std::move(onehot));
    }
    return cb_environment::build(grid, uniform_probs(p.contexts), std::move(cost),
                                 std::move(features));
}

std::shared_ptr<const cond_dist_class> make_cb_class(
    const cb_environment& truth, const std::vector<const cb_environment*>& decoys) {
    std::vector<cond_key> keys;
    keys.reserve(static_cast<std::size_t>(truth.num_contexts * truth.num_actions));
    for (int x = 0; x < truth.num_contexts; ++x)
        for (int a = 0; a < truth.num_actions; ++a) keys.emplace_back(x, a);
    std::vector<std::vector<grid_categorical>> members;
    auto flatten = [&](const cb_environment& env) {
        if (env.num_contexts != truth.num_contexts || env.num_actions != truth.num_actions ||
            !(env.grid == truth.grid))
            throw parameter_error("make_cb_class: decoy shape mismatch");
        std::vector<grid_categorical> tables;
        tables.reserve(keys.size());
        for (const auto& [x, a] : keys)
            tables.push_back(env.cost[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)]);
        return tables;
    };
    members.push_back(flatten(truth));
    for (const auto* d : decoys) members.push_back(flatten(*d));
    return std::make_shared<const cond_dist_class>(std::move(keys), std::move(members));
}

tabular_mdp random_mdp(int num_states, int num_actions, int horizon, int atom_count,
                       std::uint64_t seed) {
    if (atom_count < horizon + 1)
        throw parameter_error("random_mdp: grid too coarse for the horizon");
    rng gen = rng(seed).derive({stream::generator});
    const int max_step_atom = (atom_count - 1) / horizon;
    const grid_spec grid(atom_count);
    std::vector<std::vector<std::vector<std::vector<double>>>> transitions;
    std::vector<std::vector<std::vector<grid_categorical>>> costs;
    for (int h = 0; h < horizon; ++h) {
        std::vector<std::vector<std::vector<double>>> ph;
        std::vector<std::vector<grid_categorical>> ch;
        for (int x = 0; x < num_states; ++x) {
            std::vector<std::vector<double>> px;
            std::vector<grid_categorical> cx;
            for (int a = 0; a < num_actions; ++a) {
                std::vector<double> row(static_cast<std::size_t>(num_states));
                double s = 0.0;
                for (int xn = 0; xn < num_states; ++xn) {
                    row[static_cast<std::size_t>(xn)] = -std::log(1.0 - gen.next_double());
                    s += row[static_cast<std::size_t>(xn)];
                }
                for (double& v : row) v /= s;
                px.push_back(std::move(row));
                // Two-atom cost within the per-step budget.
                const int lo = gen.next_int(max_step_atom + 1);
                const int hi = gen.next_int(max_step_atom + 1);
                std::vector<double> probs(static_cast<std::size_t>(atom_count), 0.0);
                if (lo == hi) {
                    probs[static_cast<std::size_t>(lo)] = 1.0;
                } else {
                    const double p = 0.1 + 0.8 * gen.next_double();
                    probs[static_cast<std::size_t>(lo)] += p;
                    probs[static_cast<std::size_t>(hi)] += 1.0 - p;
                }
                cx.emplace_back(grid, std::move(probs));
            }
            ph.push_back(std::move(px));
            ch.push_back(std::move(cx));
        }
        transitions.push_back(std::move(ph));
        costs.push_back(std::move(ch));
    }
    return {num_states, num_actions, horizon, 0, grid, std::move(transitions),
            std::move(costs)};
}

markov_policy random_deterministic_policy(int num_states, int num_actions, int horizon,
                                          rng& gen) {
    std::vector<std::vector<int>> actions(static_cast<std::size_t>(horizon),
                                          std::vector<int>(static_cast<std::size_t>(num_states)));
    for (int h = 0; h < horizon; ++h)
        for (int x = 0; x < num_states; ++x)
            actions[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)] =
                gen.next_int(num_actions);
    return markov_policy::deterministic(horizon, num_states, num_actions, actions);
}

tabular_mdp acceptance_mdp() {
    // 4 states (0 start, 1 good, 2 middling, 3 bad), 2 actions, horizon 3,
    // 13-atom grid; per-step costs live on atoms 0..4 so 3 steps stay on
    // the grid.
    const int X = 4, A = 2, H = 3, M = 13;
    const grid_spec grid(M);
    auto dist = [&](std::initializer_list<std::pair<int, double>> masses) {
        std::vector<double> p(static_cast<std::size_t>(M), 0.0);
        for (const auto& [atom, mass] : masses) p[static_cast<std::size_t>(atom)] += mass;
        return grid_categorical(grid, std::move(p));
    };
    auto row = [&](std::initializer_list<double> v) { return std::vector<double>(v); };

    std::vector<std::vector<std::vector<std::vector<double>>>> P(
        static_cast<std::size_t>(H),
        std::vector<std::vector<std::vector<double>>>(
            static_cast<std::size_t>(X), std::vector<std::vector<double>>(
                                             static_cast<std::size_t>(A))));
    std::vector<std::vector<std::vector<grid_categorical>>> C(
        static_cast<std::size_t>(H),
        std::vector<std::vector<grid_categorical>>(static_cast<std::size_t>(X)));

    for (int h = 0; h < H; ++h)
        for (int x = 0; x < X; ++x) {
            auto& prow = P[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)];
            auto& crow = C[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)];
            switch (x) {
            case 0: // start: safe action drifts good, risky action gambles
                prow[0] = row({0.0, 0.8, 0.2, 0.0});
                prow[1] = row({0.0, 0.3, 0.3, 0.4});
                crow = {dist({{0, 0.7}, {1, 0.3}}), dist({{0, 0.5}, {2, 0.5}})};
                break;
            case 1: // good: cheap to stay
                prow[0] = row({0.0, 0.9, 0.1, 0.0});
                prow[1] = row({0.0, 0.5, 0.5, 0.0});
                crow = {dist({{0, 1.0}}), dist({{0, 0.6}, {3, 0.4}})};
                break;
            case 2: // middling
                prow[0] = row({0.0, 0.3, 0.5, 0.2});
                prow[1] = row({0.0, 0.1, 0.4, 0.5});
                crow = {dist({{1, 0.7}, {2, 0.3}}), dist({{0, 0.4}, {4, 0.6}})};
                break;
            default: // bad: expensive, hard to leave
                prow[0] = row({0.0, 0.0, 0.3, 0.7});
                prow[1] = row({0.0, 0.0, 0.0, 1.0});
                crow = {dist({{2, 0.5}, {3, 0.5}}), dist({{4, 1.0}})};
                break;
            }
        }
    return {X, A, H, 0, grid, std::move(P), std::move(C)};
}

// --------------------------------------------------------------- experiments

experiment_config parse_config(const json& j) {
    experiment_config cfg;
    if (!j.is_object()) throw config_error("config must be a JSON object");
    if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer())
        throw config_error("config needs integer schema_version");
    cfg.schema_version = j.at("schema_version").get<int>();
    if (cfg.schema_version != 1)
        throw config_error("unsupported schema_version " +
                           std::to_string(cfg.schema_version));
    if (!j.contains("kind") || !j.at("kind").is_string())
        throw config_error("config needs string field kind");
    cfg.kind = j.at("kind").get<std::string>();
    static const std::set<std::string> kinds = {"distcb", "squarecb", "fastcb", "odisco",
                                                "pdisco", "eluder",   "proptest"};
    if (!kinds.count(cfg.kind)) throw config_error("unknown experiment kind " + cfg.kind);
    if (j.contains("seeds")) {
        if (j.at("seeds").is_string())
            cfg.seeds = parse_seed_list(j.at("seeds").get<std::string>());
        else
            cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    } else {
        cfg.seeds = {0};
    }
    if (cfg.seeds.empty()) throw config_error("config needs at least one seed");
    std::set<std::uint64_t> uniq(cfg.seeds.begin(), cfg.seeds.end());
    if (uniq.size() != cfg.seeds.size()) throw config_error("seeds must be distinct");
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    cfg.env = j.value("env", json::object());
    cfg.algorithm = j.value("algorithm", json::object());
    return cfg;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    const auto range_pos = text.find("..");
    if (range_pos != std::string::npos) {
        const std::uint64_t lo = std::stoull(text.substr(0, range_pos));
        const std::uint64_t hi = std::stoull(text.substr(range_pos + 2));
        if (hi < lo) throw config_error("seed range is empty: " + text);
        for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        return seeds;
    }
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        seeds.push_back(std::stoull(tok));
    }
    if (seeds.empty()) throw config_error("empty seed list: " + text);
    return seeds;
}

std::string trace_to_csv(const regret_trace& trace) {
    std::string out = "episode,action,cost,inst_regret,cum_regret,c_star_running\n";
    for (long k = 0; k < trace.episodes(); ++k) {
        const auto i = static_cast<std::size_t>(k);
        out += std::to_string(k + 1);
        out += ',';
        out += std::to_string(trace.action[i]);
        out += ',';
        out += format_double(trace.cost[i]);
        out += ',';
        out += format_double(trace.inst_regret[i]);
        out += ',';
        out += format_double(trace.cum_regret[i]);
        out += ',';
        out += format_double(trace.c_star_running[i]);
        out += '\n';
    }
    return out;
}

namespace {

cb_environment build_cb_env_from_config(const json& env, std::uint64_t env_seed) {
    const std::string task = env.value("task", "housing");
    if (env.contains("csv")) {
        csv_task_spec spec;
        const json& c = env.at("csv");
        spec.path = c.at("path").get<std::string>();
        spec.feature_columns = c.value("feature_columns", std::vector<std::string>{});
        spec.label_column = c.value("label_column", std::string("label"));
        spec.superclass_column = c.value("superclass_column", std::string("superclass"));
        spec.num_actions = c.value("num_actions", 100);
        if (task == "housing") return build_housing_env(spec);
        if (task == "insurance") return build_insurance_env(spec);
        if (task == "superclass") return build_superclass_env(spec);
        throw config_error("unknown CB task " + task);
    }
    const std::uint64_t seed = env.value("seed", env_seed);
    if (task == "housing") {
        housing_synth_params p;
        p.contexts = env.value("contexts", 20);
        p.seed = seed;
        p.level_lo = env.value("level_lo", 0.55);
        p.level_hi = env.value("level_hi", 0.95);
        return build_housing_env_synthetic(p);
    }
    if (task == "insurance") {
        insurance_synth_params p;
        p.contexts = env.value("contexts", 20);
        p.seed = seed;
        return build_insurance_env_synthetic(p);
    }
    if (task == "superclass") {
        superclass_synth_params p;
        p.contexts = env.value("contexts", 50);
        p.classes = env.value("classes", 10);
        p.superclasses = env.value("superclasses", 5);
        p.seed = seed;
        return build_superclass_env_synthetic(p);
    }
    throw config_error("unknown CB task " + task);
}

tabular_mdp build_mdp_from_config(const json& env) {
    if (!env.contains("mdp") || env.at("mdp").is_string()) {
        const std::string name = env.contains("mdp") ? env.at("mdp").get<std::string>()
                                                     : std::string("acceptance");
        if (name == "acceptance") return acceptance_mdp();
        // Anything else is a fixture path.
        return tabular_mdp_from_json(load_json_file(name));
    }
    const json& m = env.at("mdp");
    if (m.contains("fixture")) return tabular_mdp_from_json(load_json_file(m.at("fixture")));
    if (m.contains("random")) {
        const json& r = m.at("random");
        return random_mdp(r.value("X", 4), r.value("A", 2), r.value("H", 3), r.value("m", 13),
                          r.value("seed", 0));
    }
    return tabular_mdp_from_json(m);
}

std::vector<markov_policy> policy_set_for(const tabular_mdp& mdp, int count,
                                          std::uint64_t seed) {
    std::vector<markov_policy> set;
    set.push_back(optimal_policy(mdp).policy);
    rng gen = rng(seed).derive({stream::generator, 0x9047ULL});
    while (static_cast<int>(set.size()) < count)
        set.push_back(
            random_deterministic_policy(mdp.num_states(), mdp.num_actions(), mdp.horizon(), gen));
    return set;
}

// Seed-independent state shared by all CB seed runs: the environment and,
// for the EW oracle, the finite class (truth plus decoys).
struct cb_shared_state {
    cb_environment env;
    std::string oracle_kind;
    std::shared_ptr<const cond_dist_class> cls;
};

cb_shared_state build_cb_shared(const experiment_config& cfg) {
    cb_shared_state shared;
    shared.env = build_cb_env_from_config(cfg.env, /*env_seed=*/1);
    const bool featurized = cfg.env.contains("csv");
    shared.oracle_kind = cfg.algorithm.value("oracle", std::string());
    if (shared.oracle_kind.empty()) {
        if (cfg.kind == "distcb")
            shared.oracle_kind = featurized ? "softmax" : "ew";
        else if (cfg.kind == "squarecb")
            shared.oracle_kind = featurized ? "linear_mean" : "tabular_mean";
        else
            shared.oracle_kind = featurized ? "linear_logloss" : "tabular_logloss";
    }
    if (shared.oracle_kind == "ew") {
        const int class_size = cfg.algorithm.value("class_size", 16);
        const std::uint64_t class_seed = cfg.algorithm.value("class_seed", 1000);
        std::vector<cb_environment> decoy_envs;
        std::vector<const cb_environment*> decoys;
        for (int i = 1; i < class_size; ++i) {
            json env_json = cfg.env;
            env_json["seed"] = class_seed + static_cast<std::uint64_t>(i);
            decoy_envs.push_back(build_cb_env_from_config(env_json, class_seed + i));
        }
        for (const auto& e : decoy_envs) decoys.push_back(&e);
        shared.cls = make_cb_class(shared.env, decoys);
    }
    return shared;
}

seed_outcome run_cb_seed(const experiment_config& cfg, std::uint64_t seed,
                         const cb_shared_state& shared) {
    seed_outcome out;
    out.seed = seed;
    const json& alg = cfg.algorithm;
    const long episodes = alg.value("episodes", 1000L);
    const int batch = alg.value("batch", 1);
    const double delta = alg.value("delta", 0.1);
    if (episodes < 0 || batch < 1) throw config_error("invalid episodes/batch");
    if (!(delta > 0.0 && delta < 1.0)) throw config_error("delta must be in (0,1)");

    const cb_environment& env = shared.env;
    const std::string& oracle_kind = shared.oracle_kind;
    const int class_size = alg.value("class_size", 16);

    std::unique_ptr<cb_mean_oracle> oracle;
    if (oracle_kind == "ew") {
        oracle = std::make_unique<ew_cost_oracle>(shared.cls, env.num_actions);
    } else if (oracle_kind == "softmax") {
        oracle = std::make_unique<softmax_dist_oracle>(&env, alg.value("oracle_step", 0.5));
    } else if (oracle_kind == "tabular_mean") {
        oracle = std::make_unique<tabular_mean_oracle>(env.num_contexts, env.num_actions,
                                                       alg.value("oracle_init", 0.5));
    } else if (oracle_kind == "tabular_logloss") {
        oracle = std::make_unique<tabular_logloss_oracle>(env.num_contexts, env.num_actions,
                                                          alg.value("oracle_step", 0.5));
    } else if (oracle_kind == "linear_mean") {
        oracle = std::make_unique<linear_mean_oracle>(&env, alg.value("oracle_step", 0.1));
    } else if (oracle_kind == "linear_logloss") {
        oracle = std::make_unique<linear_logloss_oracle>(&env, alg.value("oracle_step", 0.1));
    } else {
        throw config_error("unknown oracle kind " + oracle_kind);
    }

    gamma_schedule schedule{};
    const std::string gamma_mode = alg.value("gamma_mode", std::string("schedule"));
    if (gamma_mode == "theorem") {
        if (oracle_kind != "ew")
            throw config_error("theorem gamma mode needs the ew oracle (known Regret_log)");
        double c_star_rate = 0.0;
        for (int x = 0; x < env.num_contexts; ++x)
            c_star_rate += env.context_probs[static_cast<std::size_t>(x)] *
                           env.best_mean[static_cast<std::size_t>(x)];
        schedule = gamma_schedule::constant(
            gamma_theorem(env.num_actions, c_star_rate * static_cast<double>(episodes),
                          std::log(static_cast<double>(class_size)), delta));
    } else if (gamma_mode == "schedule") {
        const double g0 = alg.value("gamma0", 2.0 * env.num_actions);
        const double p = alg.value("gamma_power", 0.0);
        if (cfg.kind != "squarecb" && g0 < 2.0 * env.num_actions)
            throw config_error("gamma0 must be >= 2A for ReIGW-based runs");
        if (p < 0.0) throw config_error("gamma_power must be >= 0");
        schedule = gamma_schedule::power(g0, p);
    } else {
        throw config_error("unknown gamma_mode " + gamma_mode);
    }

    regret_trace trace;
    if (cfg.kind == "distcb")
        trace = run_distcb(env, *oracle, schedule, episodes, seed, batch);
    else if (cfg.kind == "squarecb")
        trace = run_squarecb(env, *oracle, schedule, episodes, seed, batch);
    else
        trace = run_fastcb(env, *oracle, schedule, episodes, seed, batch);

    out.trace_csv = trace_to_csv(trace);
    out.metrics["avg_cost_all"] = trace.average_cost();
    out.metrics["avg_cost_last100"] = trace.average_cost_last(100);
    out.metrics["final_cum_regret"] = trace.final_cum_regret();
    return out;
}

seed_outcome run_odisco_seed(const experiment_config& cfg, std::uint64_t seed,
                             const tabular_mdp& mdp, const dist_function_class& cls) {
    seed_outcome out;
    out.seed = seed;
    const json& alg = cfg.algorithm;
    odisco_options opts;
    opts.episodes = alg.value("episodes", 500L);
    const double delta = alg.value("delta", 0.1);
    opts.beta = alg.value("beta", odisco_default_beta(mdp.horizon(), opts.episodes, cls.size(),
                                                      delta));
    opts.uae = alg.value("uae", false);
    opts.small_return = alg.value("small_return", false);
    opts.exact_targets = alg.value("exact", false);
    opts.seed = seed;

    const odisco_result res = run_odisco(mdp, cls, opts);

    std::string jsonl;
    regret_trace trace;
    for (std::size_t k = 0; k < res.episodes.size(); ++k) {
        const auto& ep = res.episodes[k];
        json line{{"episode", k + 1},
                  {"member", ep.chosen_member},
                  {"value", ep.policy_value},
                  {"optimism_gap", ep.optimistic_value - res.v_star},
                  {"survivors", ep.survivor_count}};
        jsonl += line.dump();
        jsonl += '\n';
        const double inst = opts.small_return ? res.v_star - ep.policy_value
                                              : ep.policy_value - res.v_star;
        trace.add(ep.chosen_member, ep.policy_value, inst, res.v_star);
    }
    out.extra_json = jsonl;
    out.trace_csv = trace_to_csv(trace);
    out.metrics["mixture_value"] = res.mixture_value;
    out.metrics["v_star"] = res.v_star;
    out.metrics["mixture_suboptimality"] = opts.small_return
                                               ? res.v_star - res.mixture_value
                                               : res.mixture_value - res.v_star;
    out.metrics["final_cum_regret"] = res.cum_regret.empty() ? 0.0 : res.cum_regret.back();
    long contained = 0;
    for (const auto& ep : res.episodes) contained += ep.truth_survives ? 1 : 0;
    out.metrics["containment_rate"] =
        res.episodes.empty() ? 0.0
                             : static_cast<double>(contained) /
                                   static_cast<double>(res.episodes.size());
    return out;
}

seed_outcome run_pdisco_seed(const experiment_config& cfg, std::uint64_t seed,
                             const tabular_mdp& mdp, const dist_function_class& cls,
                             const std::vector<markov_policy>& policies) {
    seed_outcome out;
    out.seed = seed;
    const json& alg = cfg.algorithm;
    const long n = alg.value("n_samples", 2000L);
    const double delta = alg.value("delta", 0.1);

    std::vector<real_table> nu;
    const std::string nu_kind = alg.value("nu", std::string("occupancy_mix"));
    if (nu_kind == "uniform") {
        nu.assign(static_cast<std::size_t>(mdp.horizon()),
                  real_table(static_cast<std::size_t>(mdp.num_states()),
                             std::vector<double>(static_cast<std::size_t>(mdp.num_actions()),
                                                 1.0 / (mdp.num_states() * mdp.num_actions()))));
    } else if (nu_kind == "occupancy_mix") {
        nu.assign(static_cast<std::size_t>(mdp.horizon()),
                  real_table(static_cast<std::size_t>(mdp.num_states()),
                             std::vector<double>(static_cast<std::size_t>(mdp.num_actions()),
                                                 0.0)));
        for (const auto& pi : policies) {
            const auto occ = occupancy(mdp, pi);
            for (int h = 0; h < mdp.horizon(); ++h)
                for (int x = 0; x < mdp.num_states(); ++x)
                    for (int a = 0; a < mdp.num_actions(); ++a)
                        nu[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                          [static_cast<std::size_t>(a)] +=
                            occ[static_cast<std::size_t>(h)][static_cast<std::size_t>(x)]
                               [static_cast<std::size_t>(a)] /
                            static_cast<double>(policies.size());
        }
    } else {
        throw config_error("unknown nu kind " + nu_kind);
    }

    const offline_dataset data = generate_offline_data(mdp, nu, n, seed);
    pdisco_options opts;
    opts.beta = alg.value("beta", pdisco_default_beta(mdp.horizon(),
                                                      static_cast<int>(policies.size()),
                                                      cls.size(), delta));
    opts.small_return = alg.value("small_return", false);
    opts.exact_targets = alg.value("exact", false);
    opts.seed = seed;
    opts.mode = par::mode::serial; // seeds already run in parallel

    const pdisco_result res = run_pdisco(mdp, data, cls, policies, opts);

    const double chosen_value =
        res.per_policy[static_cast<std::size_t>(res.chosen_policy)].exact_value;
    double best_value = res.per_policy.front().exact_value;
    for (const auto& r : res.per_policy)
        best_value = opts.small_return ? std::max(best_value, r.exact_value)
                                       : std::min(best_value, r.exact_value);

    json report;
    report["chosen_policy"] = res.chosen_policy;
    report["beta"] = opts.beta;
    json per_policy = json::array();
    for (std::size_t p = 0; p < res.per_policy.size(); ++p) {
        const auto& r = res.per_policy[p];
        const double bound =
            std::isfinite(r.coverage)
                ? offline_pac_bound(r.coverage, r.exact_value, mdp.horizon(), n, opts.beta)
                : std::numeric_limits<double>::infinity();
        const double subopt = opts.small_return ? r.exact_value - chosen_value
                                                : chosen_value - r.exact_value;
        per_policy.push_back(json{{"policy", p},
                                  {"pessimistic_value", r.pessimistic_value},
                                  {"survivors", r.survivor_count},
                                  {"exact_value", r.exact_value},
                                  {"coverage", std::isfinite(r.coverage) ? json(r.coverage)
                                                                         : json("inf")},
                                  {"bound", std::isfinite(bound) ? json(bound) : json("inf")},
                                  {"bound_holds", subopt <= bound + 1e-9}});
    }
    report["per_policy"] = std::move(per_policy);
    out.extra_json = report.dump(2) + "\n";
    out.metrics["chosen_value"] = chosen_value;
    out.metrics["best_value"] = best_value;
    out.metrics["suboptimality"] =
        opts.small_return ? best_value - chosen_value : chosen_value - best_value;
    return out;
}

seed_outcome run_eluder_seed(const experiment_config& cfg, std::uint64_t seed) {
    seed_outcome out;
    out.seed = seed;
    eluder_instance inst;
    if (cfg.env.contains("instance") && cfg.env.at("instance").is_string())
        inst = eluder_instance_from_json(load_json_file(cfg.env.at("instance")));
    else if (cfg.env.contains("instance"))
        inst = eluder_instance_from_json(cfg.env.at("instance"));
    else
        throw config_error("eluder experiment needs env.instance");
    const std::vector<double> eps_list =
        cfg.algorithm.value("eps", std::vector<double>{0.1, 0.3, 0.6});
    const std::vector<int> p_list = cfg.algorithm.value("p", std::vector<int>{1, 2});
    std::string csv = "eps,p,de\n";
    for (double eps : eps_list)
        for (int p : p_list) {
            const int de = de_dimension(inst, eps, p);
            csv += format_double(eps) + "," + std::to_string(p) + "," + std::to_string(de) +
                   "\n";
            out.metrics["de_p" + std::to_string(p) + "_eps" + format_double(eps)] = de;
        }
    out.trace_csv = csv;
    if (cfg.algorithm.contains("pigeonhole")) {
        const json& ph = cfg.algorithm.at("pigeonhole");
        const auto res = pigeonhole_check(inst, ph.at("f_seq").get<std::vector<int>>(),
                                          ph.at("d_seq").get<std::vector<int>>(),
                                          ph.at("beta").get<double>());
        out.metrics["pigeonhole_lhs"] = res.lhs;
        out.metrics["pigeonhole_rhs"] = res.rhs;
        out.metrics["pigeonhole_holds"] = res.holds ? 1.0 : 0.0;
        out.extra_json = json{{"lhs", res.lhs}, {"rhs", res.rhs}, {"holds", res.holds}}.dump(2) +
                         "\n";
    }
    return out;
}

seed_outcome run_proptest_seed(const experiment_config& cfg, std::uint64_t seed) {
    seed_outcome out;
    out.seed = seed;
    divergence_audit_config audit;
    audit.pairs = cfg.algorithm.value("pairs", 10000L);
    audit.min_atoms = cfg.algorithm.value("min_atoms", 2);
    audit.max_atoms = cfg.algorithm.value("max_atoms", 51);
    audit.tol = cfg.algorithm.value("tol", 1e-9);
    audit.seed = seed;
    const auto res = divergence_audit(audit, par::mode::serial);
    out.metrics["pairs"] = static_cast<double>(res.pairs);
    out.metrics["violations"] = static_cast<double>(res.violations);
    out.metrics["max_violation"] = res.max_violation;
    out.trace_csv = "pairs,violations,max_violation,worst_check\n" + std::to_string(res.pairs) +
                    "," + std::to_string(res.violations) + "," +
                    format_double(res.max_violation) + "," +
                    (res.worst_check.empty() ? "none" : res.worst_check) + "\n";
    return out;
}

} // namespace

experiment_outcome run_experiment(const experiment_config& cfg) {
    experiment_outcome outcome;
    outcome.seeds.resize(cfg.seeds.size());

    // Shared immutable state built once.
    std::unique_ptr<cb_shared_state> cb_shared;
    if (cfg.kind == "distcb" || cfg.kind == "squarecb" || cfg.kind == "fastcb")
        cb_shared = std::make_unique<cb_shared_state>(build_cb_shared(cfg));
    std::unique_ptr<tabular_mdp> mdp;
    std::unique_ptr<dist_function_class> cls;
    std::vector<markov_policy> policies;
    if (cfg.kind == "odisco" || cfg.kind == "pdisco") {
        mdp = std::make_unique<tabular_mdp>(build_mdp_from_config(cfg.env));
        const int policy_count = cfg.algorithm.value("policies", cfg.kind == "pdisco" ? 8 : 4);
        const std::uint64_t policy_seed = cfg.algorithm.value("policy_seed", 7);
        policies = policy_set_for(*mdp, policy_count, policy_seed);
        // The suffix class must realize Z^pi for every policy the algorithms
        // compare against, so the whole set is closed by default.
        const int suffix_policies = cfg.algorithm.value("suffix_policies", policy_count);
        std::vector<markov_policy> suffix_set(policies.begin(),
                                              policies.begin() +
                                                  std::min<std::size_t>(policies.size(),
                                                                        suffix_policies));
        cls = std::make_unique<dist_function_class>(build_suffix_class(*mdp, suffix_set));
    }

    // Exceptions must not cross the worker boundary: algorithm failures are
    // recorded per seed, anything else is stashed and rethrown typed after
    // the join.
    enum class error_kind { none, config, io, other };
    std::vector<error_kind> errors(cfg.seeds.size(), error_kind::none);
    std::vector<std::string> error_msgs(cfg.seeds.size());
    par::for_each_index(cfg.seeds.size(), [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        seed_outcome& slot = outcome.seeds[i];
        try {
            if (cfg.kind == "odisco")
                slot = run_odisco_seed(cfg, seed, *mdp, *cls);
            else if (cfg.kind == "pdisco")
                slot = run_pdisco_seed(cfg, seed, *mdp, *cls, policies);
            else if (cfg.kind == "eluder")
                slot = run_eluder_seed(cfg, seed);
            else if (cfg.kind == "proptest")
                slot = run_proptest_seed(cfg, seed);
            else
                slot = run_cb_seed(cfg, seed, *cb_shared);
        } catch (const algorithm_failure& e) {
            slot.seed = seed;
            slot.failed = true;
            slot.failure = e.what();
        } catch (const io_error& e) {
            errors[i] = error_kind::io;
            error_msgs[i] = e.what();
        } catch (const std::invalid_argument& e) {
            errors[i] = error_kind::config;
            error_msgs[i] = e.what();
        } catch (const std::exception& e) {
            errors[i] = error_kind::other;
            error_msgs[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (errors[i] == error_kind::config) throw config_error(error_msgs[i]);
        if (errors[i] == error_kind::io) throw io_error(error_msgs[i]);
        if (errors[i] == error_kind::other) throw std::runtime_error(error_msgs[i]);
    }

    for (const auto& s : outcome.seeds)
        for (const auto& [name, v] : s.metrics) {
            (void)v;
            if (std::find(outcome.metric_order.begin(), outcome.metric_order.end(), name) ==
                outcome.metric_order.end())
                outcome.metric_order.push_back(name);
        }
    if (cfg.seeds.size() == 1) outcome.metric_flags["*"] = "n=1";
    const long episodes = cfg.algorithm.value("episodes", 0L);
    if (episodes > 0 && episodes < 100)
        outcome.metric_flags["avg_cost_last100"] = "window_truncated";
    return outcome;
}

std::string aggregate_csv(const experiment_outcome& outcome) {
    std::string out = "metric,mean,sem,n,flag\n";
    for (const auto& name : outcome.metric_order) {
        double sum = 0.0;
        long n = 0;
        for (const auto& s : outcome.seeds)
            if (!s.failed && s.metrics.count(name)) {
                sum += s.metrics.at(name);
                ++n;
            }
        if (n == 0) continue;
        const double mean_v = sum / static_cast<double>(n);
        double var = 0.0;
        for (const auto& s : outcome.seeds)
            if (!s.failed && s.metrics.count(name)) {
                const double d = s.metrics.at(name) - mean_v;
                var += d * d;
            }
        const double sem = n > 1 ? std::sqrt(var / (n - 1)) / std::sqrt(n) : 0.0;
        std::string flag;
        if (outcome.metric_flags.count(name)) flag = outcome.metric_flags.at(name);
        if (n == 1) flag = flag.empty() ? "n=1" : flag + ";n=1";
        out += name + "," + format_double(mean_v) + "," + format_double(sem) + "," +
               std::to_string(n) + "," + flag + "\n";
    }
    return out;
}

int run_experiment_to_files(const experiment_config& cfg) {
    const auto start = std::chrono::steady_clock::now();
    const experiment_outcome outcome = run_experiment(cfg);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw io_error("cannot create output directory " + cfg.out_dir);

    json meta;
    meta["schema_version"] = cfg.schema_version;
    meta["kind"] = cfg.kind;
    meta["seeds"] = cfg.seeds;
    json canonical{{"schema_version", cfg.schema_version},
                   {"kind", cfg.kind},
                   {"env", cfg.env},
                   {"algorithm", cfg.algorithm}};
    meta["config_hash"] = fnv1a064(canonical.dump());
    json failures = json::array();

    for (const auto& s : outcome.seeds) {
        const std::string base = cfg.out_dir + "/seed_" + std::to_string(s.seed);
        if (s.failed) {
            failures.push_back(json{{"seed", s.seed}, {"error", s.failure}});
            continue;
        }
        if (!s.trace_csv.empty()) write_text_file(base + ".csv", s.trace_csv);
        if (!s.extra_json.empty()) write_text_file(base + ".jsonl", s.extra_json);
    }
    write_text_file(cfg.out_dir + "/aggregate.csv", aggregate_csv(outcome));
    meta["failures"] = std::move(failures);
    meta["wall_time_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    write_json_file(cfg.out_dir + "/run_meta.json", meta);
    return outcome.any_failed() ? 3 : 0;
}

} // namespace distlab
