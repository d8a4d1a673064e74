#pragma once

#include <string>

#include <json.hpp>

#include "distlab/eluder.hpp"
#include "distlab/function_class.hpp"
#include "distlab/mdp.hpp"
#include "distlab/mle.hpp"

namespace distlab {

using nlohmann::json;

// GridCategorical: { "m": int, "probs": [reals] }
json to_json(const grid_categorical& d);
grid_categorical grid_categorical_from_json(const json& j);

// Class fixture: a list of members, each a map from "x:a" keys to
// GridCategorical objects.
json to_json(const cond_dist_class& cls);
cond_dist_class cond_dist_class_from_json(const json& j);

// MDP fixture: { X, A, H, m, x1, P: nested arrays, C: nested GridCategorical }
json to_json(const tabular_mdp& mdp);
tabular_mdp tabular_mdp_from_json(const json& j);

// RL function class: per-member list of per-step "x:a" maps (the mle_oracle
// fixture format applied layer by layer).
json to_json(const dist_function_class& cls);
dist_function_class dist_function_class_from_json(const json& j);

// Eluder instance: { S, psi: [[reals]], dists: [[reals]] }
json to_json(const eluder_instance& inst);
eluder_instance eluder_instance_from_json(const json& j);

json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);
void write_text_file(const std::string& path, const std::string& text);

// Stable 64-bit FNV-1a of a string (config hashes in run metadata).
std::uint64_t fnv1a064(const std::string& text);

// Shortest round-trip-exact decimal rendering used by every CSV writer, so
// identical runs emit byte-identical files.
std::string format_double(double v);

} // namespace distlab
