#include "distlab/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace distlab {

json to_json(const grid_categorical& d) {
    return json{{"m", d.atom_count()}, {"probs", d.probs()}};
}

grid_categorical grid_categorical_from_json(const json& j) {
    if (!j.contains("m") || !j.contains("probs"))
        throw config_error("grid_categorical fixture needs 'm' and 'probs'");
    return {grid_spec(j.at("m").get<int>()), j.at("probs").get<std::vector<double>>()};
}

namespace {

std::string key_string(const cond_key& k) {
    return std::to_string(k.first) + ":" + std::to_string(k.second);
}

cond_key parse_key(const std::string& s) {
    const auto pos = s.find(':');
    if (pos == std::string::npos)
        throw config_error("class fixture key '" + s + "' is not of the form x:a");
    return {std::stoi(s.substr(0, pos)), std::stoi(s.substr(pos + 1))};
}

} // namespace

json to_json(const cond_dist_class& cls) {
    json members = json::array();
    for (int f = 0; f < cls.size(); ++f) {
        json member = json::object();
        for (int k = 0; k < cls.key_count(); ++k)
            member[key_string(cls.keys()[static_cast<std::size_t>(k)])] =
                to_json(cls.table(f, k));
        members.push_back(std::move(member));
    }
    return members;
}

cond_dist_class cond_dist_class_from_json(const json& j) {
    const json& members_json = j.is_array() ? j : j.at("members");
    if (!members_json.is_array() || members_json.empty())
        throw config_error("class fixture must be a non-empty list of members");
    std::vector<cond_key> keys;
    for (const auto& [key, value] : members_json.front().items()) {
        (void)value;
        keys.push_back(parse_key(key));
    }
    std::sort(keys.begin(), keys.end());
    std::vector<std::vector<grid_categorical>> members;
    for (const auto& member_json : members_json) {
        std::vector<grid_categorical> tables;
        tables.reserve(keys.size());
        for (const auto& key : keys) {
            const std::string ks = key_string(key);
            if (!member_json.contains(ks))
                throw config_error("class fixture member missing key " + ks);
            tables.push_back(grid_categorical_from_json(member_json.at(ks)));
        }
        members.push_back(std::move(tables));
    }
    return {std::move(keys), std::move(members)};
}

json to_json(const tabular_mdp& mdp) {
    json p = json::array();
    json c = json::array();
    for (int h = 0; h < mdp.horizon(); ++h) {
        json ph = json::array();
        json ch = json::array();
        for (int x = 0; x < mdp.num_states(); ++x) {
            json px = json::array();
            json cx = json::array();
            for (int a = 0; a < mdp.num_actions(); ++a) {
                px.push_back(mdp.transition_row(h, x, a));
                cx.push_back(to_json(mdp.cost(h, x, a)));
            }
            ph.push_back(std::move(px));
            ch.push_back(std::move(cx));
        }
        p.push_back(std::move(ph));
        c.push_back(std::move(ch));
    }
    return json{{"X", mdp.num_states()}, {"A", mdp.num_actions()},   {"H", mdp.horizon()},
                {"m", mdp.grid().atom_count}, {"x1", mdp.initial_state()}, {"P", std::move(p)},
                {"C", std::move(c)}};
}

tabular_mdp tabular_mdp_from_json(const json& j) {
    for (const char* field : {"X", "A", "H", "m", "x1", "P", "C"})
        if (!j.contains(field))
            throw config_error(std::string("MDP fixture missing field ") + field);
    const int X = j.at("X").get<int>();
    const int A = j.at("A").get<int>();
    const int H = j.at("H").get<int>();
    const grid_spec grid(j.at("m").get<int>());
    std::vector<std::vector<std::vector<std::vector<double>>>> p;
    std::vector<std::vector<std::vector<grid_categorical>>> c;
    for (int h = 0; h < H; ++h) {
        std::vector<std::vector<std::vector<double>>> ph;
        std::vector<std::vector<grid_categorical>> ch;
        for (int x = 0; x < X; ++x) {
            std::vector<std::vector<double>> px;
            std::vector<grid_categorical> cx;
            for (int a = 0; a < A; ++a) {
                px.push_back(j.at("P").at(h).at(x).at(a).get<std::vector<double>>());
                cx.push_back(grid_categorical_from_json(j.at("C").at(h).at(x).at(a)));
            }
            ph.push_back(std::move(px));
            ch.push_back(std::move(cx));
        }
        p.push_back(std::move(ph));
        c.push_back(std::move(ch));
    }
    return {X, A, H, j.at("x1").get<int>(), grid, std::move(p), std::move(c)};
}

json to_json(const dist_function_class& cls) {
    json members = json::array();
    for (const auto& member : cls.members) {
        json layers = json::array();
        for (const auto& table : member) {
            json layer = json::object();
            for (int x = 0; x < cls.num_states; ++x)
                for (int a = 0; a < cls.num_actions; ++a)
                    layer[key_string({x, a})] =
                        to_json(table[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)]);
            layers.push_back(std::move(layer));
        }
        members.push_back(std::move(layers));
    }
    return json{{"X", cls.num_states}, {"A", cls.num_actions},      {"H", cls.horizon},
                {"m", cls.grid.atom_count}, {"members", std::move(members)}};
}

dist_function_class dist_function_class_from_json(const json& j) {
    dist_function_class cls;
    cls.num_states = j.at("X").get<int>();
    cls.num_actions = j.at("A").get<int>();
    cls.horizon = j.at("H").get<int>();
    cls.grid = grid_spec(j.at("m").get<int>());
    for (const auto& member_json : j.at("members")) {
        dist_member member;
        for (const auto& layer_json : member_json) {
            cond_dist_table table;
            for (int x = 0; x < cls.num_states; ++x) {
                std::vector<grid_categorical> row;
                for (int a = 0; a < cls.num_actions; ++a)
                    row.push_back(
                        grid_categorical_from_json(layer_json.at(key_string({x, a}))));
                table.push_back(std::move(row));
            }
            member.push_back(std::move(table));
        }
        cls.members.push_back(std::move(member));
    }
    return cls;
}

json to_json(const eluder_instance& inst) {
    return json{{"S", inst.point_count()}, {"psi", inst.psi}, {"dists", inst.dists}};
}

eluder_instance eluder_instance_from_json(const json& j) {
    eluder_instance inst;
    inst.psi = j.at("psi").get<std::vector<std::vector<double>>>();
    inst.dists = j.at("dists").get<std::vector<std::vector<double>>>();
    inst.validate();
    if (j.contains("S") && j.at("S").get<int>() != inst.point_count())
        throw config_error("eluder instance: S does not match the psi row length");
    return inst;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw config_error("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw io_error("write failed for " + path);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << text;
    if (!out) throw io_error("write failed for " + path);
}

std::uint64_t fnv1a064(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    // Shortest representation that round-trips.
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

} // namespace distlab
