#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mosegman/planner.hpp"
#include "mosegman/scene.hpp"

namespace mosegman {

using Json = nlohmann::json;

namespace detail {

inline void only_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw Error(where + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw Error(where + ": unknown field '" + k + "'");
}

inline double num(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw Error(where + ": missing field '" + key + "'");
    if (!j.at(key).is_number()) throw Error(where + ": field '" + std::string(key) + "' must be a number");
    return j.at(key).get<double>();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Json parse_text(const std::string& text, const std::string& where) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(where + ": " + e.what());
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scenarios

/// Walls and movables are given by center and size. Unknown fields are errors.
inline Scene scene_from_json(const Json& j) {
    detail::only_keys(j, {"workspace", "walls", "movables", "robot", "seed"}, "scenario");
    Aabb ws{0, 0, 10, 10};
    if (j.contains("workspace")) {
        const auto& w = j.at("workspace");
        detail::only_keys(w, {"xmin", "ymin", "xmax", "ymax"}, "workspace");
        ws = {detail::num(w, "xmin", "workspace"), detail::num(w, "ymin", "workspace"),
              detail::num(w, "xmax", "workspace"), detail::num(w, "ymax", "workspace")};
    }
    std::vector<Body> bodies;
    std::map<std::string, Pose2> goals;
    if (j.contains("walls")) {
        if (!j.at("walls").is_array()) throw Error("walls: expected an array");
        int i = 0;
        for (const auto& w : j.at("walls")) {
            detail::only_keys(w, {"id", "x", "y", "w", "h"}, "wall");
            Body b;
            b.id = w.contains("id") ? w.at("id").get<std::string>() : "wall" + std::to_string(i);
            b.kind = BodyKind::StaticWall;
            b.pose = {detail::num(w, "x", "wall"), detail::num(w, "y", "wall")};
            b.width = detail::num(w, "w", "wall");
            b.height = detail::num(w, "h", "wall");
            bodies.push_back(b);
            ++i;
        }
    }
    if (j.contains("movables")) {
        if (!j.at("movables").is_array()) throw Error("movables: expected an array");
        for (const auto& m : j.at("movables")) {
            detail::only_keys(m, {"id", "w", "h", "x", "y", "goal"}, "movable");
            if (!m.contains("id") || !m.at("id").is_string()) throw Error("movable: missing string field 'id'");
            Body b;
            b.id = m.at("id").get<std::string>();
            b.pose = {detail::num(m, "x", b.id), detail::num(m, "y", b.id)};
            b.width = detail::num(m, "w", b.id);
            b.height = detail::num(m, "h", b.id);
            b.kind = BodyKind::MovableObstacle;
            if (m.contains("goal")) {
                const auto& g = m.at("goal");
                detail::only_keys(g, {"x", "y"}, b.id + ".goal");
                goals[b.id] = {detail::num(g, "x", b.id + ".goal"), detail::num(g, "y", b.id + ".goal")};
                b.kind = BodyKind::GoalObject;
            }
            bodies.push_back(b);
        }
    }
    if (!j.contains("robot")) throw Error("scenario: missing field 'robot'");
    const auto& r = j.at("robot");
    detail::only_keys(r, {"side", "x", "y"}, "robot");
    const double side = detail::num(r, "side", "robot");
    bodies.push_back({"robot", side, side, BodyKind::Robot, {detail::num(r, "x", "robot"), detail::num(r, "y", "robot")}});
    std::uint64_t seed = 0;
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw Error("scenario: 'seed' must be a non-negative integer");
        seed = j.at("seed").get<std::uint64_t>();
    }
    Scene s(ws, std::move(bodies), std::move(goals), seed);
    validate(s);
    return s;
}

inline Scene parse_scenario(const std::string& text) { return scene_from_json(detail::parse_text(text, "scenario")); }
inline Scene load_scenario(const std::string& path) { return parse_scenario(detail::read_file(path)); }

inline Json scene_to_json(const Scene& s) {
    Json j;
    const auto& ws = s.workspace();
    j["workspace"] = {{"xmin", ws.xmin}, {"ymin", ws.ymin}, {"xmax", ws.xmax}, {"ymax", ws.ymax}};
    j["walls"] = Json::array();
    j["movables"] = Json::array();
    for (const auto& b : s.bodies()) {
        if (b.kind == BodyKind::StaticWall) {
            j["walls"].push_back({{"id", b.id}, {"x", b.pose.x}, {"y", b.pose.y}, {"w", b.width}, {"h", b.height}});
        } else if (b.movable()) {
            Json m{{"id", b.id}, {"w", b.width}, {"h", b.height}, {"x", b.pose.x}, {"y", b.pose.y}};
            if (s.is_goal_object(b.id)) {
                const Pose2 g = s.goal_of(b.id);
                m["goal"] = {{"x", g.x}, {"y", g.y}};
            }
            j["movables"].push_back(m);
        }
    }
    const Body& r = s.robot();
    j["robot"] = {{"side", r.width}, {"x", r.pose.x}, {"y", r.pose.y}};
    j["seed"] = s.rng_seed();
    return j;
}

// ---------------------------------------------------------------------------
// Planner configuration: one flat object of scalar keys

namespace detail {

using Setter = std::function<void(PlannerConfig&, const Json&)>;

template <class T>
Setter set(T PlannerConfig::*field) {
    return [field](PlannerConfig& c, const Json& v) { c.*field = v.get<T>(); };
}

inline const std::map<std::string, Setter>& config_setters() {
    static const std::map<std::string, Setter> table = {
        {"seed", set(&PlannerConfig::seed)},
        {"time_limit", set(&PlannerConfig::time_limit)},
        {"skip_max_divisor", set(&PlannerConfig::skip_max_divisor)},
        {"iter_max_offset", set(&PlannerConfig::iter_max_offset)},
        {"sgfs_rounds", set(&PlannerConfig::sgfs_rounds)},
        {"sequencer",
         [](PlannerConfig& c, const Json& v) {
             const auto s = v.get<std::string>();
             static const std::map<std::string, SequencerMode> modes = {
                 {"full", SequencerMode::Full},
                 {"random", SequencerMode::Random},
                 {"greedy", SequencerMode::GreedyCycles},
                 {"euclidean", SequencerMode::EuclideanOnly},
                 {"static", SequencerMode::NoRegeneration}};
             auto it = modes.find(s);
             if (it == modes.end()) throw Error("config: unknown sequencer '" + s + "'");
             c.sequencer = it->second;
         }},
        {"refine", [](PlannerConfig& c, const Json& v) { c.motion.refine = v.get<bool>(); }},
        {"epsilon", [](PlannerConfig& c, const Json& v) { c.motion.epsilon = v.get<double>(); }},
        {"kappa", [](PlannerConfig& c, const Json& v) { c.motion.kappa = v.get<double>(); }},
        {"step_min", [](PlannerConfig& c, const Json& v) { c.motion.step_min = v.get<double>(); }},
        {"step_max", [](PlannerConfig& c, const Json& v) { c.motion.step_max = v.get<double>(); }},
        {"rrt_goal_bias", [](PlannerConfig& c, const Json& v) { c.motion.rrt.goal_bias = v.get<double>(); }},
        {"rrt_step", [](PlannerConfig& c, const Json& v) { c.motion.rrt.step = v.get<double>(); }},
        {"rrt_max_iters", [](PlannerConfig& c, const Json& v) { c.motion.rrt.max_iters = v.get<int>(); }},
        {"rrt_shortcuts", [](PlannerConfig& c, const Json& v) { c.motion.rrt.shortcut_attempts = v.get<int>(); }},
        {"grid_cells", [](PlannerConfig& c, const Json& v) { c.motion.raster.grid_cells = v.get<int>(); }},
        {"alpha_m", [](PlannerConfig& c, const Json& v) { c.motion.raster.alpha_m = v.get<double>(); }},
        {"beta_m", [](PlannerConfig& c, const Json& v) { c.motion.raster.beta_m = v.get<double>(); }},
        {"alpha_r", [](PlannerConfig& c, const Json& v) { c.motion.raster.alpha_r = v.get<double>(); }},
        {"beta_r", [](PlannerConfig& c, const Json& v) { c.motion.raster.beta_r = v.get<double>(); }},
        {"c0", [](PlannerConfig& c, const Json& v) { c.sgfs.c0 = v.get<double>(); }},
        {"literal_exploration", [](PlannerConfig& c, const Json& v) { c.sgfs.literal_exploration = v.get<bool>(); }},
        {"k_max", [](PlannerConfig& c, const Json& v) { c.sgfs.k_max = v.get<int>(); }},
        {"beam", [](PlannerConfig& c, const Json& v) { c.sgfs.beam = v.get<int>(); }},
        {"sgfs_iterations", [](PlannerConfig& c, const Json& v) { c.sgfs.iteration_limit = v.get<int>(); }},
        {"stall_limit", [](PlannerConfig& c, const Json& v) { c.sgfs.stall_limit = v.get<int>(); }},
        {"alt_crit_limit", [](PlannerConfig& c, const Json& v) { c.sgfs.alt_crit_limit = v.get<int>(); }},
        {"max_crit_size", [](PlannerConfig& c, const Json& v) { c.sgfs.max_crit_size = v.get<int>(); }},
        {"clearance_min", [](PlannerConfig& c, const Json& v) { c.sgfs.clearance_min = v.get<double>(); }},
        {"lom_scale", [](PlannerConfig& c, const Json& v) { c.sgfs.lom_scale = v.get<double>(); }},
        {"cycle_cap", [](PlannerConfig& c, const Json& v) { c.sequencing.cycle_cap = v.get<int>(); }},
        {"lazy_rounds", [](PlannerConfig& c, const Json& v) { c.sequencing.lazy_max_rounds = v.get<int>(); }},
        {"exact_limit", [](PlannerConfig& c, const Json& v) { c.sequencing.exact_limit = v.get<int>(); }},
    };
    return table;
}

}  // namespace detail

inline std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, v] : detail::config_setters()) keys.push_back(k);
    return keys;
}

inline void apply_config_value(PlannerConfig& cfg, const std::string& key, const Json& value) {
    const auto& table = detail::config_setters();
    auto it = table.find(key);
    if (it == table.end()) throw Error("config: unknown key '" + key + "'");
    try {
        it->second(cfg, value);
    } catch (const Json::exception& e) {
        throw Error("config: bad value for '" + key + "': " + e.what());
    }
}

inline void apply_config(PlannerConfig& cfg, const Json& flat) {
    if (!flat.is_object()) throw Error("config: expected a flat object");
    for (const auto& [k, v] : flat.items()) {
        if (v.is_object() || v.is_array()) throw Error("config: key '" + k + "' must be a scalar");
        apply_config_value(cfg, k, v);
    }
}

inline PlannerConfig load_config(const std::string& path) {
    PlannerConfig cfg;
    apply_config(cfg, detail::parse_text(detail::read_file(path), path));
    return cfg;
}

/// MOSEGMAN_<KEY> environment variables, e.g. MOSEGMAN_TIME_LIMIT=30.
inline void apply_env_overrides(PlannerConfig& cfg, const char* prefix = "MOSEGMAN_") {
    for (const auto& key : config_keys()) {
        std::string name = prefix;
        for (char c : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        const char* raw = std::getenv(name.c_str());
        if (!raw) continue;
        Json v;
        try {
            v = Json::parse(raw);
        } catch (const Json::parse_error&) {
            v = std::string(raw);
        }
        apply_config_value(cfg, key, v);
    }
}

}  // namespace mosegman
