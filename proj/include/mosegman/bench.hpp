#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mosegman/io.hpp"
#include "mosegman/motion.hpp"
#include "mosegman/planner.hpp"
#include "mosegman/scene.hpp"

namespace mosegman {

// ---------------------------------------------------------------------------
// Random M-Block tasks

struct MBlockConfig {
    double object_min = 0.5;
    double object_max = 0.8;
    double robot_side = 0.5;
    double gap = 0.5;  // minimum free gap around starts, goals and the robot
    int max_attempts = 10000;
};

/// Fixed cross-shaped wall layout in the 10 x 10 workspace.
inline std::vector<Body> m_block_walls() {
    return {{"wall_h", 3.0, 0.3, BodyKind::StaticWall, {5.0, 5.0}},
            {"wall_v", 0.3, 3.0, BodyKind::StaticWall, {5.0, 5.0}}};
}

/// m goal objects with random sizes, starts and goals. Starts are pairwise
/// separated, goals are pairwise separated, both keep `gap` from walls and the
/// boundary; a goal may cover another object's start. Every object is checked
/// to have a static placement path.
inline Scene gen_m_block(int m, std::uint64_t seed, const MBlockConfig& cfg = {}) {
    if (m < 1) throw Error("gen_m_block: m must be >= 1");
    const Aabb ws{0, 0, 10, 10};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto walls = m_block_walls();
    int attempts = 0;
    auto clear_of = [&](const Aabb& box, const std::vector<Aabb>& others) {
        const Aabb grown = box.inflated(cfg.gap, cfg.gap);
        if (!ws.contains(grown)) return false;
        for (const auto& w : walls)
            if (interiors_overlap(grown, w.footprint())) return false;
        for (const auto& o : others)
            if (interiors_overlap(grown, o)) return false;
        return true;
    };
    auto sample = [&](double w, double h, const std::vector<Aabb>& others) -> Pose2 {
        while (true) {
            if (++attempts > cfg.max_attempts) throw Error("gen_m_block: workspace saturated");
            const Pose2 p{ws.xmin + w / 2 + u(rng) * (ws.width() - w), ws.ymin + h / 2 + u(rng) * (ws.height() - h)};
            if (clear_of(Aabb::centered(p, w, h), others)) return p;
        }
    };
    for (int restart = 0;; ++restart) {
        std::vector<Body> bodies = walls;
        std::map<std::string, Pose2> goals;
        std::vector<Aabb> starts, goal_boxes;
        const double rs = cfg.robot_side;
        const Pose2 robot = sample(rs, rs, {});
        starts.push_back(Aabb::centered(robot, rs, rs));
        for (int i = 0; i < m; ++i) {
            const double w = cfg.object_min + u(rng) * (cfg.object_max - cfg.object_min);
            const double h = cfg.object_min + u(rng) * (cfg.object_max - cfg.object_min);
            const Pose2 s = sample(w, h, starts);
            starts.push_back(Aabb::centered(s, w, h));
            const Pose2 g = sample(w, h, goal_boxes);
            goal_boxes.push_back(Aabb::centered(g, w, h));
            char id[16];
            std::snprintf(id, sizeof id, "o%02d", i + 1);
            bodies.push_back({id, w, h, BodyKind::GoalObject, s});
            goals[id] = g;
        }
        bodies.push_back({"robot", rs, rs, BodyKind::Robot, robot});
        Scene scene(ws, std::move(bodies), std::move(goals), seed);
        validate(scene);
        bool solvable = true;
        for (const auto& id : scene.goal_ids())
            solvable = solvable && plan_object_path(scene, id, scene.goal_of(id), mix_seed(seed, hash_id(id))).has_value();
        if (solvable) return scene;
    }
}

// ---------------------------------------------------------------------------
// Suites and records

struct SuiteEntry {
    std::string name;
    std::string file;       // scenario path, or empty for a generator
    int m_block = 0;        // > 0: generate an M-Block task per seed
    Json overrides = Json::object();  // per-scenario config keys
};

struct TaskSuite {
    std::vector<SuiteEntry> scenarios;
    int repeats = 1;
    std::vector<std::uint64_t> seeds;
};

inline TaskSuite suite_from_json(const Json& j, const std::string& base_dir = ".") {
    detail::only_keys(j, {"scenarios", "repeats", "seeds"}, "suite");
    TaskSuite s;
    if (!j.contains("scenarios") || !j.at("scenarios").is_array()) throw Error("suite: 'scenarios' must be an array");
    for (const auto& e : j.at("scenarios")) {
        detail::only_keys(e, {"name", "file", "m_block", "config"}, "suite entry");
        SuiteEntry se;
        se.name = e.at("name").get<std::string>();
        if (e.contains("file")) se.file = (std::filesystem::path(base_dir) / e.at("file").get<std::string>()).string();
        if (e.contains("m_block")) se.m_block = e.at("m_block").get<int>();
        if (e.contains("config")) se.overrides = e.at("config");
        if (se.file.empty() == (se.m_block <= 0)) throw Error("suite entry '" + se.name + "': give exactly one of file, m_block");
        s.scenarios.push_back(se);
    }
    s.repeats = j.value("repeats", 1);
    if (j.contains("seeds")) {
        s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    } else {
        for (int i = 0; i < s.repeats; ++i) s.seeds.push_back(static_cast<std::uint64_t>(i));
    }
    if (s.repeats < 1) throw Error("suite: repeats must be >= 1");
    if (static_cast<int>(s.seeds.size()) != s.repeats) throw Error("suite: seed count must equal repeats");
    return s;
}

inline TaskSuite load_suite(const std::string& path) {
    const auto dir = std::filesystem::path(path).parent_path().string();
    return suite_from_json(detail::parse_text(detail::read_file(path), path), dir.empty() ? "." : dir);
}

struct BenchRecord {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string status;
    std::size_t pnp = 0;
    int replanning = 0;
    double travel_distance = 0.0;
    double wall_time = 0.0;
    double sequence_time = 0.0;
};

inline const char* kCsvHeader = "scenario,seed,status,pnp,replanning,travel_distance_m,wall_time_s,sequence_time_s";

inline std::string to_csv(const std::vector<BenchRecord>& records) {
    std::ostringstream os;
    os << kCsvHeader << '\n';
    char buf[256];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%s,%llu,%s,%zu,%d,%.6f,%.6f,%.6f\n", r.scenario.c_str(),
                      static_cast<unsigned long long>(r.seed), r.status.c_str(), r.pnp, r.replanning,
                      r.travel_distance, r.wall_time, r.sequence_time);
        os << buf;
    }
    return os.str();
}

/// Scene for one suite entry and seed.
inline Scene suite_scene(const SuiteEntry& e, std::uint64_t seed) {
    return e.m_block > 0 ? gen_m_block(e.m_block, seed) : load_scenario(e.file);
}

/// Runs every (scenario, seed). Parse failures become records with status
/// parse-error; records come back sorted by (scenario, seed).
inline std::vector<BenchRecord> run_suite(const TaskSuite& suite, const PlannerConfig& base,
                                          const std::function<void(const BenchRecord&)>& on_record = {}) {
    std::vector<BenchRecord> out;
    for (const auto& e : suite.scenarios)
        for (std::uint64_t seed : suite.seeds) {
            BenchRecord rec;
            rec.scenario = e.name;
            rec.seed = seed;
            try {
                const Scene scene = suite_scene(e, seed);
                PlannerConfig cfg = base;
                apply_config(cfg, e.overrides);
                cfg.seed = seed;
                const auto r = mo_segman(scene, cfg);
                rec.status = to_string(r.status);
                rec.pnp = r.metrics.pnp_count;
                rec.replanning = r.metrics.replanning_count;
                rec.travel_distance = r.metrics.travel_distance;
                rec.wall_time = r.metrics.wall_time;
                rec.sequence_time = std::min(r.metrics.sequence_time, r.metrics.wall_time);
            } catch (const Error&) {
                rec.status = "parse-error";
            }
            if (on_record) on_record(rec);
            out.push_back(rec);
        }
    std::stable_sort(out.begin(), out.end(), [](const BenchRecord& a, const BenchRecord& b) {
        return std::tie(a.scenario, a.seed) < std::tie(b.scenario, b.seed);
    });
    return out;
}

// ---------------------------------------------------------------------------
// SVG

/// Standalone SVG: workspace, walls, movables, goal objects with their goal
/// outlines, the robot, and one polyline per path when plans are given.
inline std::string render_svg(const Scene& scene, const std::vector<PlanEntry>* plans = nullptr, double px_per_m = 60) {
    const Aabb& ws = scene.workspace();
    const double W = ws.width() * px_per_m, H = ws.height() * px_per_m;
    auto X = [&](double x) { return (x - ws.xmin) * px_per_m; };
    auto Y = [&](double y) { return (ws.ymax - y) * px_per_m; };
    char buf[512];
    std::ostringstream os;
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.1f\" height=\"%.1f\" viewBox=\"0 0 %.1f %.1f\">\n",
                  W, H, W, H);
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<rect class=\"workspace\" x=\"0\" y=\"0\" width=\"%.2f\" height=\"%.2f\" fill=\"#f7f7f7\" stroke=\"#000\"/>\n",
                  W, H);
    os << buf;
    auto rect = [&](const Aabb& b, const char* cls, const std::string& id, const char* fill, const char* stroke,
                    const char* extra) {
        std::snprintf(buf, sizeof buf,
                      "<rect class=\"%s\" data-id=\"%s\" x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\" "
                      "stroke=\"%s\"%s/>\n",
                      cls, id.c_str(), X(b.xmin), Y(b.ymax), b.width() * px_per_m, b.height() * px_per_m, fill, stroke,
                      extra);
        os << buf;
    };
    static const char* palette[] = {"#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4",
                                    "#46f0f0", "#f032e6", "#bcf60c", "#008080", "#9a6324"};
    std::map<std::string, const char*> color;
    int ci = 0;
    for (const auto& [id, g] : scene.goals()) color[id] = palette[ci++ % 10];
    for (const auto& [id, g] : scene.goals())
        if (const Body* b = scene.find(id))
            rect(b->footprint_at(g), "goal", id, "none", color[id], " stroke-dasharray=\"4 3\" stroke-width=\"2\"");
    for (const auto& b : scene.bodies()) {
        switch (b.kind) {
            case BodyKind::StaticWall: rect(b.footprint(), "body wall", b.id, "#333333", "#000", ""); break;
            case BodyKind::MovableObstacle: rect(b.footprint(), "body movable", b.id, "#ffffff", "#000", ""); break;
            case BodyKind::GoalObject: rect(b.footprint(), "body goal-object", b.id, color[b.id], "#000", ""); break;
            case BodyKind::Robot: rect(b.footprint(), "body robot", b.id, "#f2c200", "#000", ""); break;
        }
    }
    if (plans) {
        auto poly = [&](const Path& p, const char* cls, const char* stroke) {
            os << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << stroke << "\" points=\"";
            for (std::size_t i = 0; i < p.waypoints.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", X(p.waypoints[i].x), Y(p.waypoints[i].y));
                os << buf;
            }
            os << "\"/>\n";
        };
        for (const auto& e : *plans)
            for (const auto& pr : e.plan.pairs) {
                poly(pr.pick, "path pick", "#1f77b4");
                poly(pr.place, "path place", e.relocation ? "#999999" : "#d62728");
            }
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace mosegman
