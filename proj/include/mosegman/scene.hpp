#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mosegman/geometry.hpp"

namespace mosegman {

/// Raised for malformed input: unknown ids, invalid scenes, bad files.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class BodyKind { StaticWall, MovableObstacle, GoalObject, Robot };

inline const char* to_string(BodyKind k) {
    switch (k) {
        case BodyKind::StaticWall: return "static-wall";
        case BodyKind::MovableObstacle: return "movable-obstacle";
        case BodyKind::GoalObject: return "goal-object";
        case BodyKind::Robot: return "robot";
    }
    return "?";
}

struct Body {
    std::string id;
    double width = 0.0;
    double height = 0.0;
    BodyKind kind = BodyKind::MovableObstacle;
    Pose2 pose;

    Aabb footprint() const { return Aabb::centered(pose, width, height); }
    Aabb footprint_at(const Pose2& p) const { return Aabb::centered(p, width, height); }
    bool movable() const { return kind == BodyKind::MovableObstacle || kind == BodyKind::GoalObject; }
    double area() const { return width * height; }

    friend bool operator==(const Body&, const Body&) = default;
};

using IdSet = std::set<std::string>;

/// Full world state. Treated as an immutable value: successors are produced by
/// `with_pose`/`without`, never by mutation of a shared instance.
class Scene {
  public:
    Scene() = default;
    Scene(Aabb workspace, std::vector<Body> bodies, std::map<std::string, Pose2> goals,
          std::uint64_t rng_seed = 0)
        : workspace_(workspace), bodies_(std::move(bodies)), goals_(std::move(goals)), seed_(rng_seed) {}

    const Aabb& workspace() const { return workspace_; }
    const std::vector<Body>& bodies() const { return bodies_; }
    const std::map<std::string, Pose2>& goals() const { return goals_; }
    std::uint64_t rng_seed() const { return seed_; }

    const Body* find(const std::string& id) const {
        for (const auto& b : bodies_)
            if (b.id == id) return &b;
        return nullptr;
    }
    const Body& body(const std::string& id) const {
        if (const Body* b = find(id)) return *b;
        throw Error("unknown body id '" + id + "'");
    }
    const Body& robot() const {
        for (const auto& b : bodies_)
            if (b.kind == BodyKind::Robot) return b;
        throw Error("scene has no robot");
    }
    double robot_side() const { return robot().width; }

    Pose2 goal_of(const std::string& id) const {
        auto it = goals_.find(id);
        if (it == goals_.end()) throw Error("'" + id + "' has no goal");
        return it->second;
    }
    bool is_goal_object(const std::string& id) const { return goals_.count(id) > 0; }

    std::vector<std::string> goal_ids() const {
        std::vector<std::string> ids;
        for (const auto& [id, g] : goals_) ids.push_back(id);
        return ids;
    }
    std::vector<const Body*> movables() const {
        std::vector<const Body*> out;
        for (const auto& b : bodies_)
            if (b.movable()) out.push_back(&b);
        return out;
    }

    Scene with_pose(const std::string& id, const Pose2& p) const {
        Scene s = *this;
        for (auto& b : s.bodies_)
            if (b.id == id) {
                b.pose = p;
                return s;
            }
        throw Error("unknown body id '" + id + "'");
    }
    /// Copy with the given bodies deleted (goals of deleted bodies are kept).
    Scene without(const IdSet& ids) const {
        Scene s = *this;
        std::erase_if(s.bodies_, [&](const Body& b) { return ids.count(b.id) > 0; });
        return s;
    }
    /// Copy keeping only static walls and the robot.
    Scene statics_only() const {
        Scene s = *this;
        std::erase_if(s.bodies_, [](const Body& b) { return b.movable(); });
        return s;
    }

    friend bool operator==(const Scene&, const Scene&) = default;

  private:
    Aabb workspace_{0, 0, 10, 10};
    std::vector<Body> bodies_;
    std::map<std::string, Pose2> goals_;
    std::uint64_t seed_ = 0;
};

/// Footprint of `body_id` at `pose` intersects the workspace boundary, a static
/// wall or any body not in `ignore`. The body never collides with itself.
inline bool collides(const Scene& scene, const std::string& body_id, const Pose2& pose,
                     const IdSet& ignore = {}) {
    const Body& moving = scene.body(body_id);
    const Aabb fp = moving.footprint_at(pose);
    if (!scene.workspace().contains(fp)) return true;
    for (const auto& b : scene.bodies()) {
        if (b.id == body_id) continue;
        if (b.kind != BodyKind::StaticWall && ignore.count(b.id)) continue;
        if (interiors_overlap(fp, b.footprint())) return true;
    }
    return false;
}

/// Goal objects whose center is within `tol` of their goal.
inline IdSet verify_placements(const Scene& scene, double tol) {
    IdSet placed;
    for (const auto& [id, goal] : scene.goals()) {
        const Body* b = scene.find(id);
        if (b && distance(b->pose, goal) <= tol) placed.insert(id);
    }
    return placed;
}

/// 0.25 x the smallest side among goal objects.
inline double default_placement_tol(const Scene& scene) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& [id, g] : scene.goals())
        if (const Body* b = scene.find(id)) m = std::min({m, b->width, b->height});
    return std::isfinite(m) ? 0.25 * m : 0.05;
}

/// Throws Error describing the first violated scene invariant.
inline void validate(const Scene& scene) {
    const auto& ws = scene.workspace();
    if (!(ws.xmax > ws.xmin && ws.ymax > ws.ymin)) throw Error("degenerate workspace");
    IdSet ids;
    int robots = 0;
    for (const auto& b : scene.bodies()) {
        if (!(b.width > 0 && b.height > 0) || !std::isfinite(b.width) || !std::isfinite(b.height))
            throw Error("body '" + b.id + "' has non-positive size");
        if (!std::isfinite(b.pose.x) || !std::isfinite(b.pose.y))
            throw Error("body '" + b.id + "' has a non-finite pose");
        if (!ids.insert(b.id).second) throw Error("duplicate body id '" + b.id + "'");
        if (b.kind == BodyKind::Robot) ++robots;
        if (b.kind != BodyKind::StaticWall && !ws.contains(b.footprint()))
            throw Error("body '" + b.id + "' leaves the workspace");
    }
    if (robots != 1) throw Error("scene must contain exactly one robot");
    const auto& bodies = scene.bodies();
    for (std::size_t i = 0; i < bodies.size(); ++i)
        for (std::size_t j = i + 1; j < bodies.size(); ++j) {
            if (bodies[i].kind == BodyKind::StaticWall && bodies[j].kind == BodyKind::StaticWall)
                continue;
            if (interiors_overlap(bodies[i].footprint(), bodies[j].footprint()))
                throw Error("bodies '" + bodies[i].id + "' and '" + bodies[j].id + "' overlap");
        }
    for (const auto& [id, g] : scene.goals()) {
        const Body* b = scene.find(id);
        if (!b || !b->movable()) throw Error("goal refers to non-movable '" + id + "'");
        if (!ws.contains(b->footprint_at(g))) throw Error("goal of '" + id + "' leaves the workspace");
    }
}

}  // namespace mosegman
