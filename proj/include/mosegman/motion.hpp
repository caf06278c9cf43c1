#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mosegman/geometry.hpp"
#include "mosegman/grid.hpp"
#include "mosegman/rrt.hpp"
#include "mosegman/scene.hpp"

namespace mosegman {

/// Face of an object the robot presses against.
enum class Side { N, E, S, W };

inline constexpr std::array<Side, 4> kSides{Side::N, Side::E, Side::S, Side::W};

inline const char* to_string(Side s) {
    switch (s) {
        case Side::N: return "N";
        case Side::E: return "E";
        case Side::S: return "S";
        case Side::W: return "W";
    }
    return "?";
}

inline Pose2 side_direction(Side s) {
    switch (s) {
        case Side::N: return {0, 1};
        case Side::E: return {1, 0};
        case Side::S: return {0, -1};
        case Side::W: return {-1, 0};
    }
    return {};
}

/// Robot center minus object center when the robot is flush against `side`.
inline Pose2 grasp_offset(const Body& object, double robot_side, Side s) {
    const Pose2 d = side_direction(s);
    return {d.x * (object.width + robot_side) / 2, d.y * (object.height + robot_side) / 2};
}

/// Center of the object's face on `side` when the object sits at `pose`.
inline Pose2 contact_on(const Body& object, const Pose2& pose, Side s) {
    const Pose2 d = side_direction(s);
    return {pose.x + d.x * object.width / 2, pose.y + d.y * object.height / 2};
}

/// Robot and object moving as one rigid pair, referenced at the robot center.
inline Shape carry_shape(const Body& object, const Body& robot, Side s) {
    const Pose2 off = grasp_offset(object, robot.width, s);
    return Shape{{{Pose2{}, robot.width, robot.height}, {Pose2{-off.x, -off.y}, object.width, object.height}}};
}

struct ObjectPath {
    std::string object_id;
    std::vector<Pose2> waypoints;

    double length() const { return polyline_length(waypoints); }
};

struct Subgoal {
    Pose2 object_pose;
    Pose2 contact_point;
    Side grasp_side = Side::N;

    friend bool operator==(const Subgoal&, const Subgoal&) = default;
};

struct PickPlacePair {
    Path pick;            // robot alone, ends at the grasp pose
    Path place;           // robot carrying the object
    Subgoal subgoal;
    Pose2 object_offset;  // object center minus robot center while attached
};

struct MotionPlan {
    std::string object_id;
    std::vector<PickPlacePair> pairs;

    std::size_t pnp_count() const { return pairs.size(); }
    double travel_distance() const {
        double d = 0;
        for (const auto& p : pairs) d += p.pick.length() + p.place.length();
        return d;
    }
};

struct MotionConfig {
    RrtConfig rrt;
    RasterConfig raster;
    double kappa = 2.0;
    double step_min = 0.5;  // x robot side
    double step_max = 4.0;  // x robot side
    double epsilon = 0.5;   // x robot side
    bool refine = true;
};

inline double rrt_step(const Scene& scene, const MotionConfig& cfg) {
    return cfg.rrt.step > 0 ? cfg.rrt.step : 0.5 * scene.robot_side();
}

/// Grasp side whose flush robot pose is collision-free, trying `preferred`
/// first and then the remaining sides by distance from the robot.
inline std::optional<Subgoal> solve_pick_config(const Scene& scene, const std::string& object_id,
                                                std::optional<Side> preferred = std::nullopt) {
    const Body& obj = scene.body(object_id);
    if (!obj.movable()) throw Error("'" + object_id + "' is not movable");
    const Body& robot = scene.robot();
    std::vector<Side> order(kSides.begin(), kSides.end());
    std::stable_sort(order.begin(), order.end(), [&](Side a, Side b) {
        if (preferred && (a == *preferred) != (b == *preferred)) return a == *preferred;
        return distance(robot.pose, obj.pose + grasp_offset(obj, robot.width, a)) <
               distance(robot.pose, obj.pose + grasp_offset(obj, robot.width, b));
    });
    for (Side s : order) {
        const Pose2 g = obj.pose + grasp_offset(obj, robot.width, s);
        if (!collides(scene, robot.id, g, {robot.id})) return Subgoal{obj.pose, contact_on(obj, obj.pose, s), s};
    }
    return std::nullopt;
}

/// Object-alone path to `target`. By default only static walls are obstacles
/// (the auxiliary scene with every other movable removed).
inline std::optional<ObjectPath> plan_object_path(const Scene& scene, const std::string& object_id, const Pose2& target,
                                                  std::uint64_t seed, const MotionConfig& cfg = {},
                                                  bool include_movables = false) {
    const Body& obj = scene.body(object_id);
    if (!scene.workspace().contains(target)) throw Error("target outside workspace");
    const auto cc = CollisionChecker::for_scene(scene, Shape::box(obj.width, obj.height), {object_id}, include_movables);
    auto path = birrt(cc, obj.pose, target, seed, cfg.rrt, rrt_step(scene, cfg));
    if (!path) return std::nullopt;
    return ObjectPath{object_id, std::move(path->waypoints)};
}

/// Lateral slack (meters) the object has at each cell against static walls.
struct StaticClearance {
    GridFrame frame;
    ClearanceMap map;
    double half_extent = 0.0;

    StaticClearance(const Scene& scene, const Body& obj, const RasterConfig& raster)
        : frame(GridFrame::over(scene.workspace(), raster.grid_cells)),
          map(edt(detail::occupied_mask(scene, frame, false))),
          half_extent(0.5 * std::min(obj.width, obj.height)) {}

    double at(const Pose2& p) const {
        const Cell c = frame.clamp(frame.cell_of(p));
        return std::max(0.0, (map.cells[c] - 0.5) * frame.resolution - half_extent);
    }
};

struct SubgoalSelection {
    std::vector<Subgoal> subgoals;
    int failed_index = -1;  // subgoal without any feasible grasp side

    bool ok() const { return failed_index < 0; }
};

namespace detail {

struct CarryCheckers {
    std::array<CollisionChecker, 4> by_side;

    CarryCheckers(const Scene& scene, const Body& obj)
        : by_side{make(scene, obj, Side::N), make(scene, obj, Side::E), make(scene, obj, Side::S),
                  make(scene, obj, Side::W)} {}

    static CollisionChecker make(const Scene& scene, const Body& obj, Side s) {
        return CollisionChecker::for_scene(scene, carry_shape(obj, scene.robot(), s), {obj.id});
    }
    const CollisionChecker& operator[](Side s) const { return by_side[static_cast<int>(s)]; }
};

}  // namespace detail

/// Adaptive subgoals along mu: arc-length steps clamp(kappa * slack, step_min,
/// step_max) so constrained stretches get denser subgoals. The first subgoal is
/// mu's start (carrying `start_side`), the last is mu's end. Each later subgoal
/// gets the grasp side used to carry the object into it, preferring to keep the
/// previous side, then the side closest to where the robot already is.
inline SubgoalSelection select_subgoals(const ObjectPath& mu, const Scene& scene, const MotionConfig& cfg = {},
                                        std::optional<Side> start_side = std::nullopt) {
    if (mu.waypoints.empty()) throw Error("select_subgoals: empty object path");
    const Body& obj = scene.body(mu.object_id);
    const Body& robot = scene.robot();
    const double rs = robot.width;
    const double dmin = cfg.step_min * rs, dmax = cfg.step_max * rs;
    const StaticClearance clearance(scene, obj, cfg.raster);

    std::vector<Pose2> poses{mu.waypoints.front()};
    const double total = mu.length();
    double s = 0.0;
    while (total - s > 1e-9) {
        const double step = std::clamp(cfg.kappa * clearance.at(point_at_arclength(mu.waypoints, s)), dmin, dmax);
        s += step;
        if (total - s <= 1e-9) s = total;
        poses.push_back(s >= total ? mu.waypoints.back() : point_at_arclength(mu.waypoints, s));
    }
    SubgoalSelection out;
    if (poses.size() == 1) {
        const Side side = start_side.value_or(Side::N);
        out.subgoals.push_back({poses.front(), contact_on(obj, poses.front(), side), side});
        return out;
    }

    const detail::CarryCheckers carry(scene, obj);
    Side prev = start_side.value_or(Side::N);
    if (!start_side) {
        if (auto pick = solve_pick_config(scene.with_pose(obj.id, poses.front()), obj.id)) prev = pick->grasp_side;
    }
    out.subgoals.push_back({poses.front(), contact_on(obj, poses.front(), prev), prev});
    for (std::size_t k = 1; k < poses.size(); ++k) {
        const Pose2& from = poses[k - 1];
        const Pose2& to = poses[k];
        const Pose2 robot_at = from + grasp_offset(obj, rs, prev);
        std::vector<Side> order(kSides.begin(), kSides.end());
        std::stable_sort(order.begin(), order.end(), [&](Side a, Side b) {
            if ((a == prev) != (b == prev)) return a == prev;
            return distance(robot_at, from + grasp_offset(obj, rs, a)) <
                   distance(robot_at, from + grasp_offset(obj, rs, b));
        });
        // straight carry now; among new sides, the one that stays straight longest
        auto run = [&](Side sd) {
            const Pose2 off = grasp_offset(obj, rs, sd);
            std::size_t j = k;
            while (j < poses.size() && carry[sd].segment_free(poses[j - 1] + off, poses[j] + off)) ++j;
            return j - k;
        };
        std::optional<Side> chosen;
        std::size_t best_run = 0;
        for (Side sd : order) {
            const std::size_t r = run(sd);
            if (r == 0) continue;
            if (sd == prev) {
                chosen = sd;
                break;
            }
            if (r > best_run) {
                best_run = r;
                chosen = sd;
            }
        }
        if (!chosen)
            for (Side sd : order) {
                const Pose2 off = grasp_offset(obj, rs, sd);
                if (carry[sd].free(from + off) && carry[sd].free(to + off)) {
                    chosen = sd;
                    break;
                }
            }
        if (!chosen) {
            out.failed_index = static_cast<int>(k);
            return out;
        }
        out.subgoals.push_back({to, contact_on(obj, to, *chosen), *chosen});
        prev = *chosen;
    }
    return out;
}

/// Merges consecutive subgoals k, k+1 when the robot would release the object
/// at k and re-grasp it within `epsilon` of the same contact point, and the
/// direct carry from k-1 to k+1 with k+1's grasp is collision-free. First and
/// last subgoals are always kept.
inline std::vector<Subgoal> refine_subgoals(std::vector<Subgoal> subgoals, const Scene& scene,
                                            const std::string& object_id, double epsilon) {
    if (!(epsilon > 0)) throw Error("refine_subgoals: epsilon must be positive");
    if (subgoals.size() <= 2) return subgoals;
    const Body& obj = scene.body(object_id);
    const detail::CarryCheckers carry(scene, obj);
    const double rs = scene.robot_side();
    std::size_t k = 1;
    while (k + 1 < subgoals.size()) {
        const Subgoal& here = subgoals[k];
        const Subgoal& next = subgoals[k + 1];
        const Pose2 released = contact_on(obj, here.object_pose, here.grasp_side);
        const Pose2 regrasped = contact_on(obj, here.object_pose, next.grasp_side);
        const Pose2 off = grasp_offset(obj, rs, next.grasp_side);
        if (distance(released, regrasped) < epsilon &&
            carry[next.grasp_side].segment_free(subgoals[k - 1].object_pose + off, next.object_pose + off)) {
            subgoals.erase(subgoals.begin() + static_cast<long>(k));
        } else {
            ++k;
        }
    }
    return subgoals;
}

struct PickPlaceOutcome {
    std::optional<MotionPlan> plan;
    Scene scene;             // successor scene on success, input scene otherwise
    int failed_subgoal = -1;
    bool failed_on_pick = false;
};

/// Executes the subgoals as pick/place pairs. Each pick moves the robot alone
/// to the grasp pose; each place carries the object rigidly into the subgoal.
/// Subgoals that would not move the object are skipped.
inline PickPlaceOutcome plan_pick_place(const Scene& scene, const std::string& object_id,
                                        const std::vector<Subgoal>& subgoals, const Pose2& robot_start,
                                        std::uint64_t seed, const MotionConfig& cfg = {}) {
    if (subgoals.empty()) throw Error("plan_pick_place: no subgoals");
    const Body& robot = scene.robot();
    Scene cur = scene.with_pose(robot.id, robot_start);
    PickPlaceOutcome out{std::nullopt, scene};
    MotionPlan plan{object_id, {}};
    Pose2 robot_at = robot_start;
    const double step = rrt_step(scene, cfg);
    for (std::size_t k = 0; k < subgoals.size(); ++k) {
        const Subgoal& sg = subgoals[k];
        const Body& obj = cur.body(object_id);
        if (distance(obj.pose, sg.object_pose) < 1e-12) continue;
        const Pose2 off = grasp_offset(obj, robot.width, sg.grasp_side);
        const Pose2 object_offset{-off.x, -off.y};
        const Pose2 grasp = obj.pose + off;

        std::optional<Path> pick;
        if (robot_at == grasp) {
            pick = Path{{robot_at, grasp}};
        } else {
            const auto cc = CollisionChecker::for_scene(cur, Shape::box(robot.width, robot.height), {});
            pick = birrt(cc, robot_at, grasp, mix_seed(seed, 2 * k), cfg.rrt, step);
        }
        if (!pick) {
            out.failed_subgoal = static_cast<int>(k);
            out.failed_on_pick = true;
            return out;
        }
        const Pose2 robot_end = sg.object_pose + off;
        const auto carry = CollisionChecker::for_scene(cur, carry_shape(obj, robot, sg.grasp_side), {object_id});
        auto place = birrt(carry, grasp, robot_end, mix_seed(seed, 2 * k + 1), cfg.rrt, step);
        if (!place) {
            out.failed_subgoal = static_cast<int>(k);
            return out;
        }
        const Pose2 object_end = place->back() + object_offset;
        plan.pairs.push_back({std::move(*pick), std::move(*place),
                              Subgoal{object_end, contact_on(obj, object_end, sg.grasp_side), sg.grasp_side},
                              object_offset});
        robot_at = robot_end;
        cur = cur.with_pose(object_id, object_end).with_pose(robot.id, robot_end);
    }
    out.plan = std::move(plan);
    out.scene = std::move(cur);
    return out;
}

enum class TaskKind { Pick, Place };

/// The pick path or object placement path whose feasibility a search restores.
/// `path` is the relaxed plan (movable obstacles ignored) swept by `shape`.
struct TaskTrajectory {
    TaskKind kind = TaskKind::Place;
    std::string object_id;
    std::vector<Cell> cells;
    std::vector<Pose2> path;
    Shape shape;
    Pose2 target;
};

enum class FailStage { None, Pick, Place, Static };

struct TransportOutcome {
    std::optional<MotionPlan> plan;
    Scene scene;
    FailStage stage = FailStage::None;
    std::optional<TaskTrajectory> task;

    bool ok() const { return plan.has_value(); }
};

inline TaskTrajectory make_task(const Scene& scene, TaskKind kind, const std::string& object_id,
                                std::vector<Pose2> path, Shape shape, const RasterConfig& raster) {
    TaskTrajectory t;
    t.kind = kind;
    t.object_id = object_id;
    t.target = path.back();
    const GridFrame f = GridFrame::over(scene.workspace(), raster.grid_cells);
    t.cells = sweep_cells(f, shape, path);
    t.path = std::move(path);
    t.shape = std::move(shape);
    return t;
}

namespace detail {

inline std::vector<Side> sides_by_distance(const Body& robot, const Body& obj) {
    std::vector<Side> sides(kSides.begin(), kSides.end());
    std::stable_sort(sides.begin(), sides.end(), [&](Side a, Side b) {
        return distance(robot.pose, obj.pose + grasp_offset(obj, robot.width, a)) <
               distance(robot.pose, obj.pose + grasp_offset(obj, robot.width, b));
    });
    return sides;
}

}  // namespace detail

/// Robot path to a grasp pose of `object_id` with only walls and the object
/// itself as obstacles. nullopt when even that is impossible.
inline std::optional<TaskTrajectory> relaxed_pick_task(const Scene& scene, const std::string& object_id,
                                                       std::uint64_t seed, const MotionConfig& cfg = {}) {
    const Body& obj = scene.body(object_id);
    const Body& robot = scene.robot();
    const Shape robot_box = Shape::box(robot.width, robot.height);
    std::vector<Aabb> obstacles{obj.footprint()};
    for (const auto& b : scene.bodies())
        if (b.kind == BodyKind::StaticWall) obstacles.push_back(b.footprint());
    const CollisionChecker relaxed(scene.workspace(), robot_box, obstacles);
    for (Side s : detail::sides_by_distance(robot, obj)) {
        const Pose2 g = obj.pose + grasp_offset(obj, robot.width, s);
        if (auto p = birrt(relaxed, robot.pose, g, mix_seed(seed, 21 + static_cast<int>(s)), cfg.rrt,
                           rrt_step(scene, cfg)))
            return make_task(scene, TaskKind::Pick, object_id, p->waypoints, robot_box, cfg.raster);
    }
    return std::nullopt;
}

/// Full pick-and-place pipeline for moving `object_id` to `target`: pick
/// config, pick path, object path, adaptive subgoals, optional refinement and
/// the pick/place legs. On failure reports the blocked task trajectory.
inline TransportOutcome transport(const Scene& scene, const std::string& object_id, const Pose2& target,
                                  std::uint64_t seed, const MotionConfig& cfg = {}) {
    const Body& obj = scene.body(object_id);
    const Body& robot = scene.robot();
    const double step = rrt_step(scene, cfg);
    TransportOutcome out;
    out.scene = scene;
    if (distance(obj.pose, target) < 1e-12) {
        out.plan = MotionPlan{object_id, {}};
        return out;
    }
    const Shape robot_box = Shape::box(robot.width, robot.height);

    // pick: some free grasp pose reachable by the robot
    const std::vector<Side> sides = detail::sides_by_distance(robot, obj);
    std::optional<Side> pick_side;
    {
        const auto cc = CollisionChecker::for_scene(scene, robot_box, {});
        for (Side s : sides) {
            const Pose2 g = obj.pose + grasp_offset(obj, robot.width, s);
            if (!cc.free(g)) continue;
            if (birrt(cc, robot.pose, g, mix_seed(seed, 11 + static_cast<int>(s)), cfg.rrt, step)) {
                pick_side = s;
                break;
            }
        }
    }
    if (!pick_side) {
        out.task = relaxed_pick_task(scene, object_id, seed, cfg);
        out.stage = out.task ? FailStage::Pick : FailStage::Static;
        return out;
    }

    const Shape swept = Shape::box(obj.width + 2 * robot.width, obj.height + 2 * robot.height);
    auto fail_place = [&](std::vector<Pose2> path) {
        out.stage = FailStage::Place;
        out.task = make_task(scene, TaskKind::Place, object_id, std::move(path), swept, cfg.raster);
        return out;
    };
    auto mu = plan_object_path(scene, object_id, target, mix_seed(seed, 31), cfg, true);
    if (!mu) {
        auto aux = plan_object_path(scene, object_id, target, mix_seed(seed, 32), cfg, false);
        if (!aux) {
            out.stage = FailStage::Static;
            return out;
        }
        return fail_place(aux->waypoints);
    }
    auto sel = select_subgoals(*mu, scene, cfg, pick_side);
    if (!sel.ok()) return fail_place(mu->waypoints);
    auto subgoals = cfg.refine ? refine_subgoals(sel.subgoals, scene, object_id, cfg.epsilon * robot.width)
                               : sel.subgoals;
    auto pp = plan_pick_place(scene, object_id, subgoals, robot.pose, mix_seed(seed, 41), cfg);
    if (!pp.plan) return fail_place(mu->waypoints);
    out.plan = std::move(pp.plan);
    out.scene = std::move(pp.scene);
    return out;
}

}  // namespace mosegman
