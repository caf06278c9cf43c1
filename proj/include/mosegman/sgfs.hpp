#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mosegman/grid.hpp"
#include "mosegman/motion.hpp"
#include "mosegman/rrt.hpp"
#include "mosegman/scene.hpp"

namespace mosegman {

struct SgfsConfig {
    double c0 = 60.0;             // exploration bonus scale
    bool literal_exploration = false;  // c0 * sqrt(visits) instead of c0 / sqrt(1 + visits)
    int k_max = 4;                // relocation candidates for a weight-1 object
    int beam = 6;                 // B: node list capacity
    int iteration_limit = 12;     // expansions per critical set
    int stall_limit = 2;          // expansions without improvement before O_crit grows
    int alt_crit_limit = 3;       // alternative critical sets tried
    int max_crit_size = 4;        // subset enumeration cap
    double clearance_min = 1.0;   // cells
    double lom_scale = 3.0;       // LOM window side / footprint side
};

using ObjectWeights = std::map<std::string, double>;

struct Relocation {
    std::string object_id;
    Pose2 target;
};

struct RelocationCandidate {
    std::string object_id;
    Pose2 target;
    double clearance = 0.0;  // cells
    double match_score = 0.0;
};

struct SearchNode {
    int id = 0;
    int parent = -1;
    std::vector<Relocation> relocation_set;
    std::vector<MotionPlan> plans;  // one per relocation, root to here
    Scene scene;
    IdSet crit;                     // O_i
    ObjectWeights weights;
    double scene_score = 0.0;
    int visits = 0;
};

// ---------------------------------------------------------------------------
// Task feasibility and critical objects

/// Whether the task leg can be planned in `scene`: for a pick, some grasp pose
/// reachable by the robot; for a place, the full transport pipeline.
inline bool task_feasible(const Scene& scene, const TaskTrajectory& task, std::uint64_t seed,
                          const MotionConfig& cfg = {}) {
    if (!scene.find(task.object_id)) throw Error("task object '" + task.object_id + "' missing from scene");
    if (task.kind == TaskKind::Place) return transport(scene, task.object_id, task.target, seed, cfg).ok();
    const Body& obj = scene.body(task.object_id);
    const Body& robot = scene.robot();
    const auto cc = CollisionChecker::for_scene(scene, Shape::box(robot.width, robot.height), {});
    for (Side s : detail::sides_by_distance(robot, obj)) {
        const Pose2 g = obj.pose + grasp_offset(obj, robot.width, s);
        if (cc.free(g) && birrt(cc, robot.pose, g, mix_seed(seed, 11 + static_cast<int>(s)), cfg.rrt, rrt_step(scene, cfg)))
            return true;
    }
    return false;
}

/// Movable bodies (other than the task object) meeting the task cells, in
/// order of first contact along the trajectory.
inline std::vector<std::string> find_colliding(const Scene& scene, const TaskTrajectory& task,
                                               const RasterConfig& raster = {}) {
    if (task.cells.empty()) throw Error("find_colliding: empty task");
    const GridFrame f = GridFrame::over(scene.workspace(), raster.grid_cells);
    std::vector<std::pair<std::size_t, std::string>> hits;
    for (const auto& b : scene.bodies()) {
        if (!b.movable() || b.id == task.object_id) continue;
        Cell lo, hi;
        f.cell_range(b.footprint(), lo, hi);
        for (std::size_t i = 0; i < task.cells.size(); ++i) {
            const Cell& c = task.cells[i];
            if (c.row >= lo.row && c.row <= hi.row && c.col >= lo.col && c.col <= hi.col) {
                hits.emplace_back(i, b.id);
                break;
            }
        }
    }
    std::sort(hits.begin(), hits.end());
    std::vector<std::string> out;
    for (auto& [i, id] : hits) out.push_back(std::move(id));
    return out;
}

/// The (skip_count+1)-th subset of o_col, by increasing size and then
/// lexicographic index order, whose deletion makes the task feasible. Sizes are
/// enumerated up to max_size; past that, growing prefixes of o_col are tried.
inline std::optional<IdSet> select_critical(const Scene& scene, const TaskTrajectory& task,
                                            const std::vector<std::string>& o_col, int skip_count,
                                            std::uint64_t seed, const MotionConfig& cfg = {}, int max_size = 4) {
    if (o_col.empty()) throw Error("select_critical: no colliding objects");
    const int n = static_cast<int>(o_col.size());
    int found = 0;
    auto test = [&](const IdSet& subset) {
        if (!task_feasible(scene.without(subset), task, seed, cfg)) return false;
        return found++ == skip_count;
    };
    for (int k = 1; k <= std::min(n, max_size); ++k) {
        std::vector<int> idx(k);
        for (int i = 0; i < k; ++i) idx[i] = i;
        while (true) {
            IdSet subset;
            for (int i : idx) subset.insert(o_col[i]);
            if (test(subset)) return subset;
            int i = k - 1;
            while (i >= 0 && idx[i] == n - k + i) --i;
            if (i < 0) break;
            ++idx[i];
            for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    for (int k = max_size + 1; k <= n; ++k) {
        const IdSet prefix(o_col.begin(), o_col.begin() + k);
        if (test(prefix)) return prefix;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Scoring and weights

inline double score_scene(const Scene& scene, const TaskTrajectory& task, const RasterConfig& raster = {}) {
    const auto gom = rasterize_gom(scene, task.cells, raster);
    const auto reach = reachability(scene, gom, raster);
    double s = 0.0;
    for (std::size_t i = 0; i < gom.cells.cells.size(); ++i) s += gom.cells.cells[i] * reach.cells.cells[i];
    return s;
}

inline double exploration_bonus(int visits, double c0, bool literal) {
    if (c0 < 0) throw Error("exploration constant must be non-negative");
    return literal ? c0 * std::sqrt(static_cast<double>(visits)) : c0 / std::sqrt(1.0 + visits);
}

inline double score_node(const SearchNode& node, double c0, bool literal = false) {
    return node.scene_score + exploration_bonus(node.visits, c0, literal);
}

/// Score gain from deleting each object, max-normalized into [0,1].
inline ObjectWeights weight_objects(const Scene& scene, const IdSet& o_crit, const TaskTrajectory& task,
                                    const RasterConfig& raster = {}) {
    if (o_crit.empty()) throw Error("weight_objects: empty critical set");
    const double base = score_scene(scene, task, raster);
    ObjectWeights w;
    double top = 0.0;
    for (const auto& id : o_crit) {
        w[id] = score_scene(scene.without({id}), task, raster) - base;
        top = std::max(top, w[id]);
    }
    for (auto& [id, v] : w) v = top > 0 ? std::clamp(v / top, 0.0, 1.0) : 1.0;
    return w;
}

struct DecayResult {
    ObjectWeights weights;
    bool skipped = false;  // max_delta <= 0
};

inline DecayResult decay_weight(ObjectWeights weights, const std::string& relocated_id, double delta_score,
                                double max_delta) {
    auto it = weights.find(relocated_id);
    if (it == weights.end()) throw Error("decay_weight: '" + relocated_id + "' has no weight");
    if (!(max_delta > 0)) return {std::move(weights), true};
    it->second *= 1.0 - std::clamp(delta_score / max_delta, 0.0, 1.0);
    return {std::move(weights), false};
}

/// Adds the most frequently colliding object (ties: larger area, then id)
/// with weight proportional to its area relative to the largest critical object.
inline std::pair<IdSet, ObjectWeights> expand_crit(const Scene& scene, IdSet crit, ObjectWeights weights,
                                                   const std::map<std::string, int>& collision_counts) {
    const Body* pick = nullptr;
    int best = -1;
    for (const auto& [id, n] : collision_counts) {
        if (crit.count(id)) continue;
        const Body* b = scene.find(id);
        if (!b || !b->movable()) continue;
        if (n > best || (n == best && b->area() > pick->area())) {
            best = n;
            pick = b;
        }
    }
    if (!pick) return {std::move(crit), std::move(weights)};
    crit.insert(pick->id);
    double max_area = 0.0;
    for (const auto& id : crit)
        if (const Body* b = scene.find(id)) max_area = std::max(max_area, b->area());
    weights[pick->id] = std::clamp(pick->area() / max_area, 0.0, 1.0);
    return {std::move(crit), std::move(weights)};
}

// ---------------------------------------------------------------------------
// Relocation points

namespace detail {

inline std::vector<RelocationCandidate> relocation_window(const Scene& scene, const Body& obj, int k,
                                                          const std::vector<Cell>& task_cells, double scale,
                                                          const SgfsConfig& cfg, const RasterConfig& raster) {
    const GridFrame f = GridFrame::over(scene.workspace(), raster.grid_cells);
    const double res = f.resolution;
    auto occ = occupied_mask(scene, f, true, {obj.id});
    Grid<std::uint8_t> forbidden(f.rows, f.cols, 0);
    for (const Cell& c : task_cells)
        if (f.inside(c)) forbidden[c] = 1;
    for (const auto& [gid, g] : scene.goals()) {
        if (gid == obj.id) continue;
        mark_box(f, scene.body(gid).footprint_at(g), forbidden);
    }
    // window
    const Aabb win_box = Aabb::centered(obj.pose, scale * obj.width, scale * obj.height);
    Cell lo, hi;
    f.cell_range(win_box, lo, hi);
    const int wr = hi.row - lo.row + 1, wc = hi.col - lo.col + 1;
    if (wr <= 0 || wc <= 0) return {};
    Grid<std::uint8_t> lom(wr, wc, 0);
    for (int r = 0; r < wr; ++r)
        for (int c = 0; c < wc; ++c) lom.at(r, c) = occ.at(lo.row + r, lo.col + c);
    const auto clear = edt(lom);
    const int mh = std::max(1, static_cast<int>(std::ceil(obj.height / res - 1e-9)));
    const int mw = std::max(1, static_cast<int>(std::ceil(obj.width / res - 1e-9)));

    std::vector<RelocationCandidate> all;
    for (int r = 0; r + mh <= wr; ++r)
        for (int c = 0; c + mw <= wc; ++c) {
            int fit = 0;
            double cl = 1e300;
            for (int i = 0; i < mh; ++i)
                for (int j = 0; j < mw; ++j) {
                    const bool ok = !lom.at(r + i, c + j) && !forbidden.at(lo.row + r + i, lo.col + c + j);
                    fit += ok;
                    cl = std::min(cl, clear.cells.at(r + i, c + j));
                }
            const double match = static_cast<double>(fit) / (mh * mw);
            if (match < 1.0 || cl < cfg.clearance_min) continue;
            const Pose2 p{f.origin.x + (lo.col + c + 0.5 * mw) * res, f.origin.y + (lo.row + r + 0.5 * mh) * res};
            if (distance(p, obj.pose) < 1e-9) continue;
            all.push_back({obj.id, p, cl, match});
        }
    std::stable_sort(all.begin(), all.end(), [&](const auto& a, const auto& b) {
        if (a.clearance != b.clearance) return a.clearance > b.clearance;
        return distance(a.target, obj.pose) < distance(b.target, obj.pose);
    });
    // keep candidates at least one footprint apart so the k picks differ
    const double sep = std::max(obj.width, obj.height);
    std::vector<RelocationCandidate> out;
    for (const auto& c : all) {
        if (static_cast<int>(out.size()) >= k) break;
        if (collides(scene, obj.id, c.target, {obj.id})) continue;
        bool near = false;
        for (const auto& o : out) near = near || distance(o.target, c.target) < sep;
        if (!near) out.push_back(c);
    }
    return out;
}

}  // namespace detail

/// Up to k collision-free placements for `object_id` inside a local window,
/// clear of the task cells and of other objects' goals, best clearance first.
inline std::vector<RelocationCandidate> gen_relocation_points(const Scene& scene, const std::string& object_id, int k,
                                                              const std::vector<Cell>& task_cells = {},
                                                              const SgfsConfig& cfg = {},
                                                              const RasterConfig& raster = {}) {
    if (k < 1) throw Error("gen_relocation_points: k must be >= 1");
    const Body& obj = scene.body(object_id);
    auto out = detail::relocation_window(scene, obj, k, task_cells, cfg.lom_scale, cfg, raster);
    if (out.empty()) out = detail::relocation_window(scene, obj, k, task_cells, 2 * cfg.lom_scale, cfg, raster);
    return out;
}

/// Object counts as reachable when some free grasp pose connects in a straight
/// line to the center of a flood-filled cell at most one cell away.
inline bool object_reachable(const Scene& scene, const std::string& object_id, const RasterConfig& raster = {}) {
    const Body& obj = scene.body(object_id);
    const Body& robot = scene.robot();
    const auto gom = rasterize_gom(scene, {}, raster);
    const auto reach = reachability(scene, gom, raster);
    const auto cc = CollisionChecker::for_scene(scene, Shape::box(robot.width, robot.height), {});
    for (Side s : kSides) {
        const Pose2 g = obj.pose + grasp_offset(obj, robot.width, s);
        if (!cc.free(g)) continue;
        const Cell c = gom.frame.cell_of(g);
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                const Cell n{c.row + dr, c.col + dc};
                if (gom.frame.inside(n) && reach.reached[n] && cc.segment_free(gom.frame.center(n), g)) return true;
            }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Search

struct SgfsResult {
    bool success = false;
    std::vector<Relocation> relocations;
    std::vector<MotionPlan> plans;
    Scene scene;
    IdSet relocated;  // distinct ids moved
    int expansions = 0;
    int crit_sets_tried = 0;
    std::vector<std::string> crit_expansions;  // ids added by expand_crit, in order
    std::vector<std::string> trace;            // one line per expansion
};

/// Best-first search over relocations of the critical objects until the task
/// leg becomes plannable. Alternative critical sets are tried on exhaustion.
inline SgfsResult sgfs(const Scene& scene, const TaskTrajectory& task, std::uint64_t seed,
                       const SgfsConfig& cfg = {}, const MotionConfig& mcfg = {}) {
    SgfsResult res;
    res.scene = scene;
    if (task_feasible(scene, task, mix_seed(seed, 1), mcfg)) {
        res.success = true;
        return res;
    }
    const auto o_col = find_colliding(scene, task, mcfg.raster);
    if (o_col.empty()) return res;
    std::map<std::string, int> collision_counts;
    for (int alt = 0; alt < cfg.alt_crit_limit; ++alt) {
        auto crit = select_critical(scene, task, o_col, alt, mix_seed(seed, 2), mcfg, cfg.max_crit_size);
        if (!crit) break;
        ++res.crit_sets_tried;
        std::vector<SearchNode> nodes;
        SearchNode root;
        root.scene = scene;
        root.crit = *crit;
        root.weights = weight_objects(scene, *crit, task, mcfg.raster);
        root.scene_score = score_scene(scene, task, mcfg.raster);
        nodes.push_back(root);
        std::vector<int> open{0};
        double best_seen = root.scene_score;
        int stall = 0;
        for (int it = 0; it < cfg.iteration_limit && !open.empty(); ++it) {
            ++res.expansions;
            auto best_it = std::max_element(open.begin(), open.end(), [&](int a, int b) {
                const double sa = score_node(nodes[a], cfg.c0, cfg.literal_exploration);
                const double sb = score_node(nodes[b], cfg.c0, cfg.literal_exploration);
                return sa != sb ? sa < sb : a > b;
            });
            const int ni = *best_it;
            std::ostringstream tr;
            tr << "expand node=" << ni << " alt=" << alt << " score=" << nodes[ni].scene_score
               << " visits=" << nodes[ni].visits;
            ++nodes[ni].visits;
            const std::uint64_t node_seed = mix_seed(seed, 1000 + 97 * static_cast<std::uint64_t>(ni) + alt);
            if (ni != 0 && task_feasible(nodes[ni].scene, task, mix_seed(node_seed, 1), mcfg)) {
                tr << " feasible";
                res.trace.push_back(tr.str());
                const SearchNode& goal = nodes[ni];
                res.success = true;
                res.relocations = goal.relocation_set;
                res.plans = goal.plans;
                res.scene = goal.scene;
                for (const auto& r : goal.relocation_set) res.relocated.insert(r.object_id);
                return res;
            }
            const SearchNode parent = nodes[ni];
            std::vector<SearchNode> children;
            // objects that scored nothing at the root may matter once others moved
            std::optional<ObjectWeights> fresh;
            for (const auto& oid : parent.crit) {
                double w = parent.weights.count(oid) ? parent.weights.at(oid) : 0.0;
                const bool moved_before = std::any_of(parent.relocation_set.begin(), parent.relocation_set.end(),
                                                      [&](const Relocation& r) { return r.object_id == oid; });
                if (w <= 0 && !moved_before && ni != 0) {
                    if (!fresh) fresh = weight_objects(parent.scene, parent.crit, task, mcfg.raster);
                    w = fresh->at(oid);
                }
                if (w <= 0) continue;
                if (!object_reachable(parent.scene, oid, mcfg.raster)) {
                    if (auto pick = relaxed_pick_task(parent.scene, oid, mix_seed(node_seed, hash_id(oid)), mcfg))
                        for (const auto& blocker : find_colliding(parent.scene, *pick, mcfg.raster))
                            if (blocker != task.object_id) ++collision_counts[blocker];
                    tr << " unreachable=" << oid;
                    continue;
                }
                const int k = std::min(cfg.k_max, static_cast<int>(std::ceil(w * cfg.k_max - 1e-12)));
                const auto cands = gen_relocation_points(parent.scene, oid, k, task.cells, cfg, mcfg.raster);
                const double max_delta =
                    score_scene(parent.scene.without({oid}), task, mcfg.raster) - parent.scene_score;
                for (std::size_t ci = 0; ci < cands.size(); ++ci) {
                    const auto& cand = cands[ci];
                    auto moved = transport(parent.scene, oid, cand.target, mix_seed(node_seed, hash_id(oid) + ci), mcfg);
                    if (!moved.ok()) {
                        if (moved.task)
                            for (const auto& blocker : find_colliding(parent.scene, *moved.task, mcfg.raster))
                                if (blocker != task.object_id) ++collision_counts[blocker];
                        continue;
                    }
                    SearchNode child;
                    child.parent = ni;
                    child.relocation_set = parent.relocation_set;
                    child.relocation_set.push_back({oid, cand.target});
                    child.plans = parent.plans;
                    child.plans.push_back(std::move(*moved.plan));
                    child.scene = std::move(moved.scene);
                    child.crit = parent.crit;
                    child.scene_score = score_scene(child.scene, task, mcfg.raster);
                    child.weights =
                        decay_weight(parent.weights, oid, child.scene_score - parent.scene_score, max_delta).weights;
                    if (std::all_of(child.weights.begin(), child.weights.end(), [](auto& kv) { return kv.second <= 0; }))
                        for (auto& [id, v] : child.weights) v = 1.0;
                    tr << " child=" << oid << "@(" << cand.target.x << "," << cand.target.y << ")";
                    children.push_back(std::move(child));
                }
            }
            std::stable_sort(children.begin(), children.end(),
                             [](const SearchNode& a, const SearchNode& b) { return a.scene_score > b.scene_score; });
            if (static_cast<int>(children.size()) > cfg.beam) children.resize(cfg.beam);
            double top_child = -1e300;
            for (auto& c : children) {
                top_child = std::max(top_child, c.scene_score);
                c.id = static_cast<int>(nodes.size());
                open.push_back(c.id);
                nodes.push_back(std::move(c));
            }
            std::stable_sort(open.begin(), open.end(), [&](int a, int b) {
                return score_node(nodes[a], cfg.c0, cfg.literal_exploration) >
                       score_node(nodes[b], cfg.c0, cfg.literal_exploration);
            });
            if (static_cast<int>(open.size()) > cfg.beam) open.resize(cfg.beam);
            if (top_child > best_seen + 1e-9) {
                best_seen = top_child;
                stall = 0;
            } else if (++stall >= cfg.stall_limit) {
                stall = 0;
                const std::size_t before = nodes[ni].crit.size();
                auto [grown, gw] = expand_crit(nodes[ni].scene, nodes[ni].crit, nodes[ni].weights, collision_counts);
                if (grown.size() > before) {
                    std::string added;
                    for (const auto& id : grown)
                        if (!nodes[ni].crit.count(id)) added = id;
                    res.crit_expansions.push_back(added);
                    tr << " expand_crit=" << added;
                    for (int oi : open) {
                        nodes[oi].crit.insert(added);
                        nodes[oi].weights[added] = gw.at(added);
                    }
                }
            }
            res.trace.push_back(tr.str());
        }
    }
    return res;
}

}  // namespace mosegman
