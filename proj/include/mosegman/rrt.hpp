#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mosegman/geometry.hpp"
#include "mosegman/scene.hpp"

namespace mosegman {

/// splitmix64 finalizer; derives independent sub-seeds from (seed, tag).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_id(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
    return h;
}

struct Path {
    std::vector<Pose2> waypoints;

    double length() const { return polyline_length(waypoints); }
    const Pose2& front() const { return waypoints.front(); }
    const Pose2& back() const { return waypoints.back(); }
    friend bool operator==(const Path&, const Path&) = default;
};

struct RrtConfig {
    double goal_bias = 0.1;
    double step = 0.0;  // <= 0: half the robot side
    int max_iters = 5000;
    int shortcut_attempts = 100;
};

/// Exact collision queries for a translating Shape among fixed boxes. Each
/// obstacle is grown by every shape part (Minkowski sum), so a pose test is a
/// point-in-box test and a straight motion is a segment-vs-box test.
class CollisionChecker {
  public:
    CollisionChecker(const Aabb& workspace, Shape shape, const std::vector<Aabb>& obstacles)
        : shape_(std::move(shape)) {
        valid_ = {-1e300, -1e300, 1e300, 1e300};
        for (const auto& part : shape_.parts) {
            const double hw = part.width / 2, hh = part.height / 2;
            valid_.xmin = std::max(valid_.xmin, workspace.xmin + hw - part.offset.x);
            valid_.ymin = std::max(valid_.ymin, workspace.ymin + hh - part.offset.y);
            valid_.xmax = std::min(valid_.xmax, workspace.xmax - hw - part.offset.x);
            valid_.ymax = std::min(valid_.ymax, workspace.ymax - hh - part.offset.y);
            for (const auto& o : obstacles) {
                Aabb g = o.inflated(hw, hh);
                g = {g.xmin - part.offset.x, g.ymin - part.offset.y, g.xmax - part.offset.x, g.ymax - part.offset.y};
                grown_.push_back(g);
            }
        }
    }

    /// Obstacles = walls plus (optionally) movable bodies, minus `ignore`. The
    /// robot is never an obstacle: it is either the moving shape or about to move.
    static CollisionChecker for_scene(const Scene& scene, Shape shape, const IdSet& ignore,
                                      bool include_movables = true) {
        std::vector<Aabb> obstacles;
        for (const auto& b : scene.bodies()) {
            if (b.kind == BodyKind::Robot) continue;
            if (b.kind != BodyKind::StaticWall && (!include_movables || ignore.count(b.id))) continue;
            obstacles.push_back(b.footprint());
        }
        return CollisionChecker(scene.workspace(), std::move(shape), obstacles);
    }

    const Shape& shape() const { return shape_; }
    const Aabb& sample_region() const { return valid_; }

    bool free(const Pose2& p) const {
        if (p.x < valid_.xmin - kContactEps || p.x > valid_.xmax + kContactEps || p.y < valid_.ymin - kContactEps ||
            p.y > valid_.ymax + kContactEps)
            return false;
        for (const auto& g : grown_)
            if (p.x > g.xmin + kContactEps && p.x < g.xmax - kContactEps && p.y > g.ymin + kContactEps &&
                p.y < g.ymax - kContactEps)
                return false;
        return true;
    }

    bool segment_free(const Pose2& a, const Pose2& b) const {
        if (!free(a) || !free(b)) return false;
        for (const auto& g : grown_)
            if (segment_hits_box(a, b, g)) return false;
        return true;
    }

    bool path_free(const std::vector<Pose2>& pts) const {
        if (pts.empty()) return false;
        if (pts.size() == 1) return free(pts.front());
        for (std::size_t i = 1; i < pts.size(); ++i)
            if (!segment_free(pts[i - 1], pts[i])) return false;
        return true;
    }

  private:
    Shape shape_;
    Aabb valid_;
    std::vector<Aabb> grown_;
};

namespace detail {

struct Tree {
    std::vector<Pose2> nodes;
    std::vector<int> parent;

    int nearest(const Pose2& q) const {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
            const double dx = nodes[i].x - q.x, dy = nodes[i].y - q.y;
            const double d = dx * dx + dy * dy;
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        return best;
    }
    int add(const Pose2& p, int par) {
        nodes.push_back(p);
        parent.push_back(par);
        return static_cast<int>(nodes.size()) - 1;
    }
    std::vector<Pose2> branch(int i) const {
        std::vector<Pose2> out;
        for (; i >= 0; i = parent[i]) out.push_back(nodes[i]);
        return out;
    }
};

enum class Extend { Trapped, Advanced, Reached };

inline Extend extend(Tree& t, const CollisionChecker& cc, const Pose2& q, double step, int& added) {
    const int n = t.nearest(q);
    const Pose2 from = t.nodes[n];
    const double d = distance(from, q);
    const bool reach = d <= step;
    const Pose2 to = reach ? q : lerp(from, q, step / d);
    if (d == 0.0) {
        added = n;
        return Extend::Reached;
    }
    if (!cc.segment_free(from, to)) return Extend::Trapped;
    added = t.add(to, n);
    return reach ? Extend::Reached : Extend::Advanced;
}

inline void drop_duplicates(std::vector<Pose2>& pts) {
    std::vector<Pose2> out;
    for (const auto& p : pts)
        if (out.empty() || !(out.back() == p)) out.push_back(p);
    if (out.size() == 1 && pts.size() >= 2) out.push_back(out.front());
    pts = std::move(out);
}

}  // namespace detail

/// Jump from each waypoint to the farthest one reachable in a straight line.
inline std::vector<Pose2> greedy_shortcut(const std::vector<Pose2>& pts, const CollisionChecker& cc) {
    if (pts.size() <= 2) return pts;
    std::vector<Pose2> out{pts.front()};
    std::size_t i = 0;
    while (i + 1 < pts.size()) {
        std::size_t j = pts.size() - 1;
        while (j > i + 1 && !cc.segment_free(pts[i], pts[j])) --j;
        out.push_back(pts[j]);
        i = j;
    }
    return out;
}

/// Greedy vertex shortcutting, then random shortcuts between arbitrary points
/// on the path, then a final greedy pass. Endpoints are preserved exactly.
inline std::vector<Pose2> smooth_path(std::vector<Pose2> pts, const CollisionChecker& cc, int attempts,
                                      std::mt19937_64& rng) {
    pts = greedy_shortcut(pts, cc);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int a = 0; a < attempts && pts.size() > 2; ++a) {
        const double len = polyline_length(pts);
        double s1 = u(rng) * len, s2 = u(rng) * len;
        if (s1 > s2) std::swap(s1, s2);
        if (s2 - s1 < 1e-9) continue;
        // locate segments
        std::vector<double> cum{0.0};
        for (std::size_t i = 1; i < pts.size(); ++i) cum.push_back(cum.back() + distance(pts[i - 1], pts[i]));
        const auto seg_of = [&](double s) {
            std::size_t i = 1;
            while (i + 1 < pts.size() && cum[i] < s) ++i;
            return i;  // s lies on segment (i-1, i)
        };
        const std::size_t i1 = seg_of(s1), i2 = seg_of(s2);
        if (i1 == i2) continue;
        const Pose2 a1 = point_at_arclength(pts, s1), a2 = point_at_arclength(pts, s2);
        if (!cc.segment_free(a1, a2)) continue;
        std::vector<Pose2> next(pts.begin(), pts.begin() + static_cast<long>(i1));
        next.push_back(a1);
        next.push_back(a2);
        next.insert(next.end(), pts.begin() + static_cast<long>(i2), pts.end());
        detail::drop_duplicates(next);
        if (polyline_length(next) < len - 1e-12) pts = std::move(next);
    }
    return greedy_shortcut(pts, cc);
}

/// Bi-directional RRT (RRT-Connect) followed by shortcut smoothing.
/// Deterministic for a fixed seed. nullopt when either end is in collision or
/// the trees fail to meet within max_iters.
inline std::optional<Path> birrt(const CollisionChecker& cc, const Pose2& start, const Pose2& goal,
                                 std::uint64_t seed, const RrtConfig& cfg, double default_step) {
    if (!cc.free(start) || !cc.free(goal)) return std::nullopt;
    if (start == goal) return Path{{start, goal}};
    if (cc.segment_free(start, goal)) return Path{{start, goal}};
    const double step = cfg.step > 0 ? cfg.step : default_step;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Aabb& region = cc.sample_region();
    detail::Tree ta, tb;
    ta.add(start, -1);
    tb.add(goal, -1);
    bool a_is_start = true;
    for (int it = 0; it < cfg.max_iters; ++it) {
        detail::Tree& a = a_is_start ? ta : tb;
        detail::Tree& b = a_is_start ? tb : ta;
        Pose2 q;
        if (u(rng) < cfg.goal_bias) {
            q = b.nodes.front();
        } else {
            q = {region.xmin + u(rng) * (region.xmax - region.xmin), region.ymin + u(rng) * (region.ymax - region.ymin)};
        }
        int na = -1;
        if (detail::extend(a, cc, q, step, na) != detail::Extend::Trapped) {
            const Pose2 target = a.nodes[na];
            int nb = -1;
            detail::Extend r;
            do {
                r = detail::extend(b, cc, target, step, nb);
            } while (r == detail::Extend::Advanced);
            if (r == detail::Extend::Reached) {
                auto from_a = a.branch(na);
                auto from_b = b.branch(nb);
                std::vector<Pose2> pts(from_a.rbegin(), from_a.rend());
                pts.insert(pts.end(), from_b.begin() + 1, from_b.end());
                if (!a_is_start) std::reverse(pts.begin(), pts.end());
                detail::drop_duplicates(pts);
                pts = smooth_path(std::move(pts), cc, cfg.shortcut_attempts, rng);
                pts.front() = start;
                pts.back() = goal;
                return Path{std::move(pts)};
            }
        }
        a_is_start = !a_is_start;
    }
    return std::nullopt;
}

/// Scene-level entry: plans `footprint` from start to goal among walls and all
/// movable bodies not in `ignore`.
inline std::optional<Path> birrt(const Scene& scene, const Shape& footprint, const Pose2& start, const Pose2& goal,
                                 std::uint64_t seed, int max_iters, const IdSet& ignore = {}) {
    RrtConfig cfg;
    cfg.max_iters = max_iters;
    const auto cc = CollisionChecker::for_scene(scene, footprint, ignore);
    return birrt(cc, start, goal, seed, cfg, 0.5 * scene.robot_side());
}

}  // namespace mosegman
