#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace mosegman {

/// Planar position of a body center, in meters.
struct Pose2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Pose2&, const Pose2&) = default;
    Pose2 operator+(const Pose2& o) const { return {x + o.x, y + o.y}; }
    Pose2 operator-(const Pose2& o) const { return {x - o.x, y - o.y}; }
    Pose2 operator*(double s) const { return {x * s, y * s}; }
};

inline double norm(const Pose2& p) { return std::hypot(p.x, p.y); }
inline double distance(const Pose2& a, const Pose2& b) { return norm(a - b); }
inline Pose2 lerp(const Pose2& a, const Pose2& b, double t) {
    return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
}

/// Penetration below this depth counts as touching, not overlapping.
inline constexpr double kContactEps = 1e-9;

/// Axis-aligned box given by its bounds.
struct Aabb {
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 0.0;
    double ymax = 0.0;

    static Aabb centered(const Pose2& c, double width, double height) {
        return {c.x - width / 2, c.y - height / 2, c.x + width / 2, c.y + height / 2};
    }
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    Pose2 center() const { return {(xmin + xmax) / 2, (ymin + ymax) / 2}; }
    double area() const { return width() * height(); }

    Aabb inflated(double dx, double dy) const { return {xmin - dx, ymin - dy, xmax + dx, ymax + dy}; }

    bool contains(const Pose2& p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
    friend bool operator==(const Aabb&, const Aabb&) = default;

    bool contains(const Aabb& o, double eps = kContactEps) const {
        return o.xmin >= xmin - eps && o.xmax <= xmax + eps && o.ymin >= ymin - eps &&
               o.ymax <= ymax + eps;
    }
};

/// True when the interiors intersect; shared edges do not count.
inline bool interiors_overlap(const Aabb& a, const Aabb& b, double eps = kContactEps) {
    return a.xmin < b.xmax - eps && b.xmin < a.xmax - eps && a.ymin < b.ymax - eps &&
           b.ymin < a.ymax - eps;
}

/// True when the closed segment p->q passes through the open interior of `box`
/// (shrunk by eps so grazing contact is allowed).
inline bool segment_hits_box(const Pose2& p, const Pose2& q, const Aabb& box,
                             double eps = kContactEps) {
    const double lo[2] = {box.xmin + eps, box.ymin + eps};
    const double hi[2] = {box.xmax - eps, box.ymax - eps};
    if (lo[0] >= hi[0] || lo[1] >= hi[1]) return false;
    const double o[2] = {p.x, p.y};
    const double d[2] = {q.x - p.x, q.y - p.y};
    double t0 = 0.0;
    double t1 = 1.0;
    for (int a = 0; a < 2; ++a) {
        if (d[a] == 0.0) {
            if (o[a] <= lo[a] || o[a] >= hi[a]) return false;
            continue;
        }
        double ta = (lo[a] - o[a]) / d[a];
        double tb = (hi[a] - o[a]) / d[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 >= t1) return false;
    }
    return t0 < t1;
}

/// One rectangle of a rigid translating shape, relative to the shape's reference point.
struct ShapePart {
    Pose2 offset;
    double width = 0.0;
    double height = 0.0;

    Aabb at(const Pose2& ref) const { return Aabb::centered(ref + offset, width, height); }
};

/// A rigid union of axis-aligned rectangles that translates as one body.
/// The robot alone is one part; the robot carrying an object is two.
struct Shape {
    std::vector<ShapePart> parts;

    static Shape box(double width, double height) { return Shape{{{Pose2{}, width, height}}}; }

    Aabb bounds_at(const Pose2& ref) const {
        Aabb b = parts.front().at(ref);
        for (const auto& part : parts) {
            const Aabb a = part.at(ref);
            b = {std::min(b.xmin, a.xmin), std::min(b.ymin, a.ymin), std::max(b.xmax, a.xmax),
                 std::max(b.ymax, a.ymax)};
        }
        return b;
    }
};

/// Total length of a polyline.
inline double polyline_length(const std::vector<Pose2>& pts) {
    double len = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
    return len;
}

/// Point at arc length `s` along a polyline (clamped to its ends).
inline Pose2 point_at_arclength(const std::vector<Pose2>& pts, double s) {
    if (s <= 0.0) return pts.front();
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double seg = distance(pts[i - 1], pts[i]);
        if (s <= seg && seg > 0.0) return lerp(pts[i - 1], pts[i], s / seg);
        s -= seg;
    }
    return pts.back();
}

}  // namespace mosegman
