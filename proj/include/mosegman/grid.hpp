#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

#include "mosegman/geometry.hpp"
#include "mosegman/scene.hpp"

namespace mosegman {

struct Cell {
    int row = 0;
    int col = 0;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Raster weights and resolution. Only the orderings beta_m > alpha_m > 0 and
/// alpha_r > beta_r >= 0 matter to the scoring; the values are defaults.
struct RasterConfig {
    int grid_cells = 64;  // cells along the longer workspace axis
    double alpha_m = 1.0;
    double beta_m = 3.0;
    double alpha_r = 1.0;
    double beta_r = 0.0;
};

/// Square-cell frame laid over the workspace. Row index grows with y, column with x.
struct GridFrame {
    Pose2 origin;
    double resolution = 1.0;
    int rows = 0;
    int cols = 0;

    static GridFrame over(const Aabb& ws, int cells_long_axis) {
        const int n = std::max(cells_long_axis, 8);
        GridFrame f;
        f.origin = {ws.xmin, ws.ymin};
        f.resolution = std::max(ws.width(), ws.height()) / n;
        f.cols = std::max(8, static_cast<int>(std::ceil(ws.width() / f.resolution - 1e-9)));
        f.rows = std::max(8, static_cast<int>(std::ceil(ws.height() / f.resolution - 1e-9)));
        return f;
    }

    bool inside(const Cell& c) const { return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols; }
    Pose2 center(const Cell& c) const {
        return {origin.x + (c.col + 0.5) * resolution, origin.y + (c.row + 0.5) * resolution};
    }
    Aabb box(const Cell& c) const {
        return {origin.x + c.col * resolution, origin.y + c.row * resolution,
                origin.x + (c.col + 1) * resolution, origin.y + (c.row + 1) * resolution};
    }
    Cell cell_of(const Pose2& p) const {
        return {static_cast<int>(std::floor((p.y - origin.y) / resolution)),
                static_cast<int>(std::floor((p.x - origin.x) / resolution))};
    }
    Cell clamp(Cell c) const {
        return {std::clamp(c.row, 0, rows - 1), std::clamp(c.col, 0, cols - 1)};
    }

    /// Inclusive range of cells whose interior meets the interior of `b`.
    void cell_range(const Aabb& b, Cell& lo, Cell& hi) const {
        const double e = kContactEps;
        lo = {static_cast<int>(std::floor((b.ymin + e - origin.y) / resolution)),
              static_cast<int>(std::floor((b.xmin + e - origin.x) / resolution))};
        hi = {static_cast<int>(std::ceil((b.ymax - e - origin.y) / resolution)) - 1,
              static_cast<int>(std::ceil((b.xmax - e - origin.x) / resolution)) - 1};
        lo = {std::max(lo.row, 0), std::max(lo.col, 0)};
        hi = {std::min(hi.row, rows - 1), std::min(hi.col, cols - 1)};
    }

    friend bool operator==(const GridFrame&, const GridFrame&) = default;
};

template <class T>
struct Grid {
    int rows = 0;
    int cols = 0;
    std::vector<T> cells;

    Grid() = default;
    Grid(int r, int c, T fill = T{}) : rows(r), cols(c), cells(static_cast<std::size_t>(r) * c, fill) {}

    T& at(int r, int c) { return cells[static_cast<std::size_t>(r) * cols + c]; }
    const T& at(int r, int c) const { return cells[static_cast<std::size_t>(r) * cols + c]; }
    T& operator[](const Cell& c) { return at(c.row, c.col); }
    const T& operator[](const Cell& c) const { return at(c.row, c.col); }
    bool inside(int r, int c) const { return r >= 0 && r < rows && c >= 0 && c < cols; }
};

struct OccupancyMatrix {
    GridFrame frame;
    Grid<double> cells;
    int clamped_task_cells = 0;  // task cells that fell outside the grid and were dropped

    double sum() const {
        double s = 0.0;
        for (double v : cells.cells) s += v;
        return s;
    }
};

struct ReachabilityMatrix {
    GridFrame frame;
    Grid<double> cells;
    bool degenerate = false;  // robot cell was blocked; only it is marked reachable
    Grid<std::uint8_t> reached;
};

struct ClearanceMap {
    Grid<double> cells;
};

namespace detail {

inline void mark_box(const GridFrame& f, const Aabb& b, Grid<std::uint8_t>& mask) {
    Cell lo, hi;
    f.cell_range(b, lo, hi);
    for (int r = lo.row; r <= hi.row; ++r)
        for (int c = lo.col; c <= hi.col; ++c) mask.at(r, c) = 1;
}

/// 1 for cells outside the workspace or touched by a wall or movable body.
inline Grid<std::uint8_t> occupied_mask(const Scene& scene, const GridFrame& f, bool include_movables,
                                        const IdSet& skip = {}) {
    Grid<std::uint8_t> mask(f.rows, f.cols, 0);
    const Aabb& ws = scene.workspace();
    for (int r = 0; r < f.rows; ++r)
        for (int c = 0; c < f.cols; ++c)
            if (!ws.contains(f.box({r, c}), 1e-9)) mask.at(r, c) = 1;
    for (const auto& b : scene.bodies()) {
        if (b.kind == BodyKind::Robot || skip.count(b.id)) continue;
        if (b.movable() && !include_movables) continue;
        mark_box(f, b.footprint(), mask);
    }
    return mask;
}

}  // namespace detail

/// Global occupancy matrix: 0 on walls/objects, alpha_m on free cells, beta_m on
/// free cells of the task trajectory. The robot counts as free space.
inline OccupancyMatrix rasterize_gom(const Scene& scene, const std::vector<Cell>& task_cells,
                                     const RasterConfig& cfg = {}) {
    OccupancyMatrix m;
    m.frame = GridFrame::over(scene.workspace(), cfg.grid_cells);
    const auto occ = detail::occupied_mask(scene, m.frame, true);
    m.cells = Grid<double>(m.frame.rows, m.frame.cols, cfg.alpha_m);
    for (std::size_t i = 0; i < occ.cells.size(); ++i)
        if (occ.cells[i]) m.cells.cells[i] = 0.0;
    for (const Cell& c : task_cells) {
        if (!m.frame.inside(c)) {
            ++m.clamped_task_cells;
            continue;
        }
        if (m.cells[c] != 0.0) m.cells[c] = cfg.beta_m;
    }
    return m;
}

/// Cells whose center admits the robot footprint without collision.
inline Grid<std::uint8_t> robot_fit_mask(const Scene& scene, const GridFrame& f) {
    const Body& robot = scene.robot();
    Grid<std::uint8_t> fit(f.rows, f.cols, 0);
    const Aabb inner = scene.workspace().inflated(-robot.width / 2, -robot.height / 2);
    std::vector<Aabb> grown;
    for (const auto& b : scene.bodies())
        if (b.kind != BodyKind::Robot) grown.push_back(b.footprint().inflated(robot.width / 2, robot.height / 2));
    for (int r = 0; r < f.rows; ++r)
        for (int c = 0; c < f.cols; ++c) {
            const Pose2 p = f.center({r, c});
            if (!inner.contains(p)) continue;
            bool ok = true;
            for (const auto& g : grown)
                if (p.x > g.xmin + kContactEps && p.x < g.xmax - kContactEps && p.y > g.ymin + kContactEps &&
                    p.y < g.ymax - kContactEps) {
                    ok = false;
                    break;
                }
            fit.at(r, c) = ok;
        }
    return fit;
}

/// 4-connected flood fill over robot-fitting cells seeded at the robot's cell.
/// Reached cells get alpha_r, the rest beta_r.
inline ReachabilityMatrix reachability(const Scene& scene, const OccupancyMatrix& gom,
                                       const RasterConfig& cfg = {}) {
    ReachabilityMatrix out;
    out.frame = gom.frame;
    const GridFrame& f = gom.frame;
    const Body& robot = scene.robot();
    out.cells = Grid<double>(f.rows, f.cols, cfg.beta_r);
    out.reached = Grid<std::uint8_t>(f.rows, f.cols, 0);
    const Cell seed = f.clamp(f.cell_of(robot.pose));
    auto fit = robot_fit_mask(scene, f);
    // The robot's own pose is feasible even when its cell center is not.
    if (!fit[seed] && !collides(scene, robot.id, robot.pose)) fit[seed] = 1;
    out.reached[seed] = 1;
    out.cells[seed] = cfg.alpha_r;
    if (!fit[seed]) {
        out.degenerate = true;
        return out;
    }
    std::deque<Cell> queue{seed};
    const int dr[4] = {1, -1, 0, 0};
    const int dc[4] = {0, 0, 1, -1};
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        for (int k = 0; k < 4; ++k) {
            const Cell n{c.row + dr[k], c.col + dc[k]};
            if (!f.inside(n) || out.reached[n] || !fit[n]) continue;
            out.reached[n] = 1;
            out.cells[n] = cfg.alpha_r;
            queue.push_back(n);
        }
    }
    return out;
}

namespace detail {

/// Lower envelope of parabolas: exact 1D squared distance transform.
inline void sq_dt_1d(const std::vector<double>& f, std::vector<double>& d) {
    const int n = static_cast<int>(f.size());
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
    const double inf = std::numeric_limits<double>::infinity();
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == inf) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -inf;
            z[1] = inf;
            continue;
        }
        auto meet = [&](int p) {
            return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
        };
        double s = meet(v[k]);
        while (s <= z[k]) s = meet(v[--k]);  // z[0] = -inf stops the walk
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = inf;
    }
    d.assign(n, inf);
    if (k < 0) return;
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < q) ++j;
        const double diff = q - v[j];
        d[q] = diff * diff + f[v[j]];
    }
}

}  // namespace detail

/// Exact Euclidean distance (in cells) from each cell to the nearest occupied
/// cell, by separable column/row passes. An all-free grid is measured against a
/// virtual ring of occupied cells just outside it.
inline ClearanceMap edt(const Grid<std::uint8_t>& occupied) {
    if (occupied.rows == 0 || occupied.cols == 0) throw Error("edt: empty grid");
    const bool any = std::any_of(occupied.cells.begin(), occupied.cells.end(), [](auto v) { return v != 0; });
    const int pad = any ? 0 : 1;
    const int rows = occupied.rows + 2 * pad;
    const int cols = occupied.cols + 2 * pad;
    const double inf = std::numeric_limits<double>::infinity();
    Grid<double> g(rows, cols, inf);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int rr = r - pad, cc = c - pad;
            const bool occ = !occupied.inside(rr, cc) || occupied.at(rr, cc);
            if (occ) g.at(r, c) = 0.0;
        }
    std::vector<double> f, d;
    for (int c = 0; c < cols; ++c) {
        f.resize(rows);
        for (int r = 0; r < rows; ++r) f[r] = g.at(r, c);
        detail::sq_dt_1d(f, d);
        for (int r = 0; r < rows; ++r) g.at(r, c) = d[r];
    }
    for (int r = 0; r < rows; ++r) {
        f.resize(cols);
        for (int c = 0; c < cols; ++c) f[c] = g.at(r, c);
        detail::sq_dt_1d(f, d);
        for (int c = 0; c < cols; ++c) g.at(r, c) = d[c];
    }
    ClearanceMap out{Grid<double>(occupied.rows, occupied.cols, 0.0)};
    for (int r = 0; r < occupied.rows; ++r)
        for (int c = 0; c < occupied.cols; ++c) out.cells.at(r, c) = std::sqrt(g.at(r + pad, c + pad));
    return out;
}

/// Cells met by `shape` while it follows `path`, in order of first contact.
inline std::vector<Cell> sweep_cells(const GridFrame& f, const Shape& shape, const std::vector<Pose2>& path) {
    std::vector<Cell> out;
    Grid<std::uint8_t> seen(f.rows, f.cols, 0);
    auto visit = [&](const Pose2& p) {
        for (const auto& part : shape.parts) {
            Cell lo, hi;
            f.cell_range(part.at(p), lo, hi);
            for (int r = lo.row; r <= hi.row; ++r)
                for (int c = lo.col; c <= hi.col; ++c)
                    if (!seen.at(r, c)) {
                        seen.at(r, c) = 1;
                        out.push_back({r, c});
                    }
        }
    };
    if (path.empty()) return out;
    visit(path.front());
    const double step = f.resolution / 2;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const double len = distance(path[i - 1], path[i]);
        const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
        for (int k = 1; k <= n; ++k) visit(lerp(path[i - 1], path[i], double(k) / n));
    }
    return out;
}

}  // namespace mosegman
