#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "mosegman/motion.hpp"
#include "mosegman/rrt.hpp"
#include "mosegman/scene.hpp"

namespace mosegman {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Dependency graph

enum class Strength { Weak, Strong };

inline const char* to_string(Strength s) { return s == Strength::Weak ? "weak" : "strong"; }

/// `from` must be placed before `to`.
struct DepEdge {
    std::string from;
    std::string to;
    Strength strength = Strength::Weak;

    friend auto operator<=>(const DepEdge&, const DepEdge&) = default;
};

struct DependencyGraph {
    std::vector<std::string> vertices;  // sorted
    std::vector<DepEdge> edges;         // sorted, unique
    std::map<std::string, ObjectPath> cache;

    bool has_edge(const DepEdge& e) const { return std::binary_search(edges.begin(), edges.end(), e); }
    void add_edge(const DepEdge& e) {
        if (e.from == e.to) return;
        auto it = std::lower_bound(edges.begin(), edges.end(), e);
        if (it == edges.end() || *it != e) edges.insert(it, e);
    }
    void remove_edge(const DepEdge& e) {
        auto it = std::lower_bound(edges.begin(), edges.end(), e);
        if (it != edges.end() && *it == e) edges.erase(it);
    }
    int out_degree(const std::string& v) const {
        return static_cast<int>(std::count_if(edges.begin(), edges.end(), [&](const DepEdge& e) { return e.from == v; }));
    }
    int in_degree(const std::string& v) const {
        return static_cast<int>(std::count_if(edges.begin(), edges.end(), [&](const DepEdge& e) { return e.to == v; }));
    }
    int index_of(const std::string& v) const {
        auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
        return (it != vertices.end() && *it == v) ? static_cast<int>(it - vertices.begin()) : -1;
    }

    /// DOT text: dotted edges are weak, solid edges strong.
    std::string to_dot() const {
        std::ostringstream os;
        os << "digraph dependencies {\n";
        for (const auto& v : vertices) os << "  \"" << v << "\";\n";
        for (const auto& e : edges)
            os << "  \"" << e.from << "\" -> \"" << e.to << "\" [style="
               << (e.strength == Strength::Weak ? "dotted" : "solid") << "];\n";
        os << "}\n";
        return os.str();
    }
};

/// Kahn's algorithm; smallest available vertex first. nullopt when cyclic.
inline std::optional<std::vector<std::string>> topological_order(const DependencyGraph& g) {
    std::map<std::string, int> indeg;
    for (const auto& v : g.vertices) indeg[v] = 0;
    for (const auto& e : g.edges) ++indeg[e.to];
    std::set<std::string> ready;
    for (const auto& [v, d] : indeg)
        if (d == 0) ready.insert(v);
    std::vector<std::string> out;
    while (!ready.empty()) {
        const std::string v = *ready.begin();
        ready.erase(ready.begin());
        out.push_back(v);
        for (const auto& e : g.edges)
            if (e.from == v && --indeg[e.to] == 0) ready.insert(e.to);
    }
    if (out.size() != g.vertices.size()) return std::nullopt;
    return out;
}

inline bool is_acyclic(const DependencyGraph& g) { return topological_order(g).has_value(); }

/// Memo of expensive planning results reused across sequence regenerations.
/// Keys include the exact endpoint poses, so a body that moved misses.
struct SequencerCache {
    std::map<std::tuple<std::string, double, double, double, double>, std::optional<ObjectPath>> object_paths;
    std::map<std::tuple<double, double, double, double, double>, double> rrt_lengths;
    int object_path_plans = 0;  // computed, not served from the memo
    int rrt_plans = 0;
    int object_path_hits = 0;
    int rrt_hits = 0;
};

struct SequencerConfig {
    MotionConfig motion;
    int cycle_cap = 10000;
    int lazy_max_rounds = 5;
    int exact_limit = 12;  // branch-and-bound up to this many objects
    bool greedy_cycle_removal = false;  // baseline: DFS back-edge deletion
    bool lazy_costs = true;             // false: euclidean costs only
    bool random_sequence = false;       // baseline: seeded shuffle, no precedence
};

namespace detail {

inline std::optional<ObjectPath> cached_object_path(const Scene& scene, const std::string& id, SequencerCache* cache,
                                                    std::uint64_t seed, const MotionConfig& cfg) {
    const Body& b = scene.body(id);
    const Pose2 goal = scene.goal_of(id);
    const auto key = std::make_tuple(id, b.pose.x, b.pose.y, goal.x, goal.y);
    if (cache) {
        if (auto it = cache->object_paths.find(key); it != cache->object_paths.end()) {
            ++cache->object_path_hits;
            return it->second;
        }
    }
    auto mu = plan_object_path(scene, id, goal, mix_seed(seed, hash_id(id)), cfg, false);
    if (cache) {
        ++cache->object_path_plans;
        cache->object_paths[key] = mu;
    }
    return mu;
}

}  // namespace detail

/// Plans each goal object's path in the auxiliary scene (walls only) and sweeps
/// its footprint along it: crossing o_j's current footprint adds the weak edge
/// o_j -> o_i, crossing o_j's goal footprint adds the strong edge o_i -> o_j.
/// Objects without a static path are reported in `unsolvable` when given,
/// otherwise raise Error.
inline DependencyGraph build_dependency_graph(const Scene& scene, const IdSet& goals, std::uint64_t seed,
                                              SequencerCache* cache = nullptr, const MotionConfig& cfg = {},
                                              std::vector<std::string>* unsolvable = nullptr) {
    DependencyGraph g;
    for (const auto& id : goals) {
        auto mu = detail::cached_object_path(scene, id, cache, seed, cfg);
        if (!mu) {
            if (!unsolvable) throw Error("object '" + id + "' has no static placement path");
            unsolvable->push_back(id);
            continue;
        }
        g.vertices.push_back(id);
        g.cache.emplace(id, std::move(*mu));
    }
    for (const auto& vi : g.vertices) {
        const Body& oi = scene.body(vi);
        const auto& mu = g.cache.at(vi);
        for (const auto& vj : g.vertices) {
            if (vi == vj) continue;
            const Body& oj = scene.body(vj);
            auto crosses = [&](const Pose2& at) {
                const CollisionChecker cc(scene.workspace(), Shape::box(oi.width, oi.height), {oj.footprint_at(at)});
                return !cc.path_free(mu.waypoints);
            };
            if (crosses(oj.pose)) g.add_edge({vj, vi, Strength::Weak});
            if (crosses(scene.goal_of(vj))) g.add_edge({vi, vj, Strength::Strong});
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Cycles

struct CycleLedger {
    struct Cycle {
        int id = 0;
        std::vector<DepEdge> edges;
    };
    std::vector<Cycle> cycles;
    std::map<DepEdge, int> edge_frequency;
    bool truncated = false;
};

/// Every simple directed cycle (edge-level, so parallel weak/strong edges give
/// distinct cycles), found by DFS from each vertex over larger-indexed
/// vertices with on-stack tracking. Stops at `cap` cycles and flags truncation.
inline CycleLedger enumerate_cycles(const DependencyGraph& g, int cap) {
    if (cap < 1) throw Error("enumerate_cycles: cap must be >= 1");
    CycleLedger ledger;
    const int n = static_cast<int>(g.vertices.size());
    std::vector<std::vector<const DepEdge*>> out(n);
    for (const auto& e : g.edges) out[g.index_of(e.from)].push_back(&e);
    std::vector<char> on_stack(n, 0);
    std::vector<const DepEdge*> stack;
    long long budget = 20'000'000;  // DFS steps; exceeding it also truncates
    int root = 0;
    auto dfs = [&](auto&& self, int v) -> void {
        if (ledger.truncated) return;
        if (--budget < 0) {
            ledger.truncated = true;
            return;
        }
        for (const DepEdge* e : out[v]) {
            const int w = g.index_of(e->to);
            if (w == root) {
                CycleLedger::Cycle c{static_cast<int>(ledger.cycles.size()), {}};
                for (const auto* s : stack) c.edges.push_back(*s);
                c.edges.push_back(*e);
                for (const auto& ce : c.edges) ++ledger.edge_frequency[ce];
                ledger.cycles.push_back(std::move(c));
                if (static_cast<int>(ledger.cycles.size()) >= cap) {
                    ledger.truncated = true;
                    return;
                }
            } else if (w > root && !on_stack[w]) {
                on_stack[w] = 1;
                stack.push_back(e);
                self(self, w);
                stack.pop_back();
                on_stack[w] = 0;
                if (ledger.truncated) return;
            }
        }
    };
    for (root = 0; root < n && !ledger.truncated; ++root) {
        on_stack[root] = 1;
        dfs(dfs, root);
        on_stack[root] = 0;
    }
    return ledger;
}

struct CycleRemoval {
    DependencyGraph dag;
    std::vector<DepEdge> removed;  // in removal order, after re-insertion pruning
};

/// Removes cycle edges by decreasing cycle frequency; ties go to weak edges,
/// then to the edge whose source has the smallest out-degree minus in-degree,
/// then to the lexicographically smallest edge. Frequencies are recounted over
/// the surviving cycles after every removal. Removed edges that no longer
/// close a cycle are put back at the end.
inline CycleRemoval break_cycles(const DependencyGraph& g, const CycleLedger& ledger, int cap = 10000) {
    CycleRemoval out{g, {}};
    DependencyGraph& h = out.dag;
    CycleLedger current = ledger;
    while (true) {
        std::vector<char> alive(current.cycles.size(), 1);
        while (true) {
            std::map<DepEdge, int> freq;
            for (std::size_t c = 0; c < current.cycles.size(); ++c)
                if (alive[c])
                    for (const auto& e : current.cycles[c].edges) ++freq[e];
            if (freq.empty()) break;
            const DepEdge* best = nullptr;
            std::tuple<int, int, int> best_key{};
            for (const auto& [e, f] : freq) {
                const std::tuple<int, int, int> key{-f, e.strength == Strength::Weak ? 0 : 1,
                                                    h.out_degree(e.from) - h.in_degree(e.from)};
                if (!best || key < best_key) {  // map order supplies the lexicographic tie-break
                    best = &e;
                    best_key = key;
                }
            }
            const DepEdge victim = *best;
            h.remove_edge(victim);
            out.removed.push_back(victim);
            for (std::size_t c = 0; c < current.cycles.size(); ++c)
                if (alive[c] && std::find(current.cycles[c].edges.begin(), current.cycles[c].edges.end(), victim) !=
                                    current.cycles[c].edges.end())
                    alive[c] = 0;
        }
        if (is_acyclic(h)) break;
        current = enumerate_cycles(h, cap);
    }
    for (auto it = out.removed.rbegin(); it != out.removed.rend();) {
        h.add_edge(*it);
        if (is_acyclic(h)) {
            it = decltype(it)(out.removed.erase(std::next(it).base()));
        } else {
            h.remove_edge(*it);
            ++it;
        }
    }
    if (!is_acyclic(h)) throw Error("break_cycles: result is not acyclic");
    return out;
}

/// Baseline: delete every DFS back edge (visiting vertices and edges in sorted order).
inline CycleRemoval break_cycles_greedy(const DependencyGraph& g) {
    CycleRemoval out{g, {}};
    const int n = static_cast<int>(g.vertices.size());
    std::vector<int> color(n, 0);
    auto dfs = [&](auto&& self, int v) -> void {
        color[v] = 1;
        for (const auto& e : g.edges) {
            if (g.index_of(e.from) != v || !out.dag.has_edge(e)) continue;
            const int w = g.index_of(e.to);
            if (color[w] == 1) {
                out.dag.remove_edge(e);
                out.removed.push_back(e);
            } else if (color[w] == 0) {
                self(self, w);
            }
        }
        color[v] = 2;
    };
    for (int v = 0; v < n; ++v)
        if (color[v] == 0) dfs(dfs, v);
    return out;
}

// ---------------------------------------------------------------------------
// Precedence-constrained open-path ATSP

enum class Provenance { Euclidean, Rrt };

/// Node 0 is the robot; node i >= 1 is ids[i-1]. costs[i][j] is the robot's
/// travel from where object i is placed (its goal) to object j's current pose.
struct CostMatrix {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> costs;
    std::vector<std::vector<Provenance>> provenance;

    int size() const { return static_cast<int>(costs.size()); }
    int node_of(const std::string& id) const {
        auto it = std::find(ids.begin(), ids.end(), id);
        return it == ids.end() ? -1 : static_cast<int>(it - ids.begin()) + 1;
    }
};

inline CostMatrix euclidean_costs(const Scene& scene, const std::vector<std::string>& ids) {
    CostMatrix m;
    m.ids = ids;
    const int n = static_cast<int>(ids.size()) + 1;
    m.costs.assign(n, std::vector<double>(n, kInf));
    m.provenance.assign(n, std::vector<Provenance>(n, Provenance::Euclidean));
    auto from = [&](int i) { return i == 0 ? scene.robot().pose : scene.goal_of(ids[i - 1]); };
    for (int i = 0; i < n; ++i)
        for (int j = 1; j < n; ++j)
            if (i != j) m.costs[i][j] = distance(from(i), scene.body(ids[j - 1]).pose);
    for (int i = 1; i < n; ++i) m.costs[i][0] = 0.0;  // open path: free return
    return m;
}

/// Ordered pairs (a before b) between node indices of `costs`.
using Precedence = std::vector<std::pair<int, int>>;

inline Precedence precedence_from(const DependencyGraph& dag, const CostMatrix& costs) {
    Precedence p;
    for (const auto& e : dag.edges) {
        const int a = costs.node_of(e.from), b = costs.node_of(e.to);
        if (a > 0 && b > 0) p.emplace_back(a, b);
    }
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    return p;
}

struct PlacementSequence {
    std::vector<std::string> order;
    double total_cost = 0.0;
    Precedence precedence;  // node pairs of the DAG this order respects
};

inline double sequence_cost(const CostMatrix& m, const std::vector<std::string>& order) {
    double c = 0.0;
    int last = 0;
    for (const auto& id : order) {
        const int j = m.node_of(id);
        c += m.costs[last][j];
        last = j;
    }
    return c;
}

inline bool respects(const std::vector<int>& order_nodes, const Precedence& prec) {
    std::vector<int> pos(order_nodes.size() + 1, -1);
    for (std::size_t i = 0; i < order_nodes.size(); ++i) pos[order_nodes[i]] = static_cast<int>(i);
    for (const auto& [a, b] : prec)
        if (pos[a] >= 0 && pos[b] >= 0 && pos[a] > pos[b]) return false;
    return true;
}

namespace detail {

inline std::vector<int> to_nodes(const CostMatrix& m, const std::vector<std::string>& order) {
    std::vector<int> v;
    for (const auto& id : order) v.push_back(m.node_of(id));
    return v;
}

inline double node_cost(const CostMatrix& m, const std::vector<int>& order) {
    double c = 0.0;
    int last = 0;
    for (int j : order) {
        c += m.costs[last][j];
        last = j;
    }
    return c;
}

inline std::vector<std::uint32_t> pred_masks(int n, const Precedence& prec) {
    std::vector<std::uint32_t> pm(n + 1, 0);
    for (const auto& [a, b] : prec) pm[b] |= 1u << (a - 1);
    return pm;
}

/// Exact search with precedence pruning, an incoming-edge lower bound and
/// (visited set, last node) dominance.
inline std::vector<int> branch_and_bound(const CostMatrix& m, const Precedence& prec, std::vector<int> incumbent) {
    const int n = m.size() - 1;
    const auto preds = pred_masks(n, prec);
    double best = incumbent.empty() ? kInf : node_cost(m, incumbent);
    std::vector<double> min_in(n + 1, kInf);
    for (int j = 1; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            if (i != j) min_in[j] = std::min(min_in[j], m.costs[i][j]);
    const std::uint32_t full = n == 32 ? ~0u : ((1u << n) - 1);
    std::vector<double> memo(static_cast<std::size_t>(n + 1) << n, kInf);
    std::vector<int> path;
    std::vector<int> best_path = incumbent;
    auto dfs = [&](auto&& self, std::uint32_t mask, int last, double cost) -> void {
        if (mask == full) {
            if (cost < best) {
                best = cost;
                best_path = path;
            }
            return;
        }
        double lb = cost;
        for (int j = 1; j <= n; ++j)
            if (!(mask >> (j - 1) & 1u)) lb += min_in[j];
        if (lb >= best && std::isfinite(best)) return;
        double& seen = memo[(static_cast<std::size_t>(last) << n) | mask];
        if (seen <= cost) return;
        seen = cost;
        std::vector<int> next;
        for (int j = 1; j <= n; ++j)
            if (!(mask >> (j - 1) & 1u) && (preds[j] & mask) == preds[j] && std::isfinite(m.costs[last][j]))
                next.push_back(j);
        std::stable_sort(next.begin(), next.end(), [&](int a, int b) { return m.costs[last][a] < m.costs[last][b]; });
        for (int j : next) {
            path.push_back(j);
            self(self, mask | (1u << (j - 1)), j, cost + m.costs[last][j]);
            path.pop_back();
        }
    };
    dfs(dfs, 0u, 0, 0.0);
    return best_path;
}

/// Precedence-respecting cheapest insertion followed by 2-opt reversals and
/// single-node moves, accepting only feasible strict improvements.
inline std::vector<int> insertion_local_search(const CostMatrix& m, const Precedence& prec,
                                               const std::vector<int>& topo, std::vector<int> incumbent) {
    std::vector<int> seq;
    for (int j : topo) {
        std::size_t lo = 0;
        for (std::size_t p = 0; p < seq.size(); ++p)
            for (const auto& [a, b] : prec)
                if (b == j && a == seq[p]) lo = std::max(lo, p + 1);
        std::size_t best_pos = seq.size();
        double best_c = kInf;
        for (std::size_t p = lo; p <= seq.size(); ++p) {
            auto trial = seq;
            trial.insert(trial.begin() + static_cast<long>(p), j);
            const double c = node_cost(m, trial);
            if (c < best_c) {
                best_c = c;
                best_pos = p;
            }
        }
        seq.insert(seq.begin() + static_cast<long>(best_pos), j);
    }
    if (!incumbent.empty() && respects(incumbent, prec) && node_cost(m, incumbent) < node_cost(m, seq))
        seq = incumbent;
    bool improved = true;
    while (improved) {
        improved = false;
        const double cur = node_cost(m, seq);
        for (std::size_t i = 0; i < seq.size() && !improved; ++i)
            for (std::size_t k = i + 1; k < seq.size() && !improved; ++k) {
                auto trial = seq;
                std::reverse(trial.begin() + static_cast<long>(i), trial.begin() + static_cast<long>(k) + 1);
                if (respects(trial, prec) && node_cost(m, trial) < cur - 1e-12) {
                    seq = std::move(trial);
                    improved = true;
                }
            }
        for (std::size_t i = 0; i < seq.size() && !improved; ++i)
            for (std::size_t p = 0; p < seq.size() && !improved; ++p) {
                if (p == i) continue;
                auto trial = seq;
                const int v = trial[i];
                trial.erase(trial.begin() + static_cast<long>(i));
                trial.insert(trial.begin() + static_cast<long>(p), v);
                if (respects(trial, prec) && node_cost(m, trial) < cur - 1e-12) {
                    seq = std::move(trial);
                    improved = true;
                }
            }
    }
    return seq;
}

}  // namespace detail

/// Open path from the robot node through every object, minimizing summed cost
/// subject to `prec`. Exact (branch-and-bound) up to `exact_limit` objects.
inline PlacementSequence solve_patsp(const CostMatrix& costs, const Precedence& prec,
                                     const std::optional<PlacementSequence>& warm_start = std::nullopt,
                                     int exact_limit = 12) {
    const int n = costs.size() - 1;
    if (n > 32) throw Error("solve_patsp: more than 32 objects");
    // topological order doubles as the feasibility check
    std::vector<int> indeg(n + 1, 0);
    for (const auto& [a, b] : prec) ++indeg[b];
    std::vector<int> topo;
    std::set<int> ready;
    for (int j = 1; j <= n; ++j)
        if (indeg[j] == 0) ready.insert(j);
    while (!ready.empty()) {
        const int v = *ready.begin();
        ready.erase(ready.begin());
        topo.push_back(v);
        for (const auto& [a, b] : prec)
            if (a == v && --indeg[b] == 0) ready.insert(b);
    }
    if (static_cast<int>(topo.size()) != n) throw Error("solve_patsp: precedence constraints are cyclic");

    std::vector<int> incumbent;
    if (warm_start) {
        auto w = detail::to_nodes(costs, warm_start->order);
        std::vector<int> sorted = w;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 1);
        if (sorted == all && respects(w, prec)) incumbent = std::move(w);
    }
    std::vector<int> best = n <= exact_limit ? detail::branch_and_bound(costs, prec, incumbent)
                                             : detail::insertion_local_search(costs, prec, topo, incumbent);
    if (best.empty() && n > 0) best = topo;  // no finite-cost order exists
    PlacementSequence out;
    for (int j : best) out.order.push_back(costs.ids[j - 1]);
    out.total_cost = detail::node_cost(costs, best);
    out.precedence = prec;
    return out;
}

// ---------------------------------------------------------------------------
// Lazy refinement

/// Robot travel between two points measured by Bi-RRT among static walls. The
/// probe footprint is the smallest of the robot and the two objects, so both
/// endpoints admit it. Memoized by endpoints in `cache`.
inline double rrt_distance(const Scene& scene, const Pose2& from, const Pose2& to, double probe_side,
                           SequencerCache* cache, std::uint64_t seed, const MotionConfig& cfg) {
    const auto key = std::make_tuple(from.x, from.y, to.x, to.y, probe_side);
    if (cache) {
        if (auto it = cache->rrt_lengths.find(key); it != cache->rrt_lengths.end()) {
            ++cache->rrt_hits;
            return it->second;
        }
    }
    const auto cc = CollisionChecker::for_scene(scene, Shape::box(probe_side, probe_side), {}, false);
    const std::uint64_t s = mix_seed(seed, std::hash<double>{}(from.x) ^ (std::hash<double>{}(from.y) << 1) ^
                                               (std::hash<double>{}(to.x) << 2) ^ (std::hash<double>{}(to.y) << 3));
    auto path = birrt(cc, from, to, s, cfg.rrt, rrt_step(scene, cfg));
    const double len = path ? path->length() : kInf;
    if (cache) {
        ++cache->rrt_plans;
        cache->rrt_lengths[key] = len;
    }
    return len;
}

inline double edge_rrt_cost(const Scene& scene, const CostMatrix& m, int i, int j, SequencerCache* cache,
                            std::uint64_t seed, const MotionConfig& cfg) {
    const Body& oj = scene.body(m.ids[j - 1]);
    double probe = std::min({scene.robot_side(), oj.width, oj.height});
    Pose2 from = scene.robot().pose;
    if (i > 0) {
        const Body& oi = scene.body(m.ids[i - 1]);
        probe = std::min({probe, oi.width, oi.height});
        from = scene.goal_of(m.ids[i - 1]);
    }
    return rrt_distance(scene, from, oj.pose, probe, cache, seed, cfg);
}

struct LazyResult {
    PlacementSequence sequence;
    CostMatrix costs;
    int rounds = 0;
    bool converged = false;
};

/// Replaces the euclidean entries along the incumbent's edges with RRT lengths
/// and re-solves warm-started, until the order repeats or rounds run out.
inline LazyResult lazy_refine(const PlacementSequence& seq, CostMatrix costs, const Scene& scene, int max_rounds,
                              SequencerCache* cache = nullptr, std::uint64_t seed = 0, const MotionConfig& cfg = {},
                              int exact_limit = 12) {
    if (max_rounds < 1) throw Error("lazy_refine: max_rounds must be >= 1");
    LazyResult out{seq, std::move(costs), 0, false};
    for (int round = 0; round < max_rounds; ++round) {
        int last = 0;
        for (const auto& id : out.sequence.order) {
            const int j = out.costs.node_of(id);
            if (out.costs.provenance[last][j] == Provenance::Euclidean) {
                out.costs.costs[last][j] = edge_rrt_cost(scene, out.costs, last, j, cache, seed, cfg);
                out.costs.provenance[last][j] = Provenance::Rrt;
            }
            last = j;
        }
        auto next = solve_patsp(out.costs, out.sequence.precedence, out.sequence, exact_limit);
        ++out.rounds;
        const bool same = next.order == out.sequence.order;
        out.sequence = std::move(next);
        if (same) {
            out.converged = true;
            break;
        }
    }
    out.sequence.total_cost = sequence_cost(out.costs, out.sequence.order);
    return out;
}

// ---------------------------------------------------------------------------
// Full sequence generation

struct SequenceResult {
    PlacementSequence sequence;
    DependencyGraph graph;
    CycleLedger ledger;
    CycleRemoval removal;
    std::vector<std::string> unsolvable;
    int lazy_rounds = 0;
};

/// Dependency graph -> acyclic reduction -> precedence ATSP -> lazy refinement.
/// Unsolvable objects are appended at the end of the order.
inline SequenceResult gen_obj_place_seq(const Scene& scene, const IdSet& goals, std::uint64_t seed,
                                        const SequencerConfig& cfg = {}, SequencerCache* cache = nullptr) {
    SequenceResult r;
    if (cfg.random_sequence) {
        r.sequence.order.assign(goals.begin(), goals.end());
        std::mt19937_64 rng(seed);
        std::shuffle(r.sequence.order.begin(), r.sequence.order.end(), rng);
        return r;
    }
    r.graph = build_dependency_graph(scene, goals, seed, cache, cfg.motion, &r.unsolvable);
    r.ledger = enumerate_cycles(r.graph, cfg.cycle_cap);
    r.removal = cfg.greedy_cycle_removal ? break_cycles_greedy(r.graph) : break_cycles(r.graph, r.ledger, cfg.cycle_cap);
    auto costs = euclidean_costs(scene, r.graph.vertices);
    const auto prec = precedence_from(r.removal.dag, costs);
    r.sequence = solve_patsp(costs, prec, std::nullopt, cfg.exact_limit);
    if (cfg.lazy_costs && !r.sequence.order.empty()) {
        auto lazy = lazy_refine(r.sequence, costs, scene, cfg.lazy_max_rounds, cache, seed, cfg.motion, cfg.exact_limit);
        r.sequence = std::move(lazy.sequence);
        r.lazy_rounds = lazy.rounds;
    }
    for (const auto& id : r.unsolvable) r.sequence.order.push_back(id);
    return r;
}

}  // namespace mosegman
