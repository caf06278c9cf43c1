// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any
// criterion fails. Scenario files are read from MOSEGMAN_SCENARIO_DIR.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mosegman/mosegman.hpp"
#include "oracles.hpp"

using namespace mosegman;

namespace {

// Tolerances and budgets.
constexpr double kEdtTol = 1e-9;
constexpr double kPatspBudgetS = 60.0;
constexpr int kFesSlack = 2;
constexpr double kRunBudgetS = 120.0;
constexpr double kRefineRatio = 0.7;
constexpr double kReplayOffsetTol = 1e-9;
constexpr double kLazyCostTol = 1e-9;
constexpr int kSeeds = 10;

std::string scenario(const std::string& name) { return std::string(MOSEGMAN_SCENARIO_DIR) + "/" + name; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Verdict {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Verdict()>& check) {
    Verdict v;
    try {
        v = check();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("%s criterion %d: %s (%s)\n", v.pass ? "PASS" : "FAIL", id, title.c_str(), v.detail.c_str());
    std::fflush(stdout);
}

CostMatrix matrix_of(const std::vector<std::vector<double>>& c) {
    CostMatrix m;
    const int n = static_cast<int>(c.size()) - 1;
    for (int i = 1; i <= n; ++i) m.ids.push_back("o" + std::to_string(i));
    m.costs = c;
    m.provenance.assign(n + 1, std::vector<Provenance>(n + 1, Provenance::Euclidean));
    return m;
}

Verdict patsp_oracle() {
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> size(1, 8);
    std::uniform_real_distribution<double> density(0.0, 0.5);
    const auto t0 = std::chrono::steady_clock::now();
    int mismatches = 0;
    for (int inst = 0; inst < 100; ++inst) {
        const int n = size(rng);
        const auto c = oracle::random_metric(n, rng);
        const auto prec = oracle::random_precedence(n, density(rng), rng);
        const CostMatrix m = matrix_of(c);
        const auto seq = solve_patsp(m, prec);
        std::vector<int> nodes;
        for (const auto& id : seq.order) nodes.push_back(m.node_of(id));
        bool ok = static_cast<int>(nodes.size()) == n;
        std::vector<int> pos(n + 1, -1);
        for (int i = 0; i < static_cast<int>(nodes.size()); ++i) pos[nodes[i]] = i;
        for (auto [a, b] : prec) ok = ok && pos[a] < pos[b];
        ok = ok && oracle::path_cost(c, nodes) == oracle::patsp(c, prec);
        ok = ok && seq.total_cost == oracle::path_cost(c, nodes);
        if (!ok) ++mismatches;
    }
    const double t = seconds_since(t0);
    std::ostringstream d;
    d << "100 instances, mismatches=" << mismatches << ", " << t << " s";
    return {mismatches == 0 && t < kPatspBudgetS, d.str()};
}

Verdict edt_oracle() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> density(0.02, 0.6);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const auto mask = oracle::random_mask(16, 16, density(rng), rng);
        const auto got = edt(mask);
        const auto want = oracle::edt(mask);
        for (std::size_t k = 0; k < want.cells.size(); ++k)
            worst = std::max(worst, std::abs(got.cells.cells[k] - want.cells[k]));
    }
    std::ostringstream d;
    d << "200 masks, max error " << worst;
    return {worst <= kEdtTol, d.str()};
}

Verdict cycle_oracle() {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> size(2, 8);
    std::uniform_real_distribution<double> p(0.15, 0.5);
    int cyclic_out = 0, over = 0, worst_excess = -1000;
    for (int i = 0; i < 100; ++i) {
        const auto g = oracle::random_digraph(size(rng), p(rng), rng);
        const auto rem = break_cycles(g, enumerate_cycles(g, 10000));
        if (!oracle::acyclic(rem.dag)) ++cyclic_out;
        const int excess = static_cast<int>(rem.removed.size()) - oracle::min_feedback_edges(g);
        worst_excess = std::max(worst_excess, excess);
        if (excess > kFesSlack) ++over;
    }
    // weak/strong tie on a 2-cycle
    DependencyGraph tie;
    tie.vertices = {"a", "b"};
    tie.add_edge({"a", "b", Strength::Strong});
    tie.add_edge({"b", "a", Strength::Weak});
    const auto tr = break_cycles(tie, enumerate_cycles(tie, 10000));
    const bool weak_removed = tr.removed.size() == 1 && tr.removed[0].strength == Strength::Weak;
    std::ostringstream d;
    d << "cyclic outputs=" << cyclic_out << ", over bound=" << over << ", worst excess=" << worst_excess
      << ", tie removes weak=" << (weak_removed ? "yes" : "no");
    return {cyclic_out == 0 && over == 0 && weak_removed, d.str()};
}

struct DeskRun {
    std::string name;
    std::uint64_t seed = 0;
    Scene scene;
    PlannerConfig cfg;
    PlanResult result;
};

std::vector<DeskRun> desk_runs;

Verdict desk_suite() {
    const auto suite = load_suite(scenario("desk_suite.json"));
    int ok = 0, total = 0;
    double slowest = 0.0;
    std::string bad;
    for (const auto& e : suite.scenarios)
        for (auto seed : suite.seeds) {
            DeskRun run;
            run.name = e.name;
            run.seed = seed;
            run.scene = suite_scene(e, seed);
            apply_config(run.cfg, e.overrides);
            run.cfg.seed = seed;
            const auto t0 = std::chrono::steady_clock::now();
            run.result = mo_segman(run.scene, run.cfg);
            const double t = seconds_since(t0);
            slowest = std::max(slowest, t);
            ++total;
            if (run.result.status == Status::Success && t <= kRunBudgetS) {
                ++ok;
            } else if (bad.size() < 200) {
                bad += " " + e.name + "/" + std::to_string(seed);
            }
            desk_runs.push_back(std::move(run));
        }
    std::ostringstream d;
    d << ok << "/" << total << " success, slowest run " << slowest << " s" << (bad.empty() ? "" : ", failed:" + bad);
    return {total > 0 && ok == total, d.str()};
}

Verdict refinement_effect() {
    const Scene scene = load_scenario(scenario("o_room.json"));
    std::ostringstream d;
    bool pass = true;
    for (int s = 0; s < kSeeds; ++s) {
        PlannerConfig on, off;
        on.seed = off.seed = static_cast<std::uint64_t>(s);
        off.motion.refine = false;
        const auto a = mo_segman(scene, on), b = mo_segman(scene, off);
        const bool ok = a.status == Status::Success && b.status == Status::Success &&
                        static_cast<double>(a.metrics.pnp_count) <= kRefineRatio * static_cast<double>(b.metrics.pnp_count);
        pass = pass && ok;
        d << (s ? " " : "pnp refine/plain: ") << a.metrics.pnp_count << "/" << b.metrics.pnp_count;
    }
    return {pass, d.str()};
}

Verdict sequencing_effect() {
    double full = 0.0, random = 0.0;
    for (int s = 0; s < kSeeds; ++s) {
        const Scene scene = gen_m_block(8, static_cast<std::uint64_t>(s));
        PlannerConfig a, b;
        a.seed = b.seed = static_cast<std::uint64_t>(s);
        b.sequencer = SequencerMode::Random;
        full += mo_segman(scene, a).metrics.replanning_count;
        random += mo_segman(scene, b).metrics.replanning_count;
    }
    full /= kSeeds;
    random /= kSeeds;
    std::ostringstream d;
    d << "mean replanning full=" << full << " random=" << random;
    return {full < random, d.str()};
}

Verdict replay_check() {
    int checked = 0, bad = 0, misplaced = 0;
    for (const auto& run : desk_runs) {
        if (run.result.status != Status::Success) continue;
        ++checked;
        const auto rep = replay(run.scene, run.result.plans, kReplayOffsetTol);
        if (!rep.ok || rep.continuity_violations || rep.collision_violations || rep.offset_violations) ++bad;
        const auto placed = verify_placements(rep.final_scene, default_placement_tol(rep.final_scene));
        if (placed.size() != run.scene.goals().size()) ++misplaced;
    }
    std::ostringstream d;
    d << checked << " runs replayed, violating=" << bad << ", goals missed=" << misplaced;
    return {checked > 0 && bad == 0 && misplaced == 0, d.str()};
}

Verdict determinism() {
    int differing = 0;
    for (const auto& run : desk_runs)
        if (serialize(mo_segman(run.scene, run.cfg)) != serialize(run.result)) ++differing;
    std::ostringstream d;
    d << desk_runs.size() << " runs repeated, differing=" << differing;
    return {!desk_runs.empty() && differing == 0, d.str()};
}

std::set<std::string> relocated_ids(const PlanResult& r) {
    std::set<std::string> ids;
    for (const auto& e : r.plans)
        if (e.relocation) ids.insert(e.plan.object_id);
    return ids;
}

// Every subset of O_col no larger than the chosen one is tested; the chosen set
// must be feasible and no smaller subset may be.
bool minimality_audit(const Scene& scene, const std::string& id, std::uint64_t seed, std::string& note) {
    const PlannerConfig cfg;
    const auto tr = transport(scene, id, scene.goal_of(id), seed, cfg.motion);
    if (tr.ok() || !tr.task) {
        note += " " + id + ":not-blocked";
        return false;
    }
    const auto o_col = find_colliding(scene, *tr.task, cfg.motion.raster);
    if (o_col.empty() || o_col.size() > 4) {
        note += " " + id + ":|O_col|=" + std::to_string(o_col.size());
        return false;
    }
    const std::uint64_t probe_seed = mix_seed(seed, 2);
    const auto crit = select_critical(scene, *tr.task, o_col, 0, probe_seed, cfg.motion);
    if (!crit) {
        note += " " + id + ":no-critical-set";
        return false;
    }
    const int n = static_cast<int>(o_col.size());
    bool ok = task_feasible(scene.without(*crit), *tr.task, probe_seed, cfg.motion);
    for (int mask = 1; mask < (1 << n); ++mask) {
        IdSet sub;
        for (int i = 0; i < n; ++i)
            if (mask & (1 << i)) sub.insert(o_col[i]);
        if (sub.size() >= crit->size()) continue;
        if (task_feasible(scene.without(sub), *tr.task, probe_seed, cfg.motion)) ok = false;
    }
    note += " " + id + ":|O_col|=" + std::to_string(n) + ",|O_crit|=" + std::to_string(crit->size());
    return ok;
}

Verdict sgfs_minimality() {
    const Scene doorway = load_scenario(scenario("doorway.json"));
    const Scene nested = load_scenario(scenario("nested.json"));
    bool pass = true;
    std::ostringstream d;
    std::set<std::size_t> door_counts, nest_counts;
    for (int s = 0; s < kSeeds; ++s) {
        PlannerConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(s);
        const auto a = mo_segman(doorway, cfg), b = mo_segman(nested, cfg);
        const auto na = relocated_ids(a).size(), nb = relocated_ids(b).size();
        door_counts.insert(na);
        nest_counts.insert(nb);
        pass = pass && a.status == Status::Success && b.status == Status::Success && na == 1 && nb >= 2;
    }
    auto list = [](const std::set<std::size_t>& s) {
        std::string o;
        for (auto v : s) o += (o.empty() ? "" : ",") + std::to_string(v);
        return o;
    };
    std::string note;
    const bool audit = minimality_audit(doorway, "target", 0, note) && minimality_audit(nested, "target", 0, note);
    d << "relocated doorway={" << list(door_counts) << "} nested={" << list(nest_counts) << "}, audit" << note;
    return {pass && audit, d.str()};
}

double rrt_order_cost(const Scene& scene, const CostMatrix& m, const std::vector<std::string>& order,
                      SequencerCache* cache, std::uint64_t seed, const MotionConfig& mcfg) {
    double c = 0.0;
    int last = 0;
    for (const auto& id : order) {
        const int j = m.node_of(id);
        c += edge_rrt_cost(scene, m, last, j, cache, seed, mcfg);
        last = j;
    }
    return c;
}

Verdict lazy_refinement() {
    const Scene scene = load_scenario(scenario("detour.json"));
    const auto ids = scene.goal_ids();
    const IdSet goals(ids.begin(), ids.end());
    bool pass = true;
    std::ostringstream d;
    for (int s = 0; s < kSeeds; ++s) {
        const auto seed = static_cast<std::uint64_t>(s);
        SequencerConfig cfg;
        SequencerCache cache;
        const auto refined = gen_obj_place_seq(scene, goals, seed, cfg, &cache);
        SequencerConfig plain = cfg;
        plain.lazy_costs = false;
        const auto euclid = gen_obj_place_seq(scene, goals, seed, plain, &cache);
        const CostMatrix m = euclidean_costs(scene, refined.graph.vertices);
        const double rc = rrt_order_cost(scene, m, refined.sequence.order, &cache, seed, cfg.motion);
        const double ec = rrt_order_cost(scene, m, euclid.sequence.order, &cache, seed, cfg.motion);
        pass = pass && rc <= ec + kLazyCostTol;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s%.2f/%.2f", s ? " " : "rrt cost refined/euclidean: ", rc, ec);
        d << buf;
    }
    return {pass, d.str()};
}

}  // namespace

int main() {
    report(1, "precedence ATSP matches exhaustive search", patsp_oracle);
    report(2, "EDT matches brute force", edt_oracle);
    report(3, "cycle removal acyclic and near-minimal", cycle_oracle);
    report(4, "desk suite success", desk_suite);
    report(5, "refinement reduces PnP on O-Room", refinement_effect);
    report(6, "full sequencer replans less than random on M-Block 8", sequencing_effect);
    report(7, "replay continuity and collisions", replay_check);
    report(8, "byte-identical serialization", determinism);
    report(9, "SGFS relocation counts and critical-set minimality", sgfs_minimality);
    report(10, "lazy refinement RRT cost", lazy_refinement);
    return failures == 0 ? 0 : 1;
}
