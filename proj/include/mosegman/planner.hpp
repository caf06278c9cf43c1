#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mosegman/motion.hpp"
#include "mosegman/scene.hpp"
#include "mosegman/sequencer.hpp"
#include "mosegman/sgfs.hpp"

namespace mosegman {

enum class SequencerMode { Full, Random, GreedyCycles, EuclideanOnly, NoRegeneration };

inline const char* to_string(SequencerMode m) {
    switch (m) {
        case SequencerMode::Full: return "full";
        case SequencerMode::Random: return "random";
        case SequencerMode::GreedyCycles: return "greedy";
        case SequencerMode::EuclideanOnly: return "euclidean";
        case SequencerMode::NoRegeneration: return "static";
    }
    return "?";
}

struct PlannerConfig {
    int skip_max_divisor = 4;
    int iter_max_offset = 1;
    double time_limit = 120.0;  // seconds
    int sgfs_rounds = 4;        // SGFS calls per gen_motion_plan
    std::uint64_t seed = 0;
    SequencerMode sequencer = SequencerMode::Full;
    MotionConfig motion;
    SgfsConfig sgfs;
    SequencerConfig sequencing;
};

enum class Status { Success, Timeout, IterExhausted };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::Success: return "success";
        case Status::Timeout: return "timeout";
        case Status::IterExhausted: return "iter-exhausted";
    }
    return "?";
}

struct PlanEntry {
    MotionPlan plan;
    bool relocation = false;  // temporary move found by SGFS
    int generation = 0;       // sequence generation active when executed
};

struct Metrics {
    std::size_t pnp_count = 0;
    int replanning_count = 0;
    double travel_distance = 0.0;
    double wall_time = 0.0;
    double sequence_time = 0.0;
    int sequence_generations = 0;
};

struct PlanResult {
    std::vector<PlanEntry> plans;
    Metrics metrics;
    Status status = Status::IterExhausted;
    Scene final_scene;
    int failed_attempts = 0;
    std::vector<std::string> trace;
};

/// pnp = attach events, replanning = failed placement attempts plus sequence
/// regenerations after the first, travel = summed path lengths.
inline Metrics count_metrics(const PlanResult& r) {
    Metrics m = r.metrics;
    m.pnp_count = 0;
    m.travel_distance = 0.0;
    for (const auto& e : r.plans) {
        m.pnp_count += e.plan.pnp_count();
        m.travel_distance += e.plan.travel_distance();
    }
    m.replanning_count = r.failed_attempts + std::max(0, r.metrics.sequence_generations - 1);
    return m;
}

struct MotionPlanOutcome {
    std::vector<PlanEntry> plans;  // relocations first, goal placement last on success
    Scene scene;
    bool ok = false;
    IdSet relocated;               // ids moved by SGFS
};

/// Transport to the goal; on a blocked leg, SGFS relocations followed by a
/// retry. Executed relocations are kept even when the object stays unplaced.
inline MotionPlanOutcome gen_motion_plan(const Scene& scene, const std::string& object_id, const IdSet& placed,
                                         std::uint64_t seed, const PlannerConfig& cfg = {},
                                         std::vector<std::string>* trace = nullptr) {
    (void)placed;  // placed goal objects are ordinary obstacles to SGFS
    MotionPlanOutcome out;
    out.scene = scene;
    const Pose2 goal = scene.goal_of(object_id);
    for (int round = 0; round <= cfg.sgfs_rounds; ++round) {
        auto tr = transport(out.scene, object_id, goal, mix_seed(seed, 2 * round), cfg.motion);
        if (tr.ok()) {
            out.plans.push_back({std::move(*tr.plan), false, 0});
            out.scene = std::move(tr.scene);
            out.ok = true;
            return out;
        }
        if (tr.stage == FailStage::Static || !tr.task || round == cfg.sgfs_rounds) return out;
        auto search = sgfs(out.scene, *tr.task, mix_seed(seed, 2 * round + 1), cfg.sgfs, cfg.motion);
        if (trace) {
            trace->push_back("sgfs object=" + object_id + " task=" + (tr.task->kind == TaskKind::Pick ? "pick" : "place") +
                             " success=" + (search.success ? "1" : "0") +
                             " relocations=" + std::to_string(search.plans.size()));
            for (const auto& line : search.trace) trace->push_back("  " + line);
        }
        if (!search.success || search.plans.empty()) return out;
        for (auto& p : search.plans) out.plans.push_back({std::move(p), true, 0});
        out.relocated.insert(search.relocated.begin(), search.relocated.end());
        out.scene = std::move(search.scene);
    }
    return out;
}

/// The outer loop: sequence, place in order, skip and regenerate.
inline PlanResult mo_segman(const Scene& scene, const IdSet& goals, const PlannerConfig& cfg = {}) {
    using clock = std::chrono::steady_clock;
    if (goals.empty()) throw Error("mo_segman: empty goal set");
    for (const auto& g : goals)
        if (!scene.is_goal_object(g)) throw Error("'" + g + "' is not a goal object");
    if (cfg.skip_max_divisor <= 0 || cfg.iter_max_offset < 0 || !(cfg.time_limit > 0))
        throw Error("planner limits must be positive");
    const auto t0 = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

    PlanResult r;
    SequencerCache cache;
    SequencerConfig scfg = cfg.sequencing;
    scfg.motion = cfg.motion;
    scfg.random_sequence = cfg.sequencer == SequencerMode::Random;
    scfg.greedy_cycle_removal = cfg.sequencer == SequencerMode::GreedyCycles;
    scfg.lazy_costs = cfg.sequencer != SequencerMode::EuclideanOnly;
    const double tol = default_placement_tol(scene);
    auto placed_of = [&](const Scene& x) {
        IdSet p;
        for (const auto& id : verify_placements(x, tol))
            if (goals.count(id)) p.insert(id);
        return p;
    };

    const int skip_max = static_cast<int>(goals.size()) / cfg.skip_max_divisor;
    const int iter_max = static_cast<int>(goals.size()) + cfg.iter_max_offset;
    int skip = 0, iter = 0;
    Scene x = scene;
    IdSet placed = placed_of(x);
    auto not_placed = [&] {
        IdSet s;
        for (const auto& g : goals)
            if (!placed.count(g)) s.insert(g);
        return s;
    };
    auto generate = [&](const IdSet& remaining) {
        const auto ts = clock::now();
        const std::uint64_t s = mix_seed(cfg.seed, 7000 + r.metrics.sequence_generations);
        auto seq = gen_obj_place_seq(x, remaining, scfg.random_sequence ? s : cfg.seed, scfg, &cache);
        r.metrics.sequence_time += std::chrono::duration<double>(clock::now() - ts).count();
        ++r.metrics.sequence_generations;
        std::string line = "sequence gen=" + std::to_string(r.metrics.sequence_generations) + " order=";
        for (const auto& id : seq.sequence.order) line += id + " ";
        r.trace.push_back(line);
        return seq.sequence.order;
    };

    std::vector<std::string> seq = generate(not_placed());
    bool timed_out = false;
    while (placed.size() != goals.size() && iter < iter_max && !timed_out) {
        ++iter;
        for (std::size_t k = 0; k < seq.size(); ++k) {
            const std::string oi = seq[k];
            if (placed.count(oi)) continue;
            if (elapsed() > cfg.time_limit) {
                timed_out = true;
                break;
            }
            const std::uint64_t step_seed = mix_seed(cfg.seed, hash_id(oi) + 131u * (r.plans.size() + 1) + iter);
            auto out = gen_motion_plan(x, oi, placed, step_seed, cfg, &r.trace);
            for (auto& e : out.plans) {
                e.generation = r.metrics.sequence_generations;
                r.plans.push_back(std::move(e));
            }
            x = std::move(out.scene);
            placed = placed_of(x);
            if (out.ok) {
                r.trace.push_back("placed " + oi);
                skip = 0;
                bool any_reloc = false;
                for (const auto& id : out.relocated) any_reloc = any_reloc || goals.count(id);
                if (any_reloc && cfg.sequencer != SequencerMode::NoRegeneration) {
                    seq = generate(not_placed());
                    break;
                }
            } else {
                r.trace.push_back("skipped " + oi);
                ++r.failed_attempts;
                if (++skip > skip_max) {
                    skip = 0;
                    seq = generate(not_placed());
                    break;
                }
            }
        }
    }
    r.final_scene = x;
    r.status = placed.size() == goals.size() ? Status::Success : timed_out ? Status::Timeout : Status::IterExhausted;
    r.metrics = count_metrics(r);
    r.metrics.wall_time = elapsed();
    return r;
}

inline PlanResult mo_segman(const Scene& scene, const PlannerConfig& cfg = {}) {
    const auto ids = scene.goal_ids();
    return mo_segman(scene, IdSet(ids.begin(), ids.end()), cfg);
}

// ---------------------------------------------------------------------------
// Serialization and replay

namespace detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

inline void write_path(std::ostringstream& os, const char* name, const Path& p) {
    os << "    " << name << " n=" << p.waypoints.size() << " length=" << fmt(p.length()) << " :";
    for (const auto& w : p.waypoints) os << ' ' << fmt(w.x) << ',' << fmt(w.y);
    os << '\n';
}

}  // namespace detail

/// Stable text form of a result. Wall-clock fields are left out so equal runs
/// serialize to equal bytes.
inline std::string serialize(const PlanResult& r) {
    std::ostringstream os;
    os << "status " << to_string(r.status) << '\n';
    os << "plans " << r.plans.size() << '\n';
    for (std::size_t i = 0; i < r.plans.size(); ++i) {
        const auto& e = r.plans[i];
        os << "plan " << i << " object=" << e.plan.object_id << " action=" << (e.relocation ? "relocate" : "place")
           << " generation=" << e.generation << " pairs=" << e.plan.pairs.size() << '\n';
        for (std::size_t k = 0; k < e.plan.pairs.size(); ++k) {
            const auto& p = e.plan.pairs[k];
            os << "  pair " << k << " side=" << to_string(p.subgoal.grasp_side) << " object_at="
               << detail::fmt(p.subgoal.object_pose.x) << ',' << detail::fmt(p.subgoal.object_pose.y) << '\n';
            detail::write_path(os, "pick", p.pick);
            detail::write_path(os, "place", p.place);
        }
    }
    const Metrics m = r.metrics;
    os << "metrics\n";
    os << "  pnp " << m.pnp_count << '\n';
    os << "  replanning " << m.replanning_count << '\n';
    os << "  travel_distance " << detail::fmt(m.travel_distance) << '\n';
    os << "  sequence_generations " << m.sequence_generations << '\n';
    os << "final\n";
    for (const auto& b : r.final_scene.bodies())
        if (b.kind != BodyKind::StaticWall)
            os << "  " << b.id << ' ' << detail::fmt(b.pose.x) << ',' << detail::fmt(b.pose.y) << '\n';
    return os.str();
}

struct ReplayReport {
    bool ok = true;
    int continuity_violations = 0;
    int collision_violations = 0;
    int offset_violations = 0;
    std::vector<std::string> messages;
    Scene final_scene;
};

/// Re-executes every pair from `initial`: exact robot continuity between legs,
/// rigid offset while carrying, and collision-free motion over every segment.
inline ReplayReport replay(const Scene& initial, const std::vector<PlanEntry>& plans, double offset_tol = 1e-9) {
    ReplayReport rep;
    Scene x = initial;
    const Body& robot = initial.robot();
    const Shape robot_box = Shape::box(robot.width, robot.height);
    auto fail = [&](int& counter, const std::string& msg) {
        ++counter;
        rep.ok = false;
        rep.messages.push_back(msg);
    };
    for (std::size_t i = 0; i < plans.size(); ++i) {
        const auto& plan = plans[i].plan;
        for (std::size_t k = 0; k < plan.pairs.size(); ++k) {
            const auto& pr = plan.pairs[k];
            const std::string where = "plan " + std::to_string(i) + " pair " + std::to_string(k);
            if (pr.pick.waypoints.size() < 2 || pr.place.waypoints.size() < 2) {
                fail(rep.continuity_violations, where + ": path with fewer than 2 waypoints");
                continue;
            }
            const Pose2 at = x.robot().pose;
            if (!(pr.pick.front() == at)) fail(rep.continuity_violations, where + ": pick does not start at robot");
            if (!(pr.pick.back() == pr.place.front()))
                fail(rep.continuity_violations, where + ": place does not start at pick end");
            const auto free_cc = CollisionChecker::for_scene(x, robot_box, {});
            if (!free_cc.path_free(pr.pick.waypoints)) fail(rep.collision_violations, where + ": pick collides");
            const Body& obj = x.body(plan.object_id);
            if (distance(obj.pose, pr.place.front() + pr.object_offset) > offset_tol)
                fail(rep.offset_violations, where + ": grasp offset mismatch");
            const Shape carry{{{Pose2{}, robot.width, robot.height}, {pr.object_offset, obj.width, obj.height}}};
            const auto carry_cc = CollisionChecker::for_scene(x, carry, {plan.object_id});
            if (!carry_cc.path_free(pr.place.waypoints)) fail(rep.collision_violations, where + ": place collides");
            const Pose2 obj_end = pr.place.back() + pr.object_offset;
            x = x.with_pose(plan.object_id, obj_end).with_pose(robot.id, pr.place.back());
        }
    }
    rep.final_scene = x;
    return rep;
}

}  // namespace mosegman
