#include <gtest/gtest.h>

#include "mosegman/mosegman.hpp"

using namespace mosegman;

namespace {

Scene load(const std::string& name) { return load_scenario(std::string(MOSEGMAN_SCENARIO_DIR) + "/" + name); }

TaskTrajectory blocked_task(const Scene& s, const std::string& id) {
    const auto out = transport(s, id, s.goal_of(id), 0);
    EXPECT_FALSE(out.ok());
    EXPECT_TRUE(out.task.has_value());
    return *out.task;
}

}  // namespace

TEST(SelectCritical, DoorwayPlugIsTheWholeSet) {
    const Scene s = load("doorway.json");
    const auto task = blocked_task(s, "target");
    const auto o_col = find_colliding(s, task);
    ASSERT_EQ(o_col, std::vector<std::string>{"plug"});
    const auto crit = select_critical(s, task, o_col, 0, 1);
    ASSERT_TRUE(crit.has_value());
    EXPECT_EQ(*crit, IdSet{"plug"});
    EXPECT_FALSE(select_critical(s, task, o_col, 1, 1).has_value());
    EXPECT_THROW(select_critical(s, task, {}, 0, 1), Error);
}

TEST(SelectCritical, NestedNeedsBothAndNoSingleton) {
    const Scene s = load("nested.json");
    const auto task = blocked_task(s, "target");
    const auto o_col = find_colliding(s, task);
    const auto crit = select_critical(s, task, o_col, 0, 1);
    ASSERT_TRUE(crit.has_value());
    EXPECT_EQ(*crit, (IdSet{"inner", "outer"}));
    for (const auto& id : o_col) EXPECT_FALSE(task_feasible(s.without({id}), task, 1)) << id;
}

TEST(Weights, MaxNormalized) {
    const Scene s = load("nested.json");
    const auto task = blocked_task(s, "target");
    const auto w = weight_objects(s, {"inner", "outer"}, task);
    double top = 0;
    for (const auto& [id, v] : w) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        top = std::max(top, v);
    }
    EXPECT_DOUBLE_EQ(top, 1.0);
    EXPECT_THROW(weight_objects(s, {}, task), Error);
}

TEST(Weights, Decay) {
    const ObjectWeights w{{"a", 1.0}, {"b", 0.5}};
    auto d = decay_weight(w, "a", 2.0, 4.0);
    EXPECT_FALSE(d.skipped);
    EXPECT_DOUBLE_EQ(d.weights.at("a"), 0.5);
    EXPECT_DOUBLE_EQ(d.weights.at("b"), 0.5);
    EXPECT_DOUBLE_EQ(decay_weight(w, "a", 9.0, 4.0).weights.at("a"), 0.0);
    EXPECT_DOUBLE_EQ(decay_weight(w, "a", -1.0, 4.0).weights.at("a"), 1.0);
    d = decay_weight(w, "a", 1.0, 0.0);
    EXPECT_TRUE(d.skipped);
    EXPECT_EQ(d.weights, w);
    EXPECT_THROW(decay_weight(w, "zz", 1.0, 1.0), Error);
}

TEST(ExpandCrit, MostCollisionsThenLargerArea) {
    const Scene s({0, 0, 10, 10},
                  {{"robot", 0.5, 0.5, BodyKind::Robot, {1, 1}},
                   {"small", 0.4, 0.4, BodyKind::MovableObstacle, {3, 3}},
                   {"big", 0.8, 0.8, BodyKind::MovableObstacle, {6, 6}},
                   {"in", 0.8, 0.8, BodyKind::MovableObstacle, {8, 2}}},
                  {});
    auto [crit, w] = expand_crit(s, {"in"}, {{"in", 1.0}}, {{"small", 2}, {"big", 2}, {"in", 9}});
    EXPECT_EQ(crit, (IdSet{"big", "in"}));
    EXPECT_DOUBLE_EQ(w.at("big"), 1.0);
    auto [crit2, w2] = expand_crit(s, {"big"}, {{"big", 1.0}}, {{"small", 3}, {"big", 5}});
    EXPECT_EQ(crit2, (IdSet{"big", "small"}));
    EXPECT_DOUBLE_EQ(w2.at("small"), 0.25);
    auto [same, w3] = expand_crit(s, {"big"}, {{"big", 1.0}}, {});
    EXPECT_EQ(same, IdSet{"big"});
}

TEST(Scoring, ExplorationBonus) {
    EXPECT_DOUBLE_EQ(exploration_bonus(0, 60, false), 60.0);
    EXPECT_DOUBLE_EQ(exploration_bonus(3, 60, false), 30.0);
    EXPECT_DOUBLE_EQ(exploration_bonus(4, 60, true), 120.0);
    EXPECT_THROW(exploration_bonus(1, -1, false), Error);
    SearchNode n;
    n.scene_score = 10;
    n.visits = 3;
    EXPECT_DOUBLE_EQ(score_node(n, 60), 40.0);
}

TEST(Scoring, ClearingTheDoorRaisesScore) {
    const Scene s = load("doorway.json");
    const auto task = blocked_task(s, "target");
    EXPECT_GT(score_scene(s.without({"plug"}), task), score_scene(s, task));
}

TEST(Relocation, CandidatesAreValid) {
    const Scene s = load("doorway.json");
    const auto task = blocked_task(s, "target");
    const SgfsConfig cfg;
    const auto cands = gen_relocation_points(s, "plug", 4, task.cells, cfg);
    ASSERT_FALSE(cands.empty());
    EXPECT_LE(cands.size(), 4u);
    const GridFrame f = GridFrame::over(s.workspace(), RasterConfig{}.grid_cells);
    const Body& plug = s.body("plug");
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const auto& c = cands[i];
        EXPECT_FALSE(collides(s, "plug", c.target));
        EXPECT_GE(c.clearance, cfg.clearance_min);
        Cell lo, hi;
        f.cell_range(plug.footprint_at(c.target), lo, hi);
        for (const Cell& t : task.cells)
            EXPECT_FALSE(t.row >= lo.row && t.row <= hi.row && t.col >= lo.col && t.col <= hi.col);
        EXPECT_FALSE(interiors_overlap(plug.footprint_at(c.target),
                                       s.body("target").footprint_at(s.goal_of("target"))));
        for (std::size_t j = 0; j < i; ++j) EXPECT_GE(distance(c.target, cands[j].target), plug.width - 1e-9);
        if (i > 0) {
            EXPECT_LE(c.clearance, cands[i - 1].clearance);
        }
    }
    EXPECT_THROW(gen_relocation_points(s, "plug", 0), Error);
}

TEST(Search, DoorwayNeedsOneRelocation) {
    const Scene s = load("doorway.json");
    const auto task = blocked_task(s, "target");
    const auto r = sgfs(s, task, 3);
    ASSERT_TRUE(r.success);
    EXPECT_EQ(r.relocated, IdSet{"plug"});
    std::vector<PlanEntry> entries;
    for (const auto& p : r.plans) entries.push_back({p, true, 0});
    const auto rep = replay(s, entries);
    EXPECT_TRUE(rep.ok);
    EXPECT_EQ(rep.final_scene, r.scene);
    EXPECT_TRUE(task_feasible(r.scene, task, 4));
}

TEST(Search, NestedMovesBoth) {
    const Scene s = load("nested.json");
    const auto r = sgfs(s, blocked_task(s, "target"), 3);
    ASSERT_TRUE(r.success);
    EXPECT_EQ(r.relocated, (IdSet{"inner", "outer"}));
}

TEST(Reachability, EnclosedObjectIsUnreachable) {
    const Scene s = load("nested.json");
    EXPECT_TRUE(object_reachable(s, "outer"));
    EXPECT_FALSE(object_reachable(s, "inner"));
}
