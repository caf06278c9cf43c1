#include <gtest/gtest.h>

#include <deque>
#include <set>
#include <random>

#include "mosegman/mosegman.hpp"

using namespace mosegman;

namespace {

Scene open_scene() {
    return Scene({0, 0, 10, 10},
                 {{"robot", 0.5, 0.5, BodyKind::Robot, {1, 1}}, {"box", 0.8, 0.8, BodyKind::GoalObject, {3, 5}}},
                 {{"box", {7, 5}}});
}

// 4-connected search on a coarse lattice of robot poses. Any lattice path is a
// continuous path too, so a planner that is complete in practice must succeed.
bool lattice_path(const CollisionChecker& cc, const Pose2& a, const Pose2& b, double h) {
    auto key = [&](const Pose2& p) { return std::pair<int, int>(std::lround(p.x / h), std::lround(p.y / h)); };
    std::set<std::pair<int, int>> seen{key(a)};
    std::deque<Pose2> q{a};
    while (!q.empty()) {
        const Pose2 p = q.front();
        q.pop_front();
        if (distance(p, b) < 1e-9) return true;
        for (auto [dx, dy] : {std::pair{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}}) {
            const Pose2 n{p.x + dx, p.y + dy};
            if (seen.count(key(n)) || !cc.segment_free(p, n)) continue;
            seen.insert(key(n));
            q.push_back(n);
        }
    }
    return false;
}

}  // namespace

TEST(Rrt, FindsPathWheneverLatticeDoes) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(1, 9);
    int solvable = 0;
    for (int i = 0; i < 25; ++i) {
        std::vector<Aabb> walls;
        for (int k = 0; k < 6; ++k) {
            const Pose2 c{u(rng), u(rng)};
            walls.push_back(Aabb::centered(c, k % 2 ? 0.3 : 3.0, k % 2 ? 3.0 : 0.3));
        }
        const CollisionChecker cc({0, 0, 10, 10}, Shape::box(0.5, 0.5), walls);
        const Pose2 a{0.5, 0.5}, b{9.5, 9.5};
        if (!cc.free(a) || !cc.free(b) || !lattice_path(cc, a, b, 0.5)) continue;
        ++solvable;
        RrtConfig cfg;
        cfg.max_iters = 20000;
        const auto p = birrt(cc, a, b, 17 + i, cfg, 0.25);
        ASSERT_TRUE(p.has_value()) << "instance " << i;
        EXPECT_EQ(p->front(), a);
        EXPECT_EQ(p->back(), b);
        EXPECT_TRUE(cc.path_free(p->waypoints));
    }
    EXPECT_GT(solvable, 5);
}

TEST(Rrt, NoPathIntoClosedPen) {
    const std::vector<Aabb> pen{{6, 6, 9, 6.3}, {6, 8.7, 9, 9}, {6, 6, 6.3, 9}, {8.7, 6, 9, 9}};
    const CollisionChecker cc({0, 0, 10, 10}, Shape::box(0.5, 0.5), pen);
    RrtConfig cfg;
    cfg.max_iters = 2000;
    EXPECT_FALSE(birrt(cc, {1, 1}, {7.5, 7.5}, 1, cfg, 0.25).has_value());
}

TEST(Rrt, SameSeedSamePath) {
    const std::vector<Aabb> walls{{4.85, 0, 5.15, 8}};
    const CollisionChecker cc({0, 0, 10, 10}, Shape::box(0.5, 0.5), walls);
    RrtConfig cfg;
    const auto a = birrt(cc, {1, 1}, {9, 1}, 42, cfg, 0.25);
    const auto b = birrt(cc, {1, 1}, {9, 1}, 42, cfg, 0.25);
    ASSERT_TRUE(a && b);
    EXPECT_EQ(*a, *b);
}

TEST(Motion, GraspOffsetIsFlush) {
    const Body obj{"o", 0.8, 0.6, BodyKind::GoalObject, {3, 3}};
    EXPECT_EQ(grasp_offset(obj, 0.5, Side::N), (Pose2{0, 0.55}));
    EXPECT_EQ(grasp_offset(obj, 0.5, Side::W), (Pose2{-0.65, 0}));
    const Body robot{"r", 0.5, 0.5, BodyKind::Robot, {0, 0}};
    const Shape carry = carry_shape(obj, robot, Side::E);
    ASSERT_EQ(carry.parts.size(), 2u);
    EXPECT_FALSE(interiors_overlap(carry.parts[0].at({5, 5}), carry.parts[1].at({5, 5})));
}

TEST(Motion, StraightPathNeedsOneSubgoal) {
    const Scene s = open_scene();
    const ObjectPath mu{"box", {{3, 5}, {7, 5}}};
    const auto sel = select_subgoals(mu, s);
    ASSERT_TRUE(sel.ok());
    ASSERT_FALSE(sel.subgoals.empty());
    EXPECT_EQ(sel.subgoals.back().object_pose, (Pose2{7, 5}));
}

TEST(Motion, RefineNeverAddsSubgoals) {
    const Scene s = open_scene();
    const ObjectPath mu{"box", {{3, 5}, {3, 8}, {7, 8}, {7, 5}}};
    const auto sel = select_subgoals(mu, s);
    ASSERT_TRUE(sel.ok());
    const auto refined = refine_subgoals(sel.subgoals, s, "box", 0.25);
    EXPECT_LE(refined.size(), sel.subgoals.size());
    EXPECT_EQ(refined.back().object_pose, sel.subgoals.back().object_pose);
    EXPECT_THROW(refine_subgoals(sel.subgoals, s, "box", 0.0), Error);
}

TEST(Motion, TransportReplays) {
    const Scene s = open_scene();
    const auto out = transport(s, "box", {7, 5}, 9);
    ASSERT_TRUE(out.ok());
    const auto rep = replay(s, {{*out.plan, false, 0}});
    EXPECT_TRUE(rep.ok) << (rep.messages.empty() ? "" : rep.messages.front());
    EXPECT_EQ(rep.final_scene.body("box").pose, (Pose2{7, 5}));
    EXPECT_EQ(out.scene, rep.final_scene);
}

TEST(Motion, BlockedPlaceReportsTask) {
    // a movable plug fills the only doorway
    std::vector<Body> bodies{{"robot", 0.5, 0.5, BodyKind::Robot, {1, 5}}, {"box", 0.6, 0.6, BodyKind::GoalObject, {2, 5}}};
    bodies.push_back({"wall_a", 0.3, 4.5, BodyKind::StaticWall, {5, 2.25}});
    bodies.push_back({"wall_b", 0.3, 4.5, BodyKind::StaticWall, {5, 7.75}});
    bodies.push_back({"plug", 0.6, 0.6, BodyKind::MovableObstacle, {5, 5}});
    const Scene s({0, 0, 10, 10}, bodies, {{"box", {8, 5}}});
    const auto out = transport(s, "box", {8, 5}, 1);
    EXPECT_FALSE(out.ok());
    ASSERT_TRUE(out.task.has_value());
    EXPECT_FALSE(out.task->cells.empty());
}
