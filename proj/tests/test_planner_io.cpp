#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "mosegman/mosegman.hpp"

using namespace mosegman;

namespace {

std::string dir() { return MOSEGMAN_SCENARIO_DIR; }

const char* kTiny = R"({
  "walls": [{"x": 5, "y": 5, "w": 0.3, "h": 2}],
  "movables": [{"id": "a", "w": 0.6, "h": 0.6, "x": 2, "y": 5, "goal": {"x": 8, "y": 5}}],
  "robot": {"side": 0.5, "x": 1, "y": 1},
  "seed": 4
})";

}  // namespace

TEST(Scenario, ParsesAndRoundTrips) {
    const Scene s = parse_scenario(kTiny);
    EXPECT_EQ(s.rng_seed(), 4u);
    EXPECT_EQ(s.body("a").kind, BodyKind::GoalObject);
    EXPECT_EQ(s.body("wall0").kind, BodyKind::StaticWall);
    EXPECT_EQ(scene_from_json(scene_to_json(s)), s);
}

TEST(Scenario, RejectsMalformedInput) {
    EXPECT_THROW(parse_scenario("{"), Error);
    EXPECT_THROW(parse_scenario(R"({"robot": {"side": 0.5, "x": 1, "y": 1}, "colour": 1})"), Error);
    EXPECT_THROW(parse_scenario(R"({"movables": []})"), Error);
    EXPECT_THROW(parse_scenario(R"({"robot": {"side": 0.5, "x": 1, "y": 1}, "seed": -2})"), Error);
    // goal outside the workspace
    EXPECT_THROW(parse_scenario(R"({"movables": [{"id": "a", "w": 1, "h": 1, "x": 2, "y": 2, "goal": {"x": 20, "y": 2}}],
                                    "robot": {"side": 0.5, "x": 1, "y": 5}})"),
                 Error);
    EXPECT_THROW(load_scenario(dir() + "/does_not_exist.json"), Error);
}

TEST(Config, FlatKeysAndErrors) {
    PlannerConfig cfg;
    apply_config(cfg, Json{{"seed", 9}, {"refine", false}, {"sequencer", "random"}, {"c0", 12.5}});
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_FALSE(cfg.motion.refine);
    EXPECT_EQ(cfg.sequencer, SequencerMode::Random);
    EXPECT_DOUBLE_EQ(cfg.sgfs.c0, 12.5);
    EXPECT_THROW(apply_config(cfg, Json{{"nope", 1}}), Error);
    EXPECT_THROW(apply_config(cfg, Json{{"sequencer", "clever"}}), Error);
    EXPECT_THROW(apply_config(cfg, Json{{"seed", "x"}}), Error);
    EXPECT_THROW(apply_config(cfg, Json{{"motion", Json::object()}}), Error);
    EXPECT_FALSE(config_keys().empty());
}

TEST(Config, EnvironmentOverrides) {
    ::setenv("MOSEGMAN_TIME_LIMIT", "33", 1);
    ::setenv("MOSEGMAN_SEQUENCER", "greedy", 1);
    PlannerConfig cfg;
    apply_env_overrides(cfg);
    ::unsetenv("MOSEGMAN_TIME_LIMIT");
    ::unsetenv("MOSEGMAN_SEQUENCER");
    EXPECT_DOUBLE_EQ(cfg.time_limit, 33.0);
    EXPECT_EQ(cfg.sequencer, SequencerMode::GreedyCycles);
}

TEST(Planner, RejectsBadArguments) {
    const Scene s = parse_scenario(kTiny);
    EXPECT_THROW(mo_segman(s, IdSet{}), Error);
    EXPECT_THROW(mo_segman(s, IdSet{"wall0"}), Error);
    PlannerConfig cfg;
    cfg.time_limit = 0;
    EXPECT_THROW(mo_segman(s, cfg), Error);
}

TEST(Planner, SolvesAndReplays) {
    const Scene s = load_scenario(dir() + "/four_blocks.json");
    const auto r = mo_segman(s);
    ASSERT_EQ(r.status, Status::Success);
    const auto rep = replay(s, r.plans);
    EXPECT_TRUE(rep.ok);
    EXPECT_EQ(rep.final_scene, r.final_scene);
    std::size_t pnp = 0;
    for (const auto& e : r.plans) pnp += e.plan.pairs.size();
    EXPECT_EQ(pnp, r.metrics.pnp_count);
    EXPECT_EQ(r.metrics.replanning_count, r.failed_attempts + r.metrics.sequence_generations - 1);
}

TEST(Planner, ReplayCatchesTampering) {
    const Scene s = load_scenario(dir() + "/o_room.json");
    auto r = mo_segman(s);
    ASSERT_EQ(r.status, Status::Success);
    auto broken = r.plans;
    broken.front().plan.pairs.front().pick.waypoints.front().x += 0.01;
    EXPECT_GT(replay(s, broken).continuity_violations, 0);
    auto through_wall = r.plans;
    auto& pick = through_wall.front().plan.pairs.front().pick.waypoints;
    pick.insert(pick.begin() + 1, Pose2{7.75, 5.0});  // inside the room, then back out
    pick.insert(pick.begin() + 2, Pose2{0.5, 0.5});
    EXPECT_GT(replay(s, through_wall).collision_violations, 0);
}

TEST(Planner, SerializationIsDeterministic) {
    const Scene s = load_scenario(dir() + "/mo_3_block.json");
    PlannerConfig cfg;
    cfg.seed = 6;
    const std::string a = serialize(mo_segman(s, cfg));
    EXPECT_EQ(a, serialize(mo_segman(s, cfg)));
    EXPECT_EQ(a.find("wall_time"), std::string::npos);
}

TEST(Bench, MBlockIsValidAndSeeded) {
    for (int m : {2, 4, 8}) {
        const Scene s = gen_m_block(m, 1);
        EXPECT_NO_THROW(validate(s));
        EXPECT_EQ(s.goals().size(), static_cast<std::size_t>(m));
        EXPECT_EQ(s, gen_m_block(m, 1));
    }
    EXPECT_NE(gen_m_block(4, 1), gen_m_block(4, 2));
    EXPECT_THROW(gen_m_block(0, 1), Error);
}

TEST(Bench, SuiteAndCsv) {
    const auto suite = load_suite(dir() + "/desk_suite.json");
    EXPECT_EQ(suite.repeats, 10);
    EXPECT_EQ(suite.scenarios.size(), 7u);
    EXPECT_THROW(suite_from_json(Json{{"scenarios", Json::array({Json{{"name", "x"}}})}}), Error);
    TaskSuite small;
    small.scenarios.push_back({"m2", "", 2, Json::object()});
    small.scenarios.push_back({"missing", dir() + "/nope.json", 0, Json::object()});
    small.seeds = {0, 1};
    small.repeats = 2;
    const auto rec = run_suite(small, PlannerConfig{});
    ASSERT_EQ(rec.size(), 4u);
    EXPECT_EQ(rec[0].scenario, "m2");
    EXPECT_EQ(rec[0].status, "success");
    EXPECT_EQ(rec[2].status, "parse-error");
    const std::string csv = to_csv(rec);
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, kCsvHeader);
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    EXPECT_EQ(rows, 4);
}

TEST(Bench, SvgHasBodiesAndPaths) {
    const Scene s = load_scenario(dir() + "/doorway.json");
    const auto r = mo_segman(s);
    const std::string svg = render_svg(s, &r.plans);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("plug"), std::string::npos);
    EXPECT_NE(svg.find("class=\"goal"), std::string::npos);
    EXPECT_NE(svg.find("path pick"), std::string::npos);
    EXPECT_NE(svg.find("path place"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}
