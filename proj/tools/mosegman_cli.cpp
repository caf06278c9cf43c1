// mosegman: plan, benchmark, generate and render rearrangement tasks.
//
// exit codes: 0 success, 1 planning failure, 2 usage or input error

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mosegman/mosegman.hpp"

namespace {

using namespace mosegman;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
}

PlannerConfig make_config(const std::string& config_path, std::optional<std::uint64_t> seed, const Scene* scene) {
    PlannerConfig cfg = config_path.empty() ? PlannerConfig{} : load_config(config_path);
    if (scene && config_path.empty()) cfg.seed = scene->rng_seed();
    apply_env_overrides(cfg);
    if (seed) cfg.seed = *seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D rearrangement planner"};
    app.require_subcommand(1);

    std::string scenario, config, svg_out, trace_out, result_out, suite, csv_out, gen_out, render_out;
    std::uint64_t seed_value = 0;
    int m = 2;
    bool with_plan = false;

    auto* plan = app.add_subcommand("plan", "plan one scenario");
    plan->add_option("scenario", scenario, "scenario file")->required();
    auto* plan_seed = plan->add_option("--seed", seed_value, "planner seed (default: scenario seed)");
    plan->add_option("--config", config, "flat JSON config");
    plan->add_option("--svg-out", svg_out, "write an SVG of the final scene with trajectories");
    plan->add_option("--trace", trace_out, "write the planner trace");
    plan->add_option("--out", result_out, "write the serialized result");

    auto* bench = app.add_subcommand("bench", "run a suite");
    bench->add_option("suite", suite, "suite file")->required();
    bench->add_option("--config", config, "flat JSON config");
    bench->add_option("--csv-out", csv_out, "CSV destination (default stdout)");

    auto* gen = app.add_subcommand("gen", "generate tasks");
    gen->require_subcommand(1);
    auto* mblock = gen->add_subcommand("m-block", "random M-Block task");
    mblock->add_option("--m", m, "object count")->required()->check(CLI::PositiveNumber);
    mblock->add_option("--seed", seed_value, "generator seed");
    mblock->add_option("--out", gen_out, "scenario destination (default stdout)");

    auto* render = app.add_subcommand("render", "render a scenario as SVG");
    render->add_option("scenario", scenario, "scenario file")->required();
    render->add_flag("--plan", with_plan, "overlay a plan computed with the default config");
    auto* render_seed = render->add_option("--seed", seed_value, "planner seed for --plan");
    render->add_option("--config", config, "flat JSON config for --plan");
    render->add_option("--out", render_out, "SVG destination (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*plan) {
            const Scene scene = load_scenario(scenario);
            const auto cfg = make_config(config, *plan_seed ? std::optional(seed_value) : std::nullopt, &scene);
            const auto r = mo_segman(scene, cfg);
            const auto text = serialize(r);
            if (!result_out.empty()) write_text(result_out, text);
            if (!trace_out.empty()) {
                std::string t;
                for (const auto& line : r.trace) t += line + '\n';
                write_text(trace_out, t);
            }
            if (!svg_out.empty()) write_text(svg_out, render_svg(r.final_scene, &r.plans));
            std::printf("status=%s pnp=%zu replanning=%d travel=%.3f wall_time=%.3fs generations=%d\n",
                        to_string(r.status), r.metrics.pnp_count, r.metrics.replanning_count, r.metrics.travel_distance,
                        r.metrics.wall_time, r.metrics.sequence_generations);
            return r.status == Status::Success ? 0 : 1;
        }
        if (*bench) {
            const auto s = load_suite(suite);
            const auto cfg = make_config(config, std::nullopt, nullptr);
            const auto records = run_suite(s, cfg, [](const BenchRecord& r) {
                std::fprintf(stderr, "%s seed=%llu %s pnp=%zu replanning=%d %.2fs\n", r.scenario.c_str(),
                             static_cast<unsigned long long>(r.seed), r.status.c_str(), r.pnp, r.replanning,
                             r.wall_time);
            });
            const auto csv = to_csv(records);
            if (csv_out.empty()) std::cout << csv;
            else write_text(csv_out, csv);
            bool parse_error = false, failed = false;
            for (const auto& r : records) {
                parse_error = parse_error || r.status == "parse-error";
                failed = failed || r.status != "success";
            }
            return parse_error ? 2 : failed ? 1 : 0;
        }
        if (*mblock) {
            const auto text = scene_to_json(gen_m_block(m, seed_value)).dump(2) + "\n";
            if (gen_out.empty()) std::cout << text;
            else write_text(gen_out, text);
            return 0;
        }
        if (*render) {
            const Scene scene = load_scenario(scenario);
            std::string svg;
            if (with_plan) {
                const auto cfg = make_config(config, *render_seed ? std::optional(seed_value) : std::nullopt, &scene);
                const auto r = mo_segman(scene, cfg);
                svg = render_svg(scene, &r.plans);
            } else {
                svg = render_svg(scene);
            }
            if (render_out.empty()) std::cout << svg;
            else write_text(render_out, svg);
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
