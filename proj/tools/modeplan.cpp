#include "modeplan/log.hpp"
#include "modeplan/planner.hpp"
#include "modeplan/render.hpp"
#include "modeplan/replay.hpp"
#include "modeplan/scene.hpp"
#include "modeplan/trajectory.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>

using namespace modeplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitPlanner = 2;

struct SceneArgs {
  std::string scene_path;
  int problem = 0;

  void add(CLI::App* app) {
    auto* s = app->add_option("--scene", scene_path, "scene file");
    auto* p = app->add_option("--problem", problem, "bundled problem 1..7")->check(CLI::Range(1, kNumBuiltinProblems));
    s->excludes(p);
  }

  Scene load() const {
    if (!scene_path.empty()) {
      LoadWarnings w;
      Scene s = load_scene_file(scene_path, &w);
      for (const auto& m : w.messages) spdlog::warn("{}", m);
      return s;
    }
    if (problem > 0) return builtin_problem(problem);
    throw SchemaError("--scene/--problem", "one of them is required");
  }
};

struct PlanArgs {
  std::uint64_t seed = 0;
  std::string algorithm = "rrt";
  double goal_bias = 0.5;
  double rotation_weight = 0.0;
  int max_nodes = 1000;
  double time_limit = 120.0;
  double margin_threshold = 0.0;
  std::string margin_strategy = "fan-lp";

  void add(CLI::App* app) {
    app->add_option("--seed", seed, "random seed");
    app->add_option("--algorithm", algorithm, "rrt|complete")->check(CLI::IsMember({"rrt", "complete"}));
    app->add_option("--goal-bias", goal_bias, "probability of a uniform sample")->check(CLI::Range(0.0, 1.0));
    app->add_option("--rotation-weight", rotation_weight, "metric rotation weight (default diagonal/pi)");
    app->add_option("--max-nodes", max_nodes, "tree node budget")->check(CLI::PositiveNumber);
    app->add_option("--time-limit", time_limit, "seconds")->check(CLI::NonNegativeNumber);
    app->add_option("--margin-threshold", margin_threshold, "stability margin filter (0 disables)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--margin-strategy", margin_strategy, "none|fan-lp")->check(CLI::IsMember({"none", "fan-lp"}));
  }

  PlannerConfig config() const {
    PlannerConfig c;
    c.seed = seed;
    c.algorithm = *parse_algorithm(algorithm);
    c.goal_bias = goal_bias;
    c.rotation_weight = rotation_weight;
    c.max_nodes = max_nodes;
    c.time_limit = time_limit;
    c.margin_threshold = margin_threshold;
    c.margin_strategy = *parse_margin_strategy(margin_strategy);
    return c;
  }
};

nlohmann::ordered_json report_json(const Scene& scene, const PlannerConfig& cfg, const PlanResult& r, bool timing,
                                   const std::string& out, bool replay_ok) {
  nlohmann::ordered_json j;
  j["scene"] = scene.name;
  j["seed"] = cfg.seed;
  j["algorithm"] = std::string(algorithm_name(cfg.algorithm));
  j["success"] = r.success;
  j["failure"] = r.failure ? nlohmann::ordered_json(std::string(failure_reason_name(*r.failure))) : nlohmann::ordered_json(nullptr);
  j["tree_nodes"] = r.stats.tree_nodes;
  j["path_nodes"] = r.stats.path_nodes;
  j["modes_in_path"] = r.stats.modes_in_path;
  j["samples"] = r.stats.samples;
  j["trajectory_steps"] = r.trajectory.steps.size();
  j["replay_ok"] = replay_ok;
  if (timing) j["wall_time"] = r.stats.elapsed;
  j["trajectory"] = out;
  return j;
}

int cmd_plan(const SceneArgs& sa, const PlanArgs& pa, const std::string& out, std::string report, bool timing) {
  const Scene scene = sa.load();
  const PlannerConfig cfg = pa.config();
  const PlanResult r = plan(scene, cfg);
  bool replay_ok = false;
  if (r.success) {
    ReplayTolerances tol;
    tol.rotation_weight = cfg.resolved_rotation_weight(scene);
    const ReplayReport rep = replay_validate(scene, r.trajectory, tol);
    replay_ok = rep.ok();
    for (const auto& v : rep.violations)
      spdlog::warn("replay step {}: {} {}", v.step, violation_kind_name(v.kind), v.detail);
  }
  write_trajectory_file(out, r.trajectory);
  if (report.empty()) report = out + ".report.json";
  std::ofstream rf(report);
  if (!rf) throw std::runtime_error("cannot write " + report);
  rf << report_json(scene, cfg, r, timing, out, replay_ok).dump(2) << '\n';
  std::cerr << fmt::format("{} seed {}: {} in {:.3f} s, {} nodes, path {} nodes, {} modes\n", scene.name, cfg.seed,
                           r.success ? "success" : std::string(failure_reason_name(*r.failure)), r.stats.elapsed,
                           r.stats.tree_nodes, r.stats.path_nodes, r.stats.modes_in_path);
  return r.success ? kExitOk : kExitPlanner;
}

int cmd_validate(const SceneArgs& sa, const std::string& traj_path, double rotation_weight) {
  const Scene scene = sa.load();
  const Trajectory traj = read_trajectory_file(traj_path);
  ReplayTolerances tol;
  tol.rotation_weight = rotation_weight;
  const ReplayReport rep = replay_validate(scene, traj, tol);
  for (const auto& v : rep.violations)
    std::cout << fmt::format("step {}: {}: {}\n", v.step, violation_kind_name(v.kind), v.detail);
  std::cout << (rep.ok() ? "ok" : fmt::format("{} violations", rep.violations.size())) << '\n';
  return rep.ok() ? kExitOk : kExitPlanner;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_bench(const SceneArgs& sa, PlanArgs pa, int runs, std::vector<std::uint64_t> seeds, const std::string& out) {
  const Scene scene = sa.load();
  if (seeds.empty()) {
    for (int i = 0; i < runs; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
  }
  std::vector<double> times, tree, path, modes;
  int successes = 0, valid = 0;
  nlohmann::ordered_json per_run = nlohmann::ordered_json::array();
  for (const std::uint64_t seed : seeds) {
    pa.seed = seed;
    const PlannerConfig cfg = pa.config();
    const PlanResult r = plan(scene, cfg);
    bool ok = false;
    if (r.success) {
      ++successes;
      ReplayTolerances tol;
      tol.rotation_weight = cfg.resolved_rotation_weight(scene);
      ok = replay_validate(scene, r.trajectory, tol).ok();
      if (ok) ++valid;
      times.push_back(r.stats.elapsed);
      tree.push_back(r.stats.tree_nodes);
      path.push_back(r.stats.path_nodes);
      modes.push_back(r.stats.modes_in_path);
    }
    per_run.push_back({{"seed", seed},
                       {"success", r.success},
                       {"replay_ok", ok},
                       {"time", r.stats.elapsed},
                       {"tree_nodes", r.stats.tree_nodes},
                       {"path_nodes", r.stats.path_nodes},
                       {"modes_in_path", r.stats.modes_in_path}});
    std::cerr << fmt::format("seed {}: {} {:.3f} s, {} nodes\n", seed, r.success ? "success" : "failure",
                             r.stats.elapsed, r.stats.tree_nodes);
  }
  nlohmann::ordered_json t;
  t["scene"] = scene.name;
  t["runs"] = seeds.size();
  t["successes"] = successes;
  t["replay_ok"] = valid;
  t["time_min"] = times.empty() ? 0.0 : *std::min_element(times.begin(), times.end());
  t["time_median"] = median(times);
  t["time_max"] = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
  t["tree_nodes_median"] = median(tree);
  t["path_nodes_median"] = median(path);
  t["modes_in_path_median"] = median(modes);
  t["per_run"] = per_run;
  const std::string text = t.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << text;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Contact-mode guided planner for planar quasistatic manipulation"};
  app.require_subcommand(1);

  SceneArgs plan_scene, val_scene, bench_scene, render_scene;
  PlanArgs plan_args, bench_args;

  auto* plan_cmd = app.add_subcommand("plan", "plan a trajectory");
  plan_scene.add(plan_cmd);
  plan_args.add(plan_cmd);
  std::string plan_out = "trajectory.jsonl", plan_report;
  bool timing = false;
  plan_cmd->add_option("--out", plan_out, "trajectory output (JSON lines)");
  plan_cmd->add_option("--report", plan_report, "report output (default <out>.report.json)");
  plan_cmd->add_flag("--timing", timing, "include wall time in the report");

  auto* val_cmd = app.add_subcommand("validate", "replay-check a trajectory");
  val_scene.add(val_cmd);
  std::string val_traj;
  double val_w = 0.0;
  val_cmd->add_option("--trajectory", val_traj, "trajectory file")->required();
  val_cmd->add_option("--rotation-weight", val_w, "metric rotation weight used to plan");

  auto* bench_cmd = app.add_subcommand("bench", "run several seeds and aggregate");
  bench_scene.add(bench_cmd);
  bench_args.add(bench_cmd);
  int runs = 10;
  std::vector<std::uint64_t> seeds;
  std::string bench_out;
  bench_cmd->add_option("--runs", runs, "number of runs (seeds 0..R-1)")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seeds", seeds, "explicit seed list");
  bench_cmd->add_option("--out", bench_out, "table output (default stdout)");

  auto* render_cmd = app.add_subcommand("render", "render trajectory frames");
  render_scene.add(render_cmd);
  std::string render_traj, render_dir = "frames", format = "svg";
  int every = 1;
  render_cmd->add_option("--trajectory", render_traj, "trajectory file")->required();
  render_cmd->add_option("--out-dir", render_dir, "output directory");
  render_cmd->add_option("--every", every, "render every N records")->check(CLI::PositiveNumber);
  render_cmd->add_option("--format", format, "output format")->check(CLI::IsMember({"svg"}));

  auto* export_cmd = app.add_subcommand("export-scene", "write a bundled problem as a scene file");
  int export_problem = 1;
  std::string export_out;
  export_cmd->add_option("--problem", export_problem, "problem 1..7")->required()->check(CLI::Range(1, kNumBuiltinProblems));
  export_cmd->add_option("--out", export_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*plan_cmd) return cmd_plan(plan_scene, plan_args, plan_out, plan_report, timing);
    if (*val_cmd) return cmd_validate(val_scene, val_traj, val_w);
    if (*bench_cmd) return cmd_bench(bench_scene, bench_args, runs, seeds, bench_out);
    if (*render_cmd) {
      const Scene scene = render_scene.load();
      const Trajectory traj = read_trajectory_file(render_traj);
      const int n = write_svg_frames(scene, traj, every, render_dir);
      std::cerr << fmt::format("{} frames written to {}\n", n, render_dir);
      return kExitOk;
    }
    if (*export_cmd) {
      const std::string text = serialize_scene(builtin_problem(export_problem));
      if (export_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream f(export_out);
        if (!f) throw std::runtime_error("cannot write " + export_out);
        f << text;
      }
      return kExitOk;
    }
  } catch (const SchemaError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const GeometryError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const TrajectoryFormatError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
