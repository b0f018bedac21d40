#include "modeplan/planner.hpp"
#include "modeplan/render.hpp"
#include "modeplan/scene.hpp"
#include "modeplan/trajectory.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace modeplan;
namespace fs = std::filesystem;

namespace {

int count(const std::string& s, const std::string& needle) {
  int n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

/// Resting blade on the ledge, held by one finger, then moved a little.
Trajectory blade_trajectory(const Scene& s, int records) {
  Trajectory t;
  for (int k = 0; k < records; ++k) {
    TrajectoryStep st;
    st.t = 0.1 * k;
    st.q = Pose(s.start.x + 0.01 * k, s.start.y, 0.0);
    ContactRecord env;
    env.p = st.q.apply({-1.0, -0.05});
    env.n = {0.0, 1.0};
    env.lambda_n = 0.5;
    ContactRecord f;
    f.source = ContactSource::Manipulator;
    f.finger = 0;
    f.p = st.q.apply({0.5, 0.05});
    f.n = {0.0, -1.0};
    f.label = ContactLabel::Fixed;
    st.contacts = {env, f};
    t.steps.push_back(st);
  }
  return t;
}

int run(const std::string& args) {
  const int status = std::system((std::string(MODEPLAN_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("modeplan_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Render, FrameCountIsCeiling) {
  const Scene s = builtin_problem(2);
  for (int records : {1, 5, 10, 11}) {
    for (int every : {1, 3, 5}) {
      const auto frames = render_svg_frames(s, blade_trajectory(s, records), every);
      EXPECT_EQ(static_cast<int>(frames.size()), (records + every - 1) / every) << records << " " << every;
    }
  }
  EXPECT_TRUE(render_svg_frames(s, Trajectory{}, 1).empty());
}

TEST(Render, BladeFrameContents) {
  const Scene s = builtin_problem(2);
  const auto frames = render_svg_frames(s, blade_trajectory(s, 3), 1);
  ASSERT_EQ(frames.size(), 3u);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string& f = frames[i];
    EXPECT_EQ(f.rfind("<svg ", 0), 0u);
    EXPECT_NE(f.find("</svg>"), std::string::npos);
    // Environment pieces, goal outline and object.
    EXPECT_EQ(count(f, "<polygon "), static_cast<int>(s.environment.size()) + 2);
    EXPECT_EQ(count(f, "<circle "), 1);
    EXPECT_EQ(count(f, "<line "), 2);
    char stamp[32];
    std::snprintf(stamp, sizeof stamp, "t = %.4f", 0.1 * static_cast<double>(i));
    EXPECT_NE(f.find(stamp), std::string::npos);
  }
  EXPECT_NE(frames[0], frames[1]);
  EXPECT_EQ(render_svg_frames(s, blade_trajectory(s, 3), 1), frames);
}

TEST(Render, BladeSolutionMatchesGoldenFrames) {
  const fs::path data = fs::path(MODEPLAN_SOURCE_DIR) / "tests" / "data";
  const Trajectory t = read_trajectory_file((data / "p2_seed0.jsonl").string());
  const auto frames = render_svg_frames(builtin_problem(2), t, 20);
  ASSERT_EQ(frames.size(), (t.steps.size() + 19) / 20);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu.svg", i);
    std::ifstream in(data / "p2_golden" / name, std::ios::binary);
    ASSERT_TRUE(in) << name;
    const std::string golden((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(frames[i], golden) << name;
  }
}

TEST(Render, ContactOffObjectRejected) {
  const Scene s = builtin_problem(2);
  Trajectory t = blade_trajectory(s, 2);
  t.steps[1].contacts[0].p += Vec2(0.0, 0.5);
  EXPECT_THROW(render_svg_frames(s, t, 1), TrajectoryFormatError);
}

TEST(TrajectoryIo, RoundTrip) {
  const Scene s = builtin_problem(2);
  Trajectory t = blade_trajectory(s, 4);
  t.steps[2].switches.push_back({0, Vec2(0.1, 0.2), std::nullopt});
  t.steps[2].contacts[0].label = ContactLabel::LeftSlide;
  t.steps[2].contacts[0].lambda_t = 0.125;
  std::stringstream ss;
  write_trajectory(ss, t);
  const Trajectory r = read_trajectory(ss);
  ASSERT_EQ(r.steps.size(), t.steps.size());
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    EXPECT_EQ(r.steps[k].t, t.steps[k].t);
    EXPECT_EQ(r.steps[k].q, t.steps[k].q);
    ASSERT_EQ(r.steps[k].contacts.size(), t.steps[k].contacts.size());
    for (std::size_t c = 0; c < t.steps[k].contacts.size(); ++c) {
      const auto &a = t.steps[k].contacts[c], &b = r.steps[k].contacts[c];
      EXPECT_EQ(a.source, b.source);
      EXPECT_EQ(a.finger, b.finger);
      EXPECT_EQ(a.p, b.p);
      EXPECT_EQ(a.n, b.n);
      EXPECT_EQ(a.label, b.label);
      EXPECT_EQ(a.lambda_n, b.lambda_n);
      EXPECT_EQ(a.lambda_t, b.lambda_t);
    }
    ASSERT_EQ(r.steps[k].switches.size(), t.steps[k].switches.size());
  }
  EXPECT_EQ(r.steps[2].switches[0].from, Vec2(0.1, 0.2));
  EXPECT_FALSE(r.steps[2].switches[0].to);
  std::stringstream again;
  write_trajectory(again, r);
  std::stringstream first;
  write_trajectory(first, t);
  EXPECT_EQ(again.str(), first.str());
}

TEST(TrajectoryIo, MalformedInputThrows) {
  std::stringstream ss("{\"t\": 0, \"q\": [0, 0]}\n");
  EXPECT_THROW(read_trajectory(ss), TrajectoryFormatError);
  std::stringstream junk("not json\n");
  EXPECT_THROW(read_trajectory(junk), TrajectoryFormatError);
}

TEST(Cli, MissingSceneIsInputError) {
  EXPECT_EQ(run("plan --scene /nonexistent/scene.json --out /dev/null"), 1);
  EXPECT_EQ(run("plan"), 1);
  EXPECT_EQ(run("bogus-subcommand"), 1);
}

TEST(Cli, TimeoutIsPlannerFailure) {
  const fs::path d = temp_dir("timeout");
  EXPECT_EQ(run("plan --problem 5 --time-limit 0.001 --out " + (d / "t.jsonl").string()), 2);
}

TEST(Cli, PlanValidateRenderExport) {
  const fs::path d = temp_dir("pipeline");
  const std::string traj = (d / "p1.jsonl").string();
  ASSERT_EQ(run("plan --problem 1 --seed 0 --max-nodes 1000 --out " + traj), 0);
  EXPECT_TRUE(fs::exists(traj));
  EXPECT_TRUE(fs::exists(traj + ".report.json"));
  EXPECT_EQ(run("validate --problem 1 --trajectory " + traj), 0);
  EXPECT_EQ(run("render --problem 1 --trajectory " + traj + " --every 10 --out-dir " + (d / "frames").string()), 0);
  EXPECT_TRUE(fs::exists(d / "frames" / "frame_0000.svg"));
  const std::string scene = (d / "p1.json").string();
  ASSERT_EQ(run("export-scene --problem 1 --out " + scene), 0);
  EXPECT_EQ(run("validate --scene " + scene + " --trajectory " + traj), 0);
  // A trajectory for another scene fails the render input check or validation.
  EXPECT_NE(run("validate --problem 2 --trajectory " + traj), 0);
}
