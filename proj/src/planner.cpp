#include "modeplan/planner.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <numeric>

namespace modeplan {

std::optional<Algorithm> parse_algorithm(std::string_view s) {
  if (s == "rrt") return Algorithm::Rrt;
  if (s == "complete") return Algorithm::CompleteTree;
  return std::nullopt;
}

std::string_view algorithm_name(Algorithm a) { return a == Algorithm::Rrt ? "rrt" : "complete"; }

std::string_view failure_reason_name(FailureReason r) {
  switch (r) {
    case FailureReason::Timeout: return "timeout";
    case FailureReason::NodeBudget: return "node-budget";
    case FailureReason::SampleBudget: return "sample-budget";
    case FailureReason::InvalidScene: return "invalid-scene";
  }
  return "?";
}

Pose sample_object_config(const Scene& scene, double p, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) >= p) return scene.goal;
  const SamplingBounds& b = scene.bounds;
  const double x = b.x_min + (b.x_max - b.x_min) * unit(rng);
  const double y = b.y_min + (b.y_max - b.y_min) * unit(rng);
  const double th = b.theta_min + (b.theta_max - b.theta_min) * unit(rng);
  return {x, y, th};
}

int nearest_node(const std::vector<TreeNode>& tree, const Pose& q, double w_r) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (const TreeNode& n : tree) {
    const double d = weighted_se2_distance(n.q, q, w_r);
    if (d < best_d) {
      best_d = d;
      best = n.id;
    }
  }
  return best;
}

namespace {

std::vector<Contact> with_fingers(const Scene& scene, const std::vector<Contact>& env,
                                  const std::vector<FingerPlacement>& fingers) {
  std::vector<Contact> out = env;
  const auto fc = finger_contacts(scene, fingers);
  out.insert(out.end(), fc.begin(), fc.end());
  return out;
}

bool fingers_ok(const Scene& scene, const std::vector<FingerPlacement>& fingers, const Pose& q) {
  const double min_sep = 2.0 * scene.finger_radius + scene.contact_tolerance();
  for (std::size_t i = 0; i < fingers.size(); ++i) {
    if (!fingers[i].assigned) continue;
    if (scene.finger_blocked(fingers[i], static_cast<int>(i), q)) return false;
    for (std::size_t j = 0; j < i; ++j) {
      if (!fingers[j].assigned) continue;
      if ((scene.finger_point(fingers[i]) - scene.finger_point(fingers[j])).norm() < min_sep) return false;
    }
  }
  return true;
}

TrajectoryStep record(const IntegrationStep& st, double t) {
  TrajectoryStep r;
  r.t = t;
  r.q = st.q;
  for (std::size_t i = 0; i < st.contacts.size(); ++i) {
    const Contact& c = st.contacts[i];
    const auto idx = static_cast<Eigen::Index>(i);
    ContactRecord cr;
    cr.source = c.source;
    cr.finger = c.finger;
    cr.p = st.q.apply(c.point);
    cr.n = st.q.rotate_to_world(c.normal);
    cr.label = st.mode.labels[i];
    cr.lambda_n = st.solution.lambda_n(idx);
    cr.lambda_t = st.solution.lambda_t(idx);
    r.contacts.push_back(cr);
  }
  return r;
}

}  // namespace

std::optional<std::vector<FingerPlacement>> change_manip_contact(const Scene& scene, const Pose& q,
                                                                 const std::vector<FingerPlacement>& fingers,
                                                                 const std::vector<Contact>& env_contacts,
                                                                 Rng& rng, const PlannerConfig& cfg) {
  const int n = static_cast<int>(fingers.size());
  if (n == 0) return std::nullopt;
  std::vector<int> relocate;
  for (int i = 0; i < n; ++i) {
    if (!fingers[static_cast<std::size_t>(i)].assigned) relocate.push_back(i);
  }
  if (relocate.empty()) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      std::uniform_int_distribution<int> pick(0, i);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
    }
    const int k = std::uniform_int_distribution<int>(1, n)(rng);
    relocate.assign(order.begin(), order.begin() + k);
    std::sort(relocate.begin(), relocate.end());
  }

  std::vector<FingerPlacement> kept = fingers;
  for (int i : relocate) kept[static_cast<std::size_t>(i)] = FingerPlacement::unassigned();
  const std::vector<Contact> remaining = with_fingers(scene, env_contacts, kept);
  const Vec3 f_ext = scene.external_wrench(q).at(Twist{});
  if (!static_equilibrium_possible(remaining, f_ext, scene.mechanics_options(cfg.resolved_rotation_weight(scene))))
    return std::nullopt;

  std::vector<int> faces = scene.finger_faces;
  if (faces.empty()) {
    faces.resize(scene.object.size());
    std::iota(faces.begin(), faces.end(), 0);
  }
  double total = 0.0;
  for (int e : faces) total += 0.96 * scene.object.edge_length(static_cast<std::size_t>(e));
  std::uniform_real_distribution<double> arc(0.0, total);

  for (int round = 0; round < cfg.relocation_rounds; ++round) {
    std::vector<FingerPlacement> out = kept;
    for (int i : relocate) {
      double u = arc(rng);
      for (int e : faces) {
        const double len = scene.object.edge_length(static_cast<std::size_t>(e));
        if (u <= 0.96 * len || e == faces.back()) {
          out[static_cast<std::size_t>(i)] = {true, e, 0.02 * len + std::min(u, 0.96 * len)};
          break;
        }
        u -= 0.96 * len;
      }
    }
    if (fingers_ok(scene, out, q)) return out;
  }
  return std::nullopt;
}

std::optional<TreeNode> extend(const Scene& scene, const TreeNode& near, const ContactMode& m, const Pose& q_rand,
                               Rng& rng, const PlannerConfig& cfg, bool force_relocation) {
  const double w_r = cfg.resolved_rotation_weight(scene);
  std::vector<FingerPlacement> fingers = near.fingers;
  bool relocate = force_relocation ||
                  std::any_of(fingers.begin(), fingers.end(), [](const auto& f) { return !f.assigned; }) ||
                  !fingers_ok(scene, fingers, near.q);
  if (!relocate) {
    const auto contacts = with_fingers(scene, near.env_contacts, fingers);
    const auto sol = closest_feasible_velocity(contacts, with_finger_labels(m, fingers),
                                               body_twist_between(near.q, q_rand), scene.external_wrench(near.q),
                                               scene.mechanics_options(w_r));
    if (!sol || sol->v_o.weighted_norm(w_r) <= 1e-4) relocate = true;
  }
  IntegrationOptions io;
  io.h = cfg.step;
  io.rotation_weight = w_r;
  auto project = [&]() -> std::optional<IntegrationResult> {
    try {
      IntegrationResult r = forward_integrate(scene, near.q, q_rand, fingers, m, io);
      if (r.steps.empty() || weighted_se2_distance(r.q_new, near.q, w_r) <= 1e-3 * scene.diagonal()) return std::nullopt;
      return r;
    } catch (const InvalidStart& e) {
      spdlog::debug("extend: {}", e.what());
      return std::nullopt;
    }
  };
  auto relocated = [&] {
    auto moved = change_manip_contact(scene, near.q, fingers, near.env_contacts, rng, cfg);
    if (moved) fingers = std::move(*moved);
    return moved.has_value();
  };

  std::optional<IntegrationResult> projected;
  if (!relocate) projected = project();
  // No progress with the current fingers counts as a zero projection.
  if (!projected) {
    if (!relocated()) return std::nullopt;
    projected = project();
    if (!projected) return std::nullopt;
  }
  IntegrationResult r = std::move(*projected);

  TreeNode node;
  node.q = r.q_new;
  node.parent = near.id;
  node.fingers = fingers;
  node.env_contacts = r.env_contacts;
  node.edge_mode = m;
  node.edge_trace = std::move(r);
  if (cfg.margin_threshold > 0.0) {
    node.margin = 0.0;
    if (const auto hold = hold_step(scene, node.q, node.fingers, w_r)) {
      MarginOptions mo;
      mo.strategy = cfg.margin_strategy;
      mo.disturbance_point = scene.center_of_mass();
      node.margin = stability_margin(hold->contacts, hold->mode, hold->solution, scene.external_wrench(node.q),
                                     scene.mechanics_options(w_r), mo);
    }
    if (node.margin < cfg.margin_threshold) return std::nullopt;
  }
  return node;
}

std::optional<Trajectory> extract_trajectory(const Scene& scene, const std::vector<TreeNode>& tree, int goal,
                                             double rotation_weight) {
  std::vector<int> path;
  for (int i = goal; i >= 0; i = tree[static_cast<std::size_t>(i)].parent) path.push_back(i);
  std::reverse(path.begin(), path.end());

  Trajectory traj;
  double t = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const TreeNode& node = tree[static_cast<std::size_t>(path[k])];
    const TreeNode& parent = tree[static_cast<std::size_t>(node.parent)];
    std::vector<FingerSwitch> switches;
    for (std::size_t f = 0; f < node.fingers.size(); ++f) {
      const FingerPlacement& a = parent.fingers[f];
      const FingerPlacement& b = node.fingers[f];
      if (a == b) continue;
      FingerSwitch sw;
      sw.finger = static_cast<int>(f);
      if (a.assigned) sw.from = parent.q.apply(scene.finger_point(a));
      if (b.assigned) sw.to = parent.q.apply(scene.finger_point(b));
      switches.push_back(sw);
    }
    for (std::size_t s = 0; s < node.edge_trace.steps.size(); ++s) {
      const IntegrationStep& st = node.edge_trace.steps[s];
      TrajectoryStep rec = record(st, t);
      if (s == 0) rec.switches = switches;
      traj.steps.push_back(std::move(rec));
      t += st.dt;
    }
  }
  const TreeNode& last = tree[static_cast<std::size_t>(goal)];
  const auto hold = terminal_step(scene, last.q, scene.goal, last.fingers, rotation_weight);
  if (!hold) return std::nullopt;
  traj.steps.push_back(record(*hold, t));
  return traj;
}

PlanResult plan(const Scene& scene, const PlannerConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

  PlanResult result;
  auto fail = [&](FailureReason r, std::string msg) {
    result.success = false;
    result.failure = r;
    result.message = std::move(msg);
    result.stats.tree_nodes = static_cast<int>(result.tree.size());
    result.stats.elapsed = elapsed();
    return result;
  };

  try {
    scene.validate();
  } catch (const std::exception& e) {
    return fail(FailureReason::InvalidScene, e.what());
  }

  const double w_r = cfg.resolved_rotation_weight(scene);
  const double tol = scene.goal_radius();
  Rng rng(cfg.seed);

  TreeNode root;
  root.id = 0;
  root.q = scene.start;
  root.fingers.assign(static_cast<std::size_t>(scene.n_fingers), FingerPlacement::unassigned());
  root.env_contacts = scene.env_contacts(scene.start);
  result.tree.push_back(root);

  auto succeed = [&](int goal) -> bool {
    auto traj = extract_trajectory(scene, result.tree, goal, w_r);
    if (!traj) return false;
    result.success = true;
    result.trajectory = std::move(*traj);
    int len = 0;
    for (int i = goal; i >= 0; i = result.tree[static_cast<std::size_t>(i)].parent) ++len;
    result.stats.path_nodes = len;
    result.stats.modes_in_path = distinct_modes(result.trajectory);
    result.stats.tree_nodes = static_cast<int>(result.tree.size());
    result.stats.elapsed = elapsed();
    return true;
  };

  if (weighted_se2_distance(scene.start, scene.goal, w_r) <= tol && succeed(0)) return result;

  // Adds a node; true when it reaches the goal with a valid trajectory.
  auto add = [&](TreeNode node) {
    node.id = static_cast<int>(result.tree.size());
    result.tree.push_back(std::move(node));
    const TreeNode& n = result.tree.back();
    spdlog::debug("node {} parent {} mode {} q=({:.3f},{:.3f},{:.3f}) stop {}", n.id, n.parent, n.edge_mode.str(),
                  n.q.x, n.q.y, n.q.theta, stop_reason_name(n.edge_trace.stop));
    return weighted_se2_distance(n.q, scene.goal, w_r) <= tol && succeed(n.id);
  };

  while (true) {
    if (elapsed() > cfg.time_limit) return fail(FailureReason::Timeout, "time limit reached");
    if (static_cast<int>(result.tree.size()) >= cfg.max_nodes) return fail(FailureReason::NodeBudget, "node budget");
    if (cfg.max_samples > 0 && result.stats.samples >= cfg.max_samples)
      return fail(FailureReason::SampleBudget, "sample budget");
    ++result.stats.samples;
    const Pose q_rand = sample_object_config(scene, cfg.goal_bias, rng);

    if (cfg.algorithm == Algorithm::Rrt) {
      const int near = nearest_node(result.tree, q_rand, w_r);
      const auto modes = enumerate_env_modes(result.tree[static_cast<std::size_t>(near)].env_contacts, cfg.backend);
      for (const ContactMode& m : modes) {
        auto node = extend(scene, result.tree[static_cast<std::size_t>(near)], m, q_rand, rng, cfg, false);
        if (node && add(std::move(*node))) return result;
        if (static_cast<int>(result.tree.size()) >= cfg.max_nodes) break;
      }
    } else {
      const std::size_t snapshot = result.tree.size();
      for (std::size_t i = 0; i < snapshot; ++i) {
        const auto modes = enumerate_env_modes(result.tree[i].env_contacts, cfg.backend);
        for (const ContactMode& m : modes) {
          auto node = extend(scene, result.tree[i], m, q_rand, rng, cfg, true);
          if (node && add(std::move(*node))) return result;
          if (static_cast<int>(result.tree.size()) >= cfg.max_nodes) break;
        }
        if (elapsed() > cfg.time_limit || static_cast<int>(result.tree.size()) >= cfg.max_nodes) break;
      }
    }
  }
}

}  // namespace modeplan
