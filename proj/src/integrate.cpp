#include "modeplan/integrate.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/QR>

#include <algorithm>
#include <map>

namespace modeplan {

std::string_view stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::VelocityZero: return "velocity-zero";
    case StopReason::Infeasible: return "infeasible";
    case StopReason::NewContact: return "new-contact";
    case StopReason::FingerCollision: return "finger-collision";
    case StopReason::StepLimit: return "step-limit";
    case StopReason::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

ContactMode with_finger_labels(const ContactMode& env_mode, std::span<const FingerPlacement> fingers) {
  ContactMode m = env_mode;
  for (const auto& f : fingers) {
    if (f.assigned) m.labels.push_back(ContactLabel::Fixed);
  }
  return m;
}

namespace {

struct FeatureState {
  double distance;
  Vec3 row;  // d(distance)/d(body twist)
};

FeatureState feature_state(const Scene& scene, const Pose& q, const FeatureId& f) {
  const Polygon& env = scene.environment[static_cast<std::size_t>(f.env_polygon)];
  if (f.kind == FeatureId::Kind::ObjectVertex) {
    const Vec2 p = scene.object.vertex(static_cast<std::size_t>(f.object_feature));
    const auto k = static_cast<std::size_t>(f.env_feature);
    const Vec2 n_out = env.outward_normal(k);
    const double d = (q.apply(p) - env.edge_start(k)).dot(n_out);
    return {d, point_wrench(p, q.rotate_to_body(n_out))};
  }
  const auto i = static_cast<std::size_t>(f.object_feature);
  const Vec2 cb = q.apply_inverse(env.vertex(static_cast<std::size_t>(f.env_feature)));
  const Vec2 n_out = scene.object.outward_normal(i);
  const double d = (cb - scene.object.edge_start(i)).dot(n_out);
  return {d, point_wrench(cb, -n_out)};
}

// Minimum weighted-norm twist that zeroes the distances of the maintained features.
Pose correct_drift(const Scene& scene, const Pose& q, const std::vector<FeatureId>& maintained, double w_r) {
  if (maintained.empty()) return q;
  const auto m = static_cast<Eigen::Index>(maintained.size());
  Eigen::MatrixXd A(m, 3);
  Eigen::VectorXd d(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const FeatureState st = feature_state(scene, q, maintained[static_cast<std::size_t>(i)]);
    A.row(i) = st.row.transpose();
    d[i] = st.distance;
  }
  const Vec3 winv(1.0, 1.0, 1.0 / (w_r * w_r));
  const Eigen::MatrixXd AW = A * winv.asDiagonal();
  const Eigen::MatrixXd M = AW * A.transpose();
  const Eigen::VectorXd y = M.completeOrthogonalDecomposition().solve(-d);
  const Vec3 delta = AW.transpose() * y;
  if (!delta.allFinite()) return q;
  // Nearly dependent constraints can demand a correction far larger than the gaps.
  if (Twist(delta).weighted_norm(w_r) > 10.0 * d.cwiseAbs().maxCoeff() + 1e-12) return q;
  return integrate_pose(q, Twist(delta), 1.0);
}

bool any_finger_blocked(const Scene& scene, std::span<const FingerPlacement> fingers, const Pose& q) {
  for (std::size_t i = 0; i < fingers.size(); ++i) {
    if (scene.finger_blocked(fingers[i], static_cast<int>(i), q)) return true;
  }
  return false;
}

std::vector<Contact> concat(std::vector<Contact> a, const std::vector<Contact>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

IntegrationResult forward_integrate(const Scene& scene, const Pose& q_start, const Pose& q_target,
                                    std::span<const FingerPlacement> fingers, const ContactMode& env_mode,
                                    const IntegrationOptions& opts) {
  const double diag = scene.diagonal();
  const double h = opts.h > 0.0 ? opts.h : 0.02 * diag;
  const double w_r = opts.rotation_weight;
  const double dc = scene.contact_tolerance();
  const ContactQueryOptions copts = scene.contact_options();
  const MechanicsOptions mech = scene.mechanics_options(w_r);

  if (min_signed_distance(scene.object, q_start, scene.environment) < -dc)
    throw InvalidStart("start pose penetrates the environment");
  std::vector<Contact> env = contact_query(scene.object, q_start, scene.environment, copts);
  if (env.size() != env_mode.size())
    throw InvalidStart("mode has " + std::to_string(env_mode.size()) + " labels for " + std::to_string(env.size()) +
                       " contacts");
  if (any_finger_blocked(scene, fingers, q_start)) throw InvalidStart("finger blocked at start pose");

  std::map<FeatureId, ContactLabel> labels;
  for (std::size_t i = 0; i < env.size(); ++i) labels[env[i].feature] = env_mode.labels[i];
  std::vector<FeatureId> maintained;
  for (const auto& [f, l] : labels) {
    if (l != ContactLabel::Separate) maintained.push_back(f);
  }

  const std::vector<Contact> fcs = finger_contacts(scene, fingers);
  IntegrationResult out;
  out.q_new = q_start;
  out.env_contacts = env;
  Pose q = q_start;
  std::vector<Contact> prev_env = env;

  auto finish = [&](StopReason r) {
    out.stop = r;
    out.q_new = q;
    out.env_contacts = env;
    return out;
  };

  for (int k = 0; k < opts.max_steps; ++k) {
    const Twist vd = body_twist_between(q, q_target);
    const double remaining = vd.weighted_norm(w_r);
    if (remaining <= 1e-10 * diag) return finish(StopReason::VelocityZero);

    ContactMode mode;
    for (const Contact& c : env) mode.labels.push_back(labels.at(c.feature));
    mode = with_finger_labels(mode, fingers);
    const std::vector<Contact> contacts = concat(env, fcs);

    const auto sol = closest_feasible_velocity(contacts, mode, vd, scene.external_wrench(q), mech);
    if (!sol) {
      // End where the mode last had a solution.
      if (!out.steps.empty()) {
        q = out.steps.back().q;
        env = prev_env;
        out.steps.pop_back();
      }
      return finish(StopReason::Infeasible);
    }
    if (sol->v_o.weighted_norm(w_r) <= opts.eps_v) return finish(StopReason::VelocityZero);

    double dt = std::min(h, remaining);
    Pose qn = integrate_pose(q, sol->v_o, dt);
    if (opts.drift_correction) qn = correct_drift(scene, qn, maintained, w_r);

    if (min_signed_distance(scene.object, qn, scene.environment) < -dc) {
      double frac = 1.0;
      try {
        qn = penetration_rollback(q, qn, scene.object, scene.environment, dc, &frac);
      } catch (const BisectionFailure& e) {
        spdlog::debug("forward_integrate: {}", e.what());
        return finish(StopReason::NumericalFailure);
      }
      dt *= frac;
      if (dt <= 0.0) return finish(StopReason::NewContact);
    }
    if (any_finger_blocked(scene, fingers, qn)) return finish(StopReason::FingerCollision);

    std::vector<Contact> next;
    try {
      next = contact_query(scene.object, qn, scene.environment, copts);
    } catch (const PenetrationError& e) {
      spdlog::debug("forward_integrate: {}", e.what());
      return finish(StopReason::NumericalFailure);
    }
    if (weighted_se2_distance(qn, q_target, w_r) > weighted_se2_distance(q, q_target, w_r) + 1e-9)
      return finish(StopReason::NumericalFailure);

    out.steps.push_back({q, dt, contacts, mode, *sol});
    q = qn;
    prev_env = std::move(env);
    env = next;

    bool changed = false;
    for (const Contact& c : next) {
      if (!labels.contains(c.feature)) changed = true;
    }
    for (const FeatureId& f : maintained) {
      if (std::none_of(next.begin(), next.end(), [&](const Contact& c) { return c.feature == f; })) changed = true;
    }
    if (changed) return finish(StopReason::NewContact);
  }
  return finish(StopReason::StepLimit);
}

std::optional<IntegrationStep> hold_step(const Scene& scene, const Pose& q, std::span<const FingerPlacement> fingers,
                                         double rotation_weight) {
  const std::vector<Contact> env = scene.env_contacts(q);
  ContactMode mode;
  mode.labels.assign(env.size(), ContactLabel::Fixed);
  mode = with_finger_labels(mode, fingers);
  const std::vector<Contact> contacts = concat(env, finger_contacts(scene, fingers));
  const auto sol = closest_feasible_velocity(contacts, mode, Twist{}, scene.external_wrench(q),
                                             scene.mechanics_options(rotation_weight));
  if (!sol) return std::nullopt;
  return IntegrationStep{q, 0.0, contacts, mode, *sol};
}

std::optional<IntegrationStep> terminal_step(const Scene& scene, const Pose& q, const Pose& target,
                                             std::span<const FingerPlacement> fingers, double rotation_weight) {
  if (auto hold = hold_step(scene, q, fingers, rotation_weight)) return hold;
  const std::vector<Contact> env = scene.env_contacts(q);
  const std::vector<Contact> contacts = concat(env, finger_contacts(scene, fingers));
  const Twist v_d = body_twist_between(q, target);
  for (const ContactMode& m : enumerate_env_modes(env)) {
    const ContactMode mode = with_finger_labels(m, fingers);
    const auto sol = closest_feasible_velocity(contacts, mode, v_d, scene.external_wrench(q),
                                               scene.mechanics_options(rotation_weight));
    if (sol) return IntegrationStep{q, 0.0, contacts, mode, *sol};
  }
  return std::nullopt;
}

bool check_projection_idempotence(const Scene& scene, const Pose& q, const ContactMode& env_mode,
                                  std::span<const FingerPlacement> fingers, const IntegrationOptions& opts,
                                  double eps) {
  const IntegrationResult r = forward_integrate(scene, q, q, fingers, env_mode, opts);
  return weighted_se2_distance(r.q_new, q, opts.rotation_weight) <= eps;
}

}  // namespace modeplan
