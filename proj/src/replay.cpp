#include "modeplan/replay.hpp"
#include "modeplan/solver.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <set>

namespace modeplan {

std::string_view violation_kind_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::Equilibrium: return "equilibrium";
    case ViolationKind::ForceClause: return "force-clause";
    case ViolationKind::VelocityClause: return "velocity-clause";
    case ViolationKind::Penetration: return "penetration";
    case ViolationKind::Geometry: return "geometry";
    case ViolationKind::Continuity: return "continuity";
    case ViolationKind::FingerSwitch: return "finger-switch";
    case ViolationKind::FingerDrift: return "finger-drift";
  }
  return "?";
}

int ReplayReport::count(ViolationKind k) const {
  return static_cast<int>(std::count_if(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == k; }));
}

namespace {

struct BodyContact {
  Vec2 p, n, t;
  double mu;
};

BodyContact to_body(const Scene& s, const Pose& q, const ContactRecord& c) {
  BodyContact b;
  b.p = q.apply_inverse(c.p);
  b.n = q.rotate_to_body(c.n).normalized();
  b.t = Vec2(b.n.y(), -b.n.x());
  b.mu = c.source == ContactSource::Environment ? s.mu_env : s.mu_mnp;
  return b;
}

Vec3 wrench(const Vec2& p, const Vec2& f) { return {f.x(), f.y(), p.x() * f.y() - p.y() * f.x()}; }

// Body-frame external wrench about the body origin for twist v.
Vec3 external(const Scene& s, const Pose& q, const Vec3& v) {
  const Vec2 c = s.com ? *s.com : s.object.centroid();
  if (s.plane == PlaneType::Gravity) {
    const Vec2 fw = s.gravity_direction.normalized() * (s.mass * s.g);
    return wrench(c, q.rotate_to_body(fw));
  }
  const double k = s.mu_support * s.mass * s.g;
  const double rho2 = s.object.radius_of_gyration_sq() + (c - s.object.centroid()).squaredNorm();
  const Vec2 v_com(v[0] - v[2] * c.y(), v[1] + v[2] * c.x());
  const Vec2 f = -k * v_com;
  Vec3 w = wrench(c, f);
  w[2] += -k * rho2 * v[2];
  return w;
}

struct Checker {
  const Scene& scene;
  const ReplayTolerances& tol;
  ReplayReport report;
  std::set<std::pair<int, ViolationKind>> seen;

  void add(int step, ViolationKind k, std::string detail) {
    if (!seen.insert({step, k}).second) return;
    report.violations.push_back({step, k, std::move(detail)});
  }
};

}  // namespace

ReplayReport replay_validate(const Scene& scene, const Trajectory& traj, const ReplayTolerances& tol) {
  Checker ck{scene, tol, {}, {}};
  const double diag = scene.object.bounding_diagonal();
  const double dc = scene.d_contact > 0.0 ? scene.d_contact : 1e-3 * diag;
  const double h = tol.step > 0.0 ? tol.step : 0.02 * diag;
  const double w_r = tol.rotation_weight > 0.0 ? tol.rotation_weight : diag / kPi;
  const double weight = scene.mass * scene.g;
  const double f_tol = tol.force * (weight + 1.0);
  const auto& steps = traj.steps;

  std::map<int, Vec2> finger_body;  // finger -> body point at the previous record

  for (std::size_t k = 0; k < steps.size(); ++k) {
    const int si = static_cast<int>(k);
    const TrajectoryStep& st = steps[k];
    const Pose& q = st.q;

    Vec3 v = Vec3::Zero();
    double gap_rate = 0.0;
    bool has_next = k + 1 < steps.size();
    if (has_next) {
      const double dt = steps[k + 1].t - st.t;
      const double jump = weighted_se2_distance(q, steps[k + 1].q, w_r);
      if (jump > tol.continuity * h) ck.add(si, ViolationKind::Continuity, fmt::format("pose jump {:.6g}", jump));
      if (dt > 0.0) {
        v = body_twist_between(q, steps[k + 1].q).vec() / dt;
        gap_rate = dc / dt;
      } else if (jump > 1e-12) {
        ck.add(si, ViolationKind::Continuity, fmt::format("non-increasing time with motion {:.6g}", jump));
        has_next = false;
      }
    }
    const double speed = Twist(v).weighted_norm(w_r);
    const double v_tol = tol.velocity * speed + 1e-6;

    const double sd = min_signed_distance(scene.object, q, scene.environment);
    if (sd < -dc * (1.0 + 1e-6)) ck.add(si, ViolationKind::Penetration, fmt::format("signed distance {:.6g}", sd));

    Vec3 w_contacts = Vec3::Zero();
    for (const ContactRecord& c : st.contacts) {
      const BodyContact b = to_body(scene, q, c);
      w_contacts += c.lambda_n * wrench(b.p, b.n) + c.lambda_t * wrench(b.p, b.t);

      if (std::abs(scene.object.boundary_distance(b.p)) > dc * 1.01)
        ck.add(si, ViolationKind::Geometry, "contact point off the object boundary");
      if (c.source == ContactSource::Environment && std::abs(point_environment_distance(c.p, scene.environment)) > dc * 1.01)
        ck.add(si, ViolationKind::Geometry, "contact point off the environment");

      const double ln = c.lambda_n, lt = c.lambda_t;
      bool force_ok = ln >= -f_tol;
      switch (c.label) {
        case ContactLabel::Separate: force_ok = force_ok && std::abs(ln) <= f_tol && std::abs(lt) <= f_tol; break;
        case ContactLabel::Fixed: force_ok = force_ok && std::abs(lt) <= b.mu * ln + f_tol; break;
        case ContactLabel::RightSlide: force_ok = force_ok && std::abs(lt + b.mu * ln) <= f_tol; break;
        case ContactLabel::LeftSlide: force_ok = force_ok && std::abs(lt - b.mu * ln) <= f_tol; break;
      }
      if (!force_ok)
        ck.add(si, ViolationKind::ForceClause,
               fmt::format("{} contact with lambda_n {:.6g} lambda_t {:.6g}", label_name(c.label), ln, lt));

      if (has_next && c.source == ContactSource::Environment) {
        const Vec2 pv(v[0] - v[2] * b.p.y(), v[1] + v[2] * b.p.x());
        const double vn = pv.dot(b.n), vt = pv.dot(b.t);
        // Closing a gap of up to the contact tolerance may move the point by about as much.
        const double n_tol = v_tol + gap_rate;
        bool vel_ok = true;
        switch (c.label) {
          case ContactLabel::Separate: vel_ok = vn >= -n_tol; break;
          case ContactLabel::Fixed: vel_ok = std::abs(vn) <= n_tol && std::abs(vt) <= n_tol; break;
          case ContactLabel::RightSlide: vel_ok = std::abs(vn) <= n_tol && vt >= -n_tol; break;
          case ContactLabel::LeftSlide: vel_ok = std::abs(vn) <= n_tol && vt <= n_tol; break;
        }
        if (!vel_ok)
          ck.add(si, ViolationKind::VelocityClause,
                 fmt::format("{} contact with v_n {:.6g} v_t {:.6g}", label_name(c.label), vn, vt));
      }
    }

    const Vec3 f_ext = external(scene, q, v);
    double eq_tol = tol.equilibrium * (f_ext.norm() + 1.0);
    if (scene.plane == PlaneType::Tabletop) {
      const Vec2 c = scene.com ? *scene.com : scene.object.centroid();
      const double k_gain = scene.mu_support * weight * (1.0 + scene.object.radius_of_gyration_sq() + c.squaredNorm());
      eq_tol += k_gain * (v_tol + gap_rate);
    }
    const double residual = (w_contacts + f_ext).norm();
    if (residual > eq_tol) ck.add(si, ViolationKind::Equilibrium, fmt::format("residual {:.6g}", residual));

    // Finger bookkeeping.
    std::set<int> switched;
    for (const FingerSwitch& sw : st.switches) switched.insert(sw.finger);
    std::map<int, Vec2> now;
    for (const ContactRecord& c : st.contacts) {
      if (c.source == ContactSource::Manipulator) now[c.finger] = q.apply_inverse(c.p);
    }
    for (const auto& [f, p] : now) {
      if (switched.contains(f)) continue;
      const auto it = finger_body.find(f);
      if (it == finger_body.end()) {
        if (k > 0) ck.add(si, ViolationKind::FingerSwitch, fmt::format("finger {} appears without an event", f));
      } else if ((it->second - p).norm() > 1e-6 * (diag + 1.0)) {
        ck.add(si, ViolationKind::FingerDrift, fmt::format("finger {} moved on the object", f));
      }
    }
    for (const auto& [f, p] : finger_body) {
      if (!now.contains(f) && !switched.contains(f))
        ck.add(si, ViolationKind::FingerSwitch, fmt::format("finger {} vanished without an event", f));
    }

    if (!st.switches.empty()) {
      for (const FingerSwitch& sw : st.switches) {
        const auto it = finger_body.find(sw.finger);
        if (sw.from && (it == finger_body.end() || (q.apply_inverse(*sw.from) - it->second).norm() > 1e-6 * (diag + 1.0)))
          ck.add(si, ViolationKind::FingerSwitch, fmt::format("finger {} switch origin mismatch", sw.finger));
        if (sw.to) {
          const auto jt = now.find(sw.finger);
          if (jt == now.end() || (q.apply_inverse(*sw.to) - jt->second).norm() > 1e-6 * (diag + 1.0))
            ck.add(si, ViolationKind::FingerSwitch, fmt::format("finger {} switch target mismatch", sw.finger));
        }
      }
      // Remaining contacts must hold the object while the switching fingers are off.
      std::vector<BodyContact> held;
      for (const ContactRecord& c : st.contacts) {
        if (c.source == ContactSource::Manipulator && switched.contains(c.finger)) continue;
        held.push_back(to_body(scene, q, c));
      }
      const Vec3 f0 = external(scene, q, Vec3::Zero());
      const auto n = static_cast<Eigen::Index>(held.size());
      MatrixXd Aeq = MatrixXd::Zero(3, 2 * n);
      MatrixXd Ain = MatrixXd::Zero(3 * n, 2 * n);
      VectorXd bin = VectorXd::Zero(3 * n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const BodyContact& b = held[static_cast<std::size_t>(i)];
        Aeq.col(2 * i) = wrench(b.p, b.n);
        Aeq.col(2 * i + 1) = wrench(b.p, b.t);
        Ain(3 * i, 2 * i) = 1.0;
        Ain(3 * i + 1, 2 * i) = b.mu;
        Ain(3 * i + 1, 2 * i + 1) = -1.0;
        Ain(3 * i + 2, 2 * i) = b.mu;
        Ain(3 * i + 2, 2 * i + 1) = 1.0;
      }
      bool feasible = f0.norm() <= 1e-9;
      if (n > 0) {
        try {
          feasible = solve_lp_feasibility(Aeq, -f0, Ain, bin, {}, 1.0) == Feasibility::Feasible;
        } catch (const std::exception&) {
          feasible = false;
        }
      }
      if (!feasible) ck.add(si, ViolationKind::FingerSwitch, "remaining contacts cannot hold the object");
    }
    finger_body = now;
  }
  return ck.report;
}

}  // namespace modeplan
