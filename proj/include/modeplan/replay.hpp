#pragma once

#include "modeplan/scene.hpp"
#include "modeplan/trajectory.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace modeplan {

enum class ViolationKind { Equilibrium, ForceClause, VelocityClause, Penetration, Geometry, Continuity, FingerSwitch, FingerDrift };

std::string_view violation_kind_name(ViolationKind k);

struct Violation {
  int step = 0;
  ViolationKind kind = ViolationKind::Equilibrium;
  std::string detail;
};

struct ReplayTolerances {
  /// Equilibrium residual bound relative to ||F_external|| + 1.
  double equilibrium = 1e-6;
  /// Absolute slack on force clauses, relative to the object weight.
  double force = 1e-6;
  /// Slack on velocity clauses relative to the finite-difference speed.
  double velocity = 0.05;
  /// Largest weighted pose jump between records, as a multiple of the step length.
  double continuity = 2.0;
  /// Integration step and rotation weight used to plan; non-positive means the planner defaults.
  double step = 0.0;
  double rotation_weight = 0.0;
};

struct ReplayReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  int count(ViolationKind k) const;
};

/// Re-checks every record against the scene from scratch.
ReplayReport replay_validate(const Scene& scene, const Trajectory& traj, const ReplayTolerances& tol = {});

}  // namespace modeplan
