#pragma once

#include "modeplan/geom2d.hpp"
#include "modeplan/modes.hpp"

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace modeplan {

/// One contact of a trajectory record; point and normal in the world frame.
struct ContactRecord {
  ContactSource source = ContactSource::Environment;
  int finger = -1;
  Vec2 p = Vec2::Zero();
  Vec2 n = Vec2::UnitY();
  ContactLabel label = ContactLabel::Fixed;
  double lambda_n = 0.0;
  /// Net tangential force along rotate(n, -90 deg).
  double lambda_t = 0.0;
};

/// Finger relocation: world-frame locations before and after (nullopt: unassigned).
struct FingerSwitch {
  int finger = 0;
  std::optional<Vec2> from;
  std::optional<Vec2> to;
};

struct TrajectoryStep {
  double t = 0.0;
  Pose q;
  std::vector<ContactRecord> contacts;
  /// Relocations performed at this pose before the motion recorded here.
  std::vector<FingerSwitch> switches;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
};

/// Compact signature of the contact mode of a step (environment labels, finger count).
std::string mode_signature(const TrajectoryStep& step);
/// Number of distinct mode signatures along the trajectory.
int distinct_modes(const Trajectory& traj);

class TrajectoryFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_trajectory(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory(std::istream& in);
void write_trajectory_file(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_file(const std::string& path);

}  // namespace modeplan
