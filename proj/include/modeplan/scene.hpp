#pragma once

#include "modeplan/geom2d.hpp"
#include "modeplan/mechanics.hpp"

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace modeplan {

class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class PlaneType { Gravity, Tabletop };

struct SamplingBounds {
  double x_min = -1.0, x_max = 1.0;
  double y_min = -1.0, y_max = 1.0;
  double theta_min = -kPi, theta_max = kPi;
};

/// Point finger location on the object boundary: edge index and arclength along it.
struct FingerPlacement {
  bool assigned = false;
  int edge = -1;
  double s = 0.0;

  static FingerPlacement unassigned() { return {}; }
  friend bool operator==(const FingerPlacement&, const FingerPlacement&) = default;
};

struct Scene {
  std::string name;
  std::string units = "m";
  /// Free-form provenance remark carried through serialization.
  std::string note;

  Polygon object;
  double mass = 1.0;
  std::optional<Vec2> com;  // body frame; centroid when absent

  std::vector<Polygon> environment;

  PlaneType plane = PlaneType::Gravity;
  double g = 1.0;
  Vec2 gravity_direction{0.0, -1.0};
  double mu_support = 0.0;

  double mu_env = 0.5;
  double mu_mnp = 0.5;

  int n_fingers = 1;
  double finger_radius = 0.0;
  double finger_max_force = std::numeric_limits<double>::infinity();
  /// Object edges fingers may touch; empty means all.
  std::vector<int> finger_faces;
  /// Optional per-finger world-frame workspace (empty vector: no limits).
  std::vector<std::optional<Polygon>> finger_workspaces;

  Pose start;
  Pose goal;
  /// Weighted-metric goal radius; non-positive means 0.05 * diagonal.
  double goal_tolerance = 0.0;
  SamplingBounds bounds;

  /// Parameters with defaults derived from the object size when non-positive.
  double d_contact = 0.0;

  Vec2 center_of_mass() const { return com ? *com : object.centroid(); }
  double diagonal() const { return object.bounding_diagonal(); }
  double contact_tolerance() const { return d_contact > 0.0 ? d_contact : 1e-3 * diagonal(); }
  double goal_radius() const { return goal_tolerance > 0.0 ? goal_tolerance : 0.05 * diagonal(); }
  double weight() const { return mass * g; }
  /// Typical force magnitude used to scale regularization.
  double force_scale() const;

  ExternalWrench external_wrench(const Pose& q) const;
  ContactQueryOptions contact_options() const;
  MechanicsOptions mechanics_options(double rotation_weight) const;

  std::vector<Contact> env_contacts(const Pose& q) const;

  /// Contact for finger i at placement f (body frame, normal into the object).
  Contact finger_contact(const FingerPlacement& f, int i) const;
  Vec2 finger_point(const FingerPlacement& f) const;
  /// True when an assigned finger at pose q overlaps the environment or leaves its workspace.
  bool finger_blocked(const FingerPlacement& f, int i, const Pose& q) const;

  /// Throws GeometryError / SchemaError on inconsistent content.
  void validate() const;
};

/// Contacts of all assigned fingers, in finger order.
std::vector<Contact> finger_contacts(const Scene& scene, std::span<const FingerPlacement> fingers);

struct LoadWarnings {
  std::vector<std::string> messages;
};

Scene load_scene_text(const std::string& text, LoadWarnings* warnings = nullptr);
Scene load_scene_file(const std::string& path, LoadWarnings* warnings = nullptr);
std::string serialize_scene(const Scene& scene);

/// Bundled benchmark problems 1..7. Throws std::out_of_range otherwise.
Scene builtin_problem(int k);
constexpr int kNumBuiltinProblems = 7;

}  // namespace modeplan
