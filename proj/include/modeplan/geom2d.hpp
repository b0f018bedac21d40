#pragma once

#include <Eigen/Core>

#include <cmath>
#include <compare>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace modeplan {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

/// Rotation by -90 degrees: maps a contact normal to its tangent.
inline Vec2 rotate_cw(const Vec2& v) { return {v.y(), -v.x()}; }

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/**
 * Planar rigid configuration. Also used as a rigid transform (an element of
 * SE(2)); composition and inversion keep theta wrapped into (-pi, pi].
 */
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose() = default;
  Pose(double x_, double y_, double theta_) : x(x_), y(y_), theta(wrap_angle(theta_)) {}

  Vec2 translation() const { return {x, y}; }

  /// Maps a body-frame point to the world frame.
  Vec2 apply(const Vec2& p) const { return rotate(p, theta) + translation(); }
  /// Maps a world-frame point to the body frame.
  Vec2 apply_inverse(const Vec2& p) const { return rotate(p - translation(), -theta); }
  Vec2 rotate_to_world(const Vec2& v) const { return rotate(v, theta); }
  Vec2 rotate_to_body(const Vec2& v) const { return rotate(v, -theta); }

  Pose compose(const Pose& rhs) const;
  Pose inverse() const;

  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(theta); }

  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Body-frame velocity (vx, vy, omega).
struct Twist {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;

  Twist() = default;
  Twist(double vx_, double vy_, double omega_) : vx(vx_), vy(vy_), omega(omega_) {}
  explicit Twist(const Vec3& v) : vx(v[0]), vy(v[1]), omega(v[2]) {}

  Vec3 vec() const { return {vx, vy, omega}; }
  Twist scaled(double s) const { return {vx * s, vy * s, omega * s}; }
  /// Norm with the rotation component weighted by a length w_r.
  double weighted_norm(double w_r) const {
    return std::sqrt(vx * vx + vy * vy + w_r * w_r * omega * omega);
  }
  bool finite() const { return std::isfinite(vx) && std::isfinite(vy) && std::isfinite(omega); }
};

/// SE(2) exponential of the body twist h*v, returned as a rigid transform.
Pose twist_to_transform(const Twist& v, double h);

/// SE(2) logarithm of from^-1 * to, i.e. the body twist that flows from onto to in unit time.
Twist body_twist_between(const Pose& from, const Pose& to);

/// Euclidean xy distance plus w_r times the shortest angular difference.
double weighted_se2_distance(const Pose& a, const Pose& b, double w_r);

/// Flows q along body twist v for time h.
inline Pose integrate_pose(const Pose& q, const Twist& v, double h) {
  return q.compose(twist_to_transform(v, h));
}

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PenetrationError : public std::runtime_error {
 public:
  PenetrationError(const std::string& what, double depth) : std::runtime_error(what), depth_(depth) {}
  double depth() const { return depth_; }

 private:
  double depth_;
};

class BisectionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Simple polygon with counter-clockwise vertices, expressed in the frame of
 * its owner (object body frame, or world frame for environment pieces).
 * May be non-convex.
 */
class Polygon {
 public:
  Polygon() = default;
  /// Validates simplicity and >= 3 vertices; throws GeometryError. Clockwise input is rejected.
  explicit Polygon(std::vector<Vec2> vertices);

  /// Like the constructor, but reverses clockwise input. `reoriented` reports whether it did.
  static Polygon from_any_orientation(std::vector<Vec2> vertices, bool* reoriented = nullptr);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Vec2& vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }
  /// Edge i runs from vertex i to vertex i+1.
  Vec2 edge_start(std::size_t i) const { return vertex(i); }
  Vec2 edge_end(std::size_t i) const { return vertex(i + 1); }
  double edge_length(std::size_t i) const { return (edge_end(i) - edge_start(i)).norm(); }
  /// Outward unit normal of edge i (right-hand side of a CCW edge).
  Vec2 outward_normal(std::size_t i) const;

  double signed_area() const;
  Vec2 centroid() const;
  /// Polar second moment of area about the centroid divided by area.
  double radius_of_gyration_sq() const;
  double perimeter() const;
  double bounding_diagonal() const;
  bool contains(const Vec2& p) const;
  /// Euclidean distance from p to the boundary.
  double boundary_distance(const Vec2& p) const;
  bool is_reflex(std::size_t i) const;

  Polygon transformed(const Pose& q) const;

 private:
  std::vector<Vec2> vertices_;
};

double signed_area(std::span<const Vec2> vertices);
bool segments_properly_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

enum class ContactSource { Environment, Manipulator };

/**
 * Identity of a touching feature pair. Object-vertex/environment-edge pairs
 * and environment-vertex/object-edge pairs are distinguished by `kind`.
 * Manipulator contacts use kind = Finger and object_feature = edge.
 */
struct FeatureId {
  enum class Kind { ObjectVertex, EnvironmentVertex, Finger };
  Kind kind = Kind::ObjectVertex;
  int object_feature = -1;
  int env_polygon = -1;
  int env_feature = -1;

  auto operator<=>(const FeatureId&) const = default;
};

struct Contact {
  Vec2 point = Vec2::Zero();   // object body frame
  Vec2 normal = Vec2::UnitY(); // body frame, points into the object
  Vec2 tangent = Vec2::UnitX();
  double distance = 0.0;
  ContactSource source = ContactSource::Environment;
  int finger = -1;
  double mu = 0.0;
  FeatureId feature;

  static Contact make(const Vec2& point, const Vec2& normal, double mu,
                      ContactSource source = ContactSource::Environment, int finger = -1);
};

struct ContactQueryOptions {
  double d_contact = 1e-3;
  /// Signed distances below -d_pen_max raise PenetrationError. Non-positive means 10 * d_contact.
  double d_pen_max = 0.0;
  double mu = 0.0;
  double merge_radius = 1e-6;
};

/// Environment contacts of `object` placed at q. Sorted by body-frame point.
std::vector<Contact> contact_query(const Polygon& object, const Pose& q,
                                   std::span<const Polygon> environment,
                                   const ContactQueryOptions& opts);

/// Minimum signed distance between the placed object and the environment
/// (negative inside; -infinity for overlaps that no vertex witnesses).
double min_signed_distance(const Polygon& object, const Pose& q, std::span<const Polygon> environment);

/// Signed distance of a world point to the environment (negative inside any piece).
double point_environment_distance(const Vec2& p, std::span<const Polygon> environment);

/// Interpolates from q_prev toward q_next in twist coordinates until the
/// minimum signed distance lands in [-d_contact, d_contact].
Pose penetration_rollback(const Pose& q_prev, const Pose& q_next, const Polygon& object,
                          std::span<const Polygon> environment, double d_contact);

/// Same as penetration_rollback, also reporting the interpolation parameter used.
Pose penetration_rollback(const Pose& q_prev, const Pose& q_next, const Polygon& object,
                          std::span<const Polygon> environment, double d_contact,
                          double* fraction);

}  // namespace modeplan
