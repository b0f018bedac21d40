#include "modeplan/geom2d.hpp"

#include <algorithm>
#include <limits>

namespace modeplan {

double wrap_angle(double a) {
  if (!std::isfinite(a)) return a;
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

Pose Pose::compose(const Pose& rhs) const {
  const Vec2 t = apply(rhs.translation());
  return {t.x(), t.y(), theta + rhs.theta};
}

Pose Pose::inverse() const {
  const Vec2 t = rotate(-translation(), -theta);
  return {t.x(), t.y(), -theta};
}

namespace {

// Coefficients of V(phi) = [[a, -b], [b, a]] where a = sin(phi)/phi, b = (1 - cos(phi))/phi.
void left_jacobian_coeffs(double phi, double& a, double& b) {
  if (std::abs(phi) < 1e-4) {
    const double p2 = phi * phi;
    a = 1.0 - p2 / 6.0 + p2 * p2 / 120.0;
    b = phi / 2.0 - phi * p2 / 24.0;
  } else {
    a = std::sin(phi) / phi;
    b = (1.0 - std::cos(phi)) / phi;
  }
}

}  // namespace

Pose twist_to_transform(const Twist& v, double h) {
  const double phi = h * v.omega;
  double a, b;
  left_jacobian_coeffs(phi, a, b);
  const double ux = h * v.vx, uy = h * v.vy;
  return {a * ux - b * uy, b * ux + a * uy, phi};
}

double weighted_se2_distance(const Pose& a, const Pose& b, double w_r) {
  const double dth = std::abs(wrap_angle(a.theta - b.theta));
  return std::hypot(a.x - b.x, a.y - b.y) + w_r * std::min(dth, 2.0 * kPi - dth);
}

Twist body_twist_between(const Pose& from, const Pose& to) {
  const Pose rel = from.inverse().compose(to);
  const double phi = rel.theta;
  double a, b;
  left_jacobian_coeffs(phi, a, b);
  const double det = a * a + b * b;
  const double ux = (a * rel.x + b * rel.y) / det;
  const double uy = (-b * rel.x + a * rel.y) / det;
  return {ux, uy, phi};
}

double signed_area(std::span<const Vec2> vertices) {
  double s = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    s += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
  }
  return 0.5 * s;
}

namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

// Closed-segment intersection, used for simplicity validation.
bool segments_touch(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = orient(c, d, a), d2 = orient(c, d, b);
  const double d3 = orient(a, b, c), d4 = orient(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  if (d1 == 0 && on_segment(c, d, a)) return true;
  if (d2 == 0 && on_segment(c, d, b)) return true;
  if (d3 == 0 && on_segment(a, b, c)) return true;
  if (d4 == 0 && on_segment(a, b, d)) return true;
  return false;
}

}  // namespace

bool segments_properly_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double scale = std::max({(b - a).norm(), (d - c).norm(), 1e-300});
  const double eps = 1e-12 * scale * scale;
  const double d1 = orient(c, d, a), d2 = orient(c, d, b);
  const double d3 = orient(a, b, c), d4 = orient(a, b, d);
  return ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) &&
         ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps));
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double s = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (a + s * ab - p).norm();
}

Polygon::Polygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw GeometryError("polygon needs at least 3 vertices");
  for (const auto& v : vertices_) {
    if (!v.allFinite()) throw GeometryError("polygon vertex is not finite");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if ((vertex(i + 1) - vertex(i)).norm() <= 0.0) throw GeometryError("polygon has a zero-length edge");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_touch(vertex(i), vertex(i + 1), vertex(j), vertex(j + 1))) {
        throw GeometryError("polygon is self-intersecting (edges " + std::to_string(i) + " and " +
                            std::to_string(j) + ")");
      }
    }
  }
  if (modeplan::signed_area(vertices_) <= 0.0) {
    throw GeometryError("polygon vertices must be counter-clockwise");
  }
}

Polygon Polygon::from_any_orientation(std::vector<Vec2> vertices, bool* reoriented) {
  const bool cw = vertices.size() >= 3 && modeplan::signed_area(vertices) < 0.0;
  if (cw) std::reverse(vertices.begin(), vertices.end());
  if (reoriented) *reoriented = cw;
  return Polygon(std::move(vertices));
}

Vec2 Polygon::outward_normal(std::size_t i) const {
  const Vec2 e = (edge_end(i) - edge_start(i)).normalized();
  return rotate_cw(e);
}

double Polygon::signed_area() const { return modeplan::signed_area(vertices_); }

Vec2 Polygon::centroid() const {
  Vec2 c = Vec2::Zero();
  double a2 = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const Vec2& p = vertex(i);
    const Vec2& q = vertex(i + 1);
    const double w = cross(p, q);
    c += (p + q) * w;
    a2 += w;
  }
  return c / (3.0 * a2);
}

double Polygon::radius_of_gyration_sq() const {
  const Vec2 c = centroid();
  double jz = 0.0, a2 = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const Vec2 p = vertex(i) - c;
    const Vec2 q = vertex(i + 1) - c;
    const double w = cross(p, q);
    jz += w * (p.squaredNorm() + p.dot(q) + q.squaredNorm());
    a2 += w;
  }
  // jz/12 over area (a2/2)
  return (jz / 12.0) / (a2 / 2.0);
}

double Polygon::perimeter() const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += edge_length(i);
  return s;
}

double Polygon::bounding_diagonal() const {
  Vec2 lo = vertices_.front(), hi = vertices_.front();
  for (const auto& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

bool Polygon::contains(const Vec2& p) const {
  bool inside = false;
  const std::size_t n = size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

double Polygon::boundary_distance(const Vec2& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size(); ++i) d = std::min(d, point_segment_distance(p, edge_start(i), edge_end(i)));
  return d;
}

bool Polygon::is_reflex(std::size_t i) const {
  const std::size_t n = size();
  const Vec2& prev = vertex(i + n - 1);
  return orient(prev, vertex(i), vertex(i + 1)) < 0.0;
}

Polygon Polygon::transformed(const Pose& q) const {
  Polygon out;
  out.vertices_.reserve(size());
  for (const auto& v : vertices_) out.vertices_.push_back(q.apply(v));
  return out;
}

Contact Contact::make(const Vec2& point, const Vec2& normal, double mu, ContactSource source, int finger) {
  Contact c;
  c.point = point;
  c.normal = normal.normalized();
  c.tangent = rotate_cw(c.normal);
  c.mu = mu;
  c.source = source;
  c.finger = finger;
  if (source == ContactSource::Manipulator) {
    c.feature.kind = FeatureId::Kind::Finger;
    c.feature.env_feature = finger;
  }
  return c;
}

namespace {

// Allowed dot product between an edge leaving a touching vertex and the
// normal of the touched edge; below this the vertex cannot be the witness.
constexpr double kAdjacencySlack = -0.05;

}  // namespace

std::vector<Contact> contact_query(const Polygon& object, const Pose& q,
                                   std::span<const Polygon> environment,
                                   const ContactQueryOptions& opts) {
  const double dc = opts.d_contact;
  const double pen_max = opts.d_pen_max > 0.0 ? opts.d_pen_max : 10.0 * dc;
  const double msd = min_signed_distance(object, q, environment);
  if (msd < -pen_max) {
    throw PenetrationError("object penetrates environment by " + std::to_string(-msd), -msd);
  }

  const Polygon world = object.transformed(q);
  const std::size_t nv = object.size();
  std::vector<Contact> candidates;

  for (std::size_t j = 0; j < environment.size(); ++j) {
    const Polygon& env = environment[j];
    const std::size_t ne = env.size();

    // Object vertex against environment edge.
    for (std::size_t i = 0; i < nv; ++i) {
      const Vec2& w = world.vertex(i);
      const Vec2 e1 = (world.vertex(i + 1) - w).normalized();
      const Vec2 e2 = (world.vertex(i + nv - 1) - w).normalized();
      for (std::size_t k = 0; k < ne; ++k) {
        const Vec2 a = env.edge_start(k), b = env.edge_end(k);
        const double len = (b - a).norm();
        const Vec2 u = (b - a) / len;
        const double s = (w - a).dot(u);
        if (s < 0.0 || s > len) continue;
        const Vec2 n_out = env.outward_normal(k);
        const double d = (w - a).dot(n_out);
        if (std::abs(d) > dc) continue;
        if (e1.dot(n_out) < kAdjacencySlack || e2.dot(n_out) < kAdjacencySlack) continue;
        Contact c = Contact::make(object.vertex(i), q.rotate_to_body(n_out), opts.mu);
        c.distance = d;
        c.feature = {FeatureId::Kind::ObjectVertex, static_cast<int>(i), static_cast<int>(j),
                     static_cast<int>(k)};
        candidates.push_back(c);
      }
    }

    // Environment vertex against object edge (in the body frame).
    for (std::size_t k = 0; k < ne; ++k) {
      const Vec2 cb = q.apply_inverse(env.vertex(k));
      const Vec2 f1 = q.rotate_to_body((env.vertex(k + 1) - env.vertex(k)).normalized());
      const Vec2 f2 = q.rotate_to_body((env.vertex(k + ne - 1) - env.vertex(k)).normalized());
      for (std::size_t i = 0; i < nv; ++i) {
        const Vec2 a = object.edge_start(i), b = object.edge_end(i);
        const double len = (b - a).norm();
        const Vec2 u = (b - a) / len;
        const double s = (cb - a).dot(u);
        if (s < 0.0 || s > len) continue;
        const Vec2 n_out = object.outward_normal(i);
        const double d = (cb - a).dot(n_out);
        if (std::abs(d) > dc) continue;
        if (f1.dot(n_out) < kAdjacencySlack || f2.dot(n_out) < kAdjacencySlack) continue;
        Contact c = Contact::make(cb, -n_out, opts.mu);
        c.distance = d;
        c.feature = {FeatureId::Kind::EnvironmentVertex, static_cast<int>(i), static_cast<int>(j),
                     static_cast<int>(k)};
        candidates.push_back(c);
      }
    }
  }

  std::sort(candidates.begin(), candidates.end(),
            [](const Contact& a, const Contact& b) { return a.feature < b.feature; });
  std::vector<Contact> out;
  for (const auto& c : candidates) {
    const bool dup = std::any_of(out.begin(), out.end(), [&](const Contact& k) {
      return (k.point - c.point).norm() <= opts.merge_radius && k.normal.dot(c.normal) > 1.0 - 1e-9;
    });
    if (!dup) out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const Contact& a, const Contact& b) {
    if (a.point.x() != b.point.x()) return a.point.x() < b.point.x();
    if (a.point.y() != b.point.y()) return a.point.y() < b.point.y();
    return a.feature < b.feature;
  });
  return out;
}

namespace {

double signed_vertex_distance(const Vec2& p, const Polygon& poly) {
  const double d = poly.boundary_distance(p);
  return poly.contains(p) ? -d : d;
}

}  // namespace

double min_signed_distance(const Polygon& object, const Pose& q, std::span<const Polygon> environment) {
  const Polygon world = object.transformed(q);
  double best = std::numeric_limits<double>::infinity();
  for (const Polygon& env : environment) {
    double pair_best = std::numeric_limits<double>::infinity();
    for (const auto& v : world.vertices()) pair_best = std::min(pair_best, signed_vertex_distance(v, env));
    for (const auto& v : env.vertices()) pair_best = std::min(pair_best, signed_vertex_distance(v, world));
    if (pair_best > 0.0) {
      for (std::size_t i = 0; i < world.size() && pair_best > 0.0; ++i) {
        for (std::size_t k = 0; k < env.size(); ++k) {
          if (segments_properly_intersect(world.edge_start(i), world.edge_end(i), env.edge_start(k),
                                          env.edge_end(k))) {
            pair_best = -std::numeric_limits<double>::infinity();
            break;
          }
        }
      }
    }
    best = std::min(best, pair_best);
  }
  return best;
}

double point_environment_distance(const Vec2& p, std::span<const Polygon> environment) {
  double best = std::numeric_limits<double>::infinity();
  for (const Polygon& env : environment) best = std::min(best, signed_vertex_distance(p, env));
  return best;
}

Pose penetration_rollback(const Pose& q_prev, const Pose& q_next, const Polygon& object,
                          std::span<const Polygon> environment, double d_contact) {
  return penetration_rollback(q_prev, q_next, object, environment, d_contact, nullptr);
}

Pose penetration_rollback(const Pose& q_prev, const Pose& q_next, const Polygon& object,
                          std::span<const Polygon> environment, double d_contact, double* fraction) {
  if (fraction) *fraction = 1.0;
  const double sd_next = min_signed_distance(object, q_next, environment);
  if (sd_next >= -d_contact) return q_next;
  const double sd_prev = min_signed_distance(object, q_prev, environment);
  if (sd_prev < -d_contact) throw BisectionFailure("rollback start pose already penetrates");

  const Twist delta = body_twist_between(q_prev, q_next);
  const double threshold = -0.5 * d_contact;
  double lo = 0.0, hi = 1.0;
  double sd_lo = sd_prev;
  for (int it = 0; it < 64; ++it) {
    if (sd_lo <= d_contact && hi - lo < 1e-9) break;
    const double mid = 0.5 * (lo + hi);
    const double sd = min_signed_distance(object, integrate_pose(q_prev, delta, mid), environment);
    if (sd < threshold) {
      hi = mid;
    } else {
      lo = mid;
      sd_lo = sd;
    }
  }
  if (sd_lo < -d_contact || sd_lo > d_contact) {
    throw BisectionFailure("rollback did not reach the contact band");
  }
  if (fraction) *fraction = lo;
  return integrate_pose(q_prev, delta, lo);
}

}  // namespace modeplan
