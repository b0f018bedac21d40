#include "modeplan/scene.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace modeplan {

using nlohmann::json;

double Scene::force_scale() const {
  if (plane == PlaneType::Tabletop && mu_support > 0.0) return mu_support * weight();
  return weight();
}

ExternalWrench Scene::external_wrench(const Pose& q) const {
  const Vec2 c = center_of_mass();
  if (plane == PlaneType::Gravity) return gravity_wrench(q, c, weight(), gravity_direction);
  const double rho2 = object.radius_of_gyration_sq() + (c - object.centroid()).squaredNorm();
  return support_friction_wrench(c, mu_support * weight(), rho2);
}

ContactQueryOptions Scene::contact_options() const {
  ContactQueryOptions o;
  o.d_contact = contact_tolerance();
  o.mu = mu_env;
  return o;
}

MechanicsOptions Scene::mechanics_options(double rotation_weight) const {
  MechanicsOptions o;
  o.rotation_weight = rotation_weight;
  o.force_scale = force_scale();
  o.finger_max_force = finger_max_force;
  return o;
}

std::vector<Contact> Scene::env_contacts(const Pose& q) const {
  return contact_query(object, q, environment, contact_options());
}

Vec2 Scene::finger_point(const FingerPlacement& f) const {
  const auto e = static_cast<std::size_t>(f.edge);
  const Vec2 a = object.edge_start(e), b = object.edge_end(e);
  const double len = (b - a).norm();
  return a + (b - a) * (f.s / len);
}

Contact Scene::finger_contact(const FingerPlacement& f, int i) const {
  Contact c = Contact::make(finger_point(f), -object.outward_normal(static_cast<std::size_t>(f.edge)), mu_mnp,
                            ContactSource::Manipulator, i);
  c.feature.kind = FeatureId::Kind::Finger;
  c.feature.object_feature = f.edge;
  c.feature.env_feature = i;
  return c;
}

bool Scene::finger_blocked(const FingerPlacement& f, int i, const Pose& q) const {
  if (!f.assigned) return false;
  const Vec2 surface = finger_point(f);
  const Vec2 center = surface + finger_radius * object.outward_normal(static_cast<std::size_t>(f.edge));
  const Vec2 w = q.apply(center);
  if (point_environment_distance(w, environment) < finger_radius + contact_tolerance()) return true;
  const auto idx = static_cast<std::size_t>(i);
  if (idx < finger_workspaces.size() && finger_workspaces[idx] && !finger_workspaces[idx]->contains(w)) return true;
  return false;
}

std::vector<Contact> finger_contacts(const Scene& scene, std::span<const FingerPlacement> fingers) {
  std::vector<Contact> out;
  for (std::size_t i = 0; i < fingers.size(); ++i) {
    if (fingers[i].assigned) out.push_back(scene.finger_contact(fingers[i], static_cast<int>(i)));
  }
  return out;
}

void Scene::validate() const {
  if (object.size() < 3) throw SchemaError("object.vertices", "object polygon missing");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw SchemaError("object.mass", "must be positive");
  if (!(g > 0.0)) throw SchemaError("plane.g", "must be positive");
  if (mu_env < 0.0) throw SchemaError("friction.env", "must be >= 0");
  if (mu_mnp < 0.0) throw SchemaError("friction.mnp", "must be >= 0");
  if (plane == PlaneType::Tabletop && mu_support < 0.0) throw SchemaError("plane.mu_support", "must be >= 0");
  if (plane == PlaneType::Gravity && gravity_direction.norm() < 1e-12)
    throw SchemaError("plane.direction", "must be nonzero");
  if (n_fingers < 1) throw SchemaError("fingers.count", "must be >= 1");
  if (finger_radius < 0.0) throw SchemaError("fingers.radius", "must be >= 0");
  if (!(finger_max_force > 0.0)) throw SchemaError("fingers.max_force", "must be positive");
  for (int f : finger_faces) {
    if (f < 0 || f >= static_cast<int>(object.size())) throw SchemaError("fingers.faces", "edge index out of range");
  }
  if (!finger_workspaces.empty() && static_cast<int>(finger_workspaces.size()) != n_fingers)
    throw SchemaError("fingers.workspaces", "needs one entry per finger");
  if (!start.finite()) throw SchemaError("start", "non-finite pose");
  if (!goal.finite()) throw SchemaError("goal", "non-finite pose");
  if (!(bounds.x_min < bounds.x_max) || !(bounds.y_min < bounds.y_max) || !(bounds.theta_min < bounds.theta_max))
    throw SchemaError("bounds", "empty range");
  for (const Pose* p : {&start, &goal}) {
    if (p->x < bounds.x_min || p->x > bounds.x_max || p->y < bounds.y_min || p->y > bounds.y_max)
      throw SchemaError(p == &start ? "start" : "goal", "outside sampling bounds");
  }
  const double sd = min_signed_distance(object, start, environment);
  if (sd < -contact_tolerance()) throw GeometryError("start pose penetrates the environment (depth " +
                                                     std::to_string(-sd) + ")");
}

namespace {

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(path + "." + key, "missing");
  return j.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& path) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return number(j.at(key), path + "." + key);
}

Vec2 point(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw SchemaError(path, "expected [x, y]");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

Polygon polygon(const json& j, const std::string& path, LoadWarnings* warnings) {
  const json& vs = require(j, "vertices", path);
  if (!vs.is_array()) throw SchemaError(path + ".vertices", "expected an array");
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < vs.size(); ++i) pts.push_back(point(vs[i], path + ".vertices[" + std::to_string(i) + "]"));
  bool flipped = false;
  Polygon poly;
  try {
    poly = Polygon::from_any_orientation(std::move(pts), &flipped);
  } catch (const GeometryError& e) {
    throw SchemaError(path, e.what());
  }
  if (flipped && warnings) warnings->messages.push_back(path + ": clockwise vertices reoriented");
  return poly;
}

Pose pose(const json& j, const std::string& path) {
  return {number(require(j, "x", path), path + ".x"), number(require(j, "y", path), path + ".y"),
          number(require(j, "theta", path), path + ".theta")};
}

void range(const json& j, const char* key, double& lo, double& hi, const std::string& path) {
  if (!j.contains(key)) return;
  const Vec2 r = point(j.at(key), path + "." + key);
  lo = r.x();
  hi = r.y();
}

json vertices_json(const Polygon& p) {
  json a = json::array();
  for (const Vec2& v : p.vertices()) a.push_back({v.x(), v.y()});
  return a;
}

json pose_json(const Pose& q) { return {{"x", q.x}, {"y", q.y}, {"theta", q.theta}}; }

}  // namespace

Scene load_scene_text(const std::string& text, LoadWarnings* warnings) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("parse error: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("$", "expected an object");
  Scene s;
  const int version = static_cast<int>(number(require(j, "version", "$"), "$.version"));
  if (version != 1) throw SchemaError("$.version", "unsupported version " + std::to_string(version));
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  if (j.contains("units")) s.units = j.at("units").get<std::string>();
  if (j.contains("note")) s.note = j.at("note").get<std::string>();

  const json& obj = require(j, "object", "$");
  s.object = polygon(obj, "$.object", warnings);
  s.mass = number_or(obj, "mass", 1.0, "$.object");
  if (obj.contains("com") && !obj.at("com").is_null()) s.com = point(obj.at("com"), "$.object.com");

  if (j.contains("environment")) {
    const json& env = j.at("environment");
    if (!env.is_array()) throw SchemaError("$.environment", "expected an array");
    for (std::size_t i = 0; i < env.size(); ++i)
      s.environment.push_back(polygon(env[i], "$.environment[" + std::to_string(i) + "]", warnings));
  }

  const json& plane = require(j, "plane", "$");
  const std::string type = require(plane, "type", "$.plane").get<std::string>();
  if (type == "gravity") {
    s.plane = PlaneType::Gravity;
    if (plane.contains("direction")) s.gravity_direction = point(plane.at("direction"), "$.plane.direction");
  } else if (type == "tabletop") {
    s.plane = PlaneType::Tabletop;
    s.mu_support = number(require(plane, "mu_support", "$.plane"), "$.plane.mu_support");
  } else {
    throw SchemaError("$.plane.type", "expected gravity or tabletop");
  }
  s.g = number_or(plane, "g", 1.0, "$.plane");

  const json& fr = require(j, "friction", "$");
  s.mu_env = number(require(fr, "env", "$.friction"), "$.friction.env");
  s.mu_mnp = number(require(fr, "mnp", "$.friction"), "$.friction.mnp");

  const json& fingers = require(j, "fingers", "$");
  s.n_fingers = static_cast<int>(number(require(fingers, "count", "$.fingers"), "$.fingers.count"));
  s.finger_radius = number_or(fingers, "radius", 0.0, "$.fingers");
  s.finger_max_force = number_or(fingers, "max_force", std::numeric_limits<double>::infinity(), "$.fingers");
  if (fingers.contains("faces")) {
    for (const json& f : fingers.at("faces")) s.finger_faces.push_back(static_cast<int>(number(f, "$.fingers.faces")));
  }
  if (fingers.contains("workspaces")) {
    const json& ws = fingers.at("workspaces");
    for (std::size_t i = 0; i < ws.size(); ++i) {
      if (ws[i].is_null()) {
        s.finger_workspaces.emplace_back();
      } else {
        s.finger_workspaces.emplace_back(polygon(ws[i], "$.fingers.workspaces[" + std::to_string(i) + "]", warnings));
      }
    }
  }

  s.start = pose(require(j, "start", "$"), "$.start");
  const json& goal = require(j, "goal", "$");
  s.goal = pose(goal, "$.goal");
  s.goal_tolerance = number_or(goal, "tolerance", 0.0, "$.goal");

  const json& b = require(j, "bounds", "$");
  range(b, "x", s.bounds.x_min, s.bounds.x_max, "$.bounds");
  range(b, "y", s.bounds.y_min, s.bounds.y_max, "$.bounds");
  range(b, "theta", s.bounds.theta_min, s.bounds.theta_max, "$.bounds");
  s.d_contact = number_or(j, "contact_tolerance", 0.0, "$");

  s.validate();
  return s;
}

Scene load_scene_file(const std::string& path, LoadWarnings* warnings) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scene_text(ss.str(), warnings);
}

std::string serialize_scene(const Scene& s) {
  json j = json::object();
  j["version"] = 1;
  j["name"] = s.name;
  j["units"] = s.units;
  j["note"] = s.note;
  const Vec2 com = s.center_of_mass();
  j["object"] = {{"vertices", vertices_json(s.object)}, {"mass", s.mass}, {"com", {com.x(), com.y()}}};
  json env = json::array();
  for (const Polygon& p : s.environment) env.push_back({{"vertices", vertices_json(p)}});
  j["environment"] = env;
  if (s.plane == PlaneType::Gravity) {
    j["plane"] = {{"type", "gravity"},
                  {"g", s.g},
                  {"direction", {s.gravity_direction.x(), s.gravity_direction.y()}}};
  } else {
    j["plane"] = {{"type", "tabletop"}, {"g", s.g}, {"mu_support", s.mu_support}};
  }
  j["friction"] = {{"env", s.mu_env}, {"mnp", s.mu_mnp}};
  json fingers = {{"count", s.n_fingers}, {"radius", s.finger_radius}};
  fingers["max_force"] = std::isfinite(s.finger_max_force) ? json(s.finger_max_force) : json(nullptr);
  fingers["faces"] = s.finger_faces;
  json ws = json::array();
  for (const auto& w : s.finger_workspaces) ws.push_back(w ? json{{"vertices", vertices_json(*w)}} : json(nullptr));
  fingers["workspaces"] = ws;
  j["fingers"] = fingers;
  j["start"] = pose_json(s.start);
  json goal = pose_json(s.goal);
  goal["tolerance"] = s.goal_radius();
  j["goal"] = goal;
  j["bounds"] = {{"x", {s.bounds.x_min, s.bounds.x_max}},
                 {"y", {s.bounds.y_min, s.bounds.y_max}},
                 {"theta", {s.bounds.theta_min, s.bounds.theta_max}}};
  j["contact_tolerance"] = s.contact_tolerance();
  return j.dump(2) + "\n";
}

}  // namespace modeplan
