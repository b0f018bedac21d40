#include "modeplan/scene.hpp"

#include <stdexcept>

namespace modeplan {

namespace {

Polygon rect(double x0, double y0, double x1, double y1) { return Polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}); }

// Polygon with its area centroid moved to the origin.
Polygon centered(std::vector<Vec2> v) {
  const Polygon p(v);
  const Vec2 c = p.centroid();
  for (Vec2& x : v) x -= c;
  return Polygon(std::move(v));
}

constexpr const char* kNote = "layout reconstructed for this benchmark; dimensions are not taken from a published source";

Scene move_and_pivot() {
  Scene s;
  s.name = "move-and-pivot";
  s.note = kNote;
  s.object = rect(-0.5, -0.3, 0.5, 0.3);
  s.environment = {rect(-4.0, -1.0, 6.0, 0.0)};
  s.mu_env = 1.0;
  s.mu_mnp = 0.3;
  s.n_fingers = 2;
  s.finger_radius = 0.0;
  s.finger_max_force = 3.0;
  s.start = {0.0, 0.3, 0.0};
  s.goal = {2.0, 0.5, -kPi / 2};
  s.bounds = {-1.0, 3.0, 0.0, 1.5, -kPi, kPi};
  return s;
}

Scene pick_up_blade() {
  Scene s;
  s.name = "pick-up-blade";
  s.note = kNote;
  s.object = rect(-1.0, -0.05, 1.0, 0.05);
  s.environment = {rect(-4.0, -1.0, 0.0, 0.0)};
  s.mu_env = 0.3;
  s.mu_mnp = 1.0;
  s.n_fingers = 2;
  s.finger_faces = {0, 2};
  s.start = {-1.2, 0.05, 0.0};
  s.goal = {0.9, 0.6, 0.0};
  s.bounds = {-2.5, 2.0, 0.05, 1.5, -kPi, kPi};
  return s;
}

Scene unpacking() {
  Scene s;
  s.name = "unpacking";
  s.note = kNote;
  s.object = rect(-0.5, -0.5, 0.5, 0.5);
  s.environment = {rect(-4.0, -1.0, 3.0, 0.0), rect(0.5, 0.0, 1.5, 1.2)};
  s.mu_env = 0.3;
  s.mu_mnp = 0.8;
  s.n_fingers = 2;
  s.finger_radius = 0.1;
  s.start = {0.0, 0.5, 0.0};
  s.goal = {-1.5, 1.2, 0.0};
  s.bounds = {-2.5, 0.5, 0.5, 2.0, -kPi, kPi};
  return s;
}

Scene cliff() {
  Scene s;
  s.name = "block-up-cliff";
  s.note = kNote;
  s.object = rect(-0.25, -0.25, 0.25, 0.25);
  s.environment = {Polygon({{-3.0, -1.0}, {3.0, -1.0}, {3.0, 0.25}, {1.0, 0.25}, {1.0, 0.0}, {-3.0, 0.0}})};
  s.mu_env = 0.2;
  s.mu_mnp = 1.0;
  s.n_fingers = 1;
  s.start = {0.0, 0.25, 0.0};
  s.goal = {2.0, 0.5, 0.0};
  s.bounds = {-1.0, 2.5, 0.25, 1.2, -kPi, kPi};
  return s;
}

Scene obstacle_course() {
  Scene s;
  s.name = "obstacle-course";
  s.note = kNote;
  s.object = rect(-0.25, -0.25, 0.25, 0.25);
  s.environment = {Polygon({{-3.0, -1.0}, {5.0, -1.0}, {5.0, 0.0}, {1.4, 0.0}, {1.4, 0.1}, {1.0, 0.1}, {1.0, 0.0},
                            {-3.0, 0.0}})};
  s.mu_env = 0.5;
  s.mu_mnp = 1.0;
  s.n_fingers = 1;
  s.finger_max_force = 3.0;
  s.start = {0.0, 0.25, 0.0};
  s.goal = {2.5, 0.25, 0.0};
  s.bounds = {-1.0, 3.5, 0.25, 1.2, -kPi, kPi};
  return s;
}

Scene in_hand_t() {
  Scene s;
  s.name = "in-hand-t";
  s.note = kNote;
  s.object = centered({{-0.1, 0.0}, {0.1, 0.0}, {0.1, 0.5}, {0.4, 0.5}, {0.4, 0.7}, {-0.4, 0.7}, {-0.4, 0.5},
                       {-0.1, 0.5}});
  s.environment = {rect(-1.0, -0.3, 1.0, 0.0)};
  s.mu_env = 0.8;
  s.mu_mnp = 0.8;
  s.n_fingers = 2;
  s.finger_workspaces = {rect(-1.5, 0.0, 0.0, 2.0), rect(0.0, 0.0, 1.5, 2.0)};
  // Bar down (upside-down T) to stem down.
  double top = 0.0, bottom = 0.0;
  for (const Vec2& v : s.object.vertices()) {
    top = std::max(top, v.y());
    bottom = std::min(bottom, v.y());
  }
  s.start = {0.0, top, kPi};
  s.goal = {0.0, -bottom, 0.0};
  s.bounds = {-0.8, 0.8, 0.0, 1.5, -kPi, kPi};
  return s;
}

Scene narrow_passage() {
  Scene s;
  s.name = "narrow-passage";
  s.note = kNote;
  s.object = rect(-0.5, -0.15, 0.5, 0.15);
  s.environment = {rect(0.0, 0.3, 2.0, 1.5), rect(0.0, -1.5, 2.0, -0.3)};
  s.plane = PlaneType::Tabletop;
  s.mu_support = 0.5;
  s.mu_env = 0.3;
  s.mu_mnp = 0.8;
  s.n_fingers = 1;
  s.start = {-1.0, 0.6, kPi / 2};
  s.goal = {3.0, 0.0, kPi / 2};
  s.bounds = {-2.0, 4.0, -1.5, 1.5, -kPi, kPi};
  return s;
}

}  // namespace

Scene builtin_problem(int k) {
  switch (k) {
    case 1: return move_and_pivot();
    case 2: return pick_up_blade();
    case 3: return unpacking();
    case 4: return cliff();
    case 5: return obstacle_course();
    case 6: return in_hand_t();
    case 7: return narrow_passage();
    default: throw std::out_of_range("problem index must be 1.." + std::to_string(kNumBuiltinProblems));
  }
}

}  // namespace modeplan
