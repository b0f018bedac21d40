#pragma once

#include "modeplan/scene.hpp"

#include <random>

namespace modeplan::testing {

inline Polygon box(double x0, double y0, double x1, double y1) {
  return Polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

/// Unit square resting flat on a wide floor; one finger, weight 1.
inline Scene square_on_floor(int fingers = 1) {
  Scene s;
  s.name = "square";
  s.object = box(-0.5, -0.5, 0.5, 0.5);
  s.environment = {box(-20.0, -1.0, 20.0, 0.0)};
  s.mu_env = 0.5;
  s.mu_mnp = 0.8;
  s.n_fingers = fingers;
  s.start = {0.0, 0.5, 0.0};
  s.goal = {2.0, 0.5, 0.0};
  s.bounds = {-3.0, 5.0, 0.5, 3.0, -kPi, kPi};
  return s;
}

/// Finger in the middle of the top face of the unit square.
inline FingerPlacement top_center() { return {true, 2, 0.5}; }

inline Pose random_pose(std::mt19937_64& rng, double extent = 5.0) {
  std::uniform_real_distribution<double> u(-extent, extent), a(-kPi, kPi);
  return {u(rng), u(rng), a(rng)};
}

}  // namespace modeplan::testing
