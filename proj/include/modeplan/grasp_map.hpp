#pragma once

#include "modeplan/geom2d.hpp"

#include <Eigen/Core>

#include <span>

namespace modeplan {

/**
 * Maps stacked contact-frame forces (normal, tangent per contact) to the body
 * wrench (fx, fy, torque about the body origin). Its transpose maps a body
 * twist to stacked contact-frame velocities of the object material points.
 */
struct GraspMap {
  Eigen::Matrix<double, 3, Eigen::Dynamic> G;

  Eigen::Index num_contacts() const { return G.cols() / 2; }
  Vec3 normal_column(Eigen::Index i) const { return G.col(2 * i); }
  Vec3 tangent_column(Eigen::Index i) const { return G.col(2 * i + 1); }
};

GraspMap grasp_map(std::span<const Contact> contacts);

/// Unit wrench of a unit force along `dir` applied at body point `p`.
inline Vec3 point_wrench(const Vec2& p, const Vec2& dir) { return {dir.x(), dir.y(), cross(p, dir)}; }

}  // namespace modeplan
