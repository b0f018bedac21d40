#pragma once

#include "modeplan/geom2d.hpp"
#include "modeplan/grasp_map.hpp"
#include "modeplan/modes.hpp"
#include "modeplan/solver.hpp"

#include <Eigen/Core>

#include <limits>
#include <optional>
#include <span>
#include <string_view>

namespace modeplan {

/**
 * Wrench on the object not carried by contacts, in the body frame about the
 * body origin: F = constant + velocity_gain * v_o. Gravity uses only the
 * constant part; support friction on a tabletop uses only the gain.
 */
struct ExternalWrench {
  Vec3 constant = Vec3::Zero();
  Eigen::Matrix3d velocity_gain = Eigen::Matrix3d::Zero();

  bool velocity_dependent() const { return !velocity_gain.isZero(0.0); }
  Vec3 at(const Twist& v) const { return constant + velocity_gain * v.vec(); }
};

/// Weight `weight` acting along world direction `down` at body point `com`, seen from pose q.
ExternalWrench gravity_wrench(const Pose& q, const Vec2& com, double weight, const Vec2& down = {0.0, -1.0});

/// Linearized support friction of a tabletop: opposes the twist of the center
/// of mass with force gain mu*m*g and torque gain mu*m*g*rho^2 (rho: radius of gyration).
ExternalWrench support_friction_wrench(const Vec2& com, double friction_force, double radius_of_gyration_sq);

struct QuasistaticSolution {
  Twist v_o;
  VectorXd q_dot;   // 2 per manipulator contact, contact frame (normal, tangent)
  VectorXd lambda;  // 3 per contact: (lambda_n, lambda_t+, lambda_t-)

  Eigen::Index num_contacts() const { return lambda.size() / 3; }
  double lambda_n(Eigen::Index i) const { return lambda[3 * i]; }
  /// Net tangential force lambda_t+ - lambda_t-.
  double lambda_t(Eigen::Index i) const { return lambda[3 * i + 1] - lambda[3 * i + 2]; }
};

struct MechanicsOptions {
  /// Length weighting rotation in the velocity norm (same as the planner metric).
  double rotation_weight = 1.0;
  /// Regularization weight on lambda'lambda relative to the velocity term.
  double force_regularization = 1e-4;
  /// Typical force magnitude (object weight); the regularization is divided by its square.
  double force_scale = 1.0;
  double tol_feas = 1e-9;
  /// Bound on each manipulator normal force (infinite: unbounded).
  double finger_max_force = std::numeric_limits<double>::infinity();
};

/// Body wrench G * (lambda_n, lambda_t) of a solution.
Vec3 contact_wrench(std::span<const Contact> contacts, const VectorXd& lambda);

/// ||G lambda + F_external|| of a solution.
double equilibrium_residual(std::span<const Contact> contacts, const QuasistaticSolution& sol,
                            const ExternalWrench& f_ext);

/**
 * Closest twist to v_d (normalized to unit weighted norm) reachable under
 * `mode` while the object stays in static equilibrium:
 *   min ||v_d - v_o||_W^2 + eps * lambda'lambda
 * over the mode constraints and G lambda + F_external = 0.
 * Returns nullopt when the QP is infeasible or fails numerically.
 */
std::optional<QuasistaticSolution> closest_feasible_velocity(std::span<const Contact> contacts,
                                                             const ContactMode& mode, const Twist& v_d,
                                                             const ExternalWrench& f_ext,
                                                             const MechanicsOptions& opts);

/// True iff some lambda inside the friction cones of `contacts` balances f_ext.
bool static_equilibrium_possible(std::span<const Contact> contacts, const Vec3& f_ext,
                                 const MechanicsOptions& opts = {});

enum class MarginStrategy { None, FanLp };

std::optional<MarginStrategy> parse_margin_strategy(std::string_view s);
std::string_view margin_strategy_name(MarginStrategy s);

struct MarginOptions {
  MarginStrategy strategy = MarginStrategy::FanLp;
  /// Body point where disturbance forces act (the center of mass).
  Vec2 disturbance_point = Vec2::Zero();
  /// Number of evenly spaced disturbance force directions.
  int directions = 8;
};

/**
 * Largest rho such that every disturbance rho*d from the direction fan can be
 * balanced within the force clauses of `mode`, with total normal force
 * capped at 10 * (||F|| + 1). 0 if no contacts can resist; +inf for "none".
 */
double stability_margin(std::span<const Contact> contacts, const ContactMode& mode,
                        const QuasistaticSolution& solution, const ExternalWrench& f_ext,
                        const MechanicsOptions& opts, const MarginOptions& margin = {});

/// Maximum rho for a single disturbance wrench direction (LP); 0 when infeasible.
double margin_along(std::span<const Contact> contacts, const ContactMode& mode, const Vec3& f_ext,
                    const Vec3& disturbance, const MechanicsOptions& opts);

}  // namespace modeplan
