#pragma once

#include "modeplan/geom2d.hpp"
#include "modeplan/mechanics.hpp"
#include "modeplan/modes.hpp"
#include "modeplan/scene.hpp"

#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace modeplan {

enum class StopReason { VelocityZero, Infeasible, NewContact, FingerCollision, StepLimit, NumericalFailure };

std::string_view stop_reason_name(StopReason r);

class InvalidStart : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// State at one pose and the quasistatic solution used to leave it.
struct IntegrationStep {
  Pose q;
  /// Duration of the step taken from q (0 for a terminal hold).
  double dt = 0.0;
  /// Environment contacts followed by finger contacts, body frame.
  std::vector<Contact> contacts;
  ContactMode mode;
  QuasistaticSolution solution;
};

struct IntegrationResult {
  Pose q_new;
  std::vector<IntegrationStep> steps;
  StopReason stop = StopReason::VelocityZero;
  /// Environment contacts at q_new.
  std::vector<Contact> env_contacts;
};

struct IntegrationOptions {
  /// Step length in weighted-metric units; non-positive means 0.02 * diagonal.
  double h = 0.0;
  double eps_v = 1e-4;
  int max_steps = 500;
  double rotation_weight = 1.0;
  /// Pulls maintained contacts back onto their constraint after each step.
  bool drift_correction = true;
};

/**
 * Euler projection of q_start toward q_target on the manifold of `env_mode`
 * (aligned with the environment contacts at q_start). Fingers ride with the
 * object. Throws InvalidStart when q_start penetrates, a finger is blocked,
 * or the mode does not match the contact count.
 */
IntegrationResult forward_integrate(const Scene& scene, const Pose& q_start, const Pose& q_target,
                                    std::span<const FingerPlacement> fingers, const ContactMode& env_mode,
                                    const IntegrationOptions& opts);

/// Full label vector: env_mode followed by Fixed for each assigned finger.
ContactMode with_finger_labels(const ContactMode& env_mode, std::span<const FingerPlacement> fingers);

/// Static hold at q: every present contact Fixed and zero desired twist. nullopt if no equilibrium.
std::optional<IntegrationStep> hold_step(const Scene& scene, const Pose& q, std::span<const FingerPlacement> fingers,
                                         double rotation_weight);

/// Hold if possible, else the first feasible environment mode moving toward `target`.
std::optional<IntegrationStep> terminal_step(const Scene& scene, const Pose& q, const Pose& target,
                                             std::span<const FingerPlacement> fingers, double rotation_weight);

/// Projection of q onto itself leaves it unchanged (within eps).
bool check_projection_idempotence(const Scene& scene, const Pose& q, const ContactMode& env_mode,
                                  std::span<const FingerPlacement> fingers, const IntegrationOptions& opts,
                                  double eps);

}  // namespace modeplan
