#pragma once

#include "modeplan/geom2d.hpp"
#include "modeplan/grasp_map.hpp"
#include "modeplan/solver.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace modeplan {

enum class ContactLabel : std::uint8_t { Separate, Fixed, RightSlide, LeftSlide };

/// "separate", "fixed", "right-slide", "left-slide"
std::string_view label_name(ContactLabel l);
std::optional<ContactLabel> parse_label(std::string_view s);
char label_char(ContactLabel l);

/// One label per contact, aligned with a contact list.
struct ContactMode {
  std::vector<ContactLabel> labels;

  std::size_t size() const { return labels.size(); }
  bool all(ContactLabel l) const;
  /// Compact form such as "SFRL".
  std::string str() const;

  auto operator<=>(const ContactMode&) const = default;
};

/**
 * Linear constraints of one contact mode over the stacked variable
 *   x = [v_o (3), qdot (2 per manipulator contact, contact-frame n/t), lambda (3 per contact)]
 * with lambda_i = (lambda_n, lambda_t+, lambda_t-). Strict rows carry b = 0;
 * consumers add a margin sigma (feasibility) or keep them closed (QP).
 */
struct ModeConstraints {
  MatrixXd A_eq;
  VectorXd b_eq;
  MatrixXd A_ineq;
  VectorXd b_ineq;
  std::vector<int> strict_rows;
  int num_contacts = 0;
  int num_manipulator = 0;

  int num_vars() const { return 3 + 2 * num_manipulator + 3 * num_contacts; }
  int qdot_offset(int manipulator_index) const { return 3 + 2 * manipulator_index; }
  int lambda_offset(int contact) const { return 3 + 2 * num_manipulator + 3 * contact; }
};

/// Builds the velocity and Coulomb force clauses of `mode` for `contacts`.
/// Manipulator contacts own the qdot blocks in list order. Throws DimensionMismatch.
ModeConstraints assemble_mode_constraints(const ContactMode& mode, std::span<const Contact> contacts,
                                          const GraspMap& G, int n_mnp);

enum class EnumerationBackend {
  /// Sign vectors of the central hyperplane arrangement of contact velocity functionals.
  Arrangement,
  /// All 4^n label vectors filtered by LP feasibility of their velocity clauses.
  BruteForce,
};

/**
 * Kinematically feasible modes of the given environment contacts: the label
 * vectors whose velocity clauses admit a twist (strict inequalities with a
 * positive margin). Penetrating vectors are never produced. Sorted.
 */
std::vector<ContactMode> enumerate_env_modes(std::span<const Contact> contacts,
                                             EnumerationBackend backend = EnumerationBackend::Arrangement);

/// Velocity clauses of `mode` restricted to the twist (3 variables), for feasibility tests.
ModeConstraints velocity_clauses(const ContactMode& mode, std::span<const Contact> contacts);

}  // namespace modeplan
