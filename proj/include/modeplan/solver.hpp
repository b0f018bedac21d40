#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>

namespace modeplan {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus s);

/**
 * minimize 0.5 x'Hx + g'x  subject to  A_eq x = b_eq,  A_ineq x >= b_ineq.
 * Empty constraint blocks may be left default-constructed (0 rows).
 */
struct QuadraticProgram {
  MatrixXd H;
  VectorXd g;
  MatrixXd A_eq;
  VectorXd b_eq;
  MatrixXd A_ineq;
  VectorXd b_ineq;

  Eigen::Index num_vars() const { return H.rows(); }
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  VectorXd x;
  double objective = 0.0;
  int iterations = 0;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

struct QpOptions {
  double tol_feas = 1e-9;
  /// Added to the diagonal of H before factorization.
  double regularization = 1e-9;
  int max_iterations = 0;  // 0: automatic
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense convex QP. Equalities are eliminated through a null-space basis and
/// the remaining inequality problem is solved with the Goldfarb-Idnani dual
/// active-set method. Deterministic; holds no shared state.
SolveResult solve_qp(const QuadraticProgram& p, const QpOptions& opts = {});
SolveResult solve_qp(const QuadraticProgram& p, double tol_feas);

/// maximize c'x  subject to  A_eq x = b_eq,  A_ineq x >= b_ineq,  x free.
struct LinearProgram {
  VectorXd c;
  MatrixXd A_eq;
  VectorXd b_eq;
  MatrixXd A_ineq;
  VectorXd b_ineq;
};

/// Two-phase dense simplex (Dantzig pricing with a Bland fallback).
SolveResult solve_lp(const LinearProgram& p, double tol = 1e-9);

enum class Feasibility { Feasible, Infeasible };

/**
 * Decides whether some x satisfies A_eq x = b_eq, A_ineq x >= b_ineq and, for
 * every index i in strict_rows, row_i x >= b_i + sigma. Solved as a phase-one
 * LP maximizing the smallest strict-row margin (capped at 1).
 * Throws NumericalError on solver breakdown and std::invalid_argument if sigma <= 0.
 */
Feasibility solve_lp_feasibility(const MatrixXd& A_eq, const VectorXd& b_eq, const MatrixXd& A_ineq,
                                 const VectorXd& b_ineq, std::span<const int> strict_rows, double sigma);

/// Largest strict-row margin found by the phase-one LP (capped at 1), or -inf if infeasible.
double max_strict_margin(const MatrixXd& A_eq, const VectorXd& b_eq, const MatrixXd& A_ineq,
                         const VectorXd& b_ineq, std::span<const int> strict_rows);

}  // namespace modeplan
