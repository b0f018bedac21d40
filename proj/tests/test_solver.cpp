#include "modeplan/solver.hpp"
#include "qp_oracle.hpp"

#include <gtest/gtest.h>

using namespace modeplan;

TEST(SolveQp, ProjectionOntoHyperplane) {
  QuadraticProgram p;
  p.H = 2.0 * MatrixXd::Identity(2, 2);
  p.g = VectorXd::Zero(2);
  p.A_eq = MatrixXd{{1.0, 0.0}};
  p.b_eq = VectorXd::Constant(1, 1.0);
  const SolveResult r = solve_qp(p);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.x[0], 1.0, 1e-9);
  EXPECT_NEAR(r.x[1], 0.0, 1e-9);
  EXPECT_NEAR(r.objective, 1.0, 1e-8);
}

TEST(SolveQp, ActiveBound) {
  // (x - 2)^2 = x^2 - 4x + 4 with x >= 3.
  QuadraticProgram p;
  p.H = MatrixXd::Constant(1, 1, 2.0);
  p.g = VectorXd::Constant(1, -4.0);
  p.A_ineq = MatrixXd::Constant(1, 1, 1.0);
  p.b_ineq = VectorXd::Constant(1, 3.0);
  const SolveResult r = solve_qp(p);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.x[0], 3.0, 1e-9);
}

TEST(SolveQp, InfeasibleReported) {
  QuadraticProgram p;
  p.H = MatrixXd::Identity(1, 1);
  p.g = VectorXd::Zero(1);
  p.A_ineq = MatrixXd{{1.0}, {-1.0}};
  p.b_ineq = VectorXd{{1.0, 0.0}};
  EXPECT_EQ(solve_qp(p).status, SolveStatus::Infeasible);
}

TEST(SolveQp, DimensionMismatchThrows) {
  QuadraticProgram p;
  p.H = MatrixXd::Identity(2, 2);
  p.g = VectorXd::Zero(3);
  EXPECT_THROW(solve_qp(p), DimensionMismatch);
}

TEST(SolveQp, MatchesActiveSetOracle) {
  std::mt19937_64 rng(2024);
  int compared = 0;
  for (int i = 0; i < 500; ++i) {
    const QuadraticProgram p = modeplan::testing::random_qp(rng);
    const double oracle = modeplan::testing::active_set_oracle(p);
    const SolveResult r = solve_qp(p);
    ASSERT_TRUE(r.optimal()) << "qp " << i;
    ASSERT_NEAR(r.objective, oracle, 1e-6 * (1.0 + std::abs(oracle))) << "qp " << i;
    if (p.A_ineq.rows() > 0) EXPECT_GE((p.A_ineq * r.x - p.b_ineq).minCoeff(), -1e-7);
    if (p.A_eq.rows() > 0) EXPECT_LE((p.A_eq * r.x - p.b_eq).cwiseAbs().maxCoeff(), 1e-7);
    ++compared;
  }
  EXPECT_EQ(compared, 500);
}

TEST(SolveQp, ScalingObjectiveKeepsArgmin) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 50; ++i) {
    QuadraticProgram p = modeplan::testing::random_qp(rng);
    const SolveResult a = solve_qp(p);
    p.H *= 7.5;
    p.g *= 7.5;
    const SolveResult b = solve_qp(p);
    ASSERT_TRUE(a.optimal() && b.optimal());
    EXPECT_LE((a.x - b.x).cwiseAbs().maxCoeff(), 1e-6) << i;
  }
}

TEST(SolveQp, Deterministic) {
  std::mt19937_64 rng(5);
  const QuadraticProgram p = modeplan::testing::random_qp(rng);
  const SolveResult a = solve_qp(p), b = solve_qp(p);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.objective, b.objective);
}

TEST(SolveLp, SmallProgram) {
  // max x + y, x + 2y <= 4, 3x + y <= 6, x, y >= 0 -> (1.6, 1.2).
  LinearProgram lp;
  lp.c = VectorXd{{1.0, 1.0}};
  lp.A_ineq = MatrixXd{{-1.0, -2.0}, {-3.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
  lp.b_ineq = VectorXd{{-4.0, -6.0, 0.0, 0.0}};
  const SolveResult r = solve_lp(lp);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.x[0], 1.6, 1e-9);
  EXPECT_NEAR(r.x[1], 1.2, 1e-9);
  EXPECT_NEAR(r.objective, 2.8, 1e-9);
}

TEST(SolveLp, UnboundedAndInfeasible) {
  LinearProgram lp;
  lp.c = VectorXd{{1.0}};
  lp.A_ineq = MatrixXd{{1.0}};
  lp.b_ineq = VectorXd{{0.0}};
  EXPECT_EQ(solve_lp(lp).status, SolveStatus::Unbounded);
  lp.A_eq = MatrixXd{{1.0}};
  lp.b_eq = VectorXd{{-1.0}};
  EXPECT_EQ(solve_lp(lp).status, SolveStatus::Infeasible);
}

TEST(LpFeasibility, EmptySystemIsFeasible) {
  EXPECT_EQ(solve_lp_feasibility(MatrixXd(0, 3), VectorXd(0), MatrixXd(0, 3), VectorXd(0), {}, 1e-6),
            Feasibility::Feasible);
}

TEST(LpFeasibility, Contradiction) {
  // x = 1 and -x >= 0.
  EXPECT_EQ(solve_lp_feasibility(MatrixXd{{1.0}}, VectorXd{{1.0}}, MatrixXd{{-1.0}}, VectorXd{{0.0}}, {}, 1e-6),
            Feasibility::Infeasible);
}

TEST(LpFeasibility, SeparatingContactVelocity) {
  // Twist (vx, vy, w); contact at the origin with normal (0, 1): v_n = vy > 0 strictly.
  const MatrixXd A_in{{0.0, 1.0, 0.0}};
  const std::vector<int> strict{0};
  EXPECT_EQ(solve_lp_feasibility(MatrixXd(0, 3), VectorXd(0), A_in, VectorXd::Zero(1), strict, 1e-6),
            Feasibility::Feasible);
  // Adding vy = 0 removes the strict margin.
  EXPECT_EQ(solve_lp_feasibility(MatrixXd{{0.0, 1.0, 0.0}}, VectorXd::Zero(1), A_in, VectorXd::Zero(1), strict, 1e-6),
            Feasibility::Infeasible);
}

TEST(LpFeasibility, RejectsNonPositiveSigma) {
  EXPECT_THROW(solve_lp_feasibility(MatrixXd(0, 1), VectorXd(0), MatrixXd(0, 1), VectorXd(0), {}, 0.0),
               std::invalid_argument);
}
