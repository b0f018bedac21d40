#pragma once

#include "modeplan/solver.hpp"

#include <Eigen/Dense>

#include <limits>
#include <random>

namespace modeplan::testing {

/// Minimum over all active sets of the KKT stationary points that are primal
/// and dual feasible. Exponential in the number of inequalities; H must be positive definite.
inline double active_set_oracle(const QuadraticProgram& p, VectorXd* argmin = nullptr) {
  const Eigen::Index n = p.num_vars(), me = p.A_eq.rows(), mi = p.A_ineq.rows();
  double best = std::numeric_limits<double>::infinity();
  for (long mask = 0; mask < (1L << mi); ++mask) {
    std::vector<Eigen::Index> act;
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (mask & (1L << i)) act.push_back(i);
    }
    const Eigen::Index m = me + static_cast<Eigen::Index>(act.size());
    if (m > n) continue;
    MatrixXd A(m, n);
    VectorXd b(m);
    if (me > 0) {
      A.topRows(me) = p.A_eq;
      b.head(me) = p.b_eq;
    }
    for (std::size_t k = 0; k < act.size(); ++k) {
      A.row(me + static_cast<Eigen::Index>(k)) = p.A_ineq.row(act[k]);
      b[me + static_cast<Eigen::Index>(k)] = p.b_ineq[act[k]];
    }
    MatrixXd K = MatrixXd::Zero(n + m, n + m);
    K.topLeftCorner(n, n) = p.H;
    K.topRightCorner(n, m) = -A.transpose();
    K.bottomLeftCorner(m, n) = A;
    VectorXd rhs(n + m);
    rhs.head(n) = -p.g;
    rhs.tail(m) = b;
    const auto lu = K.fullPivLu();
    if (lu.rank() < n + m) continue;
    const VectorXd sol = lu.solve(rhs);
    const VectorXd x = sol.head(n), mult = sol.tail(m);
    bool ok = true;
    for (std::size_t k = 0; k < act.size(); ++k) ok = ok && mult[me + static_cast<Eigen::Index>(k)] >= -1e-9;
    if (mi > 0) ok = ok && ((p.A_ineq * x - p.b_ineq).array() >= -1e-9).all();
    if (!ok) continue;
    const double obj = 0.5 * x.dot(p.H * x) + p.g.dot(x);
    if (obj < best) {
      best = obj;
      if (argmin) *argmin = x;
    }
  }
  return best;
}

/// Random strictly convex QP with a known feasible point.
inline QuadraticProgram random_qp(std::mt19937_64& rng, int n = 6) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> meq(0, 2), mineq(0, 6);
  std::uniform_real_distribution<double> slack(0.0, 1.0);
  QuadraticProgram p;
  const MatrixXd B = MatrixXd::NullaryExpr(n, n, [&] { return g(rng); });
  p.H = B * B.transpose() + 0.1 * MatrixXd::Identity(n, n);
  p.g = VectorXd::NullaryExpr(n, [&] { return 3.0 * g(rng); });
  const VectorXd x0 = VectorXd::NullaryExpr(n, [&] { return g(rng); });
  const int me = meq(rng), mi = mineq(rng);
  p.A_eq = MatrixXd::NullaryExpr(me, n, [&] { return g(rng); });
  p.b_eq = p.A_eq * x0;
  p.A_ineq = MatrixXd::NullaryExpr(mi, n, [&] { return g(rng); });
  p.b_ineq = p.A_ineq * x0 - VectorXd::NullaryExpr(mi, [&] { return slack(rng); });
  return p;
}

}  // namespace modeplan::testing
