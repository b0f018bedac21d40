#include "modeplan/mechanics.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace modeplan {

GraspMap grasp_map(std::span<const Contact> contacts) {
  GraspMap gm;
  gm.G.resize(3, 2 * static_cast<Eigen::Index>(contacts.size()));
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    gm.G.col(2 * idx) = point_wrench(contacts[i].point, contacts[i].normal);
    gm.G.col(2 * idx + 1) = point_wrench(contacts[i].point, contacts[i].tangent);
  }
  return gm;
}

ExternalWrench gravity_wrench(const Pose& q, const Vec2& com, double weight, const Vec2& down) {
  const Vec2 f = q.rotate_to_body(down.normalized() * weight);
  ExternalWrench w;
  w.constant = point_wrench(com, f);
  return w;
}

ExternalWrench support_friction_wrench(const Vec2& com, double friction_force, double radius_of_gyration_sq) {
  const double cx = com.x(), cy = com.y();
  Eigen::Matrix3d K;
  K << 1.0, 0.0, -cy,
       0.0, 1.0, cx,
       -cy, cx, radius_of_gyration_sq + cx * cx + cy * cy;
  ExternalWrench w;
  w.velocity_gain = -friction_force * K;
  return w;
}

Vec3 contact_wrench(std::span<const Contact> contacts, const VectorXd& lambda) {
  Vec3 w = Vec3::Zero();
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(3 * i);
    const double ln = lambda[k];
    const double lt = lambda[k + 1] - lambda[k + 2];
    w += ln * point_wrench(contacts[i].point, contacts[i].normal) +
         lt * point_wrench(contacts[i].point, contacts[i].tangent);
  }
  return w;
}

double equilibrium_residual(std::span<const Contact> contacts, const QuasistaticSolution& sol,
                            const ExternalWrench& f_ext) {
  return (contact_wrench(contacts, sol.lambda) + f_ext.at(sol.v_o)).norm();
}

namespace {

int count_manipulators(std::span<const Contact> contacts) {
  return static_cast<int>(std::count_if(contacts.begin(), contacts.end(), [](const Contact& c) {
    return c.source == ContactSource::Manipulator;
  }));
}

// Rows [K | 0 | G S] of the equilibrium constraint over the stacked variable.
MatrixXd equilibrium_rows(std::span<const Contact> contacts, const GraspMap& gm, const ModeConstraints& mc,
                          const Eigen::Matrix3d& velocity_gain) {
  MatrixXd E = MatrixXd::Zero(3, mc.num_vars());
  E.leftCols<3>() = velocity_gain;
  for (int i = 0; i < static_cast<int>(contacts.size()); ++i) {
    const int lo = mc.lambda_offset(i);
    E.col(lo) = gm.normal_column(i);
    E.col(lo + 1) = gm.tangent_column(i);
    E.col(lo + 2) = -gm.tangent_column(i);
  }
  return E;
}

MatrixXd vstack(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() + b.rows(), std::max(a.cols(), b.cols()));
  if (a.rows() > 0) out.topRows(a.rows()) = a;
  if (b.rows() > 0) out.bottomRows(b.rows()) = b;
  return out;
}

VectorXd vstack(const VectorXd& a, const VectorXd& b) {
  VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

// Per-finger normal force bounds -lambda_n >= -f_max.
void append_finger_limits(std::span<const Contact> contacts, const ModeConstraints& mc, double f_max,
                          MatrixXd& A, VectorXd& b) {
  if (!std::isfinite(f_max)) return;
  std::vector<int> rows;
  for (int i = 0; i < static_cast<int>(contacts.size()); ++i) {
    if (contacts[static_cast<std::size_t>(i)].source == ContactSource::Manipulator) rows.push_back(i);
  }
  if (rows.empty()) return;
  MatrixXd L = MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), A.cols());
  VectorXd lb = VectorXd::Constant(static_cast<Eigen::Index>(rows.size()), -f_max);
  for (std::size_t k = 0; k < rows.size(); ++k) L(static_cast<Eigen::Index>(k), mc.lambda_offset(rows[k])) = -1.0;
  A = vstack(A, L);
  b = vstack(b, lb);
}

}  // namespace

std::optional<QuasistaticSolution> closest_feasible_velocity(std::span<const Contact> contacts,
                                                             const ContactMode& mode, const Twist& v_d,
                                                             const ExternalWrench& f_ext,
                                                             const MechanicsOptions& opts) {
  const int n_mnp = count_manipulators(contacts);
  const GraspMap gm = grasp_map(contacts);
  const ModeConstraints mc = assemble_mode_constraints(mode, contacts, gm, n_mnp);
  const int nv = mc.num_vars();

  Twist vd = v_d;
  const double vn = v_d.weighted_norm(opts.rotation_weight);
  if (vn > 0.0) vd = v_d.scaled(1.0 / vn);

  const double wr2 = opts.rotation_weight * opts.rotation_weight;
  const double eps = opts.force_regularization / (opts.force_scale * opts.force_scale);
  QuadraticProgram qp;
  qp.H = MatrixXd::Zero(nv, nv);
  qp.H(0, 0) = 2.0;
  qp.H(1, 1) = 2.0;
  qp.H(2, 2) = 2.0 * wr2;
  for (int i = 0; i < 3 * mc.num_contacts; ++i) {
    const int k = mc.lambda_offset(0) + i;
    qp.H(k, k) = 2.0 * eps;
  }
  qp.g = VectorXd::Zero(nv);
  qp.g[0] = -2.0 * vd.vx;
  qp.g[1] = -2.0 * vd.vy;
  qp.g[2] = -2.0 * wr2 * vd.omega;

  const MatrixXd E = equilibrium_rows(contacts, gm, mc, f_ext.velocity_gain);
  qp.A_eq = vstack(mc.A_eq, E);
  qp.b_eq = vstack(mc.b_eq, VectorXd(-f_ext.constant));
  qp.A_ineq = mc.A_ineq;
  qp.b_ineq = mc.b_ineq;
  append_finger_limits(contacts, mc, opts.finger_max_force, qp.A_ineq, qp.b_ineq);

  const SolveResult r = solve_qp(qp, opts.tol_feas);
  if (r.status != SolveStatus::Optimal) {
    if (r.status == SolveStatus::NumericalFailure) spdlog::debug("closest_feasible_velocity: QP numerical failure");
    return std::nullopt;
  }

  QuasistaticSolution sol;
  sol.v_o = Twist(r.x.head<3>());
  sol.q_dot = r.x.segment(3, 2 * n_mnp);
  sol.lambda = r.x.tail(3 * mc.num_contacts);

  const Vec3 f = f_ext.at(sol.v_o);
  const double res = (contact_wrench(contacts, sol.lambda) + f).norm();
  if (res > 1e-6 * (f.norm() + 1.0)) {
    spdlog::debug("closest_feasible_velocity: equilibrium residual {} rejected", res);
    return std::nullopt;
  }
  if (mc.A_eq.rows() > 0 && (mc.A_eq * r.x - mc.b_eq).cwiseAbs().maxCoeff() > 1e-6) return std::nullopt;
  if (mc.A_ineq.rows() > 0 && (mc.A_ineq * r.x - mc.b_ineq).minCoeff() < -1e-6) return std::nullopt;
  return sol;
}

bool static_equilibrium_possible(std::span<const Contact> contacts, const Vec3& f_ext, const MechanicsOptions& opts) {
  const auto n = static_cast<Eigen::Index>(contacts.size());
  if (n == 0) return f_ext.norm() <= 1e-9;
  const Eigen::Index nv = 3 * n;
  MatrixXd Aeq = MatrixXd::Zero(3, nv);
  MatrixXd Ain = MatrixXd::Zero(5 * n, nv);
  VectorXd bin = VectorXd::Zero(5 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Contact& c = contacts[static_cast<std::size_t>(i)];
    const Vec3 wn = point_wrench(c.point, c.normal), wt = point_wrench(c.point, c.tangent);
    Aeq.col(3 * i) = wn;
    Aeq.col(3 * i + 1) = wt;
    Aeq.col(3 * i + 2) = -wt;
    for (int k = 0; k < 3; ++k) Ain(5 * i + k, 3 * i + k) = 1.0;
    Ain(5 * i + 3, 3 * i) = c.mu;
    Ain(5 * i + 3, 3 * i + 1) = -1.0;
    Ain(5 * i + 4, 3 * i) = c.mu;
    Ain(5 * i + 4, 3 * i + 2) = -1.0;
  }
  if (std::isfinite(opts.finger_max_force)) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (contacts[static_cast<std::size_t>(i)].source != ContactSource::Manipulator) continue;
      MatrixXd row = MatrixXd::Zero(1, nv);
      row(0, 3 * i) = -1.0;
      Ain = vstack(Ain, row);
      bin = vstack(bin, VectorXd::Constant(1, -opts.finger_max_force));
    }
  }
  try {
    return solve_lp_feasibility(Aeq, -f_ext, Ain, bin, {}, 1.0) == Feasibility::Feasible;
  } catch (const NumericalError&) {
    return false;
  }
}

std::optional<MarginStrategy> parse_margin_strategy(std::string_view s) {
  if (s == "none") return MarginStrategy::None;
  if (s == "fan-lp") return MarginStrategy::FanLp;
  return std::nullopt;
}

std::string_view margin_strategy_name(MarginStrategy s) {
  return s == MarginStrategy::None ? "none" : "fan-lp";
}

double margin_along(std::span<const Contact> contacts, const ContactMode& mode, const Vec3& f_ext,
                    const Vec3& disturbance, const MechanicsOptions& opts) {
  const int n_mnp = count_manipulators(contacts);
  const GraspMap gm = grasp_map(contacts);
  const ModeConstraints mc = assemble_mode_constraints(mode, contacts, gm, n_mnp);
  const int lam0 = mc.lambda_offset(0);
  const int nl = 3 * mc.num_contacts;
  // Variables: [lambda (nl), rho].
  auto force_only = [&](const MatrixXd& A) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      if (A.row(i).head(lam0).isZero(0.0)) keep.push_back(i);
    }
    return keep;
  };
  LinearProgram lp;
  lp.c = VectorXd::Zero(nl + 1);
  lp.c[nl] = 1.0;

  const auto eq_rows = force_only(mc.A_eq);
  lp.A_eq = MatrixXd::Zero(static_cast<Eigen::Index>(eq_rows.size()) + 3, nl + 1);
  lp.b_eq = VectorXd::Zero(lp.A_eq.rows());
  for (std::size_t k = 0; k < eq_rows.size(); ++k) {
    lp.A_eq.row(static_cast<Eigen::Index>(k)).head(nl) = mc.A_eq.row(eq_rows[k]).segment(lam0, nl);
    lp.b_eq[static_cast<Eigen::Index>(k)] = mc.b_eq[eq_rows[k]];
  }
  const auto e0 = static_cast<Eigen::Index>(eq_rows.size());
  for (int i = 0; i < mc.num_contacts; ++i) {
    lp.A_eq.block<3, 1>(e0, 3 * i) = gm.normal_column(i);
    lp.A_eq.block<3, 1>(e0, 3 * i + 1) = gm.tangent_column(i);
    lp.A_eq.block<3, 1>(e0, 3 * i + 2) = -gm.tangent_column(i);
  }
  lp.A_eq.block<3, 1>(e0, nl) = disturbance;
  lp.b_eq.tail<3>() = -f_ext;

  const auto in_rows = force_only(mc.A_ineq);
  const double cap = 10.0 * (f_ext.norm() + 1.0);
  const Eigen::Index extra = 2;
  lp.A_ineq = MatrixXd::Zero(static_cast<Eigen::Index>(in_rows.size()) + extra, nl + 1);
  lp.b_ineq = VectorXd::Zero(lp.A_ineq.rows());
  for (std::size_t k = 0; k < in_rows.size(); ++k) {
    lp.A_ineq.row(static_cast<Eigen::Index>(k)).head(nl) = mc.A_ineq.row(in_rows[k]).segment(lam0, nl);
    lp.b_ineq[static_cast<Eigen::Index>(k)] = mc.b_ineq[in_rows[k]];
  }
  const auto i0 = static_cast<Eigen::Index>(in_rows.size());
  for (int i = 0; i < mc.num_contacts; ++i) lp.A_ineq(i0, 3 * i) = -1.0;  // sum lambda_n <= cap
  lp.b_ineq[i0] = -cap;
  lp.A_ineq(i0 + 1, nl) = 1.0;  // rho >= 0
  if (std::isfinite(opts.finger_max_force)) {
    for (int i = 0; i < mc.num_contacts; ++i) {
      if (contacts[static_cast<std::size_t>(i)].source != ContactSource::Manipulator) continue;
      MatrixXd row = MatrixXd::Zero(1, nl + 1);
      row(0, 3 * i) = -1.0;
      lp.A_ineq = vstack(lp.A_ineq, row);
      lp.b_ineq = vstack(lp.b_ineq, VectorXd::Constant(1, -opts.finger_max_force));
    }
  }
  const SolveResult r = solve_lp(lp);
  if (r.status != SolveStatus::Optimal) return 0.0;
  return std::max(0.0, r.x[nl]);
}

double stability_margin(std::span<const Contact> contacts, const ContactMode& mode,
                        const QuasistaticSolution& solution, const ExternalWrench& f_ext,
                        const MechanicsOptions& opts, const MarginOptions& margin) {
  if (margin.strategy == MarginStrategy::None) return std::numeric_limits<double>::infinity();
  if (contacts.empty()) return 0.0;
  const Vec3 f = f_ext.at(solution.v_o);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < margin.directions; ++k) {
    const double a = 2.0 * kPi * k / margin.directions;
    const Vec3 d = point_wrench(margin.disturbance_point, {std::cos(a), std::sin(a)});
    best = std::min(best, margin_along(contacts, mode, f, d, opts));
    if (best <= 0.0) break;
  }
  return best;
}

}  // namespace modeplan
