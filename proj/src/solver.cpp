#include "modeplan/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace modeplan {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_block(const MatrixXd& A, const VectorXd& b, Eigen::Index n, const char* name) {
  if (A.rows() == 0 && b.size() == 0) return;
  if (A.rows() != b.size() || A.cols() != n) {
    throw DimensionMismatch(std::string("inconsistent dimensions in ") + name);
  }
}

// Scales each row to unit Euclidean norm. Rows with (near) zero norm are
// reported through `zero_rows` and left untouched.
void normalize_rows(MatrixXd& A, VectorXd& b, std::vector<Eigen::Index>& zero_rows) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double nrm = A.row(i).norm();
    if (nrm < 1e-14) {
      zero_rows.push_back(i);
      continue;
    }
    A.row(i) /= nrm;
    b[i] /= nrm;
  }
}

MatrixXd drop_rows(const MatrixXd& A, const std::vector<Eigen::Index>& rows) {
  if (rows.empty()) return A;
  MatrixXd out(A.rows() - static_cast<Eigen::Index>(rows.size()), A.cols());
  Eigen::Index r = 0;
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (k < rows.size() && rows[k] == i) {
      ++k;
      continue;
    }
    out.row(r++) = A.row(i);
  }
  return out;
}

VectorXd drop_entries(const VectorXd& b, const std::vector<Eigen::Index>& rows) {
  if (rows.empty()) return b;
  VectorXd out(b.size() - static_cast<Eigen::Index>(rows.size()));
  Eigen::Index r = 0;
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    if (k < rows.size() && rows[k] == i) {
      ++k;
      continue;
    }
    out[r++] = b[i];
  }
  return out;
}

/// Goldfarb-Idnani dual active-set method for
///   min 0.5 y'Hy + g'y  s.t.  C y >= d
/// with H positive definite. Rows of C are unit norm.
class DualActiveSet {
 public:
  DualActiveSet(const MatrixXd& H, const VectorXd& g, const MatrixXd& C, const VectorXd& d, double tol,
                int max_iter)
      : H_(H), g_(g), C_(C), d_(d), tol_(tol), max_iter_(max_iter), n_(H.rows()) {}

  SolveStatus solve(VectorXd& y, int& iterations) {
    Eigen::LLT<MatrixXd> llt(H_);
    if (llt.info() != Eigen::Success) return SolveStatus::NumericalFailure;
    // J = L^{-T}
    const MatrixXd L = llt.matrixL();
    J_ = L.transpose().triangularView<Eigen::Upper>().solve(MatrixXd::Identity(n_, n_));
    R_ = MatrixXd::Zero(n_, n_);
    y = -llt.solve(g_);
    active_.clear();
    u_.clear();
    q_ = 0;
    const Eigen::Index m = C_.rows();
    r_norm_ = 1.0;

    iterations = 0;
    while (true) {
      if (++iterations > max_iter_) return SolveStatus::NumericalFailure;
      // Step 1: pick the most violated constraint.
      Eigen::Index p = -1;
      double worst = -tol_;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (std::find(active_.begin(), active_.end(), i) != active_.end()) continue;
        const double s = C_.row(i).dot(y) - d_[i];
        if (s < worst) {
          worst = s;
          p = i;
        }
      }
      if (p < 0) return SolveStatus::Optimal;

      const VectorXd np = C_.row(p).transpose();
      std::vector<double> u_plus = u_;
      u_plus.push_back(0.0);
      double sp = np.dot(y) - d_[p];

      // Step 2: iterate until p becomes active.
      while (true) {
        if (++iterations > max_iter_) return SolveStatus::NumericalFailure;
        const VectorXd dv = J_.transpose() * np;
        VectorXd z = VectorXd::Zero(n_);
        if (q_ < n_) z = J_.rightCols(n_ - q_) * dv.tail(n_ - q_);
        VectorXd r(q_);
        if (q_ > 0) {
          r = R_.topLeftCorner(q_, q_).triangularView<Eigen::Upper>().solve(dv.head(q_));
        }

        double t1 = kInf;
        Eigen::Index l = -1;
        for (Eigen::Index j = 0; j < q_; ++j) {
          if (r[j] > 1e-14) {
            const double ratio = u_plus[j] / r[j];
            if (ratio < t1) {
              t1 = ratio;
              l = j;
            }
          }
        }
        double t2 = kInf;
        const double znp = z.dot(np);
        if (z.norm() > 1e-12 && znp > 1e-14) t2 = -sp / znp;

        const double t = std::min(t1, t2);
        if (!std::isfinite(t)) return SolveStatus::Infeasible;

        if (!std::isfinite(t2)) {
          // Dual step only.
          for (Eigen::Index j = 0; j < q_; ++j) u_plus[j] -= t * r[j];
          u_plus[q_] += t;
          drop(l, u_plus);
          continue;
        }

        y += t * z;
        for (Eigen::Index j = 0; j < q_; ++j) u_plus[j] -= t * r[j];
        u_plus[q_] += t;

        if (t2 <= t1) {
          VectorXd dd = dv;
          if (!add(dd)) return SolveStatus::NumericalFailure;
          active_.push_back(p);
          u_plus.resize(q_);
          u_ = u_plus;
          break;
        }
        drop(l, u_plus);
        sp = np.dot(y) - d_[p];
      }
    }
  }

 private:
  bool add(VectorXd& d) {
    for (Eigen::Index j = n_ - 1; j >= q_ + 1; --j) {
      double cc = d[j - 1], ss = d[j];
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      d[j] = 0.0;
      ss /= h;
      cc /= h;
      if (cc < 0.0) {
        cc = -cc;
        ss = -ss;
        d[j - 1] = -h;
      } else {
        d[j - 1] = h;
      }
      const double xny = ss / (1.0 + cc);
      for (Eigen::Index k = 0; k < n_; ++k) {
        const double a = J_(k, j - 1), b = J_(k, j);
        J_(k, j - 1) = a * cc + b * ss;
        J_(k, j) = xny * (a + J_(k, j - 1)) - b;
      }
    }
    ++q_;
    for (Eigen::Index i = 0; i < q_; ++i) R_(i, q_ - 1) = d[i];
    if (std::abs(d[q_ - 1]) <= 1e-13 * r_norm_) return false;
    r_norm_ = std::max(r_norm_, std::abs(d[q_ - 1]));
    return true;
  }

  // Removes the l-th active constraint and restores R to triangular form.
  void drop(Eigen::Index l, std::vector<double>& u_plus) {
    active_.erase(active_.begin() + l);
    u_plus.erase(u_plus.begin() + l);
    for (Eigen::Index j = l; j < q_ - 1; ++j) R_.col(j) = R_.col(j + 1);
    R_.col(q_ - 1).setZero();
    --q_;
    for (Eigen::Index j = l; j < q_; ++j) {
      double cc = R_(j, j), ss = R_(j + 1, j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      cc /= h;
      ss /= h;
      R_(j + 1, j) = 0.0;
      if (cc < 0.0) {
        R_(j, j) = -h;
        cc = -cc;
        ss = -ss;
      } else {
        R_(j, j) = h;
      }
      const double xny = ss / (1.0 + cc);
      for (Eigen::Index k = j + 1; k < q_; ++k) {
        const double a = R_(j, k), b = R_(j + 1, k);
        R_(j, k) = a * cc + b * ss;
        R_(j + 1, k) = xny * (a + R_(j, k)) - b;
      }
      for (Eigen::Index k = 0; k < n_; ++k) {
        const double a = J_(k, j), b = J_(k, j + 1);
        J_(k, j) = a * cc + b * ss;
        J_(k, j + 1) = xny * (J_(k, j) + a) - b;
      }
    }
  }

  const MatrixXd& H_;
  const VectorXd& g_;
  const MatrixXd& C_;
  const VectorXd& d_;
  double tol_;
  int max_iter_;
  Eigen::Index n_;
  MatrixXd J_;
  MatrixXd R_;
  std::vector<Eigen::Index> active_;
  std::vector<double> u_;
  Eigen::Index q_ = 0;
  double r_norm_ = 1.0;
};

}  // namespace

SolveResult solve_qp(const QuadraticProgram& p, double tol_feas) {
  QpOptions o;
  o.tol_feas = tol_feas;
  return solve_qp(p, o);
}

SolveResult solve_qp(const QuadraticProgram& p, const QpOptions& opts) {
  const Eigen::Index n = p.H.rows();
  if (p.H.cols() != n || p.g.size() != n) throw DimensionMismatch("H and g dimensions disagree");
  check_block(p.A_eq, p.b_eq, n, "equality constraints");
  check_block(p.A_ineq, p.b_ineq, n, "inequality constraints");

  SolveResult res;
  const double tol = opts.tol_feas;
  MatrixXd H = 0.5 * (p.H + p.H.transpose());
  H.diagonal().array() += opts.regularization;

  // Equality elimination: x = x0 + Z y.
  VectorXd x0 = VectorXd::Zero(n);
  MatrixXd Z = MatrixXd::Identity(n, n);
  if (p.A_eq.rows() > 0) {
    MatrixXd Ae = p.A_eq;
    VectorXd be = p.b_eq;
    std::vector<Eigen::Index> zero_rows;
    normalize_rows(Ae, be, zero_rows);
    for (auto i : zero_rows) {
      if (std::abs(be[i]) > tol) {
        res.status = SolveStatus::Infeasible;
        return res;
      }
    }
    Ae = drop_rows(Ae, zero_rows);
    be = drop_entries(be, zero_rows);
    if (Ae.rows() > 0) {
      Eigen::ColPivHouseholderQR<MatrixXd> qr(Ae.transpose());
      qr.setThreshold(1e-11);
      const Eigen::Index r = qr.rank();
      const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, n);
      // Ae^T P = Q R  =>  Ae = P R^T Q^T; with x = Q1 w: P^T be = R1^T w.
      const VectorXd pb = qr.colsPermutation().transpose() * be;
      VectorXd w = VectorXd::Zero(r);
      if (r > 0) {
        const MatrixXd R11 = qr.matrixR().topLeftCorner(r, r).template triangularView<Eigen::Upper>();
        w = R11.transpose().triangularView<Eigen::Lower>().solve(pb.head(r));
      }
      x0 = Q.leftCols(r) * w;
      const double eq_res = (Ae * x0 - be).cwiseAbs().maxCoeff();
      if (eq_res > tol) {
        res.status = SolveStatus::Infeasible;
        return res;
      }
      Z = Q.rightCols(n - r);
    }
  }

  const Eigen::Index k = Z.cols();
  MatrixXd C;
  VectorXd dvec;
  if (p.A_ineq.rows() > 0) {
    MatrixXd Ai = p.A_ineq;
    VectorXd bi = p.b_ineq;
    std::vector<Eigen::Index> zero_rows;
    normalize_rows(Ai, bi, zero_rows);
    for (auto i : zero_rows) {
      if (bi[i] > tol) {
        res.status = SolveStatus::Infeasible;
        return res;
      }
    }
    Ai = drop_rows(Ai, zero_rows);
    bi = drop_entries(bi, zero_rows);
    MatrixXd Cr = Ai * Z;
    VectorXd dr = bi - Ai * x0;
    // Rows independent of the free variables must hold at x0.
    std::vector<Eigen::Index> fixed_rows;
    for (Eigen::Index i = 0; i < Cr.rows(); ++i) {
      const double nrm = Cr.row(i).norm();
      if (nrm < 1e-12) {
        if (dr[i] > tol) {
          res.status = SolveStatus::Infeasible;
          return res;
        }
        fixed_rows.push_back(i);
      } else {
        Cr.row(i) /= nrm;
        dr[i] /= nrm;
      }
    }
    C = drop_rows(Cr, fixed_rows);
    dvec = drop_entries(dr, fixed_rows);
  } else {
    C = MatrixXd(0, k);
    dvec = VectorXd(0);
  }

  VectorXd y = VectorXd::Zero(k);
  if (k > 0) {
    const MatrixXd Hr = Z.transpose() * H * Z;
    const VectorXd gr = Z.transpose() * (H * x0 + p.g);
    const int max_iter = opts.max_iterations > 0 ? opts.max_iterations
                                                 : static_cast<int>(50 * (k + C.rows()) + 100);
    DualActiveSet das(Hr, gr, C, dvec, tol * 0.5, max_iter);
    res.status = das.solve(y, res.iterations);
    if (res.status != SolveStatus::Optimal) return res;
  } else {
    if (C.rows() > 0 && (C * y - dvec).minCoeff() < -tol) {
      res.status = SolveStatus::Infeasible;
      return res;
    }
    res.status = SolveStatus::Optimal;
  }

  res.x = x0 + Z * y;
  // Postcondition check in the original constraint scaling.
  if (p.A_eq.rows() > 0) {
    const double scale = std::max(1.0, p.b_eq.cwiseAbs().maxCoeff());
    const VectorXd rr = p.A_eq * res.x - p.b_eq;
    for (Eigen::Index i = 0; i < rr.size(); ++i) {
      const double rn = std::max(1.0, p.A_eq.row(i).norm());
      if (std::abs(rr[i]) > 10.0 * tol * rn * scale) {
        res.status = SolveStatus::NumericalFailure;
        return res;
      }
    }
  }
  if (p.A_ineq.rows() > 0) {
    const VectorXd s = p.A_ineq * res.x - p.b_ineq;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double rn = std::max(1.0, p.A_ineq.row(i).norm());
      if (s[i] < -10.0 * tol * rn) {
        res.status = SolveStatus::NumericalFailure;
        return res;
      }
    }
  }
  res.objective = 0.5 * res.x.dot(p.H * res.x) + p.g.dot(res.x);
  return res;
}

namespace {

/// Dense tableau simplex for  min c'z  s.t.  A z = b (b >= 0), z >= 0.
class Simplex {
 public:
  Simplex(const MatrixXd& A, const VectorXd& b, double tol) : tol_(tol), m_(A.rows()), n_(A.cols()) {
    // Columns: [structural n | artificial m | rhs].
    T_ = MatrixXd::Zero(m_ + 1, n_ + m_ + 1);
    T_.topLeftCorner(m_, n_) = A;
    T_.block(0, n_, m_, m_) = MatrixXd::Identity(m_, m_);
    T_.block(0, n_ + m_, m_, 1) = b;
    basis_.resize(m_);
    for (Eigen::Index i = 0; i < m_; ++i) basis_[i] = n_ + i;
  }

  // Returns false on iteration exhaustion. Phase one leaves artificial columns
  // ineligible afterwards.
  SolveStatus phase_one(double& infeasibility) {
    T_.row(m_).setZero();
    for (Eigen::Index i = 0; i < m_; ++i) T_.row(m_).head(n_) -= T_.row(i).head(n_);
    T_(m_, n_ + m_) = -T_.col(n_ + m_).head(m_).sum();
    const SolveStatus s = iterate(n_ + m_);
    if (s != SolveStatus::Optimal) return s;
    infeasibility = -T_(m_, n_ + m_);
    // Drive artificial variables out of the basis where possible.
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      Eigen::Index col = -1;
      double best = tol_;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(T_(i, j)) > best) {
          best = std::abs(T_(i, j));
          col = j;
        }
      }
      if (col >= 0) pivot(i, col);
    }
    return SolveStatus::Optimal;
  }

  SolveStatus phase_two(const VectorXd& c) {
    T_.row(m_).setZero();
    T_.row(m_).head(n_) = c.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index bj = basis_[i];
      if (bj < n_ && c[bj] != 0.0) T_.row(m_) -= c[bj] * T_.row(i);
    }
    return iterate(n_);
  }

  VectorXd solution() const {
    VectorXd z = VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) z[basis_[i]] = T_(i, n_ + m_);
    }
    return z;
  }

  int iterations() const { return iterations_; }

 private:
  SolveStatus iterate(Eigen::Index eligible) {
    const int max_iter = static_cast<int>(200 * (m_ + n_) + 1000);
    int degenerate = 0;
    while (true) {
      if (++iterations_ > max_iter) return SolveStatus::NumericalFailure;
      const bool bland = degenerate > 50;
      Eigen::Index col = -1;
      double best = -tol_;
      for (Eigen::Index j = 0; j < eligible; ++j) {
        const double rc = T_(m_, j);
        if (rc < best) {
          col = j;
          if (bland) break;
          best = rc;
        }
      }
      if (col < 0) return SolveStatus::Optimal;
      Eigen::Index row = -1;
      double ratio = kInf;
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double a = T_(i, col);
        if (a > tol_) {
          const double rt = T_(i, n_ + m_) / a;
          if (rt < ratio - 1e-12 || (std::abs(rt - ratio) <= 1e-12 && row >= 0 && basis_[i] < basis_[row])) {
            ratio = rt;
            row = i;
          }
        }
      }
      if (row < 0) return SolveStatus::Unbounded;
      degenerate = ratio <= tol_ ? degenerate + 1 : 0;
      pivot(row, col);
    }
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    T_.row(row) /= T_(row, col);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const double f = T_(i, col);
      if (f != 0.0) T_.row(i) -= f * T_.row(row);
    }
    basis_[row] = col;
  }

  double tol_;
  Eigen::Index m_, n_;
  MatrixXd T_;
  std::vector<Eigen::Index> basis_;
  int iterations_ = 0;
};

}  // namespace

SolveResult solve_lp(const LinearProgram& p, double tol) {
  const Eigen::Index n = p.c.size();
  check_block(p.A_eq, p.b_eq, n, "equality constraints");
  check_block(p.A_ineq, p.b_ineq, n, "inequality constraints");
  const Eigen::Index me = p.A_eq.rows(), mi = p.A_ineq.rows();
  const Eigen::Index m = me + mi;

  SolveResult res;
  // z = [x+ (n), x- (n), s (mi)]
  const Eigen::Index nz = 2 * n + mi;
  MatrixXd A = MatrixXd::Zero(m, nz);
  VectorXd b(m);
  if (me > 0) {
    A.block(0, 0, me, n) = p.A_eq;
    A.block(0, n, me, n) = -p.A_eq;
    b.head(me) = p.b_eq;
  }
  if (mi > 0) {
    A.block(me, 0, mi, n) = p.A_ineq;
    A.block(me, n, mi, n) = -p.A_ineq;
    A.block(me, 2 * n, mi, mi) = -MatrixXd::Identity(mi, mi);
    b.tail(mi) = p.b_ineq;
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    const double nrm = A.row(i).norm();
    if (nrm < 1e-14) {
      const bool ok = (i < me) ? std::abs(b[i]) <= tol : b[i] <= tol;
      if (!ok) {
        res.status = SolveStatus::Infeasible;
        return res;
      }
      b[i] = 0.0;
      continue;
    }
    A.row(i) /= nrm;
    b[i] /= nrm;
    if (b[i] < 0.0) {
      A.row(i) *= -1.0;
      b[i] = -b[i];
    }
  }

  Simplex sx(A, b, tol);
  double infeas = 0.0;
  SolveStatus s = sx.phase_one(infeas);
  if (s != SolveStatus::Optimal) {
    res.status = SolveStatus::NumericalFailure;
    res.iterations = sx.iterations();
    return res;
  }
  if (infeas > 1e3 * tol) {
    res.status = SolveStatus::Infeasible;
    res.iterations = sx.iterations();
    return res;
  }
  VectorXd cz = VectorXd::Zero(nz);
  cz.head(n) = -p.c;
  cz.segment(n, n) = p.c;
  s = sx.phase_two(cz);
  res.iterations = sx.iterations();
  if (s != SolveStatus::Optimal) {
    res.status = s;
    return res;
  }
  const VectorXd z = sx.solution();
  res.x = z.head(n) - z.segment(n, n);
  res.objective = p.c.dot(res.x);
  res.status = SolveStatus::Optimal;
  return res;
}

double max_strict_margin(const MatrixXd& A_eq, const VectorXd& b_eq, const MatrixXd& A_ineq,
                         const VectorXd& b_ineq, std::span<const int> strict_rows) {
  const Eigen::Index n = std::max(A_eq.cols(), A_ineq.cols());
  const Eigen::Index me = A_eq.rows(), mi = A_ineq.rows();
  LinearProgram lp;
  lp.c = VectorXd::Zero(n + 1);
  lp.c[n] = 1.0;
  lp.A_eq = MatrixXd::Zero(me, n + 1);
  if (me > 0) lp.A_eq.leftCols(A_eq.cols()) = A_eq;
  lp.b_eq = me > 0 ? b_eq : VectorXd(0);
  lp.A_ineq = MatrixXd::Zero(mi + 1, n + 1);
  lp.b_ineq = VectorXd::Zero(mi + 1);
  if (mi > 0) {
    lp.A_ineq.topLeftCorner(mi, A_ineq.cols()) = A_ineq;
    lp.b_ineq.head(mi) = b_ineq;
  }
  for (int r : strict_rows) {
    if (r < 0 || r >= mi) throw DimensionMismatch("strict row index out of range");
    // Normalize so the margin is measured in unit-row distance.
    const double nrm = std::max(A_ineq.row(r).norm(), 1e-300);
    lp.A_ineq.row(r) /= nrm;
    lp.b_ineq[r] /= nrm;
    lp.A_ineq(r, n) = -1.0;
  }
  lp.A_ineq(mi, n) = -1.0;  // t <= 1
  lp.b_ineq[mi] = -1.0;
  if (strict_rows.empty()) lp.c[n] = 0.0;
  const SolveResult r = solve_lp(lp);
  if (r.status == SolveStatus::Infeasible) return -kInf;
  if (r.status != SolveStatus::Optimal) throw NumericalError("phase-one LP failed");
  return strict_rows.empty() ? 1.0 : r.x[n];
}

Feasibility solve_lp_feasibility(const MatrixXd& A_eq, const VectorXd& b_eq, const MatrixXd& A_ineq,
                                 const VectorXd& b_ineq, std::span<const int> strict_rows, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const double t = max_strict_margin(A_eq, b_eq, A_ineq, b_ineq, strict_rows);
  return t >= sigma ? Feasibility::Feasible : Feasibility::Infeasible;
}

}  // namespace modeplan
