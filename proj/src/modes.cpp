#include "modeplan/modes.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace modeplan {

std::string_view label_name(ContactLabel l) {
  switch (l) {
    case ContactLabel::Separate: return "separate";
    case ContactLabel::Fixed: return "fixed";
    case ContactLabel::RightSlide: return "right-slide";
    case ContactLabel::LeftSlide: return "left-slide";
  }
  return "?";
}

std::optional<ContactLabel> parse_label(std::string_view s) {
  for (auto l : {ContactLabel::Separate, ContactLabel::Fixed, ContactLabel::RightSlide, ContactLabel::LeftSlide}) {
    if (label_name(l) == s) return l;
  }
  return std::nullopt;
}

char label_char(ContactLabel l) {
  switch (l) {
    case ContactLabel::Separate: return 'S';
    case ContactLabel::Fixed: return 'F';
    case ContactLabel::RightSlide: return 'R';
    case ContactLabel::LeftSlide: return 'L';
  }
  return '?';
}

bool ContactMode::all(ContactLabel l) const {
  return std::all_of(labels.begin(), labels.end(), [l](ContactLabel x) { return x == l; });
}

std::string ContactMode::str() const {
  std::string s;
  for (auto l : labels) s.push_back(label_char(l));
  return s;
}

namespace {

// Row builder that grows dense blocks one constraint at a time.
struct RowSink {
  explicit RowSink(int n) : n(n) {}
  int n;
  std::vector<VectorXd> eq, ineq;
  std::vector<double> beq, bineq;
  std::vector<int> strict;

  VectorXd row() const { return VectorXd::Zero(n); }
  void add_eq(const VectorXd& r, double b = 0.0) {
    eq.push_back(r);
    beq.push_back(b);
  }
  void add_ineq(const VectorXd& r, double b = 0.0, bool is_strict = false) {
    if (is_strict) strict.push_back(static_cast<int>(ineq.size()));
    ineq.push_back(r);
    bineq.push_back(b);
  }
  void emit(ModeConstraints& out) const {
    out.A_eq = MatrixXd::Zero(static_cast<Eigen::Index>(eq.size()), n);
    out.b_eq = VectorXd::Zero(static_cast<Eigen::Index>(eq.size()));
    for (std::size_t i = 0; i < eq.size(); ++i) {
      out.A_eq.row(static_cast<Eigen::Index>(i)) = eq[i].transpose();
      out.b_eq[static_cast<Eigen::Index>(i)] = beq[i];
    }
    out.A_ineq = MatrixXd::Zero(static_cast<Eigen::Index>(ineq.size()), n);
    out.b_ineq = VectorXd::Zero(static_cast<Eigen::Index>(ineq.size()));
    for (std::size_t i = 0; i < ineq.size(); ++i) {
      out.A_ineq.row(static_cast<Eigen::Index>(i)) = ineq[i].transpose();
      out.b_ineq[static_cast<Eigen::Index>(i)] = bineq[i];
    }
    out.strict_rows = strict;
  }
};

}  // namespace

ModeConstraints assemble_mode_constraints(const ContactMode& mode, std::span<const Contact> contacts,
                                          const GraspMap& G, int n_mnp) {
  const int nc = static_cast<int>(contacts.size());
  if (static_cast<int>(mode.size()) != nc) throw DimensionMismatch("mode length differs from contact count");
  if (G.G.cols() != 2 * nc) throw DimensionMismatch("grasp map does not match contact count");
  const int manip = static_cast<int>(std::count_if(contacts.begin(), contacts.end(), [](const Contact& c) {
    return c.source == ContactSource::Manipulator;
  }));
  if (manip != n_mnp) throw DimensionMismatch("manipulator contact count differs from n_mnp");

  ModeConstraints out;
  out.num_contacts = nc;
  out.num_manipulator = n_mnp;
  RowSink sink(out.num_vars());

  int k = 0;  // manipulator index
  for (int i = 0; i < nc; ++i) {
    const Contact& c = contacts[static_cast<std::size_t>(i)];
    const bool is_manip = c.source == ContactSource::Manipulator;
    // Relative contact velocity rows: G^T v_o - [qdot; 0].
    VectorXd vn = sink.row(), vt = sink.row();
    vn.head<3>() = G.normal_column(i);
    vt.head<3>() = G.tangent_column(i);
    if (is_manip) {
      vn[out.qdot_offset(k)] = -1.0;
      vt[out.qdot_offset(k) + 1] = -1.0;
      ++k;
    }
    const int lo = out.lambda_offset(i);
    auto lam = [&](int comp, double coeff) {
      VectorXd r = sink.row();
      r[lo + comp] = coeff;
      return r;
    };
    const double mu = c.mu;
    switch (mode.labels[static_cast<std::size_t>(i)]) {
      case ContactLabel::Separate:
        sink.add_ineq(vn, 0.0, true);
        sink.add_eq(lam(0, 1.0));
        sink.add_eq(lam(1, 1.0));
        sink.add_eq(lam(2, 1.0));
        break;
      case ContactLabel::Fixed: {
        sink.add_eq(vn);
        sink.add_eq(vt);
        VectorXd r1 = lam(0, mu);
        r1[lo + 1] = -1.0;
        VectorXd r2 = lam(0, mu);
        r2[lo + 2] = -1.0;
        sink.add_ineq(r1, 0.0, true);
        sink.add_ineq(r2, 0.0, true);
        break;
      }
      case ContactLabel::RightSlide: {
        sink.add_eq(vn);
        sink.add_ineq(vt, 0.0, true);
        VectorXd r = lam(0, mu);
        r[lo + 2] = -1.0;
        sink.add_eq(r);
        sink.add_eq(lam(1, 1.0));
        break;
      }
      case ContactLabel::LeftSlide: {
        sink.add_eq(vn);
        sink.add_ineq(-vt, 0.0, true);
        VectorXd r = lam(0, mu);
        r[lo + 1] = -1.0;
        sink.add_eq(r);
        sink.add_eq(lam(2, 1.0));
        break;
      }
    }
    sink.add_ineq(lam(0, 1.0));
    sink.add_ineq(lam(1, 1.0));
    sink.add_ineq(lam(2, 1.0));
  }
  sink.emit(out);
  return out;
}

ModeConstraints velocity_clauses(const ContactMode& mode, std::span<const Contact> contacts) {
  if (mode.size() != contacts.size()) throw DimensionMismatch("mode length differs from contact count");
  ModeConstraints out;
  RowSink sink(3);
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    const Contact& c = contacts[i];
    VectorXd vn = point_wrench(c.point, c.normal);
    VectorXd vt = point_wrench(c.point, c.tangent);
    switch (mode.labels[i]) {
      case ContactLabel::Separate: sink.add_ineq(vn, 0.0, true); break;
      case ContactLabel::Fixed:
        sink.add_eq(vn);
        sink.add_eq(vt);
        break;
      case ContactLabel::RightSlide:
        sink.add_eq(vn);
        sink.add_ineq(vt, 0.0, true);
        break;
      case ContactLabel::LeftSlide:
        sink.add_eq(vn);
        sink.add_ineq(-vt, 0.0, true);
        break;
    }
  }
  sink.emit(out);
  return out;
}

namespace {

constexpr double kSignTol = 1e-9;
constexpr double kParallelTol = 1e-10;

int sgn(double v) { return v > kSignTol ? 1 : (v < -kSignTol ? -1 : 0); }

struct Candidate {
  Vec3 point;
  Vec3 perturb = Vec3::Zero();  // infinitesimal offset direction (zero: none)
};

std::vector<ContactMode> enumerate_arrangement(std::span<const Contact> contacts) {
  const std::size_t n = contacts.size();
  std::vector<Vec3> planes;  // a_0..a_{n-1}, b_0..b_{n-1}
  planes.reserve(2 * n);
  for (const auto& c : contacts) planes.push_back(point_wrench(c.point, c.normal).normalized());
  for (const auto& c : contacts) planes.push_back(point_wrench(c.point, c.tangent).normalized());

  std::vector<Candidate> cands;
  cands.push_back({Vec3::Zero()});
  const std::size_t m = planes.size();
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = j + 1; k < m; ++k) {
      const Vec3 r = planes[j].cross(planes[k]);
      if (r.norm() < kParallelTol) continue;
      cands.push_back({r.normalized()});
      cands.push_back({-r.normalized()});
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    const Vec3& h = planes[j];
    // Orthonormal basis of the plane h.x = 0.
    Vec3 e1 = (std::abs(h.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY()).cross(h).normalized();
    Vec3 e2 = h.cross(e1);
    std::vector<double> angles;
    for (std::size_t k = 0; k < m; ++k) {
      const Vec3 r = h.cross(planes[k]);
      if (r.norm() < kParallelTol) continue;
      const Vec3 u = r.normalized();
      const double a = std::atan2(u.dot(e2), u.dot(e1));
      angles.push_back(a);
      angles.push_back(wrap_angle(a + kPi));
    }
    std::vector<Vec3> mids;
    if (angles.empty()) {
      mids.push_back(e1);
    } else {
      std::sort(angles.begin(), angles.end());
      std::vector<double> uniq;
      for (double a : angles) {
        if (uniq.empty() || a - uniq.back() > 1e-12) uniq.push_back(a);
      }
      if (uniq.size() > 1 && uniq.back() - uniq.front() > 2.0 * kPi - 1e-12) uniq.pop_back();
      for (std::size_t i = 0; i < uniq.size(); ++i) {
        const double a0 = uniq[i];
        const double a1 = (i + 1 < uniq.size()) ? uniq[i + 1] : uniq[0] + 2.0 * kPi;
        const double mid = 0.5 * (a0 + a1);
        mids.push_back(std::cos(mid) * e1 + std::sin(mid) * e2);
      }
    }
    for (const auto& mv : mids) {
      cands.push_back({mv});
      cands.push_back({mv, h});
      cands.push_back({mv, -h});
    }
  }

  std::set<ContactMode> modes;
  for (const auto& cand : cands) {
    auto sign_of = [&](const Vec3& h) {
      int s = sgn(h.dot(cand.point));
      if (s == 0 && cand.perturb.squaredNorm() > 0.0) s = sgn(h.dot(cand.perturb));
      return s;
    };
    ContactMode mode;
    mode.labels.resize(n);
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      const int sn = sign_of(planes[i]);
      if (sn < 0) {
        ok = false;
      } else if (sn > 0) {
        mode.labels[i] = ContactLabel::Separate;
      } else {
        const int st = sign_of(planes[n + i]);
        mode.labels[i] = st == 0 ? ContactLabel::Fixed : (st > 0 ? ContactLabel::RightSlide : ContactLabel::LeftSlide);
      }
    }
    if (ok) modes.insert(std::move(mode));
  }
  return {modes.begin(), modes.end()};
}

std::vector<ContactMode> enumerate_brute_force(std::span<const Contact> contacts) {
  const std::size_t n = contacts.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= 4;
  std::vector<ContactMode> out;
  constexpr std::array<ContactLabel, 4> alphabet{ContactLabel::Separate, ContactLabel::Fixed,
                                                 ContactLabel::RightSlide, ContactLabel::LeftSlide};
  for (std::size_t code = 0; code < total; ++code) {
    ContactMode mode;
    mode.labels.resize(n);
    std::size_t c = code;
    for (std::size_t i = n; i-- > 0;) {
      mode.labels[i] = alphabet[c % 4];
      c /= 4;
    }
    const ModeConstraints mc = velocity_clauses(mode, contacts);
    if (solve_lp_feasibility(mc.A_eq, mc.b_eq, mc.A_ineq, mc.b_ineq, mc.strict_rows, 1e-6) ==
        Feasibility::Feasible) {
      out.push_back(std::move(mode));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<ContactMode> enumerate_env_modes(std::span<const Contact> contacts, EnumerationBackend backend) {
  if (contacts.empty()) return {ContactMode{}};
  return backend == EnumerationBackend::Arrangement ? enumerate_arrangement(contacts)
                                                    : enumerate_brute_force(contacts);
}

}  // namespace modeplan
