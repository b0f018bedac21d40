#include "modeplan/modes.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace modeplan;
using modeplan::testing::box;

namespace {

ContactMode mode_of(std::string_view s) {
  ContactMode m;
  for (char c : s) {
    switch (c) {
      case 'S': m.labels.push_back(ContactLabel::Separate); break;
      case 'F': m.labels.push_back(ContactLabel::Fixed); break;
      case 'R': m.labels.push_back(ContactLabel::RightSlide); break;
      default: m.labels.push_back(ContactLabel::LeftSlide); break;
    }
  }
  return m;
}

std::vector<Contact> floor_contacts() {
  return {Contact::make({-0.5, -0.5}, {0.0, 1.0}, 0.5), Contact::make({0.5, -0.5}, {0.0, 1.0}, 0.5)};
}

/// Label vectors of representative twists of every face of the arrangement
/// of contact velocity functionals. Faces of dimension <= 2 are represented
/// exactly (midpoints between zero rays); open cells by perturbing those.
std::set<std::string> sampled_modes(const std::vector<Contact>& cs, std::mt19937_64& rng) {
  const int n = static_cast<int>(cs.size());
  Eigen::MatrixXd rows(2 * n, 3);
  for (int i = 0; i < n; ++i) {
    const Contact& c = cs[static_cast<std::size_t>(i)];
    rows.row(2 * i) = point_wrench(c.point, c.normal).transpose();
    rows.row(2 * i + 1) = point_wrench(c.point, c.tangent).transpose();
  }
  std::set<std::string> out;
  auto classify = [&](const Eigen::Vector3d& v) {
    const Eigen::VectorXd vel = rows * v;
    const double tol = 1e-9 * (1.0 + v.norm());
    std::string label;
    for (int i = 0; i < n; ++i) {
      const double vn = vel[2 * i], vt = vel[2 * i + 1];
      if (vn > tol) label += 'S';
      else if (vn < -tol) return;
      else if (vt > tol) label += 'R';
      else if (vt < -tol) label += 'L';
      else label += 'F';
    }
    out.insert(label);
  };
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Eigen::Vector3d> planar;
  for (long mask = 0; mask < (1L << (2 * n)); ++mask) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(1, 3);
    for (int r = 0; r < 2 * n; ++r) {
      if (mask & (1L << r)) {
        A.conservativeResize(A.rows() + 1, 3);
        A.row(A.rows() - 1) = rows.row(r);
      }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) rank += sv[k] > 1e-10 ? 1 : 0;
    const Eigen::MatrixXd basis = svd.matrixV().rightCols(3 - rank);
    if (basis.cols() == 0) {
      classify(Eigen::Vector3d::Zero());
    } else if (basis.cols() == 1) {
      classify(basis.col(0));
      classify(-basis.col(0));
    } else if (basis.cols() == 2) {
      std::vector<double> angles;
      for (int r = 0; r < 2 * n; ++r) {
        const Eigen::RowVector2d f = rows.row(r) * basis;
        if (f.norm() < 1e-10) continue;
        const double phi = std::atan2(f[1], f[0]) + kPi / 2.0;
        angles.push_back(std::fmod(phi + 4.0 * kPi, 2.0 * kPi));
        angles.push_back(std::fmod(phi + 5.0 * kPi, 2.0 * kPi));
      }
      std::sort(angles.begin(), angles.end());
      if (angles.empty()) angles.push_back(0.0);
      for (std::size_t k = 0; k < angles.size(); ++k) {
        const double next = k + 1 < angles.size() ? angles[k + 1] : angles[0] + 2.0 * kPi;
        const double mid = 0.5 * (angles[k] + next);
        const Eigen::Vector3d v = basis * Eigen::Vector2d(std::cos(mid), std::sin(mid));
        planar.push_back(v);
        classify(v);
      }
    } else {
      for (int s = 0; s < 200; ++s) classify(Eigen::Vector3d::NullaryExpr([&] { return g(rng); }));
    }
  }
  for (const auto& v : planar) {
    for (int s = 0; s < 20; ++s) classify(v + 1e-4 * Eigen::Vector3d::NullaryExpr([&] { return g(rng); }));
  }
  return out;
}

std::set<std::string> as_strings(const std::vector<ContactMode>& modes) {
  std::set<std::string> s;
  for (const auto& m : modes) s.insert(m.str());
  return s;
}

}  // namespace

TEST(Labels, NamesRoundTrip) {
  for (auto l : {ContactLabel::Separate, ContactLabel::Fixed, ContactLabel::RightSlide, ContactLabel::LeftSlide}) {
    EXPECT_EQ(parse_label(label_name(l)), l);
  }
  EXPECT_FALSE(parse_label("sticking").has_value());
  EXPECT_EQ(mode_of("SFRL").str(), "SFRL");
}

TEST(EnumerateEnvModes, NoContactsGivesEmptyMode) {
  const auto modes = enumerate_env_modes({});
  ASSERT_EQ(modes.size(), 1u);
  EXPECT_EQ(modes[0].size(), 0u);
}

TEST(EnumerateEnvModes, SingleContactHasFourModes) {
  const std::vector<Contact> cs{Contact::make({0.0, -0.5}, {0.0, 1.0}, 0.5)};
  for (auto b : {EnumerationBackend::Arrangement, EnumerationBackend::BruteForce}) {
    EXPECT_EQ(as_strings(enumerate_env_modes(cs, b)), (std::set<std::string>{"F", "L", "R", "S"}));
  }
}

TEST(EnumerateEnvModes, SquareOnFloor) {
  const auto cs = floor_contacts();
  const std::set<std::string> expected{"SS", "SF", "SR", "SL", "FS", "RS", "LS", "FF", "RR", "LL"};
  EXPECT_EQ(as_strings(enumerate_env_modes(cs, EnumerationBackend::Arrangement)), expected);
  EXPECT_EQ(as_strings(enumerate_env_modes(cs, EnumerationBackend::BruteForce)), expected);
}

TEST(EnumerateEnvModes, OutputSortedAndUnique) {
  const auto modes = enumerate_env_modes(floor_contacts());
  for (std::size_t i = 1; i < modes.size(); ++i) EXPECT_LT(modes[i - 1], modes[i]);
}

TEST(EnumerateEnvModes, BackendsAgreeWithSampledFaces) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0), a(-kPi, kPi);
  std::uniform_int_distribution<int> count(1, 4);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<Contact> cs;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      const double ang = a(rng);
      cs.push_back(Contact::make({u(rng), u(rng)}, {std::cos(ang), std::sin(ang)}, 0.5));
    }
    const auto arr = as_strings(enumerate_env_modes(cs, EnumerationBackend::Arrangement));
    const auto bf = as_strings(enumerate_env_modes(cs, EnumerationBackend::BruteForce));
    EXPECT_EQ(arr, bf) << "trial " << trial;
    EXPECT_EQ(arr, sampled_modes(cs, rng)) << "trial " << trial;
  }
}

TEST(EnumerateEnvModes, ParallelContactsOnFlatFace) {
  // Three collinear contacts with equal normals: same face count as two.
  std::vector<Contact> cs = floor_contacts();
  cs.insert(cs.begin() + 1, Contact::make({0.0, -0.5}, {0.0, 1.0}, 0.5));
  std::mt19937_64 rng(3);
  const auto modes = as_strings(enumerate_env_modes(cs));
  EXPECT_EQ(modes, sampled_modes(cs, rng));
  EXPECT_TRUE(modes.count("FFF"));
  EXPECT_TRUE(modes.count("SSF"));
  EXPECT_FALSE(modes.count("SFS"));
}

TEST(ModeConstraints, RowCountsPerLabel) {
  const auto cs = floor_contacts();
  const GraspMap G = grasp_map(cs);
  struct Case {
    const char* mode;
    int eq, ineq, strict;
  };
  // Per contact: S (3 eq, 1 strict), F (2 eq, 2 strict), R/L (3 eq, 1 strict); 3 bounds each.
  for (const Case& c : {Case{"SS", 6, 8, 2}, Case{"FF", 4, 10, 4}, Case{"RR", 6, 8, 2}, Case{"SL", 6, 8, 2},
                        Case{"FR", 5, 9, 3}}) {
    const ModeConstraints m = assemble_mode_constraints(mode_of(c.mode), cs, G, 0);
    EXPECT_EQ(m.A_eq.rows(), c.eq) << c.mode;
    EXPECT_EQ(m.A_ineq.rows(), c.ineq) << c.mode;
    EXPECT_EQ(static_cast<int>(m.strict_rows.size()), c.strict) << c.mode;
    EXPECT_EQ(m.A_eq.cols(), 3 + 6);
  }
}

TEST(ModeConstraints, ManipulatorContactOwnsQdot) {
  std::vector<Contact> cs = floor_contacts();
  cs.push_back(Contact::make({0.0, 0.5}, {0.0, -1.0}, 0.8, ContactSource::Manipulator, 0));
  const ModeConstraints m = assemble_mode_constraints(mode_of("RRF"), cs, grasp_map(cs), 1);
  EXPECT_EQ(m.num_vars(), 3 + 2 + 9);
  EXPECT_EQ(m.qdot_offset(0), 3);
  EXPECT_EQ(m.lambda_offset(2), 3 + 2 + 6);
  // The object at v = (1, 0, 0) with the finger carried along satisfies every velocity equality.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m.num_vars());
  x[0] = 1.0;
  x[m.qdot_offset(0) + 1] = cs[2].tangent.dot(Vec2{1.0, 0.0});
  // Coulomb rows for sliding contacts pin lambda_t on the cone edge; choose lambda_n = 0.
  EXPECT_LE((m.A_eq * x - m.b_eq).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ModeConstraints, SlidingRightSatisfiedBySample) {
  const auto cs = floor_contacts();
  const ModeConstraints m = assemble_mode_constraints(mode_of("RR"), cs, grasp_map(cs), 0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m.num_vars());
  x[0] = 1.0;
  for (int i = 0; i < 2; ++i) {
    x[m.lambda_offset(i)] = 0.5;
    x[m.lambda_offset(i) + 2] = 0.25;  // friction opposing the motion at mu = 0.5
  }
  EXPECT_LE((m.A_eq * x - m.b_eq).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GE((m.A_ineq * x - m.b_ineq).minCoeff(), 0.0);
  for (int r : m.strict_rows) EXPECT_GT(m.A_ineq.row(r).dot(x), 0.0);
}

TEST(ModeConstraints, MismatchThrows) {
  const auto cs = floor_contacts();
  EXPECT_THROW(assemble_mode_constraints(mode_of("S"), cs, grasp_map(cs), 0), DimensionMismatch);
  EXPECT_THROW(assemble_mode_constraints(mode_of("SS"), cs, grasp_map(cs), 1), DimensionMismatch);
}

TEST(VelocityClauses, OnlyTwistVariables) {
  const auto cs = floor_contacts();
  const ModeConstraints m = velocity_clauses(mode_of("FR"), cs);
  EXPECT_EQ(m.A_eq.cols(), 3);
  EXPECT_EQ(m.A_eq.rows(), 3);
  EXPECT_EQ(m.A_ineq.rows(), 1);
  EXPECT_EQ(solve_lp_feasibility(m.A_eq, m.b_eq, m.A_ineq, m.b_ineq, m.strict_rows, 1e-6), Feasibility::Infeasible);
  const ModeConstraints rr = velocity_clauses(mode_of("RR"), cs);
  EXPECT_EQ(solve_lp_feasibility(rr.A_eq, rr.b_eq, rr.A_ineq, rr.b_ineq, rr.strict_rows, 1e-6),
            Feasibility::Feasible);
}
