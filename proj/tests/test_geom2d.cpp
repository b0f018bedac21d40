#include "modeplan/geom2d.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace modeplan;
using modeplan::testing::box;

namespace {

// Fourth-order Runge-Kutta on x' = R(theta) v_xy, theta' = omega.
Pose flow_numerically(const Pose& q0, const Twist& v, double h, double dt) {
  auto f = [&](const Vec3& s) {
    const Vec2 w = rotate({v.vx, v.vy}, s[2]);
    return Vec3(w.x(), w.y(), v.omega);
  };
  Vec3 s(q0.x, q0.y, q0.theta);
  const int n = static_cast<int>(std::round(h / dt));
  for (int i = 0; i < n; ++i) {
    const Vec3 k1 = f(s), k2 = f(s + 0.5 * dt * k1), k3 = f(s + 0.5 * dt * k2), k4 = f(s + dt * k3);
    s += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return {s[0], s[1], s[2]};
}

double angle_gap(double a, double b) { return std::abs(wrap_angle(a - b)); }

}  // namespace

TEST(Pose, ThetaStaysWrapped) {
  EXPECT_NEAR(Pose(0, 0, 3 * kPi).theta, kPi, 1e-12);
  EXPECT_NEAR(Pose(0, 0, -kPi).theta, kPi, 1e-12);
  const Pose a(0, 0, 3.0), b(0, 0, 3.0);
  EXPECT_GT(a.compose(b).theta, -kPi);
  EXPECT_LE(a.compose(b).theta, kPi);
}

TEST(TwistToTransform, ZeroTwistIsIdentity) {
  const Pose t = twist_to_transform({0, 0, 0}, 0.7);
  EXPECT_EQ(t, Pose(0, 0, 0));
}

TEST(TwistToTransform, PureTranslation) {
  const Pose t = twist_to_transform({1, 0, 0}, 0.5);
  EXPECT_NEAR(t.x, 0.5, 1e-15);
  EXPECT_NEAR(t.y, 0.0, 1e-15);
  EXPECT_NEAR(t.theta, 0.0, 1e-15);
}

TEST(TwistToTransform, HalfTurnMatchesOde) {
  const Pose q = integrate_pose({0, 0, 0}, {0, 0, kPi}, 1.0);
  EXPECT_NEAR(q.x, 0.0, 1e-12);
  EXPECT_NEAR(q.y, 0.0, 1e-12);
  EXPECT_NEAR(std::abs(q.theta), kPi, 1e-12);
  const Pose ode = flow_numerically({0, 0, 0}, {0, 0, kPi}, 1.0, 1e-6);
  EXPECT_NEAR(angle_gap(q.theta, ode.theta), 0.0, 1e-9);
}

TEST(TwistToTransform, GeneralTwistsMatchOde) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 5; ++i) {
    const Pose q0 = modeplan::testing::random_pose(rng);
    const Twist v(u(rng), u(rng), u(rng));
    const Pose exact = integrate_pose(q0, v, 0.8);
    const Pose ode = flow_numerically(q0, v, 0.8, 1e-5);
    EXPECT_NEAR(exact.x, ode.x, 1e-9);
    EXPECT_NEAR(exact.y, ode.y, 1e-9);
    EXPECT_NEAR(angle_gap(exact.theta, ode.theta), 0.0, 1e-9);
  }
}

TEST(BodyTwistBetween, Identity) {
  const Twist v = body_twist_between({1, 2, 0.3}, {1, 2, 0.3});
  EXPECT_EQ(v.vec(), Vec3::Zero());
}

TEST(BodyTwistBetween, PureTranslation) {
  const Twist v = body_twist_between({0, 0, 0}, {1, 0, 0});
  EXPECT_NEAR(v.vx, 1.0, 1e-15);
  EXPECT_NEAR(v.vy, 0.0, 1e-15);
  EXPECT_NEAR(v.omega, 0.0, 1e-15);
}

TEST(BodyTwistBetween, ShortestRotation) {
  const Twist v = body_twist_between({0, 0, 3.0}, {0, 0, -3.0});
  EXPECT_NEAR(v.omega, 2 * kPi - 6.0, 1e-12);
}

TEST(BodyTwistBetween, RoundTripOverRandomPairs) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Pose a = modeplan::testing::random_pose(rng), b = modeplan::testing::random_pose(rng);
    const Pose back = integrate_pose(a, body_twist_between(a, b), 1.0);
    ASSERT_NEAR(back.x, b.x, 1e-9) << i;
    ASSERT_NEAR(back.y, b.y, 1e-9) << i;
    ASSERT_NEAR(angle_gap(back.theta, b.theta), 0.0, 1e-9) << i;
  }
}

TEST(Polygon, RejectsClockwiseAndSelfIntersecting) {
  EXPECT_THROW(Polygon({{0, 0}, {0, 1}, {1, 1}, {1, 0}}), GeometryError);
  EXPECT_THROW(Polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), GeometryError);
  EXPECT_THROW(Polygon({{0, 0}, {1, 0}}), GeometryError);
  bool flipped = false;
  const Polygon p = Polygon::from_any_orientation({{0, 0}, {0, 1}, {1, 1}, {1, 0}}, &flipped);
  EXPECT_TRUE(flipped);
  EXPECT_GT(p.signed_area(), 0.0);
}

TEST(Polygon, AreaCentroidAndGyration) {
  const Polygon p = box(0, 0, 2, 1);
  EXPECT_NEAR(p.signed_area(), 2.0, 1e-15);
  EXPECT_NEAR(p.centroid().x(), 1.0, 1e-15);
  EXPECT_NEAR(p.centroid().y(), 0.5, 1e-15);
  EXPECT_NEAR(p.radius_of_gyration_sq(), (4.0 + 1.0) / 12.0, 1e-12);
  EXPECT_NEAR(p.bounding_diagonal(), std::sqrt(5.0), 1e-15);
}

TEST(ContactQuery, SquareFlatOnFloor) {
  const Polygon square = box(-0.5, -0.5, 0.5, 0.5);
  const std::vector<Polygon> env{box(-5, -1, 5, 0)};
  ContactQueryOptions o;
  o.d_contact = 1e-3;
  const Pose q(0.3, 0.5, 0.0);
  const auto cs = contact_query(square, q, env, o);
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_NEAR(cs[0].point.x(), -0.5, 1e-12);
  EXPECT_NEAR(cs[1].point.x(), 0.5, 1e-12);
  for (const Contact& c : cs) {
    EXPECT_NEAR(c.point.y(), -0.5, 1e-12);
    const Vec2 nw = q.rotate_to_world(c.normal);
    EXPECT_NEAR(nw.x(), 0.0, 1e-12);
    EXPECT_NEAR(nw.y(), 1.0, 1e-12);
  }
}

TEST(ContactQuery, HoveringSquareHasNoContacts) {
  const Polygon square = box(-0.5, -0.5, 0.5, 0.5);
  const std::vector<Polygon> env{box(-5, -1, 5, 0)};
  ContactQueryOptions o;
  o.d_contact = 1e-3;
  EXPECT_TRUE(contact_query(square, {0, 0.5 + 10 * o.d_contact, 0}, env, o).empty());
}

TEST(ContactQuery, TiltedSquareTouchesAtOneVertex) {
  const Polygon square = box(-0.5, -0.5, 0.5, 0.5);
  const std::vector<Polygon> env{box(-5, -1, 5, 0)};
  ContactQueryOptions o;
  o.d_contact = 1e-3;
  const Pose q(0.0, std::sqrt(0.5), kPi / 4);
  const auto cs = contact_query(square, q, env, o);
  ASSERT_EQ(cs.size(), 1u);
  const Vec2 w = q.apply(cs[0].point);
  EXPECT_NEAR(w.x(), 0.0, 1e-12);
  EXPECT_NEAR(w.y(), 0.0, 1e-12);
  EXPECT_NEAR(cs[0].distance, 0.0, 1e-12);
}

TEST(ContactQuery, NormalsUnitAndTangentsOrthogonal) {
  std::mt19937_64 rng(3);
  const Polygon obj = Polygon({{-0.4, -0.2}, {0.5, -0.3}, {0.3, 0.4}, {-0.3, 0.3}});
  const std::vector<Polygon> env{box(-5, -1, 5, 0), box(0.6, 0, 2, 2)};
  ContactQueryOptions o;
  o.d_contact = 0.05;
  int seen = 0;
  std::uniform_real_distribution<double> ux(-0.5, 0.4), uy(0.1, 0.6), ua(-kPi, kPi);
  for (int i = 0; i < 400; ++i) {
    const Pose q(ux(rng), uy(rng), ua(rng));
    if (min_signed_distance(obj, q, env) < -o.d_contact) continue;
    for (const Contact& c : contact_query(obj, q, env, o)) {
      ++seen;
      EXPECT_NEAR(c.normal.norm(), 1.0, 1e-9);
      EXPECT_NEAR(c.tangent.dot(c.normal), 0.0, 1e-12);
      EXPECT_NEAR((c.tangent - rotate_cw(c.normal)).norm(), 0.0, 1e-12);
    }
  }
  EXPECT_GT(seen, 10);
}

TEST(ContactQuery, TranslationEquivariant) {
  std::mt19937_64 rng(5);
  const Polygon obj = Polygon({{-0.4, -0.2}, {0.5, -0.3}, {0.3, 0.4}, {-0.3, 0.3}});
  const std::vector<Polygon> env{box(-5, -1, 5, 0), box(0.6, 0, 2, 2)};
  ContactQueryOptions o;
  o.d_contact = 0.05;
  std::uniform_real_distribution<double> ux(-0.5, 0.4), uy(0.1, 0.6), ua(-kPi, kPi), ut(-30, 30);
  int compared = 0;
  for (int i = 0; i < 200; ++i) {
    const Pose q(ux(rng), uy(rng), ua(rng));
    if (min_signed_distance(obj, q, env) < -o.d_contact) continue;
    const Vec2 t(ut(rng), ut(rng));
    std::vector<Polygon> moved;
    for (const Polygon& p : env) {
      std::vector<Vec2> v = p.vertices();
      for (Vec2& x : v) x += t;
      moved.emplace_back(v);
    }
    const auto a = contact_query(obj, q, env, o);
    const auto b = contact_query(obj, {q.x + t.x(), q.y + t.y(), q.theta}, moved, o);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_NEAR((a[k].point - b[k].point).norm(), 0.0, 1e-9);
      EXPECT_NEAR((a[k].normal - b[k].normal).norm(), 0.0, 1e-9);
      EXPECT_NEAR(a[k].distance, b[k].distance, 1e-9);
    }
    compared += static_cast<int>(a.size());
  }
  EXPECT_GT(compared, 10);
}

TEST(ContactQuery, DeepPenetrationThrows) {
  const Polygon square = box(-0.5, -0.5, 0.5, 0.5);
  const std::vector<Polygon> env{box(-5, -1, 5, 0)};
  ContactQueryOptions o;
  o.d_contact = 1e-3;
  EXPECT_THROW(contact_query(square, {0, 0.3, 0}, env, o), PenetrationError);
}

TEST(PenetrationRollback, NonPenetratingTargetUnchanged) {
  const Polygon square = box(-0.5, -0.5, 0.5, 0.5);
  const std::vector<Polygon> env{box(-5, -1, 5, 0)};
  const Pose next(0.2, 0.8, 0.1);
  const Pose out = penetration_rollback({0, 1.5, 0}, next, square, env, 1e-3);
  EXPECT_EQ(out, next);
}

TEST(PenetrationRollback, VerticalDropLandsOnFloor) {
  const Polygon square = box(-0.5, -0.5, 0.5, 0.5);
  const std::vector<Polygon> env{box(-5, -1, 5, 0)};
  const double dc = 1e-3;
  // Bottom face from height 1 down to -0.5; the segment meets the floor at center height 0.5.
  const Pose out = penetration_rollback({0, 1.5, 0}, {0, 0.0, 0}, square, env, dc);
  EXPECT_NEAR(out.y, 0.5, dc);
  EXPECT_NEAR(out.x, 0.0, 1e-12);
}

TEST(PenetrationRollback, RotatingFallOntoCorner) {
  const Polygon square = box(-0.5, -0.5, 0.5, 0.5);
  const std::vector<Polygon> env{box(-5, -1, 5, 0)};
  const double dc = 1e-3;
  double frac = -1.0;
  const Pose out = penetration_rollback({0, 1.2, 0.3}, {0.2, 0.3, 1.1}, square, env, dc, &frac);
  const double d = min_signed_distance(square, out, env);
  EXPECT_GE(d, -dc);
  EXPECT_LE(d, dc);
  EXPECT_GT(frac, 0.0);
  EXPECT_LT(frac, 1.0);
  ContactQueryOptions o;
  o.d_contact = dc;
  EXPECT_FALSE(contact_query(square, out, env, o).empty());
}

TEST(WeightedDistance, Examples) {
  EXPECT_EQ(weighted_se2_distance({1, 2, 0.4}, {1, 2, 0.4}, 1.0), 0.0);
  EXPECT_NEAR(weighted_se2_distance({0, 0, 0}, {3, 4, 0}, 1.0), 5.0, 1e-15);
  EXPECT_NEAR(weighted_se2_distance({0, 0, 3 * kPi / 4}, {0, 0, -3 * kPi / 4}, 2.0), kPi, 1e-12);
}

TEST(WeightedDistance, MetricAxioms) {
  std::mt19937_64 rng(17);
  const double w = 0.7;
  for (int i = 0; i < 10000; ++i) {
    const Pose a = modeplan::testing::random_pose(rng), b = modeplan::testing::random_pose(rng),
               c = modeplan::testing::random_pose(rng);
    const double ab = weighted_se2_distance(a, b, w);
    ASSERT_NEAR(ab, weighted_se2_distance(b, a, w), 1e-12);
    ASSERT_GE(ab, 0.0);
    ASSERT_LE(ab, weighted_se2_distance(a, c, w) + weighted_se2_distance(c, b, w) + 1e-12);
  }
  EXPECT_NEAR(weighted_se2_distance({1, 1, kPi}, {1, 1, -kPi + 1e-16}, w), 0.0, 1e-12);
  EXPECT_GT(weighted_se2_distance({1, 1, 0}, {1, 1, 1e-6}, w), 0.0);
}
