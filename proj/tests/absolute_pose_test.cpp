#include "planarloc/absolute_pose.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "planarloc/metrics.hpp"
#include "test_util.hpp"

namespace planarloc {
namespace {

using testing::yaw_oracle;

// Relative pose query -> reference with the translation scaled to unit length.
RigidPose unit_relative(const RigidPose& ref, const RigidPose& query) {
  const Eigen::Matrix3d r = ref.rotation * query.rotation.transpose();
  const Eigen::Vector3d t = ref.translation - r * query.translation;
  return RigidPose(r, t.normalized());
}

// Query plus two references, all planar and well separated.
struct ThreeViews {
  RigidPose query;
  RigidPose ref_a;
  RigidPose ref_b;
};

ThreeViews random_views(std::mt19937_64& rng) {
  while (true) {
    ThreeViews v{testing::random_planar_camera(rng),
                 testing::random_planar_camera(rng),
                 testing::random_planar_camera(rng)};
    const Eigen::Vector3d da = v.query.center() - v.ref_a.center();
    const Eigen::Vector3d db = v.query.center() - v.ref_b.center();
    if (da.norm() < 0.5 || db.norm() < 0.5) continue;
    if (da.cross(db).norm() < 0.05 * da.norm() * db.norm()) continue;
    if (!testing::covisible(rng, v.query, v.ref_b)) continue;
    return v;
  }
}

TEST(Rcheck, ExactCompositionPasses) {
  const RigidPose a(yaw_oracle(0.4), Eigen::Vector3d(1, 0, 0));
  const RigidPose b(yaw_oracle(-0.9), Eigen::Vector3d(0, 0, 1));
  const RigidPose t(a.rotation * b.rotation.transpose(), Eigen::Vector3d::Zero());
  const AngleCheck c = rcheck(a, b, t, 2.0);
  EXPECT_TRUE(c.pass);
  EXPECT_NEAR(c.error_deg, 0.0, 1e-5);
}

TEST(Rcheck, FiveDegreeYawFails) {
  const double five = 5.0 * kPi / 180.0;
  const RigidPose a(yaw_oracle(0.4), Eigen::Vector3d(1, 0, 0));
  const RigidPose b(yaw_oracle(-0.9), Eigen::Vector3d(0, 0, 1));
  const RigidPose t(yaw_oracle(0.4 + 0.9 + five), Eigen::Vector3d::Zero());
  const AngleCheck c = rcheck(a, b, t, 2.0);
  EXPECT_FALSE(c.pass);
  EXPECT_NEAR(c.error_deg, 5.0, 1e-9);
}

TEST(Rcheck, NoiseFreeSceneRotationsPass) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 200; ++i) {
    const ThreeViews v = random_views(rng);
    const AngleCheck c =
        rcheck(unit_relative(v.ref_a, v.query), unit_relative(v.ref_b, v.query),
               reference_transform(v.ref_a, v.ref_b), 2.0);
    EXPECT_TRUE(c.pass);
  }
}

TEST(Rcheck, SymmetricUnderRelabeling) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 200; ++i) {
    const RigidPose a = testing::random_general_camera(rng);
    const RigidPose b = testing::random_general_camera(rng);
    const RigidPose t = testing::random_general_camera(rng);
    const double e1 = rcheck(a, b, t, 2.0).error_deg;
    const double e2 = rcheck(b, a, t.inverse(), 2.0).error_deg;
    EXPECT_NEAR(e1, e2, 1e-9);
  }
}

TEST(Triangulate2p2p, RecoversCenterDistances) {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 500; ++i) {
    const ThreeViews v = random_views(rng);
    const RigidPose ra = unit_relative(v.ref_a, v.query);
    const RigidPose rb = unit_relative(v.ref_b, v.query);
    const RigidPose t = reference_transform(v.ref_a, v.ref_b);
    const auto s = triangulate_2p2p(ra, rb, t, v.ref_a);
    ASSERT_TRUE(s);
    EXPECT_NEAR(s->rho, testing::center_distance(v.query, v.ref_a), 1e-9);
    ASSERT_TRUE(s->rho2.has_value());
    EXPECT_NEAR(*s->rho2, testing::center_distance(v.query, v.ref_b), 1e-9);
    EXPECT_FALSE(s->regularized);

    // C s - b on noise-free input.
    const Eigen::Vector3d tb =
        ra.rotation * rb.rotation.transpose() * rb.translation;
    const Eigen::Vector3d res =
        s->rho * ra.translation - *s->rho2 * tb - t.translation;
    EXPECT_LT(res.norm(), 1e-10);

    const PoseError e = pose_error(s->query_pose, v.query);
    EXPECT_LT(e.translation_m, 1e-9);
    EXPECT_LT(e.rotation_deg, 1e-9);
  }
}

TEST(Triangulate2p2p, ParallelDirectionsRejected) {
  const RigidPose ra(yaw_oracle(0.2), Eigen::Vector3d(1, 0, 0));
  const RigidPose rb(yaw_oracle(0.2), Eigen::Vector3d(-1, 0, 0));
  const RigidPose t(Eigen::Matrix3d::Identity(), Eigen::Vector3d(2, 0, 0));
  const auto s = triangulate_2p2p(ra, rb, t, RigidPose());
  ASSERT_FALSE(s);
  EXPECT_EQ(s.error(), ErrorCode::kParallelDirections);
}

TEST(Triangulate2p2p, SymmetricReferencesGiveEqualScales) {
  const RigidPose query = testing::planar_camera(0.0, 0.0, 0.0);
  const RigidPose a = testing::planar_camera(0.7, -1.5, 1.5);
  const RigidPose b = testing::planar_camera(-0.7, 1.5, 1.5);
  const auto s = triangulate_2p2p(unit_relative(a, query),
                                  unit_relative(b, query),
                                  reference_transform(a, b), a);
  ASSERT_TRUE(s);
  EXPECT_NEAR(s->rho, *s->rho2, 1e-12);
  EXPECT_NEAR(s->rho, std::sqrt(4.5), 1e-12);
}

TEST(Triangulate2p2p, NearParallelDirectionsAreRegularized) {
  const double eps = 1e-8;
  const RigidPose ra(Eigen::Matrix3d::Identity(), Eigen::Vector3d(1, 0, 0));
  const RigidPose rb(Eigen::Matrix3d::Identity(),
                     Eigen::Vector3d(-1, 0, eps).normalized());
  const RigidPose t(Eigen::Matrix3d::Identity(), Eigen::Vector3d(2, 0, 0));
  const auto s = triangulate_2p2p(ra, rb, t, RigidPose());
  ASSERT_TRUE(s);
  EXPECT_TRUE(s->regularized);
  EXPECT_TRUE(std::isfinite(s->rho));
  EXPECT_TRUE(std::isfinite(*s->rho2));
}

TEST(Pdcheck, Examples) {
  ScaleSolution s;
  s.rho = 1.2;
  s.rho2 = 0.8;
  EXPECT_TRUE(pdcheck(s));
  s.rho = -0.1;
  EXPECT_FALSE(pdcheck(s));
  s.rho = 0.5;
  s.rho2 = -0.3;
  EXPECT_FALSE(pdcheck(s));
  s.rho2.reset();
  EXPECT_TRUE(pdcheck(s));
}

TEST(Pdcheck, NoiseFreeSolutionsPass) {
  std::mt19937_64 rng(44);
  for (int i = 0; i < 200; ++i) {
    const ThreeViews v = random_views(rng);
    const auto s = triangulate_2p2p(unit_relative(v.ref_a, v.query),
                                    unit_relative(v.ref_b, v.query),
                                    reference_transform(v.ref_a, v.ref_b),
                                    v.ref_a);
    ASSERT_TRUE(s);
    EXPECT_TRUE(pdcheck(*s));
  }
}

TEST(ConsistencyCheck, AlignedAndOrthogonal) {
  const RigidPose ref = testing::planar_camera(0.3, 1.0, -2.0);
  const RigidPose query = testing::planar_camera(-0.5, 3.0, 1.0);
  const Eigen::Vector3d t_hat =
      (ref.rotation * (query.center() - ref.center())).normalized();
  const auto aligned = consistency_check(query, ref, t_hat, 2.0);
  ASSERT_TRUE(aligned);
  EXPECT_TRUE(aligned->pass);
  EXPECT_NEAR(aligned->error_deg, 0.0, 1e-5);

  const Eigen::Vector3d ortho = t_hat.cross(Eigen::Vector3d::UnitY()).normalized();
  const auto orth = consistency_check(query, ref, ortho, 2.0);
  ASSERT_TRUE(orth);
  EXPECT_FALSE(orth->pass);
  EXPECT_NEAR(orth->error_deg, 90.0, 1e-9);
}

TEST(ConsistencyCheck, NoiseFreeSceneHasTinyAngle) {
  std::mt19937_64 rng(45);
  for (int i = 0; i < 200; ++i) {
    const ThreeViews v = random_views(rng);
    const RigidPose ra = unit_relative(v.ref_a, v.query);
    const RigidPose rb = unit_relative(v.ref_b, v.query);
    const auto s = triangulate_2p2p(ra, rb, reference_transform(v.ref_a, v.ref_b),
                                    v.ref_a);
    ASSERT_TRUE(s);
    const auto ca = consistency_check(s->query_pose, v.ref_a, ra.translation, 2.0);
    const auto cb = consistency_check(s->query_pose, v.ref_b, rb.translation, 2.0);
    ASSERT_TRUE(ca);
    ASSERT_TRUE(cb);
    EXPECT_TRUE(ca->pass);
    EXPECT_TRUE(cb->pass);
    EXPECT_LT(ca->error_deg, 1e-5);
    EXPECT_LT(cb->error_deg, 1e-5);
  }
}

TEST(ConsistencyCheck, CoincidentCentersUndefined) {
  const RigidPose ref = testing::planar_camera(0.3, 1.0, -2.0);
  const RigidPose query = testing::planar_camera(-0.5, 1.0, -2.0);
  const auto c = consistency_check(query, ref, Eigen::Vector3d::UnitZ(), 2.0);
  ASSERT_FALSE(c);
  EXPECT_EQ(c.error(), ErrorCode::kUndefinedDirection);
}

TEST(SolveScale2p1p, RecoversScaleOver1000Scenes) {
  std::mt19937_64 rng(46);
  for (int i = 0; i < 1000; ++i) {
    const ThreeViews v = random_views(rng);
    const RigidPose ra = unit_relative(v.ref_a, v.query);
    const Correspondence c3 = testing::make_matches(rng, v.query, v.ref_b, 1)[0];
    const auto rho =
        solve_scale_2p1p(ra, reference_transform(v.ref_b, v.ref_a), c3);
    ASSERT_TRUE(rho);
    const double truth = testing::center_distance(v.query, v.ref_a);
    EXPECT_NEAR(*rho / truth, 1.0, 1e-9) << "scene " << i;
  }
}

TEST(SolveScale2p1p, PointOnEpipolarPlaneIsDegenerate) {
  std::mt19937_64 rng(47);
  const ThreeViews v = random_views(rng);
  const RigidPose ra = unit_relative(v.ref_a, v.query);
  const RigidPose t = reference_transform(v.ref_b, v.ref_a);
  Correspondence c3;
  c3.query_point = {0.1, -0.2};
  const Eigen::Vector3d a = t.rotation * ra.translation;
  const Eigen::Vector3d m = t.rotation * ra.rotation * c3.query_h();
  Eigen::Vector3d pj = 0.3 * a + m;
  if (std::abs(pj.z()) < 1e-3) pj = -0.3 * a + m;
  c3.reference_point = pj.head<2>() / pj.z();
  const auto rho = solve_scale_2p1p(ra, t, c3);
  ASSERT_FALSE(rho);
  EXPECT_EQ(rho.error(), ErrorCode::kDegenerateCorrespondence);
}

TEST(SolveScale2p1p, ScalesWithScene) {
  std::mt19937_64 rng(48);
  for (int i = 0; i < 100; ++i) {
    const ThreeViews v = random_views(rng);
    const Eigen::Vector3d x = testing::covisible_point(rng, v.query, v.ref_b);
    const double k = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
    auto scaled = [k](const RigidPose& p) {
      return RigidPose(p.rotation, k * p.translation);
    };
    const Correspondence c = testing::make_match(v.query, v.ref_b, x);
    const Correspondence ck =
        testing::make_match(scaled(v.query), scaled(v.ref_b), k * x);
    const auto r1 = solve_scale_2p1p(unit_relative(v.ref_a, v.query),
                                     reference_transform(v.ref_b, v.ref_a), c);
    const auto r2 = solve_scale_2p1p(
        unit_relative(scaled(v.ref_a), scaled(v.query)),
        reference_transform(scaled(v.ref_b), scaled(v.ref_a)), ck);
    ASSERT_TRUE(r1);
    ASSERT_TRUE(r2);
    EXPECT_NEAR(*r2 / (k * *r1), 1.0, 1e-12);
  }
}

TEST(SolveScale2p1p, AgreesWithTwoRayTriangulation) {
  std::mt19937_64 rng(49);
  for (int i = 0; i < 300; ++i) {
    const ThreeViews v = random_views(rng);
    const RigidPose ra = unit_relative(v.ref_a, v.query);
    const RigidPose rb = unit_relative(v.ref_b, v.query);
    const auto s = triangulate_2p2p(ra, rb, reference_transform(v.ref_a, v.ref_b),
                                    v.ref_a);
    const Correspondence c3 = testing::make_matches(rng, v.query, v.ref_b, 1)[0];
    const auto rho =
        solve_scale_2p1p(ra, reference_transform(v.ref_b, v.ref_a), c3);
    ASSERT_TRUE(s);
    ASSERT_TRUE(rho);
    EXPECT_LT(std::abs(*rho - s->rho), 1e-8);
  }
}

TEST(QueryPoseFromRelative, RoundTrip) {
  std::mt19937_64 rng(50);
  for (int i = 0; i < 100; ++i) {
    const RigidPose q = testing::random_general_camera(rng);
    const RigidPose r = testing::random_general_camera(rng);
    const RigidPose back = query_pose_from_relative(r, relative_pose(r, q));
    EXPECT_LT((back.rotation - q.rotation).norm(), 1e-12);
    EXPECT_LT((back.translation - q.translation).norm(), 1e-12);
  }
}

TEST(AngleChecks, FuzzedRotationsStayInDomain) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const RigidPose a = testing::random_general_camera(rng);
    const RigidPose b = testing::random_general_camera(rng);
    // Nearly identical rotations push the trace argument against +-1.
    const RigidPose t(i % 2 == 0 ? a.rotation * b.rotation.transpose()
                                 : testing::random_general_camera(rng).rotation,
                      Eigen::Vector3d::Zero());
    const AngleCheck r = rcheck(a, b, t, 2.0);
    ASSERT_FALSE(std::isnan(r.error_deg));
    ASSERT_GE(r.error_deg, 0.0);
    ASSERT_LE(r.error_deg, 180.0);
    const Eigen::Vector3d dir = i % 3 == 0
                                    ? (a.rotation * (b.center() - a.center()))
                                          .normalized()
                                    : Eigen::Vector3d(u(rng), u(rng), u(rng))
                                          .normalized();
    const auto c = consistency_check(b, a, dir, 2.0);
    if (c) {
      ASSERT_FALSE(std::isnan(c->error_deg));
      ASSERT_LE(c->error_deg, 180.0);
    }
  }
}

}  // namespace
}  // namespace planarloc
