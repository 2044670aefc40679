#include "planarloc/core_geometry.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace planarloc {
namespace {

using testing::yaw_oracle;

TEST(PlanarToRigid, IdentityAtZero) {
  const RigidPose p = planar_to_rigid(PlanarPose{0.0, 0.0, 0.0});
  EXPECT_TRUE(p.rotation.isApprox(Eigen::Matrix3d::Identity()));
  EXPECT_EQ(p.translation, Eigen::Vector3d::Zero());
}

TEST(PlanarToRigid, UnitForwardStep) {
  const RigidPose p = planar_to_rigid(PlanarPose{0.0, 1.0, 0.0});
  EXPECT_TRUE(p.rotation.isApprox(Eigen::Matrix3d::Identity()));
  EXPECT_LT((p.translation - Eigen::Vector3d(0, 0, -1)).norm(), 1e-15);
}

TEST(PlanarToRigid, QuarterTurnMatchesHandExpansion) {
  // R(pi/2) = [[0,0,-1],[0,1,0],[1,0,0]], d = [sqrt(.5), 0, sqrt(.5)],
  // t = -2 R d = [sqrt(2), 0, -sqrt(2)].
  const RigidPose p = planar_to_rigid(PlanarPose{M_PI / 2, 2.0, M_PI / 4});
  Eigen::Matrix3d r;
  r << 0, 0, -1, 0, 1, 0, 1, 0, 0;
  EXPECT_LT((p.rotation - r).norm(), 1e-15);
  EXPECT_LT((p.translation - Eigen::Vector3d(std::sqrt(2.0), 0, -std::sqrt(2.0)))
                .norm(),
            1e-15);
}

TEST(PlanarToRigid, RotationAgreesWithAxisAngle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (int i = 0; i < 100; ++i) {
    const double theta = u(rng);
    const RigidPose p = planar_to_rigid(PlanarPose{theta, 1.0, u(rng)});
    EXPECT_LT((p.rotation - yaw_oracle(theta)).norm(), 1e-14);
    EXPECT_TRUE(p.is_valid());
    EXPECT_NEAR(p.translation.norm(), 1.0, 1e-14);
    EXPECT_EQ(p.translation.y(), 0.0);
  }
}

TEST(EssentialFromPlanar, Examples) {
  Eigen::Matrix3d e0;
  e0 << 0, 1, 0, -1, 0, 0, 0, 0, 0;
  EXPECT_LT((essential_from_planar(PlanarPose{0, 1, 0}).matrix - e0).norm(),
            1e-15);
  Eigen::Matrix3d e1;
  e1 << 0, 0, 0, -1, 0, 0, 0, 1, 0;
  EXPECT_LT(
      (essential_from_planar(PlanarPose{M_PI / 2, 1, 0}).matrix - e1).norm(),
      1e-15);
}

TEST(EssentialFromPlanar, MatchesSkewTimesRotation) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  std::uniform_real_distribution<double> rho(0.1, 5.0);
  for (int i = 0; i < 200; ++i) {
    const PlanarPose pp{ang(rng), rho(rng), ang(rng)};
    const RigidPose p = planar_to_rigid(pp);
    Eigen::Matrix3d tx;
    const Eigen::Vector3d t = p.translation;
    tx << 0, -t.z(), t.y(), t.z(), 0, -t.x(), -t.y(), t.x(), 0;
    EXPECT_LT((essential_from_planar(pp).matrix - tx * p.rotation).norm(),
              1e-12);
  }
}

TEST(EssentialFromPlanar, ZeroScaleThrows) {
  try {
    essential_from_planar(PlanarPose{0.3, 0.0, 0.1});
    FAIL() << "expected GeometryError";
  } catch (const GeometryError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateMotion);
  }
}

TEST(NormalizePixel, Examples) {
  const CameraIntrinsics k{800, 800, 640, 540};
  EXPECT_EQ(normalize_pixel({640, 540}, k), Eigen::Vector2d(0, 0));
  EXPECT_EQ(normalize_pixel({1440, 540}, k), Eigen::Vector2d(1, 0));
  EXPECT_LT((normalize_pixel({0, 0}, k) - Eigen::Vector2d(-0.8, -0.675)).norm(),
            1e-15);
}

TEST(NormalizePixel, RoundTrip) {
  const CameraIntrinsics k{812.5, 790.0, 633.0, 512.25};
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0, 1280);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector2d p(u(rng), u(rng));
    EXPECT_LT((pixel_from_normalized(normalize_pixel(p, k), k) - p).norm(),
              1e-10);
  }
}

TEST(EpipolarResidual, NoiseFreeMatchIsZero) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 100; ++i) {
    const RigidPose q = testing::random_planar_camera(rng);
    const RigidPose r = testing::random_planar_camera(rng);
    if ((q.center() - r.center()).norm() < 0.1) continue;
    if (!testing::covisible(rng, q, r)) continue;
    const EssentialMatrix e = essential_from_rigid(relative_pose(r, q));
    for (const Correspondence& c : testing::make_matches(rng, q, r, 5)) {
      EXPECT_LT(epipolar_residual(c, e), 1e-12);
    }
  }
}

TEST(EpipolarResidual, WrongPoseGivesPositiveResidual) {
  std::mt19937_64 rng(15);
  const RigidPose q = testing::planar_camera(0.2, 0.0, 0.0);
  const RigidPose r = testing::planar_camera(-0.1, 1.5, -2.0);
  const RigidPose wrong = testing::planar_camera(0.6, -2.0, 1.0);
  const EssentialMatrix e = essential_from_rigid(relative_pose(wrong, q));
  for (const Correspondence& c : testing::make_matches(rng, q, r, 20)) {
    EXPECT_GT(epipolar_residual(c, e), 0.0);
  }
}

TEST(EpipolarResidual, GrowsWithPerturbation) {
  std::mt19937_64 rng(16);
  const RigidPose q = testing::planar_camera(0.0, 0.0, 0.0);
  const RigidPose r = testing::planar_camera(0.3, 2.0, -1.0);
  const EssentialMatrix e = essential_from_rigid(relative_pose(r, q));
  const Correspondence base = testing::make_matches(rng, q, r, 1)[0];
  // Perturb along the gradient direction of the residual.
  const Eigen::Vector3d l = e.matrix.transpose() * base.reference_h();
  const Eigen::Vector2d dir = l.head<2>().normalized();
  double prev = epipolar_residual(base, e);
  for (int i = 1; i <= 20; ++i) {
    Correspondence c = base;
    c.query_point += 1e-4 * i * dir;
    const double r_i = epipolar_residual(c, e);
    EXPECT_GT(r_i, prev);
    prev = r_i;
  }
}

TEST(Sampson, EpipoleReturnsInfinity) {
  Eigen::Matrix3d e;
  e << 0, 1, 0, -1, 0, 0, 0, 0, 0;
  // E p = 0 and E^T p = 0 at p = (0, 0, 1).
  EXPECT_TRUE(std::isinf(
      sampson_signed(e, Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(0, 0, 1))));
}

TEST(RigidPose, InverseAndComposition) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 50; ++i) {
    const RigidPose a = testing::random_general_camera(rng);
    const RigidPose b = testing::random_general_camera(rng);
    const RigidPose id = a * a.inverse();
    EXPECT_LT((id.rotation - Eigen::Matrix3d::Identity()).norm(), 1e-12);
    EXPECT_LT(id.translation.norm(), 1e-12);
    const Eigen::Vector3d x(1.0, -2.0, 3.0);
    EXPECT_LT(((a * b).apply(x) - a.apply(b.apply(x))).norm(), 1e-12);
    EXPECT_LT((RigidPose::from_center(a.rotation, a.center()).translation -
               a.translation)
                  .norm(),
              1e-12);
  }
}

TEST(WrapAngle, RangeAndIdentity) {
  EXPECT_DOUBLE_EQ(wrap_angle(0.5), 0.5);
  EXPECT_NEAR(wrap_angle(2 * M_PI + 0.25), 0.25, 1e-15);
  EXPECT_NEAR(wrap_angle(-M_PI), M_PI, 1e-15);
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng);
    const double w = wrap_angle(a);
    EXPECT_GT(w, -M_PI);
    EXPECT_LE(w, M_PI);
    EXPECT_NEAR(std::sin(w), std::sin(a), 1e-12);
    EXPECT_NEAR(std::cos(w), std::cos(a), 1e-12);
  }
}

TEST(PlanarPose, MakeFoldsNegativeScale) {
  const PlanarPose p = PlanarPose::make(0.2, -1.5, 0.3);
  EXPECT_DOUBLE_EQ(p.rho, 1.5);
  EXPECT_NEAR(p.phi, wrap_angle(0.3 + M_PI), 1e-15);
  const RigidPose a = planar_to_rigid(p);
  const RigidPose b = planar_to_rigid(PlanarPose{0.2, -1.5, 0.3});
  EXPECT_LT((a.translation - b.translation).norm(), 1e-14);
}

}  // namespace
}  // namespace planarloc
