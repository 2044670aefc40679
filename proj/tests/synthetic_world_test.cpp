#include "planarloc/synthetic_world.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "planarloc/problem_io.hpp"
#include "planarloc/robust_estimator.hpp"
#include "planarloc/metrics.hpp"

namespace planarloc {
namespace {

WorldConfig config(int matches, double sigma, double outliers,
                   std::uint64_t seed) {
  WorldConfig cfg;
  cfg.n_matches = matches;
  cfg.noise_sigma_px = sigma;
  cfg.outlier_rate = outliers;
  cfg.seed = seed;
  return cfg;
}

// p_j^T [t]x R p_i for the ground-truth relative pose, written out directly.
double algebraic_error(const RigidPose& query, const RigidPose& ref,
                       const Correspondence& c) {
  const Eigen::Matrix3d r = ref.rotation * query.rotation.transpose();
  const Eigen::Vector3d t = ref.translation - r * query.translation;
  const Eigen::Vector3d pi(c.query_point.x(), c.query_point.y(), 1.0);
  const Eigen::Vector3d pj(c.reference_point.x(), c.reference_point.y(), 1.0);
  return pj.dot(t.cross(r * pi));
}

bool is_planar(const RigidPose& p) {
  return p.rotation(1, 1) == 1.0 && p.rotation(0, 1) == 0.0 &&
         p.rotation(1, 0) == 0.0 && p.rotation(1, 2) == 0.0 &&
         p.rotation(2, 1) == 0.0 && p.center().y() == 0.0;
}

TEST(Generate, NoiseFreeSatisfiesEpipolarConstraint) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SyntheticScene s = generate(config(100, 0.0, 0.0, seed));
    ASSERT_EQ(s.problem.references.size(), 5u);
    for (const auto& ref : s.problem.references) {
      ASSERT_EQ(ref.correspondences.size(), 100u);
      for (const auto& c : ref.correspondences) {
        EXPECT_LT(std::abs(algebraic_error(s.ground_truth, ref.pose, c)), 1e-10);
      }
    }
  }
}

TEST(Generate, OutlierCountIsExact) {
  const SyntheticScene s = generate(config(100, 1.0, 0.3, 5));
  for (const auto& mask : s.outlier_mask) {
    EXPECT_EQ(std::count(mask.begin(), mask.end(), true), 30);
  }
  EXPECT_EQ(s.outlier_count(), 150u);
}

TEST(Generate, NoiseMagnitudeMatchesSigma) {
  // Per-axis RMS perturbation over 10,000 inlier pixels.
  WorldConfig noisy = config(100, 5.0, 0.0, 9);
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (int rep = 0; rep < 20 && n < 10000; ++rep) {
    noisy.seed = 900 + rep;
    const SyntheticScene sn = generate(noisy);
    for (std::size_t k = 0; k < sn.problem.references.size(); ++k) {
      for (std::size_t m = 0; m < sn.world_points[k].size(); ++m) {
        const RigidPose& ref = sn.problem.references[k].pose;
        const Eigen::Vector3d x = ref.apply(sn.world_points[k][m]);
        const Eigen::Vector2d px(800.0 * x.x() / x.z() + 640.0,
                                 800.0 * x.y() / x.z() + 540.0);
        const Eigen::Vector2d got = pixel_from_normalized(
            sn.problem.references[k].correspondences[m].reference_point,
            sn.problem.intrinsics);
        sum_sq += 0.5 * (got - px).squaredNorm();
        ++n;
      }
    }
  }
  ASSERT_GE(n, 10000u);
  const double rms = std::sqrt(sum_sq / double(n));
  EXPECT_GE(rms, 4.0);
  EXPECT_LE(rms, 6.0);
}

TEST(Generate, InliersWithinTenSigma) {
  const SyntheticScene s = generate(config(100, 2.0, 0.4, 11));
  const double bound = 10.0 * 2.0 / 800.0;
  for (std::size_t k = 0; k < s.problem.references.size(); ++k) {
    const RigidPose rel = relative_pose(s.problem.references[k].pose, s.ground_truth);
    const EssentialMatrix e = essential_from_rigid(rel);
    for (std::size_t m = 0; m < s.outlier_mask[k].size(); ++m) {
      if (s.outlier_mask[k][m]) continue;
      EXPECT_LT(epipolar_residual(s.problem.references[k].correspondences[m], e),
                bound);
    }
  }
}

TEST(Generate, OutliersExceedInlierGate) {
  std::size_t total = 0, above = 0;
  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    const SyntheticScene s = generate(config(100, 0.0, 0.5, seed));
    for (std::size_t k = 0; k < s.problem.references.size(); ++k) {
      const EssentialMatrix e = essential_from_rigid(
          relative_pose(s.problem.references[k].pose, s.ground_truth));
      for (std::size_t m = 0; m < s.outlier_mask[k].size(); ++m) {
        if (!s.outlier_mask[k][m]) continue;
        ++total;
        above += epipolar_residual(s.problem.references[k].correspondences[m],
                                   e) > s.problem.thresholds.sampson_inlier;
      }
    }
  }
  EXPECT_GE(double(above), 0.95 * double(total));
}

TEST(Generate, PosesArePlanar) {
  for (std::uint64_t seed = 40; seed < 60; ++seed) {
    const SyntheticScene s = generate(config(20, 1.0, 0.0, seed));
    EXPECT_TRUE(is_planar(s.ground_truth));
    for (const auto& ref : s.problem.references) EXPECT_TRUE(is_planar(ref.pose));
  }
}

TEST(Generate, DeterministicBytes) {
  const WorldConfig cfg = config(50, 3.0, 0.2, 77);
  const SyntheticScene a = generate(cfg);
  const SyntheticScene b = generate(cfg);
  const ProblemFile fa{a.problem, a.ground_truth, a.outlier_mask};
  const ProblemFile fb{b.problem, b.ground_truth, b.outlier_mask};
  EXPECT_EQ(problem_to_json(fa), problem_to_json(fb));
  EXPECT_EQ(a.world_points, b.world_points);
}

TEST(Generate, NoiseFreeSceneRecoveredBy2p2p) {
  const SyntheticScene s = generate(config(20, 0.0, 0.0, 78));
  const LocalizationResult r = estimate_2p2p(s.problem);
  ASSERT_TRUE(r.has_pose());
  EXPECT_LT(pose_error(r.pose, s.ground_truth).translation_m, 1e-6);
}

TEST(Generate, InvalidConfigThrows) {
  WorldConfig cfg = config(20, 0.0, 1.5, 1);
  EXPECT_THROW(generate(cfg), std::invalid_argument);
  cfg = config(0, 0.0, 0.0, 1);
  EXPECT_THROW(generate(cfg), std::invalid_argument);
  cfg = config(20, 0.0, 0.0, 1);
  cfg.n_references = 1;
  EXPECT_THROW(generate(cfg), std::invalid_argument);
}

TEST(Corrupt, ZeroIsIdentity) {
  const SyntheticScene s = generate(config(20, 1.0, 0.1, 79));
  const SyntheticScene c = corrupt(s, 0.0);
  EXPECT_EQ(c.problem, s.problem);
  EXPECT_EQ(c.outlier_mask, s.outlier_mask);
}

TEST(Corrupt, SixtyPercentOfTwenty) {
  const SyntheticScene s = generate(config(20, 0.0, 0.0, 80));
  const SyntheticScene c = corrupt(s, 0.6);
  for (const auto& mask : c.outlier_mask) {
    EXPECT_EQ(std::count(mask.begin(), mask.end(), true), 12);
  }
  EXPECT_EQ(s.outlier_count(), 0u);
  EXPECT_THROW(corrupt(c, 0.6), std::invalid_argument);
}

}  // namespace
}  // namespace planarloc
