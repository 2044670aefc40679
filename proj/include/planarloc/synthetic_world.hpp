#pragma once

// Synthetic scenes for the simulation study: random points in a cube, planar
// camera poses, Gaussian pixel noise and outliers produced by projecting
// through wrong poses.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "planarloc/core_geometry.hpp"
#include "planarloc/problem.hpp"
#include "planarloc/random.hpp"

namespace planarloc {

struct WorldConfig {
  double point_cube_half_width = 10.0;
  double translation_range = 5.0;  // |x|, |z| <= range
  double rotation_range = kPi;     // |yaw| <= range
  double focal = 800.0;
  int width = 1280;
  int height = 1080;
  Eigen::Vector2d principal_point{640.0, 540.0};
  int n_matches = 100;  // per reference
  double noise_sigma_px = 0.0;
  double outlier_rate = 0.0;
  int n_references = 5;
  std::uint64_t seed = 0;
  double inlier_threshold_px = 2.5;
  int iterations = 100;

  bool is_valid() const {
    return outlier_rate >= 0.0 && outlier_rate <= 1.0 && n_matches >= 1 &&
           n_references >= 2 && focal > 0.0 && width > 0 && height > 0;
  }

  CameraIntrinsics intrinsics() const {
    return CameraIntrinsics{focal, focal, principal_point.x(),
                            principal_point.y()};
  }
};

struct SyntheticScene {
  LocalizationProblem problem;
  RigidPose ground_truth;
  // Per reference, per correspondence.
  std::vector<std::vector<bool>> outlier_mask;
  std::vector<std::vector<Eigen::Vector3d>> world_points;
  WorldConfig config;
  std::uint64_t corruption_epoch = 0;

  std::size_t outlier_count() const {
    std::size_t n = 0;
    for (const auto& m : outlier_mask) n += std::count(m.begin(), m.end(), true);
    return n;
  }
};

class InfeasibleScene : public std::runtime_error {
 public:
  InfeasibleScene()
      : std::runtime_error("InfeasibleScene: not enough co-visible points") {}
};

namespace detail {

inline RigidPose random_planar_camera(Rng& rng, const WorldConfig& cfg) {
  const double yaw = uniform_real(rng, -cfg.rotation_range, cfg.rotation_range);
  const double x = uniform_real(rng, -cfg.translation_range, cfg.translation_range);
  const double z = uniform_real(rng, -cfg.translation_range, cfg.translation_range);
  return RigidPose::from_center(yaw_rotation(yaw), Eigen::Vector3d(x, 0.0, z));
}

// Pixel projection, or nullopt when behind the camera or outside the image.
inline std::optional<Eigen::Vector2d> project_visible(const RigidPose& cam,
                                                      const Eigen::Vector3d& x,
                                                      const WorldConfig& cfg) {
  const Eigen::Vector3d xc = cam.apply(x);
  if (!(xc.z() > 0.0)) return std::nullopt;
  const Eigen::Vector2d px(cfg.focal * xc.x() / xc.z() + cfg.principal_point.x(),
                           cfg.focal * xc.y() / xc.z() + cfg.principal_point.y());
  if (px.x() < 0.0 || px.x() >= cfg.width || px.y() < 0.0 ||
      px.y() >= cfg.height) {
    return std::nullopt;
  }
  return px;
}

inline Eigen::Vector2d add_noise(Rng& rng, const Eigen::Vector2d& px,
                                 double sigma) {
  if (sigma <= 0.0) return px;
  std::normal_distribution<double> n(0.0, sigma);
  const double dx = n(rng);
  const double dy = n(rng);
  return px + Eigen::Vector2d(dx, dy);
}

// Reference pixel of `x` seen through a wrong planar pose.
inline Eigen::Vector2d outlier_pixel(Rng& rng, const Eigen::Vector3d& x,
                                     const WorldConfig& cfg) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const RigidPose wrong = random_planar_camera(rng, cfg);
    if (auto px = project_visible(wrong, x, cfg)) return *px;
  }
  return Eigen::Vector2d(uniform_real(rng, 0.0, cfg.width),
                         uniform_real(rng, 0.0, cfg.height));
}

inline void make_outlier(Rng& rng, SyntheticScene& scene, std::size_t ref,
                         std::size_t idx) {
  const WorldConfig& cfg = scene.config;
  const Eigen::Vector2d px = add_noise(
      rng, outlier_pixel(rng, scene.world_points[ref][idx], cfg),
      cfg.noise_sigma_px);
  scene.problem.references[ref].correspondences[idx].reference_point =
      normalize_pixel(px, cfg.intrinsics());
  scene.outlier_mask[ref][idx] = true;
}

inline std::size_t outliers_for(double rate, int n) {
  return std::size_t(std::llround(rate * double(n)));
}

}  // namespace detail

// Builds a scene deterministically from `config.seed`. Each reference gets
// n_matches points visible in both the query and that reference. Throws
// InfeasibleScene after 1000 failed reference placements.
inline SyntheticScene generate(const WorldConfig& config) {
  if (!config.is_valid()) throw std::invalid_argument("invalid WorldConfig");
  Rng rng(derive_seed(config.seed, 0x5ce9e));
  const CameraIntrinsics k = config.intrinsics();

  SyntheticScene scene;
  scene.config = config;
  scene.ground_truth = detail::random_planar_camera(rng, config);
  scene.problem.intrinsics = k;
  scene.problem.thresholds =
      CheckThresholds::for_focal(config.focal, config.inlier_threshold_px);
  scene.problem.iterations = config.iterations;
  scene.problem.rng_seed = derive_seed(config.seed, 0x5a3c);

  const double half = config.point_cube_half_width;
  const std::size_t point_budget = 50 * std::size_t(config.n_matches) + 1000;
  for (int r = 0; r < config.n_references; ++r) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      const RigidPose ref_pose = detail::random_planar_camera(rng, config);
      ReferenceView view;
      view.pose = ref_pose;
      std::vector<Eigen::Vector3d> points;
      for (std::size_t tries = 0;
           tries < point_budget && int(points.size()) < config.n_matches;
           ++tries) {
        const Eigen::Vector3d x(uniform_real(rng, -half, half),
                                uniform_real(rng, -half, half),
                                uniform_real(rng, -half, half));
        const auto pq = detail::project_visible(scene.ground_truth, x, config);
        if (!pq) continue;
        const auto pr = detail::project_visible(ref_pose, x, config);
        if (!pr) continue;
        Correspondence c;
        c.query_point = normalize_pixel(
            detail::add_noise(rng, *pq, config.noise_sigma_px), k);
        c.reference_point = normalize_pixel(
            detail::add_noise(rng, *pr, config.noise_sigma_px), k);
        c.reference_index = r;
        view.correspondences.push_back(c);
        points.push_back(x);
      }
      if (int(points.size()) < config.n_matches) continue;
      scene.problem.references.push_back(std::move(view));
      scene.world_points.push_back(std::move(points));
      scene.outlier_mask.emplace_back(config.n_matches, false);
      placed = true;
    }
    if (!placed) throw InfeasibleScene();
  }

  const std::size_t n_out =
      detail::outliers_for(config.outlier_rate, config.n_matches);
  for (std::size_t r = 0; r < scene.problem.references.size(); ++r) {
    std::vector<std::size_t> idx(config.n_matches);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t m = 0; m < n_out; ++m) {
      detail::make_outlier(rng, scene, r, idx[m]);
    }
  }
  return scene;
}

// Converts round(extra * n_matches) further inliers per reference into
// outliers, chosen uniformly.
inline SyntheticScene corrupt(const SyntheticScene& scene,
                              double extra_outlier_rate) {
  SyntheticScene out = scene;
  const std::size_t n_extra = detail::outliers_for(
      extra_outlier_rate, scene.config.n_matches);
  if (n_extra == 0) return out;
  ++out.corruption_epoch;
  Rng rng(derive_seed(scene.config.seed, 0xc0447, out.corruption_epoch));
  for (std::size_t r = 0; r < out.problem.references.size(); ++r) {
    std::vector<std::size_t> clean;
    for (std::size_t m = 0; m < out.outlier_mask[r].size(); ++m) {
      if (!out.outlier_mask[r][m]) clean.push_back(m);
    }
    if (n_extra > clean.size()) {
      throw std::invalid_argument("outlier rate would exceed 1");
    }
    std::shuffle(clean.begin(), clean.end(), rng);
    for (std::size_t m = 0; m < n_extra; ++m) {
      detail::make_outlier(rng, out, r, clean[m]);
    }
  }
  return out;
}

}  // namespace planarloc
