#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "planarloc/core_geometry.hpp"

namespace planarloc {

struct PoseError {
  double rotation_deg = 0.0;
  double translation_m = 0.0;
  double direction_deg = 0.0;
};

struct SuccessCriterion {
  double max_translation_m = 0.1;
  double max_rotation_deg = 1.0;

  bool accepts(const PoseError& e) const {
    return e.translation_m < max_translation_m &&
           e.rotation_deg < max_rotation_deg;
  }
};

// Angle of R_a R_b^T in degrees. Same value as
// acos(0.5 * tr(R_a R_b^T) - 0.5), evaluated through atan2 so that errors
// far below 1e-6 deg are still resolved.
inline double rotation_error_deg(const Eigen::Matrix3d& a,
                                 const Eigen::Matrix3d& b) {
  const Eigen::Matrix3d d = a * b.transpose();
  const Eigen::Vector3d axis(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0),
                             d(1, 0) - d(0, 1));
  return deg_from_rad(std::atan2(0.5 * axis.norm(), 0.5 * (d.trace() - 1.0)));
}

// Rotation error from the trace formula, translation error as the Euclidean
// norm of the translation difference, and the angle between the estimated
// and true translation directions. Direction error is 0 when the true
// translation vanishes, and 90 deg when only the estimate's does.
inline PoseError pose_error(const RigidPose& estimate, const RigidPose& truth) {
  PoseError e;
  e.rotation_deg = rotation_error_deg(estimate.rotation, truth.rotation);
  e.translation_m = (estimate.translation - truth.translation).norm();
  const double gt_norm = truth.translation.norm();
  const double est_norm = estimate.translation.norm();
  if (gt_norm < 1e-12) {
    e.direction_deg = 0.0;
  } else if (est_norm < 1e-12) {
    e.direction_deg = 90.0;
  } else {
    e.direction_deg = deg_from_rad(
        std::atan2(estimate.translation.cross(truth.translation).norm(),
                   estimate.translation.dot(truth.translation)));
  }
  return e;
}

// Fraction of errors strictly inside both bounds.
inline double success_rate(std::span<const PoseError> errors,
                           const SuccessCriterion& criterion) {
  if (errors.empty()) throw std::invalid_argument("EmptyInput");
  std::size_t ok = 0;
  for (const PoseError& e : errors) ok += criterion.accepts(e);
  return double(ok) / double(errors.size());
}

}  // namespace planarloc
