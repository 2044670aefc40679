#pragma once

// Absolute query pose from relative poses to reference views with known
// poses, plus the gates applied along the way.
//
// Relative poses here are unit-baseline poses T_ji = [R | t~] mapping query
// coordinates into reference j coordinates, with |t~| = 1. The metric pose is
// [R | rho * t~].

#include <cmath>
#include <optional>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "planarloc/core_geometry.hpp"
#include "planarloc/problem.hpp"
#include "planarloc/status.hpp"

namespace planarloc {

struct ScaleSolution {
  double rho = 0.0;
  std::optional<double> rho2;
  RigidPose query_pose;
  bool regularized = false;
};

struct AngleCheck {
  bool pass = false;
  double error_deg = 0.0;
};

// Known transform between two reference views: T_ab maps b coordinates into
// a coordinates.
inline RigidPose reference_transform(const RigidPose& pose_a,
                                     const RigidPose& pose_b) {
  return pose_a * pose_b.inverse();
}

// Query world -> camera pose from its relative pose to reference j.
inline RigidPose query_pose_from_relative(const RigidPose& reference_pose,
                                          const RigidPose& relative) {
  return relative.inverse() * reference_pose;
}

inline double rotation_angle_deg(const Eigen::Matrix3d& a,
                                 const Eigen::Matrix3d& b) {
  return deg_from_rad(clamped_acos(0.5 * (a * b.transpose()).trace() - 0.5));
}

// Rotation check: the known inter-reference rotation R12 must match R * R2^T.
inline AngleCheck rcheck(const RigidPose& rel_a, const RigidPose& rel_b,
                         const RigidPose& t_jj2, double threshold_deg) {
  const Eigen::Matrix3d composed = rel_a.rotation * rel_b.rotation.transpose();
  const double err = rotation_angle_deg(t_jj2.rotation, composed);
  return AngleCheck{err <= threshold_deg, err};
}

namespace detail {
inline constexpr double kMaxNormalCondition = 1e12;
inline constexpr double kParallelTolerance = 1e-9;
}  // namespace detail

// Least-squares scales s = [rho, rho2] of C s = b with
// C = [t~, -R R2^T t~2] and b = t12. When C^T C is numerically singular the
// identity-regularized normal equations are used instead.
inline Expected<ScaleSolution> triangulate_2p2p(const RigidPose& rel_a,
                                                const RigidPose& rel_b,
                                                const RigidPose& t_jj2,
                                                const RigidPose& reference_j) {
  const Eigen::Vector3d ta = rel_a.translation;
  const Eigen::Vector3d tb =
      rel_a.rotation * rel_b.rotation.transpose() * rel_b.translation;
  if (ta.cross(tb).norm() < detail::kParallelTolerance * ta.norm() * tb.norm()) {
    return ErrorCode::kParallelDirections;
  }
  Eigen::Matrix<double, 3, 2> c;
  c.col(0) = ta;
  c.col(1) = -tb;
  const Eigen::Matrix2d ctc = c.transpose() * c;
  const Eigen::Vector2d ctb = c.transpose() * t_jj2.translation;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(ctc,
                                                     Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(1);
  ScaleSolution out;
  Eigen::Vector2d s;
  if (lo > 0.0 && hi / lo <= detail::kMaxNormalCondition) {
    s = ctc.ldlt().solve(ctb);
  } else {
    s = (ctc + Eigen::Matrix2d::Identity()).ldlt().solve(ctb);
    out.regularized = true;
  }
  out.rho = s(0);
  out.rho2 = s(1);
  out.query_pose = query_pose_from_relative(
      reference_j, RigidPose(rel_a.rotation, out.rho * rel_a.translation));
  return out;
}

// Positive depth check on the recovered scales.
inline bool pdcheck(const ScaleSolution& s) {
  return s.rho > 0.0 && (!s.rho2.has_value() || *s.rho2 > 0.0);
}

// Angle between the query position seen from the reference, R_j (c_i - c_j),
// and the direction t~ estimated from the essential matrix.
inline Expected<AngleCheck> consistency_check(const RigidPose& query_pose,
                                              const RigidPose& reference_pose,
                                              const Eigen::Vector3d& t_tilde,
                                              double threshold_deg) {
  const Eigen::Vector3d offset = query_pose.center() - reference_pose.center();
  if (offset.norm() < 1e-12) return ErrorCode::kUndefinedDirection;
  const Eigen::Vector3d t_hat = reference_pose.rotation * offset;
  const double alpha =
      deg_from_rad(clamped_acos(t_tilde.dot(t_hat) / t_hat.norm()));
  return AngleCheck{alpha <= threshold_deg, alpha};
}

// Scale rho of the relative pose to reference j from a single match to a
// second reference j2. `t_j2j` maps j coordinates into j2 coordinates, so the
// query -> j2 pose is [R21 R | rho R21 t~ + t21] and the epipolar constraint
// of `c3` is linear in rho.
inline Expected<double> solve_scale_2p1p(const RigidPose& rel,
                                         const RigidPose& t_j2j,
                                         const Correspondence& c3) {
  const Eigen::Vector3d a = t_j2j.rotation * rel.translation;
  const Eigen::Vector3d m = t_j2j.rotation * rel.rotation * c3.query_h();
  const Eigen::Vector3d pj = c3.reference_h();
  const double coeff = pj.dot(a.cross(m));
  const double constant = pj.dot(t_j2j.translation.cross(m));
  if (std::abs(coeff) < 1e-12) return ErrorCode::kDegenerateCorrespondence;
  return -constant / coeff;
}

}  // namespace planarloc
