#pragma once

// Shared geometric types for planar-motion localization.
//
// Conventions used throughout the library:
//  * A RigidPose (R, t) maps points from one frame into another:
//    x_dst = R * x_src + t. Camera poses map world -> camera, so the camera
//    center is c = -R^T t.
//  * Planar motion is a yaw about the camera y axis plus a translation in the
//    xz plane. For a query view i and reference view j the relative pose
//    T_ji maps query coordinates into reference coordinates, and
//    p_j^T E p_i = 0 with E = [t]x R.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "planarloc/status.hpp"

namespace planarloc {

inline constexpr double kPi = std::numbers::pi;

inline double deg_from_rad(double rad) { return rad * 180.0 / kPi; }
inline double rad_from_deg(double deg) { return deg * kPi / 180.0; }

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double angle) {
  double wrapped = std::remainder(angle, 2.0 * kPi);
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

// acos with its argument clamped to [-1, 1].
inline double clamped_acos(double x) {
  return std::acos(std::clamp(x, -1.0, 1.0));
}

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

// Rotation by `theta` about the y axis in the sign convention of the planar
// model: [[c, 0, -s], [0, 1, 0], [s, 0, c]].
inline Eigen::Matrix3d yaw_rotation(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix3d r;
  r << c, 0.0, -s,
       0.0, 1.0, 0.0,
       s, 0.0, c;
  return r;
}

// Rotation matrix of the axis-angle vector `w` (Rodrigues).
inline Eigen::Matrix3d exp_so3(const Eigen::Vector3d& w) {
  const double angle = w.norm();
  if (angle < 1e-300) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

struct PlanarPose {
  double theta = 0.0;  // yaw, radians
  double rho = 0.0;    // translation scale, meters
  double phi = 0.0;    // translation direction in the xz plane, radians

  // Builds a pose with both angles wrapped to (-pi, pi]. A negative rho is
  // folded into phi so that rho >= 0 always holds.
  static PlanarPose make(double theta, double rho, double phi) {
    if (rho < 0.0) {
      rho = -rho;
      phi += kPi;
    }
    return PlanarPose{wrap_angle(theta), rho, wrap_angle(phi)};
  }
};

struct RigidPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  RigidPose() = default;
  RigidPose(Eigen::Matrix3d r, Eigen::Vector3d t)
      : rotation(std::move(r)), translation(std::move(t)) {}

  static RigidPose from_center(const Eigen::Matrix3d& r,
                               const Eigen::Vector3d& center) {
    return RigidPose(r, -r * center);
  }

  Eigen::Vector3d center() const { return -rotation.transpose() * translation; }

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const {
    return rotation * x + translation;
  }

  RigidPose inverse() const {
    const Eigen::Matrix3d rt = rotation.transpose();
    return RigidPose(rt, -rt * translation);
  }

  // (this * other) applies `other` first.
  RigidPose operator*(const RigidPose& other) const {
    return RigidPose(rotation * other.rotation,
                     rotation * other.translation + translation);
  }

  bool is_valid(double tol = 1e-9) const {
    return (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
                   .norm() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol;
  }

  friend bool operator==(const RigidPose& a, const RigidPose& b) {
    return a.rotation == b.rotation && a.translation == b.translation;
  }
};

struct EssentialMatrix {
  Eigen::Matrix3d matrix = Eigen::Matrix3d::Zero();
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  bool is_valid() const { return fx > 0.0 && fy > 0.0; }

  friend bool operator==(const CameraIntrinsics&,
                         const CameraIntrinsics&) = default;
};

// One 2D-2D match in normalized image coordinates.
struct Correspondence {
  Eigen::Vector2d query_point = Eigen::Vector2d::Zero();
  Eigen::Vector2d reference_point = Eigen::Vector2d::Zero();
  int reference_index = 0;

  Eigen::Vector3d query_h() const { return query_point.homogeneous(); }
  Eigen::Vector3d reference_h() const { return reference_point.homogeneous(); }

  bool is_finite() const {
    return query_point.allFinite() && reference_point.allFinite();
  }

  friend bool operator==(const Correspondence& a, const Correspondence& b) {
    return a.query_point == b.query_point &&
           a.reference_point == b.reference_point &&
           a.reference_index == b.reference_index;
  }
};

// Relative pose of the planar model: R = yaw_rotation(theta),
// t = -R * rho * [sin(phi), 0, cos(phi)]^T.
inline RigidPose planar_to_rigid(const PlanarPose& pose) {
  const Eigen::Matrix3d r = yaw_rotation(pose.theta);
  const Eigen::Vector3d dir(std::sin(pose.phi), 0.0, std::cos(pose.phi));
  return RigidPose(r, -pose.rho * (r * dir));
}

// Closed-form planar essential matrix. Throws on rho <= 0, where the
// translation direction is undefined and E vanishes.
inline EssentialMatrix essential_from_planar(const PlanarPose& pose) {
  if (!(pose.rho > 0.0)) throw GeometryError(ErrorCode::kDegenerateMotion);
  const double d = pose.theta - pose.phi;
  EssentialMatrix e;
  e.matrix << 0.0, std::cos(d), 0.0,
              -std::cos(pose.phi), 0.0, std::sin(pose.phi),
              0.0, std::sin(d), 0.0;
  e.matrix *= pose.rho;
  return e;
}

inline EssentialMatrix essential_from_rigid(const RigidPose& relative) {
  return EssentialMatrix{skew(relative.translation) * relative.rotation};
}

inline Eigen::Vector2d normalize_pixel(const Eigen::Vector2d& p,
                                       const CameraIntrinsics& k) {
  return Eigen::Vector2d((p.x() - k.cx) / k.fx, (p.y() - k.cy) / k.fy);
}

inline Eigen::Vector2d pixel_from_normalized(const Eigen::Vector2d& p,
                                             const CameraIntrinsics& k) {
  return Eigen::Vector2d(p.x() * k.fx + k.cx, p.y() * k.fy + k.cy);
}

// Signed Sampson distance of (query, reference) with respect to E. Returns
// +inf when the point sits at an epipole and the gradient vanishes.
inline double sampson_signed(const Eigen::Matrix3d& e,
                             const Eigen::Vector3d& query_h,
                             const Eigen::Vector3d& reference_h) {
  const Eigen::Vector3d line_ref = e * query_h;
  const Eigen::Vector3d line_query = e.transpose() * reference_h;
  const double algebraic = reference_h.dot(line_ref);
  const double denom = line_ref.head<2>().squaredNorm() +
                       line_query.head<2>().squaredNorm();
  if (std::sqrt(denom) < 1e-15) return std::numeric_limits<double>::infinity();
  return algebraic / std::sqrt(denom);
}

// Unsigned Sampson distance in normalized image units.
inline double epipolar_residual(const Correspondence& c,
                                const EssentialMatrix& e) {
  const double d = sampson_signed(e.matrix, c.query_h(), c.reference_h());
  return std::abs(d);
}

// Relative pose T_ji mapping query-camera coordinates into reference-camera
// coordinates, given both world -> camera poses.
inline RigidPose relative_pose(const RigidPose& reference,
                               const RigidPose& query) {
  return reference * query.inverse();
}

}  // namespace planarloc
