#pragma once

// Two-point essential matrix estimation under planar motion.
//
// Each correspondence gives one linear equation in
//   x = [sin(theta - phi), cos(theta - phi), sin(phi), cos(phi)].
// Two correspondences leave a 2D kernel x = l1 * X1 + l2 * X2, which is cut
// down to a finite set by the unit-circle constraints on (x1, x2) and (x3, x4).

#include <array>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "planarloc/core_geometry.hpp"
#include "planarloc/status.hpp"

namespace planarloc {

// Coefficients of one planar epipolar equation a*x1 + b*x2 + c*x3 + d*x4 = 0.
struct EpipolarRow {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  Eigen::RowVector4d as_row() const { return Eigen::RowVector4d(a, b, c, d); }
};

struct TrigSolution {
  double x1 = 0.0;  // sin(theta - phi)
  double x2 = 0.0;  // cos(theta - phi)
  double x3 = 0.0;  // sin(phi)
  double x4 = 0.0;  // cos(phi)

  Eigen::Vector4d as_vector() const { return Eigen::Vector4d(x1, x2, x3, x4); }

  static TrigSolution from_angles(double theta, double phi) {
    return TrigSolution{std::sin(theta - phi), std::cos(theta - phi),
                        std::sin(phi), std::cos(phi)};
  }
};

// Planar relative pose with unit translation direction
// t~ = -R(theta) [sin(phi), 0, cos(phi)]^T.
struct RelativePoseCandidate {
  double theta = 0.0;
  double phi = 0.0;
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();

  static RelativePoseCandidate from_angles(double theta, double phi) {
    RelativePoseCandidate c;
    c.theta = wrap_angle(theta);
    c.phi = wrap_angle(phi);
    c.direction = planar_to_rigid(PlanarPose{c.theta, 1.0, c.phi}).translation;
    return c;
  }

  Eigen::Matrix3d rotation() const { return yaw_rotation(theta); }

  // Relative pose T_ji with unit baseline.
  RigidPose unit_pose() const { return RigidPose(rotation(), direction); }
};

inline EpipolarRow build_constraint_row(const Correspondence& c) {
  const double ui = c.query_point.x();
  const double vi = c.query_point.y();
  const double uj = c.reference_point.x();
  const double vj = c.reference_point.y();
  return EpipolarRow{vi, vi * uj, vj, -ui * vj};
}

namespace detail {

// Singular values of A below this fraction of the largest count as zero.
inline constexpr double kRankTolerance = 1e-12;
// Accept a complex ratio root when |imag| < kImagTolerance * |real|.
inline constexpr double kImagTolerance = 1e-10;

}  // namespace detail

// Intersects the kernel of the 2x4 system with the unit-circle constraints.
// Returns 0-4 solutions, closed under x -> -x.
inline Expected<std::vector<TrigSolution>> solve_2p_rows(const EpipolarRow& r1,
                                                         const EpipolarRow& r2) {
  Eigen::Matrix<double, 2, 4> a;
  a.row(0) = r1.as_row();
  a.row(1) = r2.as_row();
  if (!a.allFinite()) return ErrorCode::kDegenerateConfiguration;

  Eigen::JacobiSVD<Eigen::Matrix<double, 2, 4>> svd(a, Eigen::ComputeFullV);
  const Eigen::Vector2d sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= detail::kRankTolerance * sv(0)) {
    return ErrorCode::kDegenerateConfiguration;
  }
  const Eigen::Vector4d k1 = svd.matrixV().col(2);
  const Eigen::Vector4d k2 = svd.matrixV().col(3);

  // q1(l) = l^T M l = x1^2 + x2^2. With an orthonormal kernel basis
  // x3^2 + x4^2 = |l|^2 - q1(l), so q1 = q2 = 1 reduces to
  // l^T (2M - I) l = 0 together with q1(l) = 1.
  Eigen::Matrix2d m;
  m(0, 0) = k1.head<2>().squaredNorm();
  m(1, 1) = k2.head<2>().squaredNorm();
  m(0, 1) = m(1, 0) = k1.head<2>().dot(k2.head<2>());
  const double p = 2.0 * m(0, 0) - 1.0;
  const double q = 4.0 * m(0, 1);  // p l1^2 + q l1 l2 + r l2^2 = 0
  const double r = 2.0 * m(1, 1) - 1.0;

  const double scale = std::max({std::abs(p), std::abs(q), std::abs(r)});
  if (scale < 1e-14) return ErrorCode::kDegenerateConfiguration;

  // Ratio l1 = s * l2 solves p s^2 + q s + r = 0; the l2 = 0 branch is the
  // root at infinity when p vanishes. Roots are kept as directions (l1, l2)
  // so both branches come out of the same formula without dividing by p.
  double disc = q * q - 4.0 * p * r;
  if (disc < 0.0) {
    const double real = std::abs(q);
    const double imag = std::sqrt(-disc);
    if (imag >= detail::kImagTolerance * real) return ErrorCode::kNoRealSolution;
    disc = 0.0;
  }
  const double root = std::sqrt(disc);
  const double k = -0.5 * (q + (q >= 0.0 ? root : -root));
  std::array<Eigen::Vector2d, 2> dirs;
  int n_dirs = 0;
  auto push_dir = [&](const Eigen::Vector2d& d) {
    if (d.norm() <= 1e-14 * scale) return;
    const Eigen::Vector2d u = d.normalized();
    for (int i = 0; i < n_dirs; ++i) {
      if (std::abs(std::abs(dirs[i].dot(u)) - 1.0) < 1e-15) return;
    }
    dirs[n_dirs++] = u;
  };
  // Roots k / p and r / k written as directions (k, p) and (r, k).
  push_dir(Eigen::Vector2d(k, p));
  push_dir(Eigen::Vector2d(r, k));
  if (n_dirs == 0) return ErrorCode::kDegenerateConfiguration;

  std::vector<TrigSolution> out;
  out.reserve(2 * n_dirs);
  for (int i = 0; i < n_dirs; ++i) {
    const double q1 = dirs[i].dot(m * dirs[i]);
    if (!(q1 > 0.0)) continue;
    const Eigen::Vector2d l = dirs[i] / std::sqrt(q1);
    const Eigen::Vector4d x = l(0) * k1 + l(1) * k2;
    out.push_back(TrigSolution{x(0), x(1), x(2), x(3)});
    out.push_back(TrigSolution{-x(0), -x(1), -x(2), -x(3)});
  }
  if (out.empty()) return ErrorCode::kNoRealSolution;
  return out;
}

inline Expected<std::vector<TrigSolution>> solve_2p(const Correspondence& c1,
                                                    const Correspondence& c2) {
  return solve_2p_rows(build_constraint_row(c1), build_constraint_row(c2));
}

// (theta, phi) with phi = atan2(x3, x4) and theta = atan2(x1, x2) + phi.
inline std::pair<double, double> angles_from(const TrigSolution& s) {
  const double phi = std::atan2(s.x3, s.x4);
  const double theta = wrap_angle(std::atan2(s.x1, s.x2) + phi);
  return {theta, phi};
}

inline RelativePoseCandidate candidate_from(const TrigSolution& s) {
  const auto [theta, phi] = angles_from(s);
  return RelativePoseCandidate::from_angles(theta, phi);
}

// Midpoint triangulation of a match under relative pose T_ji (query -> ref).
// Returns false when the rays are parallel.
inline bool triangulate_midpoint(const RigidPose& rel, const Eigen::Vector3d& q,
                                 const Eigen::Vector3d& r,
                                 Eigen::Vector3d* point) {
  const Eigen::Matrix3d rt = rel.rotation.transpose();
  const Eigen::Vector3d center = -rt * rel.translation;
  const Eigen::Vector3d b = rt * r;
  const double aa = q.dot(q);
  const double bb = b.dot(b);
  const double ab = q.dot(b);
  const double det = aa * bb - ab * ab;
  if (det <= 1e-14 * aa * bb) return false;
  const double ac = q.dot(center);
  const double bc = b.dot(center);
  const double lq = (bb * ac - ab * bc) / det;
  const double lr = (ab * ac - aa * bc) / det;
  *point = 0.5 * (lq * q + center + lr * b);
  return true;
}

inline bool has_positive_depth(const RigidPose& rel, const Correspondence& c) {
  Eigen::Vector3d x;
  if (!triangulate_midpoint(rel, c.query_h(), c.reference_h(), &x)) {
    return false;
  }
  return x.z() > 0.0 && rel.apply(x).z() > 0.0;
}

struct CheiralityScore {
  int positive = 0;
  double mean_residual = 0.0;
};

inline CheiralityScore score_cheirality(const RigidPose& rel,
                                        std::span<const Correspondence> matches) {
  CheiralityScore s;
  const Eigen::Matrix3d e = skew(rel.translation) * rel.rotation;
  double sum = 0.0;
  for (const Correspondence& c : matches) {
    if (has_positive_depth(rel, c)) ++s.positive;
    sum += std::abs(sampson_signed(e, c.query_h(), c.reference_h()));
  }
  s.mean_residual = matches.empty() ? 0.0 : sum / double(matches.size());
  return s;
}

// Picks the unit-baseline relative pose with the most matches in front of
// both cameras; ties go to the lower mean Sampson residual.
inline Expected<std::size_t> cheirality_select_index(
    std::span<const RigidPose> candidates,
    std::span<const Correspondence> matches) {
  if (candidates.empty()) return ErrorCode::kCheiralityAmbiguous;
  std::vector<CheiralityScore> scores;
  scores.reserve(candidates.size());
  for (const RigidPose& c : candidates) {
    scores.push_back(score_cheirality(c, matches));
  }
  auto better = [](const CheiralityScore& x, const CheiralityScore& y) {
    if (x.positive != y.positive) return x.positive > y.positive;
    return x.mean_residual < y.mean_residual;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (better(scores[i], scores[best])) best = i;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == best) continue;
    if (scores[i].positive == scores[best].positive &&
        std::abs(scores[i].mean_residual - scores[best].mean_residual) <=
            1e-12) {
      return ErrorCode::kCheiralityAmbiguous;
    }
  }
  return best;
}

inline Expected<RelativePoseCandidate> cheirality_select(
    std::span<const RelativePoseCandidate> candidates,
    std::span<const Correspondence> matches) {
  if (candidates.size() == 1) return candidates.front();
  std::vector<RigidPose> poses;
  poses.reserve(candidates.size());
  for (const auto& c : candidates) poses.push_back(c.unit_pose());
  const auto best = cheirality_select_index(poses, matches);
  if (!best) return best.error();
  return candidates[*best];
}

// solve_2p, then cheirality_select over `matches` within each +-t~ pair.
// Distinct roots are all kept; a root whose sign is ambiguous is dropped.
inline Expected<std::vector<RelativePoseCandidate>> relative_candidates_2p(
    const Correspondence& c1, const Correspondence& c2,
    std::span<const Correspondence> matches) {
  const auto sols = solve_2p(c1, c2);
  if (!sols) return sols.error();
  std::vector<RelativePoseCandidate> out;
  for (std::size_t i = 0; i + 1 < sols->size(); i += 2) {
    const std::array<RelativePoseCandidate, 2> pair{
        candidate_from((*sols)[i]), candidate_from((*sols)[i + 1])};
    const auto pick = cheirality_select(pair, matches);
    if (pick) out.push_back(*pick);
  }
  return out;
}

// Convenience: solve_2p followed by cheirality over `matches`.
inline Expected<RelativePoseCandidate> estimate_relative_2p(
    const Correspondence& c1, const Correspondence& c2,
    std::span<const Correspondence> matches) {
  const auto sols = solve_2p(c1, c2);
  if (!sols) return sols.error();
  std::vector<RelativePoseCandidate> candidates;
  candidates.reserve(sols->size());
  for (const TrigSolution& s : *sols) candidates.push_back(candidate_from(s));
  return cheirality_select(candidates, matches);
}

}  // namespace planarloc
