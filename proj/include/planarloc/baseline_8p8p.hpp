#pragma once

// General 6DoF baseline: normalized 8-point essential matrix per reference,
// four-fold decomposition with cheirality, and the same two-ray scale solve
// as 2p2p. Runs inside the same RANSAC shell and scorer.

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "planarloc/absolute_pose.hpp"
#include "planarloc/core_geometry.hpp"
#include "planarloc/planar_essential.hpp"
#include "planarloc/robust_estimator.hpp"

namespace planarloc {

namespace detail {

// Similarity moving the centroid to the origin with mean distance sqrt(2).
inline Eigen::Matrix3d hartley_transform(
    std::span<const Correspondence> matches, bool query_side) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& m : matches) {
    centroid += query_side ? m.query_point : m.reference_point;
  }
  centroid /= double(matches.size());
  double mean_dist = 0.0;
  for (const auto& m : matches) {
    mean_dist += ((query_side ? m.query_point : m.reference_point) - centroid)
                     .norm();
  }
  mean_dist /= double(matches.size());
  const double s = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d t;
  t << s, 0.0, -s * centroid.x(),
       0.0, s, -s * centroid.y(),
       0.0, 0.0, 1.0;
  return t;
}

}  // namespace detail

// Linear 8-point estimate projected onto the essential manifold
// (singular values 1, 1, 0).
inline Expected<EssentialMatrix> solve_8pt(
    std::span<const Correspondence> matches) {
  if (matches.size() < 8) return ErrorCode::kDegenerateConfiguration;
  const Eigen::Matrix3d tq = detail::hartley_transform(matches, true);
  const Eigen::Matrix3d tr = detail::hartley_transform(matches, false);

  Eigen::Matrix<double, Eigen::Dynamic, 9> a(matches.size(), 9);
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const Eigen::Vector3d q = tq * matches[i].query_h();
    const Eigen::Vector3d r = tr * matches[i].reference_h();
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) a(i, 3 * row + col) = r(row) * q(col);
    }
  }
  if (!a.allFinite()) return ErrorCode::kDegenerateConfiguration;

  Eigen::Matrix<double, 9, 1> e_vec;
  if (matches.size() == 8) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(7) <= 1e-10 * sv(0)) {
      return ErrorCode::kDegenerateConfiguration;
    }
    e_vec = svd.matrixV().col(8);
  } else {
    const Eigen::Matrix<double, 9, 9> ata = a.transpose() * a;
    Eigen::JacobiSVD<Eigen::Matrix<double, 9, 9>> svd(ata, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // Singular values of A^T A are squared, so the gap is squared too.
    if (!(sv(0) > 0.0) || sv(7) <= 1e-20 * sv(0)) {
      return ErrorCode::kDegenerateConfiguration;
    }
    e_vec = svd.matrixV().col(8);
  }
  Eigen::Matrix3d e_norm;
  e_norm << e_vec(0), e_vec(1), e_vec(2),
            e_vec(3), e_vec(4), e_vec(5),
            e_vec(6), e_vec(7), e_vec(8);
  const Eigen::Matrix3d e = tr.transpose() * e_norm * tq;

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(e, Eigen::ComputeFullU |
                                               Eigen::ComputeFullV);
  EssentialMatrix out;
  out.matrix = svd.matrixU() * Eigen::Vector3d(1.0, 1.0, 0.0).asDiagonal() *
               svd.matrixV().transpose();
  return out;
}

// The four (R, t~) pairs consistent with E = [t]x R, |t~| = 1.
inline std::array<RigidPose, 4> decompose_essential(const EssentialMatrix& e) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(e.matrix, Eigen::ComputeFullU |
                                                      Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  if (u.determinant() < 0.0) u = -u;
  if (v.determinant() < 0.0) v = -v;
  Eigen::Matrix3d w;
  w << 0.0, -1.0, 0.0,
       1.0, 0.0, 0.0,
       0.0, 0.0, 1.0;
  const Eigen::Matrix3d r1 = u * w * v.transpose();
  const Eigen::Matrix3d r2 = u * w.transpose() * v.transpose();
  const Eigen::Vector3d t = u.col(2);
  return {RigidPose(r1, t), RigidPose(r1, -t), RigidPose(r2, t),
          RigidPose(r2, -t)};
}

inline Expected<RigidPose> relative_from_essential(
    const EssentialMatrix& e, std::span<const Correspondence> matches) {
  const auto candidates = decompose_essential(e);
  const auto best = cheirality_select_index(candidates, matches);
  if (!best) return best.error();
  return candidates[*best];
}

// Relative poses from both essential matrices, then the least-squares scale
// solve. No rotation, depth or consistency gates are applied here.
inline Expected<ScaleSolution> decompose_and_triangulate(
    const EssentialMatrix& ea, const EssentialMatrix& eb,
    std::span<const Correspondence> matches_a,
    std::span<const Correspondence> matches_b, const RigidPose& t_jj2,
    const RigidPose& reference_j) {
  const auto rel_a = relative_from_essential(ea, matches_a);
  if (!rel_a) return rel_a.error();
  const auto rel_b = relative_from_essential(eb, matches_b);
  if (!rel_b) return rel_b.error();
  return triangulate_2p2p(*rel_a, *rel_b, t_jj2, reference_j);
}

// 8+8 sample RANSAC baseline.
inline LocalizationResult estimate_8p8p(const LocalizationProblem& problem,
                                        const EstimatorOptions& options = {}) {
  const std::vector<int> pool = detail::references_with_at_least(problem, 8);
  if (pool.size() < 2) {
    LocalizationResult r;
    r.status = LocalizationStatus::kInsufficientMatches;
    return r;
  }
  const CheckThresholds& th = problem.thresholds;

  auto hypothesize_one = [&](Rng& rng, CheckCounters& counters)
      -> std::optional<RigidPose> {
    const auto pair = detail::draw_reference_pair(rng, pool, pool);
    if (!pair) return std::nullopt;
    const auto [j, j2] = *pair;
    const ReferenceView& ref_a = problem.references[j];
    const ReferenceView& ref_b = problem.references[j2];
    std::array<Correspondence, 8> sample_a;
    std::array<Correspondence, 8> sample_b;
    const auto ia = sample_distinct<8>(rng, int(ref_a.correspondences.size()));
    const auto ib = sample_distinct<8>(rng, int(ref_b.correspondences.size()));
    for (int k = 0; k < 8; ++k) {
      sample_a[k] = ref_a.correspondences[ia[k]];
      sample_b[k] = ref_b.correspondences[ib[k]];
    }
    const auto ea = solve_8pt(sample_a);
    if (!ea) return std::nullopt;
    const auto eb = solve_8pt(sample_b);
    if (!eb) return std::nullopt;

    const auto rel_a = relative_from_essential(*ea, ref_a.correspondences);
    if (!rel_a) return std::nullopt;
    const auto rel_b = relative_from_essential(*eb, ref_b.correspondences);
    if (!rel_b) return std::nullopt;
    ++counters.cheirality_passed;

    const RigidPose t_jj2 = reference_transform(ref_a.pose, ref_b.pose);
    if (options.baseline_checks &&
        !rcheck(*rel_a, *rel_b, t_jj2, th.rcheck_deg).pass) {
      return std::nullopt;
    }
    ++counters.rcheck_passed;

    const auto scales = triangulate_2p2p(*rel_a, *rel_b, t_jj2, ref_a.pose);
    if (!scales) return std::nullopt;
    ++counters.triangulated;
    if (options.baseline_checks && !pdcheck(*scales)) return std::nullopt;
    ++counters.pdcheck_passed;

    if (options.baseline_checks) {
      const auto ca = consistency_check(scales->query_pose, ref_a.pose,
                                        rel_a->translation, th.consistency_deg);
      if (!ca || !ca->pass) return std::nullopt;
      const auto cb = consistency_check(scales->query_pose, ref_b.pose,
                                        rel_b->translation, th.consistency_deg);
      if (!cb || !cb->pass) return std::nullopt;
    }
    ++counters.consistency_passed;
    return scales->query_pose;
  };
  auto hypothesize = [&](Rng& rng, CheckCounters& counters) {
    std::vector<RigidPose> out;
    if (auto pose = hypothesize_one(rng, counters)) out.push_back(*pose);
    return out;
  };
  return run_ransac(problem, options, 16, hypothesize);
}

}  // namespace planarloc
