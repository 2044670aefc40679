#pragma once

// RANSAC with the multiple-checking cascade:
//   cheirality -> Rcheck -> triangulation -> Pdcheck -> consistency
// Surviving hypotheses are scored by Sampson inliers over every reference
// and the best one is refined.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "planarloc/absolute_pose.hpp"
#include "planarloc/core_geometry.hpp"
#include "planarloc/planar_essential.hpp"
#include "planarloc/problem.hpp"
#include "planarloc/random.hpp"
#include "planarloc/refine.hpp"

namespace planarloc {

enum class LocalizationStatus {
  kSuccess,
  kNoValidSample,
  kRefinementWarning,
  kInsufficientMatches,
};

inline const char* ToString(LocalizationStatus s) {
  switch (s) {
    case LocalizationStatus::kSuccess: return "Success";
    case LocalizationStatus::kNoValidSample: return "NoValidSample";
    case LocalizationStatus::kRefinementWarning: return "RefinementWarning";
    case LocalizationStatus::kInsufficientMatches: return "InsufficientMatches";
  }
  return "Unknown";
}

// Number of samples surviving each stage of the cascade.
struct CheckCounters {
  std::uint64_t samples = 0;
  std::uint64_t cheirality_passed = 0;
  std::uint64_t rcheck_passed = 0;
  std::uint64_t triangulated = 0;
  std::uint64_t pdcheck_passed = 0;
  std::uint64_t consistency_passed = 0;

  friend bool operator==(const CheckCounters&, const CheckCounters&) = default;
};

struct LocalizationResult {
  RigidPose pose;
  RigidPose ransac_pose;  // best hypothesis before refinement
  std::size_t inlier_count = 0;
  InlierSets inlier_sets;
  CheckCounters checks;
  bool refined = false;
  LocalizationStatus status = LocalizationStatus::kNoValidSample;
  double ransac_cost = 0.0;   // summed squared Sampson over inliers
  double refined_cost = 0.0;

  bool has_pose() const {
    return status == LocalizationStatus::kSuccess ||
           status == LocalizationStatus::kRefinementWarning;
  }
};

struct EstimatorOptions {
  // 2p2p: also run the consistency check against the second reference.
  bool consistency_both_views = true;
  // 8p8p: run the same gates as the proposed solvers (ablation).
  bool baseline_checks = false;
  // Stop early once the standard RANSAC bound is met.
  bool adaptive = false;
  double confidence = 0.99;
  bool refine = true;
  RefineOptions refine_options;
};

struct InlierScore {
  InlierSets inliers;
  std::size_t count = 0;
  double residual_sum = 0.0;
  // False when scoring stopped early because the hypothesis could not reach
  // the requested count.
  bool complete = true;

  double mean_residual() const {
    return count == 0 ? std::numeric_limits<double>::infinity()
                      : residual_sum / double(count);
  }
};

// Inlier classification shared by every estimator: a match is an inlier when
// its Sampson distance to the pose-induced essential matrix of its reference
// is within thresholds.sampson_inlier. With `must_reach` > 0 scoring stops as
// soon as fewer than `must_reach` inliers are still possible.
struct SampsonInlierScorer {
  InlierScore operator()(const RigidPose& query,
                         const LocalizationProblem& problem,
                         std::size_t must_reach = 0) const {
    InlierScore s;
    s.inliers.resize(problem.references.size());
    const double gate = problem.thresholds.sampson_inlier;
    const double gate2 = gate * gate;
    std::size_t remaining = problem.total_correspondences();
    for (std::size_t k = 0; k < problem.references.size(); ++k) {
      const ReferenceView& ref = problem.references[k];
      const Eigen::Matrix3d e =
          essential_from_rigid(relative_pose(ref.pose, query)).matrix;
      const auto& corr = ref.correspondences;
      s.inliers[k].reserve(corr.size());
      for (std::size_t m = 0; m < corr.size(); ++m) {
        const Eigen::Vector3d q = corr[m].query_h();
        const Eigen::Vector3d p = corr[m].reference_h();
        const Eigen::Vector3d lr = e * q;
        const Eigen::Vector3d lq = e.transpose() * p;
        const double num = p.dot(lr);
        const double denom = lr.head<2>().squaredNorm() + lq.head<2>().squaredNorm();
        --remaining;
        if (denom >= 1e-30 && num * num <= gate2 * denom) {
          s.inliers[k].push_back(int(m));
          s.residual_sum += std::abs(num) / std::sqrt(denom);
          ++s.count;
        } else if (s.count + remaining < must_reach) {
          s.complete = false;
          return s;
        }
      }
    }
    return s;
  }
};

inline InlierSets classify_inliers(const RigidPose& pose,
                                   const LocalizationProblem& problem) {
  return SampsonInlierScorer{}(pose, problem).inliers;
}

namespace detail {

inline bool better_score(const InlierScore& a, const InlierScore& b) {
  if (a.count != b.count) return a.count > b.count;
  return a.mean_residual() < b.mean_residual();
}

inline std::vector<int> references_with_at_least(
    const LocalizationProblem& problem, std::size_t n) {
  std::vector<int> out;
  for (std::size_t k = 0; k < problem.references.size(); ++k) {
    if (problem.references[k].correspondences.size() >= n) out.push_back(int(k));
  }
  return out;
}

// Ordered pair of distinct references (first needs >= n_first matches,
// second >= n_second).
inline std::optional<std::pair<int, int>> draw_reference_pair(
    Rng& rng, const std::vector<int>& first_pool,
    const std::vector<int>& second_pool) {
  if (first_pool.empty()) return std::nullopt;
  const int j = first_pool[uniform_index(rng, int(first_pool.size()))];
  int n_other = 0;
  for (int k : second_pool) n_other += (k != j);
  if (n_other == 0) return std::nullopt;
  int pick = uniform_index(rng, n_other);
  for (int k : second_pool) {
    if (k == j) continue;
    if (pick-- == 0) return std::make_pair(j, k);
  }
  return std::nullopt;
}

inline std::uint64_t adaptive_bound(double inlier_ratio, int sample_size,
                                    double confidence) {
  const double p = std::pow(inlier_ratio, sample_size);
  if (p <= 0.0) return std::numeric_limits<std::uint64_t>::max();
  if (p >= 1.0) return 1;
  return std::uint64_t(std::ceil(std::log(1.0 - confidence) / std::log(1.0 - p)));
}

}  // namespace detail

// Generic RANSAC loop. `hypothesize(rng, counters)` draws one sample and
// returns the query poses that survive all checks. Each iteration index gets
// its own RNG stream derived from the problem seed.
template <typename Hypothesize, typename Scorer = SampsonInlierScorer>
LocalizationResult run_ransac(const LocalizationProblem& problem,
                              const EstimatorOptions& options, int sample_size,
                              Hypothesize&& hypothesize,
                              const Scorer& scorer = Scorer{}) {
  LocalizationResult result;
  std::optional<InlierScore> best;
  RigidPose best_pose;
  const double total = double(problem.total_correspondences());
  const std::uint64_t max_iters = std::uint64_t(std::max(problem.iterations, 0));
  std::uint64_t bound = max_iters;

  for (std::uint64_t it = 0; it < max_iters && it < bound; ++it) {
    Rng rng(derive_seed(problem.rng_seed, it));
    ++result.checks.samples;
    for (const RigidPose& pose : hypothesize(rng, result.checks)) {
      InlierScore score = scorer(pose, problem, best ? best->count : 0);
      if (!score.complete) continue;
      if (!best || detail::better_score(score, *best)) {
        best = std::move(score);
        best_pose = pose;
        if (options.adaptive && total > 0.0) {
          bound = detail::adaptive_bound(double(best->count) / total,
                                         sample_size, options.confidence);
        }
      }
    }
  }

  if (!best) {
    result.status = LocalizationStatus::kNoValidSample;
    return result;
  }
  result.ransac_pose = best_pose;
  result.pose = best_pose;
  result.inlier_sets = best->inliers;
  result.inlier_count = best->count;
  result.status = LocalizationStatus::kSuccess;
  if (options.refine) {
    const RefineResult refined = refine_pose(best_pose, problem,
                                             result.inlier_sets,
                                             options.refine_options);
    result.ransac_cost = refined.initial_cost;
    result.refined_cost = refined.final_cost;
    result.pose = refined.pose;
    result.refined = refined.performed;
    if (refined.performed && !refined.converged) {
      result.status = LocalizationStatus::kRefinementWarning;
    }
  } else {
    result.ransac_cost = result.refined_cost =
        inlier_cost(best_pose, problem, result.inlier_sets);
  }
  return result;
}

// Query pose from 2 matches to each of two references. Every pair of
// relative-pose candidates that survives cheirality goes through the cascade.
inline LocalizationResult estimate_2p2p(const LocalizationProblem& problem,
                                        const EstimatorOptions& options = {}) {
  const std::vector<int> pool = detail::references_with_at_least(problem, 2);
  if (pool.size() < 2) {
    LocalizationResult r;
    r.status = LocalizationStatus::kInsufficientMatches;
    return r;
  }
  const CheckThresholds& th = problem.thresholds;

  auto hypothesize = [&](Rng& rng, CheckCounters& counters) {
    std::vector<RigidPose> out;
    const auto pair = detail::draw_reference_pair(rng, pool, pool);
    if (!pair) return out;
    const auto [j, j2] = *pair;
    const ReferenceView& ref_a = problem.references[j];
    const ReferenceView& ref_b = problem.references[j2];
    const auto ia = sample_distinct<2>(rng, int(ref_a.correspondences.size()));
    const auto ib = sample_distinct<2>(rng, int(ref_b.correspondences.size()));

    const auto cand_a = relative_candidates_2p(ref_a.correspondences[ia[0]],
                                               ref_a.correspondences[ia[1]],
                                               ref_a.correspondences);
    if (!cand_a || cand_a->empty()) return out;
    const auto cand_b = relative_candidates_2p(ref_b.correspondences[ib[0]],
                                               ref_b.correspondences[ib[1]],
                                               ref_b.correspondences);
    if (!cand_b || cand_b->empty()) return out;
    ++counters.cheirality_passed;

    const RigidPose t_jj2 = reference_transform(ref_a.pose, ref_b.pose);
    bool rc = false, tri = false, pd = false, cons = false;
    for (const RelativePoseCandidate& a : *cand_a) {
      const RigidPose pose_a = a.unit_pose();
      for (const RelativePoseCandidate& b : *cand_b) {
        const RigidPose pose_b = b.unit_pose();
        if (!rcheck(pose_a, pose_b, t_jj2, th.rcheck_deg).pass) continue;
        rc = true;
        const auto scales = triangulate_2p2p(pose_a, pose_b, t_jj2, ref_a.pose);
        if (!scales) continue;
        tri = true;
        if (!pdcheck(*scales)) continue;
        pd = true;
        const auto ca = consistency_check(scales->query_pose, ref_a.pose,
                                          pose_a.translation, th.consistency_deg);
        if (!ca || !ca->pass) continue;
        if (options.consistency_both_views) {
          const auto cb = consistency_check(scales->query_pose, ref_b.pose,
                                            pose_b.translation,
                                            th.consistency_deg);
          if (!cb || !cb->pass) continue;
        }
        cons = true;
        out.push_back(scales->query_pose);
      }
    }
    counters.rcheck_passed += rc;
    counters.triangulated += tri;
    counters.pdcheck_passed += pd;
    counters.consistency_passed += cons;
    return out;
  };
  return run_ransac(problem, options, 4, hypothesize);
}

// Query pose from 2 matches to reference j plus 1 match to reference j2.
// Only one rotation is estimated, so the rotation check passes trivially and
// the consistency check runs against reference j.
inline LocalizationResult estimate_2p1p(const LocalizationProblem& problem,
                                        const EstimatorOptions& options = {}) {
  const std::vector<int> pool2 = detail::references_with_at_least(problem, 2);
  const std::vector<int> pool1 = detail::references_with_at_least(problem, 1);
  std::vector<int> first;
  for (int j : pool2) {
    for (int k : pool1) {
      if (k != j) {
        first.push_back(j);
        break;
      }
    }
  }
  if (first.empty()) {
    LocalizationResult r;
    r.status = LocalizationStatus::kInsufficientMatches;
    return r;
  }
  const CheckThresholds& th = problem.thresholds;

  auto hypothesize = [&](Rng& rng, CheckCounters& counters) {
    std::vector<RigidPose> out;
    const auto pair = detail::draw_reference_pair(rng, first, pool1);
    if (!pair) return out;
    const auto [j, j2] = *pair;
    const ReferenceView& ref_a = problem.references[j];
    const ReferenceView& ref_b = problem.references[j2];
    const auto ia = sample_distinct<2>(rng, int(ref_a.correspondences.size()));
    const int ib = uniform_index(rng, int(ref_b.correspondences.size()));

    const auto cands = relative_candidates_2p(ref_a.correspondences[ia[0]],
                                              ref_a.correspondences[ia[1]],
                                              ref_a.correspondences);
    if (!cands || cands->empty()) return out;
    ++counters.cheirality_passed;
    ++counters.rcheck_passed;

    const RigidPose t_j2j = reference_transform(ref_b.pose, ref_a.pose);
    bool tri = false, pd = false, cons = false;
    for (const RelativePoseCandidate& c : *cands) {
      const RigidPose unit = c.unit_pose();
      const auto rho = solve_scale_2p1p(unit, t_j2j, ref_b.correspondences[ib]);
      if (!rho) continue;
      tri = true;
      ScaleSolution s;
      s.rho = *rho;
      if (!pdcheck(s)) continue;
      pd = true;
      s.query_pose = query_pose_from_relative(
          ref_a.pose, RigidPose(unit.rotation, s.rho * unit.translation));
      const auto ca = consistency_check(s.query_pose, ref_a.pose,
                                        unit.translation, th.consistency_deg);
      if (!ca || !ca->pass) continue;
      cons = true;
      out.push_back(s.query_pose);
    }
    counters.triangulated += tri;
    counters.pdcheck_passed += pd;
    counters.consistency_passed += cons;
    return out;
  };
  return run_ransac(problem, options, 3, hypothesize);
}

}  // namespace planarloc
