#pragma once

#include <cstdint>
#include <vector>

#include "planarloc/core_geometry.hpp"

namespace planarloc {

// A database image with known world -> camera pose and its matches to the
// query.
struct ReferenceView {
  RigidPose pose;
  std::vector<Correspondence> correspondences;

  friend bool operator==(const ReferenceView&, const ReferenceView&) = default;
};

struct CheckThresholds {
  double rcheck_deg = 2.0;
  double consistency_deg = 2.0;
  // Sampson inlier gate in normalized image units.
  double sampson_inlier = 2.5 / 800.0;

  static CheckThresholds for_focal(double focal_px, double inlier_px = 2.5) {
    CheckThresholds t;
    t.sampson_inlier = inlier_px / focal_px;
    return t;
  }

  bool is_valid() const {
    return rcheck_deg > 0.0 && consistency_deg > 0.0 && sampson_inlier > 0.0;
  }

  friend bool operator==(const CheckThresholds&,
                         const CheckThresholds&) = default;
};

struct LocalizationProblem {
  CameraIntrinsics intrinsics;
  std::vector<ReferenceView> references;
  CheckThresholds thresholds;
  int iterations = 100;
  std::uint64_t rng_seed = 0;

  std::size_t total_correspondences() const {
    std::size_t n = 0;
    for (const auto& r : references) n += r.correspondences.size();
    return n;
  }

  friend bool operator==(const LocalizationProblem&,
                         const LocalizationProblem&) = default;
};

// Indices into each reference's correspondence list.
using InlierSets = std::vector<std::vector<int>>;

inline std::size_t count_inliers(const InlierSets& sets) {
  std::size_t n = 0;
  for (const auto& s : sets) n += s.size();
  return n;
}

}  // namespace planarloc
