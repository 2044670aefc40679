#pragma once

// 6DoF refinement of the query pose over 2D-2D inliers.
//
// The query is parameterized by its camera -> world rotation Q = R_i^T and
// its center c. For a reference with world -> camera pose (R_j, t_j):
//   E p_i   = R_j ((c - c_j) x (Q p_i))
//   p_j^T E p_i = w . (b x q),  w = R_j^T p_j, b = c - c_j, q = Q p_i
// Updates are Q <- exp([dw]x) Q and c <- c + dc.

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "planarloc/core_geometry.hpp"
#include "planarloc/problem.hpp"

namespace planarloc {

struct RefineOptions {
  int max_iterations = 50;
  double step_tolerance = 1e-10;
  double initial_lambda = 1e-4;
  std::size_t min_inliers = 6;
};

struct RefineResult {
  RigidPose pose;
  bool performed = false;
  bool converged = false;
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
};

namespace detail {

struct QueryState {
  Eigen::Matrix3d cam_to_world;
  Eigen::Vector3d center;

  static QueryState from_pose(const RigidPose& p) {
    return QueryState{p.rotation.transpose(), p.center()};
  }
  RigidPose to_pose() const {
    return RigidPose::from_center(cam_to_world.transpose(), center);
  }
  QueryState perturbed(const Eigen::Matrix<double, 6, 1>& delta) const {
    return QueryState{exp_so3(delta.head<3>()) * cam_to_world,
                      center + delta.tail<3>()};
  }
};

}  // namespace detail

// Signed Sampson residual of `c` against reference `reference` for the query
// state, with its gradient w.r.t. [dw, dc] at zero perturbation.
inline double sampson_residual_jacobian(const Eigen::Matrix3d& cam_to_world,
                                        const Eigen::Vector3d& center,
                                        const RigidPose& reference,
                                        const Correspondence& c,
                                        Eigen::Matrix<double, 1, 6>* jac) {
  const Eigen::Matrix3d& rj = reference.rotation;
  const Eigen::Vector3d q = cam_to_world * c.query_h();
  const Eigen::Vector3d w = rj.transpose() * c.reference_h();
  const Eigen::Vector3d b = center - reference.center();

  const Eigen::Vector3d bxq = b.cross(q);
  const Eigen::Vector3d wxb = w.cross(b);
  const double e = w.dot(bxq);
  const Eigen::Vector3d l = rj * bxq;                         // E p_i
  const Eigen::Vector3d m = cam_to_world.transpose() * wxb;   // E^T p_j
  const double denom = l.head<2>().squaredNorm() + m.head<2>().squaredNorm();
  if (!(denom > 0.0)) {
    if (jac) jac->setZero();
    return std::numeric_limits<double>::infinity();
  }
  const double sq = std::sqrt(denom);
  const double r = e / sq;
  if (!jac) return r;

  const Eigen::Matrix3d sk_q = skew(q);
  const Eigen::Matrix3d sk_b = skew(b);
  Eigen::Matrix<double, 1, 6> de;
  de.head<3>() = -w.transpose() * sk_b * sk_q;
  de.tail<3>() = q.cross(w).transpose();

  Eigen::Matrix<double, 3, 6> dl;
  dl.leftCols<3>() = -rj * sk_b * sk_q;
  dl.rightCols<3>() = -rj * sk_q;
  Eigen::Matrix<double, 3, 6> dm;
  dm.leftCols<3>() = cam_to_world.transpose() * skew(wxb);
  dm.rightCols<3>() = cam_to_world.transpose() * skew(w);

  const Eigen::Matrix<double, 1, 6> dd =
      2.0 * (l(0) * dl.row(0) + l(1) * dl.row(1) + m(0) * dm.row(0) +
             m(1) * dm.row(1));
  *jac = de / sq - (0.5 * e / (denom * sq)) * dd;
  return r;
}

// Sum of squared Sampson residuals of the inliers under `query`.
inline double inlier_cost(const RigidPose& query,
                          const LocalizationProblem& problem,
                          const InlierSets& inliers) {
  const detail::QueryState s = detail::QueryState::from_pose(query);
  double cost = 0.0;
  for (std::size_t k = 0; k < problem.references.size() && k < inliers.size();
       ++k) {
    const ReferenceView& ref = problem.references[k];
    for (int idx : inliers[k]) {
      const double r = sampson_residual_jacobian(
          s.cam_to_world, s.center, ref.pose, ref.correspondences[idx], nullptr);
      if (std::isfinite(r)) cost += r * r;
    }
  }
  return cost;
}

// Levenberg-Marquardt on the summed squared Sampson residuals. Returns the
// best pose found; converged is false after max_iterations without a step
// below step_tolerance.
inline RefineResult refine_pose(const RigidPose& initial,
                                const LocalizationProblem& problem,
                                const InlierSets& inliers,
                                const RefineOptions& options = {}) {
  RefineResult out;
  out.pose = initial;
  out.initial_cost = out.final_cost = inlier_cost(initial, problem, inliers);
  if (count_inliers(inliers) < options.min_inliers) return out;
  out.performed = true;

  detail::QueryState state = detail::QueryState::from_pose(initial);
  double cost = out.initial_cost;
  double lambda = options.initial_lambda;

  for (int it = 0; it < options.max_iterations; ++it) {
    out.iterations = it + 1;
    Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> jtr = Eigen::Matrix<double, 6, 1>::Zero();
    for (std::size_t k = 0; k < problem.references.size() && k < inliers.size();
         ++k) {
      const ReferenceView& ref = problem.references[k];
      for (int idx : inliers[k]) {
        Eigen::Matrix<double, 1, 6> j;
        const double r = sampson_residual_jacobian(
            state.cam_to_world, state.center, ref.pose,
            ref.correspondences[idx], &j);
        if (!std::isfinite(r)) continue;
        jtj.noalias() += j.transpose() * j;
        jtr.noalias() += j.transpose() * r;
      }
    }

    // Retry with growing damping until the cost drops or the step vanishes.
    bool stop = false;
    while (true) {
      Eigen::Matrix<double, 6, 6> damped = jtj;
      damped.diagonal() += lambda * (jtj.diagonal().array() + 1e-12).matrix();
      const Eigen::Matrix<double, 6, 1> delta = -damped.ldlt().solve(jtr);
      if (!delta.allFinite() || delta.norm() < options.step_tolerance) {
        out.converged = true;
        stop = true;
        break;
      }
      const detail::QueryState trial = state.perturbed(delta);
      const double trial_cost = inlier_cost(trial.to_pose(), problem, inliers);
      if (trial_cost < cost) {
        state = trial;
        cost = trial_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e16) {
        out.converged = true;
        stop = true;
        break;
      }
    }
    if (stop) break;
  }

  out.pose = state.to_pose();
  out.final_cost = cost;
  return out;
}

}  // namespace planarloc
