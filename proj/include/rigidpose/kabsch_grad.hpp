#pragma once

#include <functional>

#include "rigidpose/types.hpp"

namespace rigidpose {

/// Vector-Jacobian products of the weighted Kabsch pose with respect to
/// its inputs, for a scalar loss with known gradients w.r.t. (R, T).
struct KabschGradients {
  Eigen::VectorXd d_weights;                     // N
  std::vector<Eigen::Vector3d> d_camera_points;  // N
  std::vector<Eigen::Vector3d> d_scene_points;   // N
};

/// Full per-weight sensitivities of the pose, row i holding dR/dw_i
/// (row-major 3x3) and dT/dw_i.
struct PoseJacobians {
  Eigen::Matrix<double, Eigen::Dynamic, 9> d_rotation_d_weight;
  Eigen::Matrix<double, Eigen::Dynamic, 3> d_translation_d_weight;
};

/// Result of comparing analytic gradients against finite differences.
/// Per-parameter relative error is |a - n| / max(1, |a|, |n|).
struct GradCheckReport {
  double max_relative_error = 0.0;
  int worst_parameter_index = -1;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  int parameters_checked = 0;
};

/// Pulls a loss gradient back through the weighted Kabsch solve.
///
/// Given dL/dR and dL/dT for a scalar loss L of the returned pose, computes
/// dL/dw_i, dL/da_i, dL/db_i for the composite map
///   weights, points -> weighted centroids -> centered cross-covariance
///   -> SVD -> (R, T).
/// The SVD is differentiated in closed form with the standard
/// F_ij = 1 / (s_j^2 - s_i^2) coupling; the det(V U^T) sign is piecewise
/// constant and carries no gradient. Requires pairwise singular value
/// separation > 1e-8, otherwise throws degenerate-svd-gradient (no silent
/// regularization). Forward preconditions of weighted_kabsch apply.
KabschGradients kabsch_vjp(const CorrespondenceSet& c,
                           const Eigen::Matrix3d& loss_d_rotation,
                           const Eigen::Vector3d& loss_d_translation);

/// Per-weight pose Jacobians, assembled from 12 pullbacks (one per entry
/// of R and T).
PoseJacobians pose_jacobians(const CorrespondenceSet& c);

/// Central finite differences (f(x + h e_i) - f(x - h e_i)) / (2 h).
/// Throws invalid-argument on a non-finite evaluation.
Eigen::VectorXd finite_diff_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const Eigen::VectorXd& x, double h);

/// Compares kabsch_vjp against finite differences on the loss
/// l_pose(weighted_kabsch(c), target) for a random target pose drawn from
/// `seed`. The parameter vector is [weights, camera xyz, scene xyz]; when
/// it exceeds 700 entries, a seeded random subset of 140 parameters is
/// checked. Weights at the w = 0 boundary use a second-order one-sided
/// difference since negative weights are outside the domain.
GradCheckReport grad_check(const CorrespondenceSet& c, std::uint64_t seed,
                           double step = 1e-5);

}  // namespace rigidpose
