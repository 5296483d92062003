#pragma once

#include <utility>
#include <vector>

#include "rigidpose/types.hpp"

namespace rigidpose {

/// Back-projects a pixel with depth d to the camera frame:
/// p = d * K^-1 * (u, v, 1)^T = (d*(u-cx)/fx, d*(v-cy)/fy, d).
/// (u, v) are pixel centers, (0, 0) being the center of the top-left pixel.
/// Throws invalid-depth for depth <= 0.
Eigen::Vector3d unproject(const CameraIntrinsics& intr, const Eigen::Vector2d& pixel,
                          double depth);

/// Unprojects every pixel with depth > 0, in row-major order.
/// Returns (flat pixel index, camera-frame point) pairs; may be empty.
std::vector<std::pair<int, Eigen::Vector3d>> unproject_map(const CameraIntrinsics& intr,
                                                           const DepthMap& depth);

/// scene_point = R * a + T.
inline Eigen::Vector3d transform(const Pose& pose, const Eigen::Vector3d& a) {
  return pose.rotation * a + pose.translation;
}

Pose invert(const Pose& pose);

/// compose(p1, p2) applies p2 first, then p1.
Pose compose(const Pose& first_applied_last, const Pose& applied_first);

/// Weighted centroids (mu_A, mu_B) with mu_X = sum_i w_i x_i / sum_i w_i.
/// Throws degenerate-weights when sum(w) <= 0.
std::pair<Eigen::Vector3d, Eigen::Vector3d> weighted_centroids(const CorrespondenceSet& c);

/// Weighted Kabsch alignment: the closed-form argmin of
///   sum_i w_i |b_i - R a_i - T|^2
/// over proper rigid transforms (R, T).
///
/// Both point clouds are centered at their weighted centroids, then
///   U S V^T = svd(Abar^T W Bbar),   d = det(V U^T),
///   R = V diag(1, 1, d) U^T,        T = -R mu_A + mu_B.
///
/// SVD convention (asserted by tests): M = U S V^T with singular values
/// sorted in descending order, as produced by Eigen::JacobiSVD. The
/// det correction guarantees det(R) = +1 even for mirrored or planar
/// configurations.
///
/// Errors: insufficient-points (N < 3), degenerate-weights (sum w <= 0),
/// degenerate-configuration (second singular value of the cross-covariance
/// below 1e-12 * (largest + 1e-300), i.e. rotation underdetermined).
Pose weighted_kabsch(const CorrespondenceSet& c);

/// Value of the alignment objective sum_i w_i |b_i - R a_i - T|^2.
double weighted_objective(const CorrespondenceSet& c, const Pose& pose);

/// Geodesic angle between two rotations, in degrees, in [0, 180].
/// Equals arccos((trace(R1^T R2) - 1) / 2) but is evaluated in atan2 form
/// so angles near 0 and 180 keep full precision; the cosine argument is
/// clamped to [-1, 1]. Symmetric in its arguments.
double rotation_angle_deg(const Eigen::Matrix3d& r1, const Eigen::Matrix3d& r2);

/// Position error |T_est - T_gt| in meters plus geodesic rotation error
/// in degrees.
PoseError pose_error(const Pose& est, const Pose& gt);

}  // namespace rigidpose
