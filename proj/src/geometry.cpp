#include "rigidpose/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "kabsch_internal.hpp"

namespace rigidpose {

Eigen::Vector3d unproject(const CameraIntrinsics& intr, const Eigen::Vector2d& pixel,
                          double depth) {
  intr.validate();
  if (!(depth > 0.0))
    throw Error(ErrorCode::kInvalidDepth,
                "depth must be positive, got " + std::to_string(depth));
  return {depth * (pixel.x() - intr.cx) / intr.fx,
          depth * (pixel.y() - intr.cy) / intr.fy, depth};
}

std::vector<std::pair<int, Eigen::Vector3d>> unproject_map(const CameraIntrinsics& intr,
                                                           const DepthMap& depth) {
  intr.validate();
  std::vector<std::pair<int, Eigen::Vector3d>> points;
  points.reserve(depth.values.size());
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      const int idx = depth.index(x, y);
      const double d = depth.values[idx];
      if (d > 0.0) {
        points.emplace_back(idx, unproject(intr, {static_cast<double>(x),
                                                  static_cast<double>(y)},
                                           d));
      }
    }
  }
  return points;
}

Pose invert(const Pose& pose) {
  Pose inv;
  inv.rotation = pose.rotation.transpose();
  inv.translation = -(inv.rotation * pose.translation);
  return inv;
}

Pose compose(const Pose& first_applied_last, const Pose& applied_first) {
  Pose out;
  out.rotation = first_applied_last.rotation * applied_first.rotation;
  out.translation =
      first_applied_last.rotation * applied_first.translation + first_applied_last.translation;
  return out;
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> weighted_centroids(const CorrespondenceSet& c) {
  c.validate();
  const double weight_sum = c.weights.sum();
  if (!(weight_sum > 0.0))
    throw Error(ErrorCode::kDegenerateWeights, "sum of weights must be positive");
  Eigen::Vector3d mu_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d mu_b = Eigen::Vector3d::Zero();
  for (int i = 0; i < c.size(); ++i) {
    mu_a += c.weights[i] * c.camera_points[i];
    mu_b += c.weights[i] * c.scene_points[i];
  }
  return {mu_a / weight_sum, mu_b / weight_sum};
}

namespace detail {

KabschDecomposition kabsch_decompose(const CorrespondenceSet& c) {
  c.validate();
  if (c.size() < 3)
    throw Error(ErrorCode::kInsufficientPoints,
                "alignment needs at least 3 correspondences, got " +
                    std::to_string(c.size()));
  KabschDecomposition out;
  std::tie(out.mu_a, out.mu_b) = weighted_centroids(c);
  out.weight_sum = c.weights.sum();

  for (int i = 0; i < c.size(); ++i) {
    out.cross += c.weights[i] * (c.camera_points[i] - out.mu_a) *
                 (c.scene_points[i] - out.mu_b).transpose();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(out.cross,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();  // descending
  if (out.singular_values(1) < 1e-12 * (out.singular_values(0) + 1e-300))
    throw Error(ErrorCode::kDegenerateConfiguration,
                "rank-deficient cross-covariance: rotation underdetermined "
                "(weighted points collinear or coincident)");

  out.u = svd.matrixU();
  out.v = svd.matrixV();
  // det(V U^T) is +-1 up to roundoff; snap to the sign.
  out.det_sign = (out.v * out.u.transpose()).determinant() >= 0.0 ? 1.0 : -1.0;

  out.pose.rotation = out.v * Eigen::Vector3d(1.0, 1.0, out.det_sign).asDiagonal() *
                      out.u.transpose();
  out.pose.translation = -(out.pose.rotation * out.mu_a) + out.mu_b;
  return out;
}

}  // namespace detail

Pose weighted_kabsch(const CorrespondenceSet& c) {
  return detail::kabsch_decompose(c).pose;
}

double weighted_objective(const CorrespondenceSet& c, const Pose& pose) {
  c.validate();
  double total = 0.0;
  for (int i = 0; i < c.size(); ++i) {
    total += c.weights[i] *
             (c.scene_points[i] - transform(pose, c.camera_points[i])).squaredNorm();
  }
  return total;
}

double rotation_angle_deg(const Eigen::Matrix3d& r1, const Eigen::Matrix3d& r2) {
  const Eigen::Matrix3d rel = r1.transpose() * r2;
  const double cosine =
      std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  // |axis-weighted sine| from the skew part; exact near 0 and 180 where
  // the arccos of the trace loses half the significand.
  const Eigen::Vector3d skew(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0),
                             rel(1, 0) - rel(0, 1));
  const double sine = 0.5 * skew.norm();
  return std::atan2(sine, cosine) * 180.0 / 3.14159265358979323846;
}

PoseError pose_error(const Pose& est, const Pose& gt) {
  return {(est.translation - gt.translation).norm(),
          rotation_angle_deg(est.rotation, gt.rotation)};
}

}  // namespace rigidpose
