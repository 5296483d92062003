#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <vector>

#include "rigidpose/error.hpp"

namespace rigidpose {

/// Row-major boolean grid (validity / outlier flags).
using MaskGrid = std::vector<std::uint8_t>;

/// Rigid camera-to-scene transform: scene_point = rotation * camera_point + translation.
/// The translation is the camera center expressed in the scene frame.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose identity() { return {}; }

  /// Max deviation from a proper rotation: max(|R^T R - I|_max, |det R - 1|).
  double rotation_defect() const {
    const Eigen::Matrix3d gram = rotation.transpose() * rotation;
    const double ortho = (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    return std::max(ortho, std::abs(rotation.determinant() - 1.0));
  }

  bool is_valid(double tol = 1e-9) const { return rotation_defect() <= tol; }

  /// 4x4 homogeneous matrix [R | T; 0 0 0 1].
  Eigen::Matrix4d homogeneous() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }
};

/// Pinhole parameters; K = [[fx,0,cx],[0,fy,cy],[0,0,1]], all in pixels.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = fx;
    k(1, 1) = fy;
    k(0, 2) = cx;
    k(1, 2) = cy;
    return k;
  }

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0))
      throw Error(ErrorCode::kInvalidArgument, "focal lengths must be positive");
  }
};

/// Paired camera-frame / scene-frame points with per-pair weights.
/// camera_points[i] and scene_points[i] correspond; weights[i] >= 0.
struct CorrespondenceSet {
  std::vector<Eigen::Vector3d> camera_points;
  std::vector<Eigen::Vector3d> scene_points;
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(camera_points.size()); }

  void validate() const {
    const auto n = camera_points.size();
    if (scene_points.size() != n || static_cast<std::size_t>(weights.size()) != n)
      throw Error(ErrorCode::kInvalidArgument,
                  "camera_points, scene_points and weights must have equal length");
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      if (!(weights[i] >= 0.0))
        throw Error(ErrorCode::kInvalidArgument,
                    "weights must be nonnegative (index " + std::to_string(i) + ")");
    }
  }
};

/// Row-major depth grid in meters. A value <= 0 marks a pixel with no depth.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  DepthMap() = default;
  DepthMap(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  int size() const { return width * height; }
  int index(int x, int y) const { return y * width + x; }
  double at(int x, int y) const { return values[index(x, y)]; }
  double& at(int x, int y) { return values[index(x, y)]; }
  bool valid(int idx) const { return values[idx] > 0.0; }

  int valid_count() const {
    int n = 0;
    for (double v : values) n += (v > 0.0) ? 1 : 0;
    return n;
  }
};

/// Row-major grid of 3D scene-frame points in meters. mean_offset is the
/// additive constant removed by target normalization (zero when unnormalized).
struct SceneCoordinateMap {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Vector3d> values;
  Eigen::Vector3d mean_offset = Eigen::Vector3d::Zero();

  SceneCoordinateMap() = default;
  SceneCoordinateMap(int w, int h)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, Eigen::Vector3d::Zero()) {}

  int size() const { return width * height; }
  int index(int x, int y) const { return y * width + x; }
  const Eigen::Vector3d& at(int x, int y) const { return values[index(x, y)]; }
  Eigen::Vector3d& at(int x, int y) { return values[index(x, y)]; }
};

/// Per-frame pose error: Euclidean distance between camera centers plus
/// geodesic rotation angle in degrees.
struct PoseError {
  double position_m = 0.0;
  double rotation_deg = 0.0;
};

}  // namespace rigidpose
