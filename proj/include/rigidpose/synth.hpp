#pragma once

#include <cstdint>

#include "rigidpose/rng.hpp"
#include "rigidpose/types.hpp"

namespace rigidpose {

/// Geometry of the synthetic scene: where scene points may lie, what the
/// virtual depth sensor sees, and through which camera.
struct SceneConfig {
  Eigen::AlignedBox3d bounds{Eigen::Vector3d(-3.0, -3.0, -3.0),
                             Eigen::Vector3d(3.0, 3.0, 3.0)};
  double depth_min = 1.0;
  double depth_max = 4.0;
  int width = 80;
  int height = 60;
  CameraIntrinsics intrinsics{70.0, 70.0, 39.5, 29.5};

  /// Throws invalid-argument unless depth_min > 0, depth_max > depth_min,
  /// width*height >= 3, intrinsics valid, bounds non-empty.
  void validate() const;
};

/// Corruption applied to the predicted maps of a frame. `seed` keys every
/// random draw; each corruption stage uses its own derived stream.
struct NoiseModel {
  double depth_sigma = 0.0;    // meters
  double coord_sigma = 0.0;    // meters, per axis
  double outlier_fraction = 0.0;
  double invalid_fraction = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One synthetic frame: ground truth plus (possibly corrupted) predicted
/// maps. On valid pixels gt_coords equals the ground-truth pose applied to
/// the unprojected ground-truth depth.
struct FrameSample {
  SceneConfig config;
  Pose gt_pose;
  DepthMap gt_depth;
  SceneCoordinateMap gt_coords;
  DepthMap pred_depth;
  SceneCoordinateMap pred_coords;
  MaskGrid outlier_mask;   // pixels whose pred_coords were replaced
  MaskGrid validity_mask;  // false where ground truth was withheld
};

/// How to_correspondences treats pixels without valid depth.
enum class InvalidPixelPolicy {
  kIncludeZeroFilled,  // keep them as (0,0,0) <-> (0,0,0) pairs, index == pixel
  kExclude,            // drop them; output is dense over valid pixels
};

/// Rotation drawn uniformly from SO(3) via a normalized Gaussian quaternion.
Eigen::Matrix3d random_rotation(Rng& rng);

/// Random pose: uniform rotation, translation uniform in `bounds`.
Pose random_pose(Rng& rng, const Eigen::AlignedBox3d& bounds);

/// Ground-truth frame with a smooth random depth field (sum of up to 8
/// low-frequency sinusoids, clamped to the configured depth range) viewed
/// under `pose`. Predictions start equal to ground truth; all pixels valid.
/// Deterministic: a fixed (config, pose, field_seed) gives bit-identical
/// output.
FrameSample generate_frame(const SceneConfig& cfg, const Pose& pose,
                           std::uint64_t field_seed);

/// Same, with the pose itself drawn from the seed (stream 0; the depth
/// field uses stream 1).
FrameSample generate_frame(const SceneConfig& cfg, std::uint64_t seed);

/// Applies the noise model to a frame's predictions:
///   - an invalid_fraction of pixels (rounded) lose ground truth and
///     predictions (both zeroed, validity_mask false);
///   - remaining pixels get Gaussian depth and per-axis coordinate noise;
///   - an outlier_fraction of pixels (rounded, drawn from the still-valid
///     ones) have pred_coords replaced by uniform samples in cfg.bounds and
///     are flagged in outlier_mask.
/// Stage streams are derived from nm.seed, so e.g. changing
/// outlier_fraction never changes which noise a non-outlier pixel gets.
FrameSample corrupt(const FrameSample& f, const NoiseModel& nm);

/// Builds the per-pixel correspondence set: camera points by unprojecting
/// the chosen depth map at pixel centers, scene points from the matching
/// coordinate map, weights 1. A pixel is valid when the chosen depth is
/// positive. Throws insufficient-points when fewer than 3 pixels are valid.
CorrespondenceSet to_correspondences(
    const FrameSample& f, bool use_pred,
    InvalidPixelPolicy policy = InvalidPixelPolicy::kIncludeZeroFilled);

/// Pixel index backing each correspondence produced by to_correspondences
/// with the same arguments (the identity under kIncludeZeroFilled).
std::vector<int> correspondence_pixels(
    const FrameSample& f, bool use_pred,
    InvalidPixelPolicy policy = InvalidPixelPolicy::kIncludeZeroFilled);

}  // namespace rigidpose
