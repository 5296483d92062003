#pragma once

#include <utility>

#include "rigidpose/types.hpp"

namespace rigidpose {

/// Configuration for the geometric training loss.
struct GeomLossConfig {
  bool use_validity_mask = false;
  double half_res_weight = 0.5;  // alpha on the half-resolution depth term
};

/// Scene-coordinate map plus depth at full and half resolution, as
/// predicted or as ground truth.
struct GeomMaps {
  SceneCoordinateMap coords;
  DepthMap depth;
  DepthMap depth_half;
};

/// Additive constants removed from the regression targets.
struct NormalizationState {
  double depth_mean = 1.0;
  Eigen::Vector3d scene_coord_mean = Eigen::Vector3d::Zero();
};

struct NormalizedTargets {
  DepthMap depth;
  SceneCoordinateMap coords;
  NormalizationState state;
};

/// Geometric loss: mean |C - Chat| + mean |D - Dhat| + alpha * mean |Dhalf - Dhalfhat|.
/// Each term is the mean absolute difference over scalar elements (3 per
/// pixel for coordinates, 1 for depth).
///
/// With use_validity_mask, the coordinate and full-res depth terms average
/// only over pixels where `validity` is set, and the half-res term only
/// over blocks whose target half-res depth is valid; throws empty-mask if
/// a term has no valid element. Without the mask every pixel contributes,
/// invalid targets being stored as zeros.
double l_geom(const GeomMaps& pred, const GeomMaps& target, const GeomLossConfig& cfg,
              const MaskGrid& validity);

/// Pose loss: elementwise L1 over the 9 rotation entries plus the 3
/// translation entries (plain sum, no weighting between R and T).
double l_pose(const Pose& est, const Pose& gt);

/// Gradient of l_pose w.r.t. the estimated pose: elementwise sign, with
/// sign(0) = 0 at ties.
std::pair<Eigen::Matrix3d, Eigen::Vector3d> l_pose_grad(const Pose& est, const Pose& gt);

/// Divides depth by the mean over valid pixels and subtracts the mean
/// scene coordinate (recorded in the map's mean_offset). Invalid pixels
/// stay zero. Throws empty-mask when no depth pixel is valid.
NormalizedTargets normalize_targets(const DepthMap& depth, const SceneCoordinateMap& coords);

/// Exact inverse of normalize_targets on valid pixels; pixel validity is
/// read from the depth map's sentinel.
std::pair<DepthMap, SceneCoordinateMap> denormalize_targets(const DepthMap& depth,
                                                            const SceneCoordinateMap& coords,
                                                            const NormalizationState& state);

/// 2x2 block average over valid pixels; a block with no valid pixel maps
/// to the invalid sentinel 0. Dimensions must be even.
DepthMap downsample_half(const DepthMap& depth);

}  // namespace rigidpose
