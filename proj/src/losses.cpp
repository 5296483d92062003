#include "rigidpose/losses.hpp"

#include <cmath>
#include <string>

namespace rigidpose {

namespace {

double masked_depth_term(const DepthMap& pred, const DepthMap& target,
                         const MaskGrid* mask, const char* term_name) {
  double sum = 0.0;
  long count = 0;
  for (int i = 0; i < target.size(); ++i) {
    if (mask != nullptr && !(*mask)[i]) continue;
    sum += std::abs(pred.values[i] - target.values[i]);
    ++count;
  }
  if (count == 0)
    throw Error(ErrorCode::kEmptyMask,
                std::string(term_name) + " term has no valid pixel");
  return sum / static_cast<double>(count);
}

void require_same_shape(int pw, int ph, int tw, int th, const char* what) {
  if (pw != tw || ph != th)
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " shapes do not match");
}

}  // namespace

double l_geom(const GeomMaps& pred, const GeomMaps& target, const GeomLossConfig& cfg,
              const MaskGrid& validity) {
  require_same_shape(pred.coords.width, pred.coords.height, target.coords.width,
                     target.coords.height, "coordinate");
  require_same_shape(pred.depth.width, pred.depth.height, target.depth.width,
                     target.depth.height, "depth");
  require_same_shape(pred.depth_half.width, pred.depth_half.height,
                     target.depth_half.width, target.depth_half.height, "half-res depth");
  if (target.depth_half.width * 2 != target.depth.width ||
      target.depth_half.height * 2 != target.depth.height)
    throw Error(ErrorCode::kInvalidArgument,
                "depth_half must have half the resolution of depth");
  if (!(cfg.half_res_weight >= 0.0))
    throw Error(ErrorCode::kInvalidArgument, "half_res_weight must be >= 0");
  if (cfg.use_validity_mask &&
      validity.size() != static_cast<std::size_t>(target.depth.size()))
    throw Error(ErrorCode::kInvalidArgument, "validity mask size mismatch");

  // Coordinate term: mean |dC| over scalar elements (3 per pixel).
  double coord_sum = 0.0;
  long coord_count = 0;
  for (int i = 0; i < target.coords.size(); ++i) {
    if (cfg.use_validity_mask && !validity[i]) continue;
    coord_sum += (pred.coords.values[i] - target.coords.values[i]).cwiseAbs().sum();
    coord_count += 3;
  }
  if (coord_count == 0)
    throw Error(ErrorCode::kEmptyMask, "coordinate term has no valid pixel");

  const double coord_term = coord_sum / static_cast<double>(coord_count);
  const double depth_term = masked_depth_term(
      pred.depth, target.depth, cfg.use_validity_mask ? &validity : nullptr, "depth");

  // Half-res validity comes from the target's own sentinel; the full-res
  // mask does not apply at this scale.
  MaskGrid half_mask;
  if (cfg.use_validity_mask) {
    half_mask.resize(target.depth_half.size());
    for (int i = 0; i < target.depth_half.size(); ++i)
      half_mask[i] = target.depth_half.valid(i) ? 1 : 0;
  }
  const double half_term =
      masked_depth_term(pred.depth_half, target.depth_half,
                        cfg.use_validity_mask ? &half_mask : nullptr, "half-res depth");

  return coord_term + depth_term + cfg.half_res_weight * half_term;
}

double l_pose(const Pose& est, const Pose& gt) {
  return (est.rotation - gt.rotation).cwiseAbs().sum() +
         (est.translation - gt.translation).cwiseAbs().sum();
}

std::pair<Eigen::Matrix3d, Eigen::Vector3d> l_pose_grad(const Pose& est, const Pose& gt) {
  const auto sign = [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); };
  Eigen::Matrix3d d_rot;
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 3; ++col)
      d_rot(r, col) = sign(est.rotation(r, col) - gt.rotation(r, col));
  Eigen::Vector3d d_trans;
  for (int k = 0; k < 3; ++k) d_trans[k] = sign(est.translation[k] - gt.translation[k]);
  return {d_rot, d_trans};
}

NormalizedTargets normalize_targets(const DepthMap& depth, const SceneCoordinateMap& coords) {
  if (depth.width != coords.width || depth.height != coords.height)
    throw Error(ErrorCode::kInvalidArgument, "depth and coordinate shapes do not match");

  double depth_sum = 0.0;
  Eigen::Vector3d coord_sum = Eigen::Vector3d::Zero();
  long valid = 0;
  for (int i = 0; i < depth.size(); ++i) {
    if (!depth.valid(i)) continue;
    depth_sum += depth.values[i];
    coord_sum += coords.values[i];
    ++valid;
  }
  if (valid == 0)
    throw Error(ErrorCode::kEmptyMask, "no valid depth pixel to normalize against");

  NormalizedTargets out;
  out.state.depth_mean = depth_sum / static_cast<double>(valid);
  out.state.scene_coord_mean = coord_sum / static_cast<double>(valid);

  out.depth = depth;
  out.coords = coords;
  for (int i = 0; i < depth.size(); ++i) {
    if (!depth.valid(i)) continue;
    out.depth.values[i] = depth.values[i] / out.state.depth_mean;
    out.coords.values[i] = coords.values[i] - out.state.scene_coord_mean;
  }
  out.coords.mean_offset = out.state.scene_coord_mean;
  return out;
}

std::pair<DepthMap, SceneCoordinateMap> denormalize_targets(const DepthMap& depth,
                                                            const SceneCoordinateMap& coords,
                                                            const NormalizationState& state) {
  if (depth.width != coords.width || depth.height != coords.height)
    throw Error(ErrorCode::kInvalidArgument, "depth and coordinate shapes do not match");
  DepthMap out_depth = depth;
  SceneCoordinateMap out_coords = coords;
  for (int i = 0; i < depth.size(); ++i) {
    if (!depth.valid(i)) continue;
    out_depth.values[i] = depth.values[i] * state.depth_mean;
    out_coords.values[i] = coords.values[i] + state.scene_coord_mean;
  }
  out_coords.mean_offset = Eigen::Vector3d::Zero();
  return {out_depth, out_coords};
}

DepthMap downsample_half(const DepthMap& depth) {
  if (depth.width % 2 != 0 || depth.height % 2 != 0)
    throw Error(ErrorCode::kInvalidArgument,
                "downsampling requires even dimensions, got " +
                    std::to_string(depth.width) + "x" + std::to_string(depth.height));
  DepthMap half(depth.width / 2, depth.height / 2);
  for (int y = 0; y < half.height; ++y) {
    for (int x = 0; x < half.width; ++x) {
      double sum = 0.0;
      int count = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const double v = depth.at(2 * x + dx, 2 * y + dy);
          if (v > 0.0) {
            sum += v;
            ++count;
          }
        }
      }
      half.at(x, y) = count > 0 ? sum / count : 0.0;
    }
  }
  return half;
}

}  // namespace rigidpose
