#include "rigidpose/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "rigidpose/error.hpp"
#include "rigidpose/geometry.hpp"

namespace rigidpose {

namespace {

double lower_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

}  // namespace

ErrorStats aggregate(const std::vector<PoseError>& errors,
                     double position_threshold_m, double rotation_threshold_deg) {
  if (errors.empty())
    throw Error(ErrorCode::kInvalidArgument, "cannot aggregate zero pose errors");

  ErrorStats stats;
  stats.count = static_cast<int>(errors.size());
  std::vector<double> pos, rot;
  pos.reserve(errors.size());
  rot.reserve(errors.size());
  int hits = 0;
  for (const PoseError& e : errors) {
    pos.push_back(e.position_m);
    rot.push_back(e.rotation_deg);
    stats.mean_position_m += e.position_m;
    stats.mean_rotation_deg += e.rotation_deg;
    if (e.position_m < position_threshold_m && e.rotation_deg < rotation_threshold_deg)
      ++hits;
  }
  stats.mean_position_m /= stats.count;
  stats.mean_rotation_deg /= stats.count;
  stats.median_position_m = lower_median(std::move(pos));
  stats.median_rotation_deg = lower_median(std::move(rot));
  stats.accuracy = static_cast<double>(hits) / stats.count;
  return stats;
}

CumulativeHistogram cumulative_histogram(const std::vector<PoseError>& errors,
                                         ErrorAxis axis, double truncation,
                                         int bins) {
  if (errors.empty())
    throw Error(ErrorCode::kInvalidArgument, "cannot histogram zero pose errors");
  if (bins < 1)
    throw Error(ErrorCode::kInvalidArgument, "need at least 1 bin");
  if (!(truncation > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "truncation must be positive");

  CumulativeHistogram h;
  h.axis = axis;
  h.truncation = truncation;
  h.edges.resize(bins);
  h.fractions.resize(bins);
  const int n = static_cast<int>(errors.size());
  for (int j = 0; j < bins; ++j) {
    h.edges(j) = truncation * (j + 1) / bins;
    int below = 0;
    for (const PoseError& e : errors) {
      const double value = axis == ErrorAxis::kPosition ? e.position_m : e.rotation_deg;
      below += value <= h.edges(j) ? 1 : 0;
    }
    h.fractions(j) = static_cast<double>(below) / n;
  }
  return h;
}

DepthStats depth_stats(const DepthMap& pred, const DepthMap& gt, const MaskGrid& mask) {
  if (pred.width != gt.width || pred.height != gt.height)
    throw Error(ErrorCode::kInvalidArgument, "depth map shapes differ");
  if (!mask.empty() && static_cast<int>(mask.size()) != gt.size())
    throw Error(ErrorCode::kInvalidArgument, "mask length does not match depth maps");

  DepthStats stats;
  int n0125 = 0, n025 = 0, n05 = 0;
  for (int i = 0; i < gt.size(); ++i) {
    if (!gt.valid(i)) continue;
    if (!mask.empty() && !mask[i]) continue;
    const double err = std::abs(pred.values[i] - gt.values[i]);
    stats.mean_abs_error_m += err;
    n0125 += err < 0.125 ? 1 : 0;
    n025 += err < 0.25 ? 1 : 0;
    n05 += err < 0.5 ? 1 : 0;
    ++stats.count;
  }
  if (stats.count == 0)
    throw Error(ErrorCode::kEmptyMask, "no valid pixel to evaluate depth on");
  stats.mean_abs_error_m /= stats.count;
  stats.acc_0125 = static_cast<double>(n0125) / stats.count;
  stats.acc_025 = static_cast<double>(n025) / stats.count;
  stats.acc_05 = static_cast<double>(n05) / stats.count;
  return stats;
}

Eigen::VectorXd endpoint_errors(const CorrespondenceSet& c, const Pose& pose,
                                std::optional<double> clamp) {
  if (clamp && !(*clamp > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "clamp must be positive");
  Eigen::VectorXd e(c.size());
  for (int i = 0; i < c.size(); ++i) {
    e(i) = (c.scene_points[i] - transform(pose, c.camera_points[i])).norm();
    if (clamp) e(i) = std::min(e(i), *clamp);
  }
  return e;
}

}  // namespace rigidpose
