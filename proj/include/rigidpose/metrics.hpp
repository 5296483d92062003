#pragma once

#include <optional>
#include <vector>

#include "rigidpose/types.hpp"

namespace rigidpose {

/// Aggregate pose-error statistics over a frame set. Medians are lower
/// medians (element at index (n-1)/2 after sorting), so every reported
/// value is an actual sample.
struct ErrorStats {
  double median_position_m = 0.0;
  double median_rotation_deg = 0.0;
  double mean_position_m = 0.0;
  double mean_rotation_deg = 0.0;
  double accuracy = 0.0;  // fraction below both thresholds (strict <)
  int count = 0;
};

enum class ErrorAxis { kPosition, kRotation };

/// Cumulative error curve: fractions(j) is the fraction of samples with
/// error <= edges(j), with edges j * truncation / bins for j = 1..bins.
/// Samples beyond the truncation only show up as the final fraction's
/// shortfall from 1.
struct CumulativeHistogram {
  ErrorAxis axis = ErrorAxis::kPosition;
  double truncation = 0.0;
  Eigen::VectorXd edges;
  Eigen::VectorXd fractions;
};

/// Depth accuracy over valid pixels: mean absolute error and fractions
/// with |error| strictly below 0.125 / 0.25 / 0.5 m.
struct DepthStats {
  double mean_abs_error_m = 0.0;
  double acc_0125 = 0.0;
  double acc_025 = 0.0;
  double acc_05 = 0.0;
  int count = 0;
};

/// Medians, means and accuracy at the given thresholds (defaults: 5 cm,
/// 5 degrees; both comparisons strict). Throws invalid-argument on an
/// empty list.
ErrorStats aggregate(const std::vector<PoseError>& errors,
                     double position_threshold_m = 0.05,
                     double rotation_threshold_deg = 5.0);

/// Throws invalid-argument on empty input, bins < 1, or truncation <= 0.
CumulativeHistogram cumulative_histogram(const std::vector<PoseError>& errors,
                                         ErrorAxis axis, double truncation,
                                         int bins);

/// Stats over pixels that are valid in `gt` and, when `mask` is non-empty,
/// also set in `mask`. The prediction value is compared as stored, so a
/// missing prediction (0) counts as an error of the full ground-truth
/// depth. Throws invalid-argument on shape mismatch, empty-mask when no
/// pixel qualifies.
DepthStats depth_stats(const DepthMap& pred, const DepthMap& gt,
                       const MaskGrid& mask = {});

/// Per-correspondence endpoint error e_i = |b_i - (R a_i + T)|, optionally
/// clamped from above (the visualization convention clamps at 1 m).
Eigen::VectorXd endpoint_errors(const CorrespondenceSet& c, const Pose& pose,
                                std::optional<double> clamp = std::nullopt);

}  // namespace rigidpose
