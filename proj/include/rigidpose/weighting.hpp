#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rigidpose/types.hpp"

namespace rigidpose {

/// Free per-correspondence parameters; the weights used for alignment are
/// w = sigmoid(z), so they stay in (0, 1).
struct WeightLogits {
  Eigen::VectorXd z;
};

struct OptimizerConfig {
  double learning_rate = 1e-3;
  int epochs = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Step size for also descending the correspondence points themselves
  /// (0 disables refinement).
  double point_refinement_rate = 0.0;

  void validate() const;
};

/// One optimization problem: a correspondence set and the pose its
/// weighted alignment should reach.
struct TrainingFrame {
  CorrespondenceSet set;
  Pose gt_pose;
};

struct OptimizationResult {
  std::vector<WeightLogits> logits;  // one per frame, final state
  /// Refined correspondence sets (weights filled from the final logits);
  /// identical to the inputs unless point refinement ran.
  std::vector<CorrespondenceSet> frames;
  /// Mean pose loss across frames: entry 0 before any update, then one
  /// entry per epoch.
  std::vector<double> loss_trace;
  /// Per-frame failure description, empty for frames that completed. A
  /// failed frame keeps the logits it had when the error surfaced.
  std::vector<std::string> frame_errors;
};

double sigmoid(double z);

/// Replaces the set's weights with sigmoid(wl.z).
/// Throws invalid-argument on length mismatch.
CorrespondenceSet apply_weights(const CorrespondenceSet& c, const WeightLogits& wl);

/// Gradient descent of the pose loss over per-frame weight logits
/// (initialized to 2.0), one Adam step per frame per epoch, with a
/// backtracking safeguard: a step whose loss increases is halved up to 5
/// times and rejected outright if still worse, so each frame's loss never
/// increases. Degeneracy errors raised mid-frame abort that frame only and
/// are reported in frame_errors.
///
/// `seed` is reserved for stochastic variants; the current schedule is
/// deterministic and ignores it.
OptimizationResult optimize_weights(const std::vector<TrainingFrame>& frames,
                                    const OptimizerConfig& cfg, std::uint64_t seed);

/// All-ones weights.
Eigen::VectorXd uniform_weights(int n);

/// 1 on inliers, 0 on pixels flagged in outlier_mask.
/// Throws invalid-argument on length mismatch.
Eigen::VectorXd oracle_inlier_weights(const CorrespondenceSet& c,
                                      const MaskGrid& outlier_mask);

/// w_i = tau / (tau + e_i) with e_i the endpoint error under the
/// uniform-weight pose of `c`. Throws invalid-argument unless tau > 0;
/// alignment errors from the uniform solve propagate.
Eigen::VectorXd inverse_residual_weights(const CorrespondenceSet& c, double tau);

}  // namespace rigidpose
