#include "rigidpose/weighting.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rigidpose/geometry.hpp"
#include "rigidpose/metrics.hpp"
#include "rigidpose/rng.hpp"
#include "rigidpose/synth.hpp"

namespace rigidpose {
namespace {

SceneConfig small_config() {
  SceneConfig cfg;
  cfg.width = 16;
  cfg.height = 12;
  cfg.intrinsics = {14.0, 14.0, 7.5, 5.5};
  return cfg;
}

TrainingFrame outlier_frame(std::uint64_t seed, double outlier_fraction,
                            double coord_sigma = 0.0) {
  const FrameSample clean = generate_frame(small_config(), seed);
  NoiseModel nm;
  nm.coord_sigma = coord_sigma;
  nm.outlier_fraction = outlier_fraction;
  nm.seed = derive_stream(seed, 9);
  const FrameSample noisy = corrupt(clean, nm);
  return TrainingFrame{to_correspondences(noisy, true), noisy.gt_pose};
}

TEST(Sigmoid, KnownValuesAndMonotonicity) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(20.0), 1.0, 1e-8);
  EXPECT_NEAR(sigmoid(-20.0), 0.0, 1e-8);
  EXPECT_LT(sigmoid(-1.0), sigmoid(0.0));
  EXPECT_LT(sigmoid(0.0), sigmoid(1.0));
  EXPECT_NEAR(sigmoid(1.0) + sigmoid(-1.0), 1.0, 1e-15);
}

TEST(ApplyWeights, MapsLogitsThroughSigmoid) {
  CorrespondenceSet c;
  c.camera_points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  c.scene_points = c.camera_points;
  c.weights = Eigen::VectorXd::Zero(3);
  WeightLogits wl;
  wl.z = Eigen::VectorXd(3);
  wl.z << -2.0, 0.0, 3.0;
  const CorrespondenceSet out = apply_weights(c, wl);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(out.weights[i], sigmoid(wl.z[i]));
  // The input set is untouched.
  EXPECT_DOUBLE_EQ(c.weights.norm(), 0.0);
}

TEST(ApplyWeights, LengthMismatchThrows) {
  CorrespondenceSet c;
  c.camera_points = {{0, 0, 0}, {1, 0, 0}};
  c.scene_points = c.camera_points;
  c.weights = Eigen::VectorXd::Ones(2);
  WeightLogits wl;
  wl.z = Eigen::VectorXd::Zero(3);
  try {
    apply_weights(c, wl);
    FAIL() << "expected invalid-argument";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(Baselines, UniformWeightsAreOnes) {
  const Eigen::VectorXd w = uniform_weights(5);
  ASSERT_EQ(w.size(), 5);
  EXPECT_DOUBLE_EQ(w.minCoeff(), 1.0);
  EXPECT_DOUBLE_EQ(w.maxCoeff(), 1.0);
}

TEST(Baselines, OracleInlierWeightsInvertTheMask) {
  CorrespondenceSet c;
  c.camera_points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  c.scene_points = c.camera_points;
  c.weights = Eigen::VectorXd::Ones(4);
  const MaskGrid mask{0, 1, 0, 1};
  const Eigen::VectorXd w = oracle_inlier_weights(c, mask);
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_DOUBLE_EQ(w[1], 0.0);
  EXPECT_DOUBLE_EQ(w[2], 1.0);
  EXPECT_DOUBLE_EQ(w[3], 0.0);
  EXPECT_THROW(oracle_inlier_weights(c, MaskGrid{1, 0}), Error);
}

TEST(Baselines, InverseResidualFollowsTheDocumentedFormula) {
  const TrainingFrame tf = outlier_frame(3, 0.2);
  const double tau = 0.05;
  const Eigen::VectorXd w = inverse_residual_weights(tf.set, tau);

  // Independent recomputation from already-tested pieces.
  CorrespondenceSet uniform = tf.set;
  uniform.weights = uniform_weights(tf.set.size());
  const Pose pose = weighted_kabsch(uniform);
  for (int i = 0; i < tf.set.size(); ++i) {
    const double e =
        (tf.set.scene_points[i] - transform(pose, tf.set.camera_points[i])).norm();
    EXPECT_NEAR(w[i], tau / (tau + e), 1e-12);
    EXPECT_GT(w[i], 0.0);
    EXPECT_LE(w[i], 1.0);
  }
  // An error of exactly tau must give weight one half.
  EXPECT_NEAR(tau / (tau + 0.05), 0.5, 1e-15);
}

TEST(Baselines, InverseResidualRejectsBadTau) {
  const TrainingFrame tf = outlier_frame(4, 0.0);
  EXPECT_THROW(inverse_residual_weights(tf.set, 0.0), Error);
  EXPECT_THROW(inverse_residual_weights(tf.set, -1.0), Error);
}

TEST(OptimizeWeights, ExactFramesAreAFixedPoint) {
  // On a noise-free frame any positive weighting solves exactly, so the
  // loss stays at numerical zero. The logits may drift by Adam's
  // eps-normalized step on the roundoff gradient, but only just.
  std::vector<TrainingFrame> frames;
  for (std::uint64_t s : {11, 12}) frames.push_back(outlier_frame(s, 0.0));
  OptimizerConfig cfg;
  cfg.epochs = 3;
  const OptimizationResult r = optimize_weights(frames, cfg, 0);
  ASSERT_EQ(r.loss_trace.size(), 4u);
  for (double l : r.loss_trace) EXPECT_LE(l, 1e-9);
  for (const WeightLogits& wl : r.logits)
    for (int i = 0; i < wl.z.size(); ++i) EXPECT_NEAR(wl.z[i], 2.0, 1e-9);
  for (const std::string& e : r.frame_errors) EXPECT_TRUE(e.empty());
}

TEST(OptimizeWeights, TraceIsNonIncreasing) {
  std::vector<TrainingFrame> frames;
  for (std::uint64_t s : {21, 22, 23}) frames.push_back(outlier_frame(s, 0.3, 0.02));
  OptimizerConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.epochs = 10;
  const OptimizationResult r = optimize_weights(frames, cfg, 0);
  ASSERT_EQ(r.loss_trace.size(), 11u);
  for (std::size_t i = 1; i < r.loss_trace.size(); ++i)
    EXPECT_LE(r.loss_trace[i], r.loss_trace[i - 1] + 1e-12);
  // Ten epochs on heavily corrupted frames must make real progress.
  EXPECT_LT(r.loss_trace.back(), r.loss_trace.front());
}

TEST(OptimizeWeights, DeterministicAcrossRuns) {
  std::vector<TrainingFrame> frames;
  for (std::uint64_t s : {31, 32}) frames.push_back(outlier_frame(s, 0.25, 0.01));
  OptimizerConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.epochs = 5;
  const OptimizationResult a = optimize_weights(frames, cfg, 0);
  const OptimizationResult b = optimize_weights(frames, cfg, 0);
  ASSERT_EQ(a.loss_trace.size(), b.loss_trace.size());
  for (std::size_t i = 0; i < a.loss_trace.size(); ++i)
    EXPECT_EQ(a.loss_trace[i], b.loss_trace[i]);
  for (std::size_t f = 0; f < a.logits.size(); ++f)
    for (int i = 0; i < a.logits[f].z.size(); ++i)
      EXPECT_EQ(a.logits[f].z[i], b.logits[f].z[i]);
}

TEST(OptimizeWeights, DegenerateFrameFailsAloneOthersProceed) {
  // Frame 0 is collinear: the very first solve throws and the frame is
  // parked with its initial logits while frame 1 keeps optimizing.
  TrainingFrame bad;
  for (int i = 0; i < 6; ++i) {
    bad.set.camera_points.push_back(Eigen::Vector3d(i, 0, 0));
    bad.set.scene_points.push_back(Eigen::Vector3d(i, 0, 0));
  }
  bad.set.weights = Eigen::VectorXd::Ones(6);
  std::vector<TrainingFrame> frames{bad, outlier_frame(41, 0.3, 0.02)};
  OptimizerConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.epochs = 5;
  const OptimizationResult r = optimize_weights(frames, cfg, 0);

  ASSERT_EQ(r.frame_errors.size(), 2u);
  EXPECT_NE(r.frame_errors[0].find("degenerate-configuration"), std::string::npos);
  EXPECT_TRUE(r.frame_errors[1].empty());
  for (int i = 0; i < r.logits[0].z.size(); ++i)
    EXPECT_DOUBLE_EQ(r.logits[0].z[i], 2.0);
  // The trace only aggregates frames that produced a loss.
  ASSERT_EQ(r.loss_trace.size(), 6u);
  EXPECT_TRUE(std::isfinite(r.loss_trace.front()));
  EXPECT_LE(r.loss_trace.back(), r.loss_trace.front());
}

TEST(OptimizeWeights, DownweightsOutliers) {
  std::vector<TrainingFrame> frames{outlier_frame(51, 0.3, 0.02)};
  // Rebuild the outlier mask for the frame the helper generated.
  const FrameSample clean = generate_frame(small_config(), 51);
  NoiseModel nm;
  nm.coord_sigma = 0.02;
  nm.outlier_fraction = 0.3;
  nm.seed = derive_stream(51, 9);
  const FrameSample noisy = corrupt(clean, nm);

  OptimizerConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.epochs = 40;
  const OptimizationResult r = optimize_weights(frames, cfg, 0);
  ASSERT_TRUE(r.frame_errors[0].empty());

  double outlier_sum = 0.0, inlier_sum = 0.0;
  int outliers = 0, inliers = 0;
  for (int i = 0; i < r.logits[0].z.size(); ++i) {
    const double w = sigmoid(r.logits[0].z[i]);
    if (noisy.outlier_mask[i]) {
      outlier_sum += w;
      ++outliers;
    } else {
      inlier_sum += w;
      ++inliers;
    }
  }
  ASSERT_GT(outliers, 0);
  ASSERT_GT(inliers, 0);
  EXPECT_LT(outlier_sum / outliers, inlier_sum / inliers);

  // The optimized weights must beat uniform weighting on this frame.
  CorrespondenceSet uniform = frames[0].set;
  uniform.weights = uniform_weights(uniform.size());
  const double uniform_err =
      pose_error(weighted_kabsch(uniform), frames[0].gt_pose).rotation_deg;
  const double optimized_err =
      pose_error(weighted_kabsch(r.frames[0]), frames[0].gt_pose).rotation_deg;
  EXPECT_LT(optimized_err, uniform_err);
}

TEST(OptimizeWeights, PointRefinementReducesLossFurther) {
  std::vector<TrainingFrame> frames{outlier_frame(61, 0.0, 0.05)};
  OptimizerConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.epochs = 10;
  const OptimizationResult base = optimize_weights(frames, cfg, 0);
  cfg.point_refinement_rate = 1e-4;
  const OptimizationResult refined = optimize_weights(frames, cfg, 0);
  ASSERT_TRUE(base.frame_errors[0].empty());
  ASSERT_TRUE(refined.frame_errors[0].empty());
  // Refinement moves the points; without it they are returned untouched.
  bool moved = false;
  for (int i = 0; i < frames[0].set.size() && !moved; ++i)
    moved = (refined.frames[0].camera_points[i] - frames[0].set.camera_points[i]).norm() > 0;
  EXPECT_TRUE(moved);
  for (int i = 0; i < frames[0].set.size(); ++i)
    EXPECT_EQ(base.frames[0].camera_points[i], frames[0].set.camera_points[i]);
  EXPECT_LT(refined.loss_trace.back(), refined.loss_trace.front());
}

TEST(OptimizerConfigValidate, RejectsBadValues) {
  OptimizerConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.beta1 = 1.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.eps = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.point_refinement_rate = -1.0;
  EXPECT_THROW(cfg.validate(), Error);
}

}  // namespace
}  // namespace rigidpose
