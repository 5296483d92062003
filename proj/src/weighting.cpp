#include "rigidpose/weighting.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rigidpose/error.hpp"
#include "rigidpose/geometry.hpp"
#include "rigidpose/kabsch_grad.hpp"
#include "rigidpose/losses.hpp"

namespace rigidpose {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be positive");
  if (epochs < 1)
    throw Error(ErrorCode::kInvalidArgument, "epochs must be at least 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "adam betas must lie in [0, 1)");
  if (!(eps > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "adam eps must be positive");
  if (!(point_refinement_rate >= 0.0))
    throw Error(ErrorCode::kInvalidArgument,
                "point_refinement_rate must be nonnegative");
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

CorrespondenceSet apply_weights(const CorrespondenceSet& c, const WeightLogits& wl) {
  if (wl.z.size() != c.size())
    throw Error(ErrorCode::kInvalidArgument,
                "logit vector length " + std::to_string(wl.z.size()) +
                    " does not match correspondence count " +
                    std::to_string(c.size()));
  CorrespondenceSet out = c;
  out.weights = wl.z.unaryExpr([](double z) { return sigmoid(z); });
  return out;
}

namespace {

/// Mutable optimization state of one frame.
struct FrameState {
  CorrespondenceSet set;  // weights kept in sync with z
  Pose gt_pose;
  Eigen::VectorXd z, m, v;
  double loss = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
};

double frame_loss(const FrameState& s) {
  return l_pose(weighted_kabsch(s.set), s.gt_pose);
}

void set_weights_from_logits(FrameState& s) {
  s.set.weights = s.z.unaryExpr([](double z) { return sigmoid(z); });
}

/// Mean loss over frames that have produced one; NaN if none has.
double mean_loss(const std::vector<FrameState>& states) {
  double sum = 0.0;
  int count = 0;
  for (const FrameState& s : states)
    if (!std::isnan(s.loss)) {
      sum += s.loss;
      ++count;
    }
  return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

OptimizationResult optimize_weights(const std::vector<TrainingFrame>& frames,
                                    const OptimizerConfig& cfg, std::uint64_t) {
  cfg.validate();

  std::vector<FrameState> states(frames.size());
  OptimizationResult result;
  result.frame_errors.resize(frames.size());

  for (std::size_t i = 0; i < frames.size(); ++i) {
    FrameState& s = states[i];
    s.set = frames[i].set;
    s.gt_pose = frames[i].gt_pose;
    const int n = s.set.size();
    s.z = Eigen::VectorXd::Constant(n, 2.0);  // w ~ 0.88, inclusive start
    s.m = Eigen::VectorXd::Zero(n);
    s.v = Eigen::VectorXd::Zero(n);
    try {
      set_weights_from_logits(s);
      s.loss = frame_loss(s);
    } catch (const Error& e) {
      s.failed = true;
      result.frame_errors[i] = e.what();
    }
  }
  result.loss_trace.push_back(mean_loss(states));

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < frames.size(); ++i) {
      FrameState& s = states[i];
      if (s.failed) continue;
      try {
        const Pose pose = weighted_kabsch(s.set);
        const auto [g_rot, g_trans] = l_pose_grad(pose, s.gt_pose);
        const KabschGradients g = kabsch_vjp(s.set, g_rot, g_trans);

        // Chain through w = sigmoid(z), then Adam on the logits.
        const Eigen::VectorXd dz =
            g.d_weights.array() * s.set.weights.array() *
            (1.0 - s.set.weights.array());
        s.m = cfg.beta1 * s.m + (1.0 - cfg.beta1) * dz;
        s.v = cfg.beta2 * s.v + (1.0 - cfg.beta2) * dz.cwiseProduct(dz);
        const double mc = 1.0 - std::pow(cfg.beta1, epoch);
        const double vc = 1.0 - std::pow(cfg.beta2, epoch);
        const Eigen::VectorXd step =
            cfg.learning_rate *
            (s.m / mc).cwiseQuotient(((s.v / vc).cwiseSqrt().array() + cfg.eps).matrix());

        // Backtracking: scale the whole update (logits and, when enabled,
        // points) until the loss stops increasing; give up after 5 halvings
        // so a frame's loss is non-increasing by construction.
        double scale = 1.0;
        bool accepted = false;
        for (int attempt = 0; attempt < 6 && !accepted; ++attempt, scale *= 0.5) {
          FrameState trial = s;
          trial.z -= scale * step;
          set_weights_from_logits(trial);
          if (cfg.point_refinement_rate > 0.0) {
            const double rate = scale * cfg.point_refinement_rate;
            for (int p = 0; p < trial.set.size(); ++p) {
              trial.set.camera_points[p] -= rate * g.d_camera_points[p];
              trial.set.scene_points[p] -= rate * g.d_scene_points[p];
            }
          }
          const double trial_loss = frame_loss(trial);
          if (trial_loss <= s.loss) {
            trial.loss = trial_loss;
            s = std::move(trial);
            accepted = true;
          }
        }
        // On rejection the Adam moments keep the new gradient information
        // but the parameters stay put.
      } catch (const Error& e) {
        s.failed = true;
        result.frame_errors[i] = e.what();
      }
    }
    result.loss_trace.push_back(mean_loss(states));
  }

  for (FrameState& s : states) {
    result.logits.push_back(WeightLogits{std::move(s.z)});
    result.frames.push_back(std::move(s.set));
  }
  return result;
}

Eigen::VectorXd uniform_weights(int n) { return Eigen::VectorXd::Ones(n); }

Eigen::VectorXd oracle_inlier_weights(const CorrespondenceSet& c,
                                      const MaskGrid& outlier_mask) {
  if (static_cast<int>(outlier_mask.size()) != c.size())
    throw Error(ErrorCode::kInvalidArgument,
                "outlier mask length does not match correspondence count");
  Eigen::VectorXd w(c.size());
  for (int i = 0; i < c.size(); ++i) w(i) = outlier_mask[i] ? 0.0 : 1.0;
  return w;
}

Eigen::VectorXd inverse_residual_weights(const CorrespondenceSet& c, double tau) {
  if (!(tau > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "tau must be positive");
  CorrespondenceSet uniform = c;
  uniform.weights = uniform_weights(c.size());
  const Pose pose = weighted_kabsch(uniform);
  Eigen::VectorXd w(c.size());
  for (int i = 0; i < c.size(); ++i) {
    const double e =
        (c.scene_points[i] - transform(pose, c.camera_points[i])).norm();
    w(i) = tau / (tau + e);
  }
  return w;
}

}  // namespace rigidpose
