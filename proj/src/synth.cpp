#include "rigidpose/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rigidpose/error.hpp"
#include "rigidpose/geometry.hpp"

namespace rigidpose {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

/// First `k` entries of a seeded permutation of `pool` (partial
/// Fisher-Yates); `pool` is consumed.
std::vector<int> draw_without_replacement(std::vector<int> pool, int k, Rng& rng) {
  const int n = static_cast<int>(pool.size());
  for (int i = 0; i < k; ++i) {
    const int j =
        i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

void SceneConfig::validate() const {
  if (!(depth_min > 0.0) || !(depth_max > depth_min))
    throw Error(ErrorCode::kInvalidArgument,
                "depth range must satisfy 0 < depth_min < depth_max");
  if (width <= 0 || height <= 0 || width * height < 3)
    throw Error(ErrorCode::kInvalidArgument,
                "resolution must cover at least 3 pixels");
  intrinsics.validate();
  if (bounds.isEmpty())
    throw Error(ErrorCode::kInvalidArgument, "scene bounds must be non-empty");
}

void NoiseModel::validate() const {
  if (!(depth_sigma >= 0.0) || !(coord_sigma >= 0.0))
    throw Error(ErrorCode::kInvalidArgument, "noise sigmas must be nonnegative");
  if (!(outlier_fraction >= 0.0 && outlier_fraction <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "outlier_fraction must be in [0, 1]");
  if (!(invalid_fraction >= 0.0 && invalid_fraction <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "invalid_fraction must be in [0, 1]");
}

Eigen::Matrix3d random_rotation(Rng& rng) {
  Eigen::Vector4d q;
  for (int i = 0; i < 4; ++i) q(i) = rng.normal();
  if (q.squaredNorm() < 1e-24) q << 1.0, 0.0, 0.0, 0.0;
  q.normalize();
  return Eigen::Quaterniond(q(0), q(1), q(2), q(3)).toRotationMatrix();
}

Pose random_pose(Rng& rng, const Eigen::AlignedBox3d& bounds) {
  Pose p;
  p.rotation = random_rotation(rng);
  for (int i = 0; i < 3; ++i)
    p.translation(i) = rng.uniform(bounds.min()(i), bounds.max()(i));
  return p;
}

FrameSample generate_frame(const SceneConfig& cfg, const Pose& pose,
                           std::uint64_t field_seed) {
  cfg.validate();

  // Depth field: mid + half-span * sum of low-frequency sinusoids over the
  // image plane, clamped into [depth_min, depth_max]. The RNG only feeds
  // the wave parameters, so evaluation order cannot affect the result.
  Rng rng(field_seed);
  const int waves = 1 + static_cast<int>(rng.uniform_index(8));
  struct Wave {
    double amp, fu, fv, phase;
  };
  std::vector<Wave> field(waves);
  for (Wave& w : field) {
    w.amp = rng.uniform(0.05, 0.35);
    w.fu = rng.uniform(0.2, 2.5);
    w.fv = rng.uniform(0.2, 2.5);
    w.phase = rng.uniform(0.0, kTwoPi);
  }

  FrameSample f;
  f.config = cfg;
  f.gt_pose = pose;
  f.gt_depth = DepthMap(cfg.width, cfg.height);
  f.gt_coords = SceneCoordinateMap(cfg.width, cfg.height);

  const double mid = 0.5 * (cfg.depth_min + cfg.depth_max);
  const double half_span = 0.5 * (cfg.depth_max - cfg.depth_min);
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x) {
      double d = mid;
      for (const Wave& w : field)
        d += half_span * w.amp *
             std::sin(kTwoPi * (w.fu * x / cfg.width + w.fv * y / cfg.height) +
                      w.phase);
      d = std::clamp(d, cfg.depth_min, cfg.depth_max);
      f.gt_depth.at(x, y) = d;
      f.gt_coords.at(x, y) =
          transform(pose, unproject(cfg.intrinsics, Eigen::Vector2d(x, y), d));
    }

  f.pred_depth = f.gt_depth;
  f.pred_coords = f.gt_coords;
  f.outlier_mask.assign(f.gt_depth.size(), 0);
  f.validity_mask.assign(f.gt_depth.size(), 1);
  return f;
}

FrameSample generate_frame(const SceneConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng pose_rng(derive_stream(seed, 0));
  return generate_frame(cfg, random_pose(pose_rng, cfg.bounds),
                        derive_stream(seed, 1));
}

FrameSample corrupt(const FrameSample& f, const NoiseModel& nm) {
  nm.validate();
  FrameSample out = f;
  const int n = out.gt_depth.size();

  // Withhold ground truth first: both maps and both predictions go to zero
  // so the pixel reads as invalid everywhere downstream.
  const int invalid_count =
      static_cast<int>(std::lround(nm.invalid_fraction * n));
  {
    std::vector<int> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    Rng rng(derive_stream(nm.seed, 2));
    for (int idx : draw_without_replacement(std::move(pool), invalid_count, rng)) {
      out.gt_depth.values[idx] = 0.0;
      out.gt_coords.values[idx].setZero();
      out.validity_mask[idx] = 0;
    }
  }

  std::vector<int> valid;
  valid.reserve(n);
  for (int i = 0; i < n; ++i)
    if (out.validity_mask[i] && out.gt_depth.valid(i)) valid.push_back(i);

  // Gaussian corruption of the predictions, from ground truth, on valid
  // pixels in row-major order. Outlier pixels also pass through here; their
  // coordinates are overwritten below, which keeps every other pixel's
  // draws independent of the outlier fraction.
  {
    Rng depth_rng(derive_stream(nm.seed, 0));
    Rng coord_rng(derive_stream(nm.seed, 1));
    out.pred_depth = out.gt_depth;
    out.pred_coords = out.gt_coords;
    for (int idx : valid) {
      out.pred_depth.values[idx] += depth_rng.normal(nm.depth_sigma);
      for (int a = 0; a < 3; ++a)
        out.pred_coords.values[idx](a) += coord_rng.normal(nm.coord_sigma);
    }
  }

  // Outliers: scene coordinates replaced by uniform draws over the scene
  // bounds. Count is relative to the full pixel grid, capped by what is
  // still valid.
  const int outlier_count =
      std::min(static_cast<int>(std::lround(nm.outlier_fraction * n)),
               static_cast<int>(valid.size()));
  {
    Rng select_rng(derive_stream(nm.seed, 3));
    std::vector<int> chosen =
        draw_without_replacement(valid, outlier_count, select_rng);
    std::sort(chosen.begin(), chosen.end());
    Rng value_rng(derive_stream(nm.seed, 4));
    out.outlier_mask.assign(n, 0);
    for (int idx : chosen) {
      for (int a = 0; a < 3; ++a)
        out.pred_coords.values[idx](a) =
            value_rng.uniform(f.config.bounds.min()(a), f.config.bounds.max()(a));
      out.outlier_mask[idx] = 1;
    }
  }
  return out;
}

CorrespondenceSet to_correspondences(const FrameSample& f, bool use_pred,
                                     InvalidPixelPolicy policy) {
  const DepthMap& depth = use_pred ? f.pred_depth : f.gt_depth;
  const SceneCoordinateMap& coords = use_pred ? f.pred_coords : f.gt_coords;
  if (depth.valid_count() < 3)
    throw Error(ErrorCode::kInsufficientPoints,
                "frame has fewer than 3 pixels with valid depth");

  CorrespondenceSet c;
  std::vector<double> weights;
  for (int y = 0; y < depth.height; ++y)
    for (int x = 0; x < depth.width; ++x) {
      const int idx = depth.index(x, y);
      if (depth.valid(idx)) {
        c.camera_points.push_back(
            unproject(f.config.intrinsics, Eigen::Vector2d(x, y), depth.values[idx]));
        c.scene_points.push_back(coords.values[idx]);
      } else if (policy == InvalidPixelPolicy::kIncludeZeroFilled) {
        c.camera_points.push_back(Eigen::Vector3d::Zero());
        c.scene_points.push_back(Eigen::Vector3d::Zero());
      } else {
        continue;
      }
      weights.push_back(1.0);
    }
  c.weights = Eigen::Map<Eigen::VectorXd>(weights.data(),
                                          static_cast<Eigen::Index>(weights.size()));
  return c;
}

std::vector<int> correspondence_pixels(const FrameSample& f, bool use_pred,
                                       InvalidPixelPolicy policy) {
  const DepthMap& depth = use_pred ? f.pred_depth : f.gt_depth;
  std::vector<int> pixels;
  for (int i = 0; i < depth.size(); ++i)
    if (depth.valid(i) || policy == InvalidPixelPolicy::kIncludeZeroFilled)
      pixels.push_back(i);
  return pixels;
}

}  // namespace rigidpose
