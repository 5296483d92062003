#include "rigidpose/kabsch_grad.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "kabsch_internal.hpp"
#include "rigidpose/error.hpp"
#include "rigidpose/geometry.hpp"
#include "rigidpose/losses.hpp"
#include "rigidpose/rng.hpp"

namespace rigidpose {

namespace {

// Pullback through an already-computed decomposition, so pose_jacobians
// can reuse one forward solve for all 12 seeds.
KabschGradients pull_back(const CorrespondenceSet& c,
                          const detail::KabschDecomposition& d,
                          const Eigen::Matrix3d& loss_d_rotation,
                          const Eigen::Vector3d& loss_d_translation) {
  const Eigen::Vector3d& s = d.singular_values;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (std::abs(s(i) - s(j)) <= 1e-8)
        throw Error(ErrorCode::kDegenerateSvdGradient,
                    "singular values " + std::to_string(s(i)) + " and " +
                        std::to_string(s(j)) +
                        " too close to differentiate through the SVD");

  // T = -R mu_a + mu_b: fold the translation path into the rotation
  // gradient and seed the centroid gradients.
  const Eigen::Matrix3d g_rot =
      loss_d_rotation - loss_d_translation * d.mu_a.transpose();
  Eigen::Vector3d gmu_a = -d.pose.rotation.transpose() * loss_d_translation;
  Eigen::Vector3d gmu_b = loss_d_translation;

  // R = V diag(1, 1, det) U^T.
  const Eigen::DiagonalMatrix<double, 3> corr(1.0, 1.0, d.det_sign);
  const Eigen::Matrix3d u_bar = g_rot.transpose() * d.v * corr;
  const Eigen::Matrix3d v_bar = g_rot * d.u * corr;

  // SVD pullback with F_ij = 1 / (s_j^2 - s_i^2); the singular values
  // themselves carry no upstream gradient, so the diagonal stays zero.
  const Eigen::Matrix3d au = d.u.transpose() * u_bar;
  const Eigen::Matrix3d av = d.v.transpose() * v_bar;
  const Eigen::Matrix3d au_as = au - au.transpose();
  const Eigen::Matrix3d av_as = av - av.transpose();
  Eigen::Matrix3d p_bar = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      const double f = 1.0 / ((s(j) - s(i)) * (s(j) + s(i)));
      p_bar(i, j) = f * (s(j) * au_as(i, j) + s(i) * av_as(i, j));
    }
  const Eigen::Matrix3d m_bar = d.u * p_bar * d.v.transpose();

  const int n = c.size();
  KabschGradients g;
  g.d_weights.resize(n);
  g.d_camera_points.resize(n);
  g.d_scene_points.resize(n);

  // cross = sum_i w_i abar_i bbar_i^T with abar, bbar centered.
  std::vector<Eigen::Vector3d> abar(n), bbar(n);
  Eigen::Vector3d sum_d_abar = Eigen::Vector3d::Zero();
  Eigen::Vector3d sum_d_bbar = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    abar[i] = c.camera_points[i] - d.mu_a;
    bbar[i] = c.scene_points[i] - d.mu_b;
    g.d_camera_points[i] = c.weights[i] * (m_bar * bbar[i]);
    g.d_scene_points[i] = c.weights[i] * (m_bar.transpose() * abar[i]);
    sum_d_abar += g.d_camera_points[i];
    sum_d_bbar += g.d_scene_points[i];
  }

  // Centering routes -sum(d_abar) into mu_a. The sum vanishes analytically
  // (centered moments), but is kept so roundoff cancels the same way the
  // finite-difference oracle sees it.
  gmu_a -= sum_d_abar;
  gmu_b -= sum_d_bbar;

  const double sw = d.weight_sum;
  for (int i = 0; i < n; ++i) {
    g.d_weights(i) = abar[i].dot(m_bar * bbar[i]) +
                     (abar[i].dot(gmu_a) + bbar[i].dot(gmu_b)) / sw;
    const double rel = c.weights[i] / sw;
    g.d_camera_points[i] += rel * gmu_a;
    g.d_scene_points[i] += rel * gmu_b;
  }
  return g;
}

Pose random_target_pose(std::uint64_t seed) {
  Rng rng(seed);
  Eigen::Vector4d q;
  for (int i = 0; i < 4; ++i) q(i) = rng.normal();
  if (q.squaredNorm() < 1e-24) q << 1.0, 0.0, 0.0, 0.0;
  q.normalize();
  Pose p;
  p.rotation = Eigen::Quaterniond(q(0), q(1), q(2), q(3)).toRotationMatrix();
  for (int i = 0; i < 3; ++i) p.translation(i) = rng.normal();
  return p;
}

}  // namespace

KabschGradients kabsch_vjp(const CorrespondenceSet& c,
                           const Eigen::Matrix3d& loss_d_rotation,
                           const Eigen::Vector3d& loss_d_translation) {
  return pull_back(c, detail::kabsch_decompose(c), loss_d_rotation,
                   loss_d_translation);
}

PoseJacobians pose_jacobians(const CorrespondenceSet& c) {
  const detail::KabschDecomposition d = detail::kabsch_decompose(c);
  const int n = c.size();
  PoseJacobians j;
  j.d_rotation_d_weight.resize(n, 9);
  j.d_translation_d_weight.resize(n, 3);
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 3; ++col) {
      Eigen::Matrix3d seed = Eigen::Matrix3d::Zero();
      seed(r, col) = 1.0;
      j.d_rotation_d_weight.col(3 * r + col) =
          pull_back(c, d, seed, Eigen::Vector3d::Zero()).d_weights;
    }
  for (int k = 0; k < 3; ++k) {
    j.d_translation_d_weight.col(k) =
        pull_back(c, d, Eigen::Matrix3d::Zero(), Eigen::Vector3d::Unit(k))
            .d_weights;
  }
  return j;
}

Eigen::VectorXd finite_diff_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  if (!(h > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "finite difference step must be positive");
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + h;
    const double fp = f(probe);
    probe(i) = x(i) - h;
    const double fm = f(probe);
    probe(i) = x(i);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw Error(ErrorCode::kInvalidArgument,
                  "non-finite loss at finite-difference probe " + std::to_string(i));
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

GradCheckReport grad_check(const CorrespondenceSet& c, std::uint64_t seed,
                           double step) {
  c.validate();
  if (!(step > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "finite difference step must be positive");
  const Pose target = random_target_pose(derive_stream(seed, 0));

  const int n = c.size();
  const int total = 7 * n;  // [weights | camera xyz | scene xyz]
  Eigen::VectorXd x0(total);
  x0.head(n) = c.weights;
  for (int i = 0; i < n; ++i) {
    x0.segment<3>(n + 3 * i) = c.camera_points[i];
    x0.segment<3>(4 * n + 3 * i) = c.scene_points[i];
  }

  const auto loss = [&](const Eigen::VectorXd& x) {
    CorrespondenceSet probe = c;
    probe.weights = x.head(n);
    for (int i = 0; i < n; ++i) {
      probe.camera_points[i] = x.segment<3>(n + 3 * i);
      probe.scene_points[i] = x.segment<3>(4 * n + 3 * i);
    }
    const double value = l_pose(weighted_kabsch(probe), target);
    if (!std::isfinite(value))
      throw Error(ErrorCode::kInvalidArgument, "non-finite loss in gradient check");
    return value;
  };

  const Pose est = weighted_kabsch(c);
  const auto [g_rot, g_trans] = l_pose_grad(est, target);
  const KabschGradients a = kabsch_vjp(c, g_rot, g_trans);
  Eigen::VectorXd analytic(total);
  analytic.head(n) = a.d_weights;
  for (int i = 0; i < n; ++i) {
    analytic.segment<3>(n + 3 * i) = a.d_camera_points[i];
    analytic.segment<3>(4 * n + 3 * i) = a.d_scene_points[i];
  }

  std::vector<int> indices(total);
  std::iota(indices.begin(), indices.end(), 0);
  if (total > 700) {
    // Partial Fisher-Yates: the first 140 entries become the sample.
    Rng pick(derive_stream(seed, 1));
    for (int i = 0; i < 140; ++i) {
      const int j =
          i + static_cast<int>(pick.uniform_index(static_cast<std::uint64_t>(total - i)));
      std::swap(indices[i], indices[j]);
    }
    indices.resize(140);
  }

  GradCheckReport report;
  report.parameters_checked = static_cast<int>(indices.size());
  for (const int idx : indices) {
    double numeric = 0.0;
    if (idx < n && x0(idx) < step) {
      // w - h would leave the domain; second-order one-sided difference.
      Eigen::VectorXd x1 = x0, x2 = x0;
      x1(idx) += step;
      x2(idx) += 2.0 * step;
      numeric = (-3.0 * loss(x0) + 4.0 * loss(x1) - loss(x2)) / (2.0 * step);
    } else {
      Eigen::VectorXd xp = x0, xm = x0;
      xp(idx) += step;
      xm(idx) -= step;
      numeric = (loss(xp) - loss(xm)) / (2.0 * step);
    }
    const double rel = std::abs(analytic(idx) - numeric) /
                       std::max({1.0, std::abs(analytic(idx)), std::abs(numeric)});
    if (rel > report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_parameter_index = idx;
      report.analytic_at_worst = analytic(idx);
      report.numeric_at_worst = numeric;
    }
  }
  return report;
}

}  // namespace rigidpose
