#pragma once

#include <Eigen/Core>

#include "rigidpose/types.hpp"

namespace rigidpose::detail {

/// Intermediates of the weighted Kabsch solve, shared between the forward
/// pose computation and the gradient pullback.
struct KabschDecomposition {
  double weight_sum = 0.0;
  Eigen::Vector3d mu_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d mu_b = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();  // Abar^T W Bbar
  Eigen::Matrix3d u = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d v = Eigen::Matrix3d::Identity();
  Eigen::Vector3d singular_values = Eigen::Vector3d::Zero();  // descending
  double det_sign = 1.0;
  Pose pose;
};

/// Runs all weighted_kabsch validation and computation, keeping the
/// intermediates.
KabschDecomposition kabsch_decompose(const CorrespondenceSet& c);

}  // namespace rigidpose::detail
