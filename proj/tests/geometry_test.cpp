#include "rigidpose/geometry.hpp"

#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <cmath>

#include "rigidpose/rng.hpp"
#include "rigidpose/synth.hpp"

namespace rigidpose {
namespace {

constexpr double kPi = 3.14159265358979323846;

CorrespondenceSet make_set(const std::vector<Eigen::Vector3d>& a,
                           const std::vector<Eigen::Vector3d>& b,
                           const Eigen::VectorXd& w) {
  CorrespondenceSet c;
  c.camera_points = a;
  c.scene_points = b;
  c.weights = w;
  return c;
}

// Random but well-conditioned instance: n points in a unit-ish box, a
// random proper pose, optional noise on the scene side.
CorrespondenceSet random_instance(std::uint64_t seed, int n, const Pose& pose,
                                  double sigma = 0.0) {
  Rng rng(seed);
  CorrespondenceSet c;
  c.weights = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d a(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    Eigen::Vector3d b = transform(pose, a);
    if (sigma > 0)
      b += Eigen::Vector3d(rng.normal(sigma), rng.normal(sigma), rng.normal(sigma));
    c.camera_points.push_back(a);
    c.scene_points.push_back(b);
  }
  return c;
}

TEST(Unproject, PrincipalAxisPixel) {
  const CameraIntrinsics intr{525.0, 525.0, 420.0, 240.0};
  const Eigen::Vector3d p = unproject(intr, {420.0, 240.0}, 2.0);
  EXPECT_DOUBLE_EQ(p.x(), 0.0);
  EXPECT_DOUBLE_EQ(p.y(), 0.0);
  EXPECT_DOUBLE_EQ(p.z(), 2.0);
}

TEST(Unproject, OffAxisPixel) {
  const CameraIntrinsics intr{525.0, 525.0, 420.0, 240.0};
  const Eigen::Vector3d p = unproject(intr, {630.0, 240.0}, 2.0);
  // x = d * (u - cx) / fx = 2 * 210 / 525 = 0.8
  EXPECT_NEAR(p.x(), 0.8, 1e-15);
  EXPECT_DOUBLE_EQ(p.y(), 0.0);
  EXPECT_DOUBLE_EQ(p.z(), 2.0);
}

TEST(Unproject, ProjectsBackThroughK) {
  const CameraIntrinsics intr{70.0, 80.0, 39.5, 29.5};
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector2d px(rng.uniform(0, 80), rng.uniform(0, 60));
    const double d = rng.uniform(0.5, 5.0);
    const Eigen::Vector3d p = unproject(intr, px, d);
    const Eigen::Vector3d reproj = intr.matrix() * p;
    EXPECT_NEAR(reproj.x() / reproj.z(), px.x(), 1e-10);
    EXPECT_NEAR(reproj.y() / reproj.z(), px.y(), 1e-10);
    EXPECT_DOUBLE_EQ(p.z(), d);
  }
}

TEST(Unproject, RejectsNonPositiveDepth) {
  const CameraIntrinsics intr{1.0, 1.0, 0.0, 0.0};
  EXPECT_THROW(unproject(intr, {0.0, 0.0}, 0.0), Error);
  EXPECT_THROW(unproject(intr, {0.0, 0.0}, -1.0), Error);
  try {
    unproject(intr, {0.0, 0.0}, 0.0);
    FAIL() << "expected invalid-depth";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidDepth);
  }
}

TEST(UnprojectMap, EmptyAndSinglePixel) {
  const CameraIntrinsics intr{10.0, 10.0, 0.5, 0.5};
  DepthMap empty(4, 3, 0.0);
  EXPECT_TRUE(unproject_map(intr, empty).empty());

  DepthMap one(1, 1, 1.5);
  const auto pts = unproject_map(intr, one);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].first, 0);
  EXPECT_NEAR(pts[0].second.x(), 1.5 * (0.0 - 0.5) / 10.0, 1e-15);
  EXPECT_DOUBLE_EQ(pts[0].second.z(), 1.5);
}

TEST(UnprojectMap, RowMajorOrderSkipsInvalid) {
  const CameraIntrinsics intr{70.0, 70.0, 39.5, 29.5};
  DepthMap d(80, 60, 2.0);
  d.at(3, 0) = 0.0;
  d.at(79, 59) = -1.0;
  const auto pts = unproject_map(intr, d);
  ASSERT_EQ(pts.size(), 4798u);
  // Indices strictly increasing, skipped indices absent.
  int prev = -1;
  for (const auto& [idx, p] : pts) {
    EXPECT_GT(idx, prev);
    EXPECT_NE(idx, 3);
    EXPECT_NE(idx, 80 * 60 - 1);
    prev = idx;
    EXPECT_DOUBLE_EQ(p.z(), 2.0);
  }
}

TEST(PoseOps, InvertRoundTrip) {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const Pose p = random_pose(rng, {Eigen::Vector3d(-2, -2, -2), Eigen::Vector3d(2, 2, 2)});
    const Pose q = invert(p);
    const Pose id = compose(p, q);
    EXPECT_LT((id.rotation - Eigen::Matrix3d::Identity()).norm(), 1e-12);
    EXPECT_LT(id.translation.norm(), 1e-12);
    const Eigen::Vector3d x(0.3, -0.7, 1.1);
    EXPECT_LT((transform(q, transform(p, x)) - x).norm(), 1e-12);
  }
}

TEST(PoseOps, ComposeAppliesSecondArgumentFirst) {
  Pose rot;  // 90 deg about z
  rot.rotation = Eigen::AngleAxisd(kPi / 2, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  Pose shift;
  shift.translation = Eigen::Vector3d(1, 0, 0);

  // compose(rot, shift): shift first, then rotate: (0,0,0) -> (1,0,0) -> (0,1,0)
  const Eigen::Vector3d y = transform(compose(rot, shift), Eigen::Vector3d::Zero());
  EXPECT_LT((y - Eigen::Vector3d(0, 1, 0)).norm(), 1e-12);
  // compose(shift, rot): rotate first, then shift: (0,0,0) -> (0,0,0) -> (1,0,0)
  const Eigen::Vector3d x = transform(compose(shift, rot), Eigen::Vector3d::Zero());
  EXPECT_LT((x - Eigen::Vector3d(1, 0, 0)).norm(), 1e-12);
}

TEST(WeightedCentroids, HandComputed) {
  Eigen::VectorXd w(2);
  w << 3.0, 1.0;
  const auto c = make_set({{1, 0, 0}, {0, 0, 0}}, {{0, 2, 0}, {0, 0, 0}}, w);
  const auto [mu_a, mu_b] = weighted_centroids(c);
  EXPECT_LT((mu_a - Eigen::Vector3d(0.75, 0, 0)).norm(), 1e-15);
  EXPECT_LT((mu_b - Eigen::Vector3d(0, 1.5, 0)).norm(), 1e-15);
}

TEST(WeightedCentroids, RejectsZeroWeightSum) {
  const auto c = make_set({{1, 0, 0}, {0, 1, 0}}, {{1, 0, 0}, {0, 1, 0}},
                          Eigen::VectorXd::Zero(2));
  try {
    weighted_centroids(c);
    FAIL() << "expected degenerate-weights";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateWeights);
  }
}

TEST(WeightedKabsch, IdentityOnEqualClouds) {
  const auto c = random_instance(100, 10, Pose::identity());
  const Pose p = weighted_kabsch(c);
  EXPECT_LT((p.rotation - Eigen::Matrix3d::Identity()).norm(), 1e-12);
  EXPECT_LT(p.translation.norm(), 1e-12);
}

TEST(WeightedKabsch, PureTranslation) {
  Pose gt;
  gt.translation = Eigen::Vector3d(0.5, -1.25, 2.0);
  const auto c = random_instance(101, 7, gt);
  const Pose p = weighted_kabsch(c);
  EXPECT_LT((p.rotation - Eigen::Matrix3d::Identity()).norm(), 1e-12);
  EXPECT_LT((p.translation - gt.translation).norm(), 1e-12);
}

TEST(WeightedKabsch, KnownRotationAndTranslation) {
  Pose gt;
  gt.rotation = Eigen::AngleAxisd(kPi / 2, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  gt.translation = Eigen::Vector3d(0, 0, 1);
  const auto c = random_instance(102, 5, gt);
  const Pose p = weighted_kabsch(c);
  const PoseError e = pose_error(p, gt);
  EXPECT_LE(e.rotation_deg, 1e-9);
  EXPECT_LE(e.position_m, 1e-9);
}

TEST(WeightedKabsch, MinimumThreePoints) {
  Pose gt;
  gt.rotation = Eigen::AngleAxisd(0.4, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  gt.translation = Eigen::Vector3d(1, 2, 3);
  // Non-collinear triple.
  CorrespondenceSet c;
  c.camera_points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  c.weights = Eigen::VectorXd::Ones(3);
  for (const auto& a : c.camera_points) c.scene_points.push_back(transform(gt, a));
  const PoseError e = pose_error(weighted_kabsch(c), gt);
  EXPECT_LE(e.rotation_deg, 1e-9);
  EXPECT_LE(e.position_m, 1e-9);
}

TEST(WeightedKabsch, ZeroWeightPairIsExcluded) {
  Pose gt;
  gt.rotation = Eigen::AngleAxisd(-0.8, Eigen::Vector3d(0, 1, 1).normalized()).toRotationMatrix();
  gt.translation = Eigen::Vector3d(-1, 0.5, 0);
  auto c = random_instance(103, 12, gt);
  // Corrupt one pair badly, then zero its weight: the estimate must
  // match the solve on the remaining 11 exactly.
  CorrespondenceSet clean = c;
  clean.camera_points.erase(clean.camera_points.begin() + 4);
  clean.scene_points.erase(clean.scene_points.begin() + 4);
  clean.weights = Eigen::VectorXd::Ones(11);
  c.scene_points[4] = Eigen::Vector3d(50, -80, 30);
  c.weights[4] = 0.0;
  const Pose full = weighted_kabsch(c);
  const Pose rest = weighted_kabsch(clean);
  EXPECT_LT((full.rotation - rest.rotation).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((full.translation - rest.translation).cwiseAbs().maxCoeff(), 1e-9);
  const PoseError e = pose_error(full, gt);
  EXPECT_LE(e.rotation_deg, 1e-9);
  EXPECT_LE(e.position_m, 1e-9);
}

TEST(WeightedKabsch, WeightScaleInvariance) {
  Pose gt;
  gt.rotation = Eigen::AngleAxisd(1.1, Eigen::Vector3d(3, -1, 2).normalized()).toRotationMatrix();
  gt.translation = Eigen::Vector3d(0.2, 0.4, -0.6);
  auto c = random_instance(104, 20, gt, 0.05);
  Rng rng(99);
  for (int i = 0; i < 20; ++i) c.weights[i] = rng.uniform(0.1, 1.0);
  const Pose base = weighted_kabsch(c);
  for (double scale : {1e-3, 1e3}) {
    auto scaled = c;
    scaled.weights *= scale;
    const Pose p = weighted_kabsch(scaled);
    EXPECT_LT((p.rotation - base.rotation).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((p.translation - base.translation).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(WeightedKabsch, PlanarConfigurationStaysProper) {
  // All points in the z = 0 plane; the third singular value vanishes and
  // the det correction must still produce det(R) = +1.
  Pose gt;
  gt.rotation = Eigen::AngleAxisd(0.9, Eigen::Vector3d(1, 1, 1).normalized()).toRotationMatrix();
  gt.translation = Eigen::Vector3d(1, -1, 2);
  Rng rng(6);
  CorrespondenceSet c;
  c.weights = Eigen::VectorXd::Ones(30);
  for (int i = 0; i < 30; ++i) {
    Eigen::Vector3d a(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0);
    c.camera_points.push_back(a);
    c.scene_points.push_back(transform(gt, a));
  }
  const Pose p = weighted_kabsch(c);
  EXPECT_LE(std::abs(p.rotation.determinant() - 1.0), 1e-9);
  EXPECT_LE((p.rotation.transpose() * p.rotation - Eigen::Matrix3d::Identity()).norm(), 1e-9);
  const PoseError e = pose_error(p, gt);
  EXPECT_LE(e.rotation_deg, 1e-7);
}

TEST(WeightedKabsch, MirroredCloudNeverYieldsReflection) {
  // Scene cloud is a mirror image; the best proper rotation is not the
  // reflection, and det must stay +1.
  Rng rng(7);
  CorrespondenceSet c;
  c.weights = Eigen::VectorXd::Ones(25);
  for (int i = 0; i < 25; ++i) {
    Eigen::Vector3d a(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    c.camera_points.push_back(a);
    c.scene_points.push_back(Eigen::Vector3d(a.x(), a.y(), -a.z()));
  }
  const Pose p = weighted_kabsch(c);
  EXPECT_LE(std::abs(p.rotation.determinant() - 1.0), 1e-9);
  EXPECT_LE((p.rotation.transpose() * p.rotation - Eigen::Matrix3d::Identity()).norm(), 1e-9);
}

TEST(WeightedKabsch, ErrorCases) {
  CorrespondenceSet two;
  two.camera_points = {{0, 0, 0}, {1, 0, 0}};
  two.scene_points = {{0, 0, 0}, {1, 0, 0}};
  two.weights = Eigen::VectorXd::Ones(2);
  try {
    weighted_kabsch(two);
    FAIL() << "expected insufficient-points";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientPoints);
  }

  CorrespondenceSet collinear;
  collinear.camera_points = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  collinear.scene_points = collinear.camera_points;
  collinear.weights = Eigen::VectorXd::Ones(4);
  try {
    weighted_kabsch(collinear);
    FAIL() << "expected degenerate-configuration";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateConfiguration);
  }

  CorrespondenceSet zerow;
  zerow.camera_points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  zerow.scene_points = zerow.camera_points;
  zerow.weights = Eigen::VectorXd::Zero(3);
  try {
    weighted_kabsch(zerow);
    FAIL() << "expected degenerate-weights";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateWeights);
  }
}

TEST(WeightedKabsch, MinimizesTheObjectiveLocally) {
  // Against noisy data the closed form must beat nearby perturbed poses.
  Pose gt;
  gt.rotation = Eigen::AngleAxisd(0.7, Eigen::Vector3d(2, 1, -1).normalized()).toRotationMatrix();
  gt.translation = Eigen::Vector3d(0.1, -0.2, 0.3);
  auto c = random_instance(105, 40, gt, 0.1);
  Rng rng(55);
  for (int i = 0; i < 40; ++i) c.weights[i] = rng.uniform(0.2, 1.0);
  const Pose opt = weighted_kabsch(c);
  const double f0 = weighted_objective(c, opt);
  for (int trial = 0; trial < 200; ++trial) {
    Pose perturbed = opt;
    const Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
    const double angle = rng.uniform(1e-4, 1e-2);
    perturbed.rotation = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix() * opt.rotation;
    perturbed.translation += 1e-3 * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    EXPECT_GE(weighted_objective(c, perturbed), f0);
  }
}

TEST(WeightedObjective, HandComputed) {
  CorrespondenceSet c;
  c.camera_points = {{0, 0, 0}, {1, 0, 0}};
  c.scene_points = {{0, 0, 1}, {1, 0, 0}};
  Eigen::VectorXd w(2);
  w << 2.0, 3.0;
  c.weights = w;
  // Residuals under the identity pose: |(0,0,1)|^2 = 1 and 0.
  EXPECT_DOUBLE_EQ(weighted_objective(c, Pose::identity()), 2.0);
}

TEST(RotationAngle, ZeroAndExactAngles) {
  const Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
  EXPECT_DOUBLE_EQ(rotation_angle_deg(id, id), 0.0);
  const Eigen::Matrix3d r10 =
      Eigen::AngleAxisd(10.0 * kPi / 180.0, Eigen::Vector3d::UnitY()).toRotationMatrix();
  EXPECT_NEAR(rotation_angle_deg(id, r10), 10.0, 1e-12);
  const Eigen::Matrix3d r180 =
      Eigen::AngleAxisd(kPi, Eigen::Vector3d::UnitX()).toRotationMatrix();
  EXPECT_NEAR(rotation_angle_deg(id, r180), 180.0, 1e-6);
}

TEST(RotationAngle, MatchesQuaternionOracle) {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Matrix3d r1 = random_rotation(rng);
    const Eigen::Matrix3d r2 = random_rotation(rng);
    const Eigen::Quaterniond q1(r1), q2(r2);
    const double oracle = q1.angularDistance(q2) * 180.0 / kPi;
    EXPECT_NEAR(rotation_angle_deg(r1, r2), oracle, 1e-8);
    EXPECT_DOUBLE_EQ(rotation_angle_deg(r1, r2), rotation_angle_deg(r2, r1));
  }
}

TEST(RotationAngle, FullPrecisionNearZero) {
  // acos() would lose half the digits here; the atan2 form keeps them.
  const double tiny = 1e-9;  // radians
  const Eigen::Matrix3d r =
      Eigen::AngleAxisd(tiny, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const double deg = rotation_angle_deg(Eigen::Matrix3d::Identity(), r);
  EXPECT_NEAR(deg, tiny * 180.0 / kPi, 1e-16);
}

TEST(PoseErrorMetric, HandComputed) {
  Pose est, gt;
  est.translation = Eigen::Vector3d(0.3, 0.0, 0.4);
  const PoseError e1 = pose_error(est, gt);
  EXPECT_DOUBLE_EQ(e1.position_m, 0.5);
  EXPECT_DOUBLE_EQ(e1.rotation_deg, 0.0);

  est = Pose::identity();
  est.rotation = Eigen::AngleAxisd(25.0 * kPi / 180.0, Eigen::Vector3d::UnitX()).toRotationMatrix();
  const PoseError e2 = pose_error(est, gt);
  EXPECT_DOUBLE_EQ(e2.position_m, 0.0);
  EXPECT_NEAR(e2.rotation_deg, 25.0, 1e-12);
}

}  // namespace
}  // namespace rigidpose
