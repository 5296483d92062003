#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "rigidpose/error.hpp"
#include "rigidpose/geometry.hpp"
#include "rigidpose/io.hpp"
#include "rigidpose/kabsch_grad.hpp"
#include "rigidpose/losses.hpp"
#include "rigidpose/metrics.hpp"
#include "rigidpose/synth.hpp"
#include "rigidpose/weighting.hpp"

namespace py = pybind11;
using namespace rigidpose;

namespace {

CorrespondenceSet make_set(const Eigen::MatrixX3d& camera_points,
                           const Eigen::MatrixX3d& scene_points,
                           const Eigen::VectorXd& weights) {
  if (camera_points.rows() != scene_points.rows() ||
      camera_points.rows() != weights.size())
    throw Error(ErrorCode::kInvalidArgument,
                "camera_points, scene_points and weights must have equal length");
  CorrespondenceSet c;
  c.weights = weights;
  c.camera_points.reserve(camera_points.rows());
  c.scene_points.reserve(scene_points.rows());
  for (Eigen::Index i = 0; i < camera_points.rows(); ++i) {
    c.camera_points.push_back(camera_points.row(i));
    c.scene_points.push_back(scene_points.row(i));
  }
  return c;
}

Eigen::MatrixX3d stack_rows(const std::vector<Eigen::Vector3d>& points) {
  Eigen::MatrixX3d m(points.size(), 3);
  for (std::size_t i = 0; i < points.size(); ++i) m.row(i) = points[i];
  return m;
}

py::tuple set_to_tuple(const CorrespondenceSet& c) {
  return py::make_tuple(stack_rows(c.camera_points), stack_rows(c.scene_points),
                        c.weights);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "rigid pose estimation from weighted 3D-3D correspondences";

  py::register_exception<Error>(m, "RigidPoseError");

  py::class_<Pose>(m, "Pose")
      .def(py::init<>())
      .def(py::init([](const Eigen::Matrix3d& rotation,
                       const Eigen::Vector3d& translation) {
             return Pose{rotation, translation};
           }),
           py::arg("rotation"), py::arg("translation"))
      .def_readwrite("rotation", &Pose::rotation)
      .def_readwrite("translation", &Pose::translation)
      .def("rotation_defect", &Pose::rotation_defect)
      .def("homogeneous", &Pose::homogeneous)
      .def("__repr__", [](const Pose& p) {
        std::ostringstream out;
        out << "Pose(t=[" << p.translation.transpose() << "])";
        return out.str();
      });

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init([](double fx, double fy, double cx, double cy) {
             return CameraIntrinsics{fx, fy, cx, cy};
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"))
      .def_readwrite("fx", &CameraIntrinsics::fx)
      .def_readwrite("fy", &CameraIntrinsics::fy)
      .def_readwrite("cx", &CameraIntrinsics::cx)
      .def_readwrite("cy", &CameraIntrinsics::cy)
      .def("matrix", &CameraIntrinsics::matrix);

  py::class_<PoseError>(m, "PoseError")
      .def_readonly("position_m", &PoseError::position_m)
      .def_readonly("rotation_deg", &PoseError::rotation_deg);

  py::class_<GradCheckReport>(m, "GradCheckReport")
      .def_readonly("max_relative_error", &GradCheckReport::max_relative_error)
      .def_readonly("worst_parameter_index", &GradCheckReport::worst_parameter_index)
      .def_readonly("analytic_at_worst", &GradCheckReport::analytic_at_worst)
      .def_readonly("numeric_at_worst", &GradCheckReport::numeric_at_worst)
      .def_readonly("parameters_checked", &GradCheckReport::parameters_checked);

  m.def("unproject", &unproject, py::arg("intrinsics"), py::arg("pixel"),
        py::arg("depth"));
  m.def("transform", &transform, py::arg("pose"), py::arg("point"));
  m.def("invert", &invert);
  m.def("compose", &compose);
  m.def("rotation_angle_deg", &rotation_angle_deg);
  m.def("pose_error", &pose_error, py::arg("est"), py::arg("gt"));
  m.def("l_pose", &l_pose, py::arg("est"), py::arg("gt"));

  m.def(
      "weighted_kabsch",
      [](const Eigen::MatrixX3d& a, const Eigen::MatrixX3d& b,
         const Eigen::VectorXd& w) { return weighted_kabsch(make_set(a, b, w)); },
      py::arg("camera_points"), py::arg("scene_points"), py::arg("weights"),
      "Closed-form weighted rigid alignment (camera to scene).");

  m.def(
      "weighted_objective",
      [](const Eigen::MatrixX3d& a, const Eigen::MatrixX3d& b,
         const Eigen::VectorXd& w, const Pose& pose) {
        return weighted_objective(make_set(a, b, w), pose);
      },
      py::arg("camera_points"), py::arg("scene_points"), py::arg("weights"),
      py::arg("pose"));

  m.def(
      "kabsch_vjp",
      [](const Eigen::MatrixX3d& a, const Eigen::MatrixX3d& b,
         const Eigen::VectorXd& w, const Eigen::Matrix3d& loss_d_rotation,
         const Eigen::Vector3d& loss_d_translation) {
        const KabschGradients g =
            kabsch_vjp(make_set(a, b, w), loss_d_rotation, loss_d_translation);
        return py::make_tuple(g.d_weights, stack_rows(g.d_camera_points),
                              stack_rows(g.d_scene_points));
      },
      py::arg("camera_points"), py::arg("scene_points"), py::arg("weights"),
      py::arg("loss_d_rotation"), py::arg("loss_d_translation"),
      "Gradients (d_weights, d_camera_points, d_scene_points) of a scalar "
      "loss with the given (R, T) gradients.");

  m.def(
      "grad_check",
      [](const Eigen::MatrixX3d& a, const Eigen::MatrixX3d& b,
         const Eigen::VectorXd& w, std::uint64_t seed, double step) {
        return grad_check(make_set(a, b, w), seed, step);
      },
      py::arg("camera_points"), py::arg("scene_points"), py::arg("weights"),
      py::arg("seed"), py::arg("step") = 1e-5);

  m.def(
      "endpoint_errors",
      [](const Eigen::MatrixX3d& a, const Eigen::MatrixX3d& b,
         const Eigen::VectorXd& w, const Pose& pose, std::optional<double> clamp) {
        return endpoint_errors(make_set(a, b, w), pose, clamp);
      },
      py::arg("camera_points"), py::arg("scene_points"), py::arg("weights"),
      py::arg("pose"), py::arg("clamp") = std::nullopt);

  py::class_<SceneConfig>(m, "SceneConfig")
      .def(py::init<>())
      .def_readwrite("depth_min", &SceneConfig::depth_min)
      .def_readwrite("depth_max", &SceneConfig::depth_max)
      .def_readwrite("width", &SceneConfig::width)
      .def_readwrite("height", &SceneConfig::height)
      .def_readwrite("intrinsics", &SceneConfig::intrinsics)
      .def_property(
          "bounds_min",
          [](const SceneConfig& c) -> Eigen::Vector3d { return c.bounds.min(); },
          [](SceneConfig& c, const Eigen::Vector3d& v) { c.bounds.min() = v; })
      .def_property(
          "bounds_max",
          [](const SceneConfig& c) -> Eigen::Vector3d { return c.bounds.max(); },
          [](SceneConfig& c, const Eigen::Vector3d& v) { c.bounds.max() = v; });

  py::class_<NoiseModel>(m, "NoiseModel")
      .def(py::init<>())
      .def_readwrite("depth_sigma", &NoiseModel::depth_sigma)
      .def_readwrite("coord_sigma", &NoiseModel::coord_sigma)
      .def_readwrite("outlier_fraction", &NoiseModel::outlier_fraction)
      .def_readwrite("invalid_fraction", &NoiseModel::invalid_fraction)
      .def_readwrite("seed", &NoiseModel::seed);

  py::class_<FrameSample>(m, "FrameSample")
      .def_readonly("config", &FrameSample::config)
      .def_readonly("gt_pose", &FrameSample::gt_pose)
      .def_property_readonly(
          "gt_depth",
          [](const FrameSample& f) {
            return py::array_t<double>({f.gt_depth.height, f.gt_depth.width},
                                       f.gt_depth.values.data());
          })
      .def_property_readonly(
          "pred_depth",
          [](const FrameSample& f) {
            return py::array_t<double>({f.pred_depth.height, f.pred_depth.width},
                                       f.pred_depth.values.data());
          })
      .def_property_readonly(
          "outlier_mask",
          [](const FrameSample& f) {
            return py::array_t<std::uint8_t>(
                {f.gt_depth.height, f.gt_depth.width}, f.outlier_mask.data());
          })
      .def_property_readonly(
          "validity_mask",
          [](const FrameSample& f) {
            return py::array_t<std::uint8_t>(
                {f.gt_depth.height, f.gt_depth.width}, f.validity_mask.data());
          });

  m.def(
      "generate_frame",
      [](const SceneConfig& cfg, std::uint64_t seed) {
        return generate_frame(cfg, seed);
      },
      py::arg("config"), py::arg("seed"));
  m.def("corrupt", &corrupt, py::arg("frame"), py::arg("noise"));
  m.def(
      "to_correspondences",
      [](const FrameSample& f, bool use_pred, bool include_invalid) {
        return set_to_tuple(to_correspondences(
            f, use_pred,
            include_invalid ? InvalidPixelPolicy::kIncludeZeroFilled
                            : InvalidPixelPolicy::kExclude));
      },
      py::arg("frame"), py::arg("use_pred") = true,
      py::arg("include_invalid") = true,
      "Returns (camera_points, scene_points, weights) arrays.");

  m.def("save_frame", &save_frame, py::arg("path"), py::arg("frame"));
  m.def("load_frame", &load_frame, py::arg("path"));
  m.def("save_pose_file", &save_pose_file, py::arg("path"), py::arg("pose"));
  m.def(
      "load_pose_file",
      [](const std::filesystem::path& path) {
        const PoseLoadResult r = load_pose_file(path);
        return py::make_tuple(r.pose, r.rotation_defect, r.warning);
      },
      py::arg("path"), "Returns (pose, rotation_defect, warning).");

  m.def(
      "aggregate",
      [](const std::vector<std::pair<double, double>>& errors,
         double position_threshold_m, double rotation_threshold_deg) {
        std::vector<PoseError> list;
        list.reserve(errors.size());
        for (const auto& [p, r] : errors) list.push_back({p, r});
        const ErrorStats s = aggregate(list, position_threshold_m, rotation_threshold_deg);
        py::dict d;
        d["median_position_m"] = s.median_position_m;
        d["median_rotation_deg"] = s.median_rotation_deg;
        d["mean_position_m"] = s.mean_position_m;
        d["mean_rotation_deg"] = s.mean_rotation_deg;
        d["accuracy"] = s.accuracy;
        d["count"] = s.count;
        return d;
      },
      py::arg("errors"), py::arg("position_threshold_m") = 0.05,
      py::arg("rotation_threshold_deg") = 5.0,
      "errors: list of (position_m, rotation_deg) pairs.");
}
