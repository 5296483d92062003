#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rigidpose/synth.hpp"
#include "rigidpose/types.hpp"
#include "rigidpose/weighting.hpp"

namespace rigidpose {

// All text formats are locale-independent: floats are written with
// std::to_chars at 17 significant digits and parsed with std::from_chars,
// so save/load round trips are bitwise exact and outputs byte-identical
// across runs.

/// 17-significant-digit decimal form of x (round-trip exact).
std::string format_double(double x);

/// Correspondence CSV: header "ax,ay,az,bx,by,bz,w", one row per pair.
void save_correspondences(const std::filesystem::path& path, const CorrespondenceSet& c);

/// Throws ParseError (with 1-based line/column) on malformed rows,
/// non-finite values, or negative weights.
CorrespondenceSet load_correspondences(const std::filesystem::path& path);

/// Weight vector as one decimal per line.
void save_weights(const std::filesystem::path& path, const Eigen::VectorXd& w);
Eigen::VectorXd load_weights(const std::filesystem::path& path);

struct PoseLoadResult {
  Pose pose;
  /// Rotation defect of the parsed matrix, before any cleanup.
  double rotation_defect = 0.0;
  /// Set when the defect was in (1e-6, 1e-3] and the rotation was
  /// projected to the nearest proper rotation to restore the invariants.
  bool warning = false;
};

/// 4x4 homogeneous camera-to-scene matrix, 4 whitespace-separated values
/// per line. On load the bottom row must be (0 0 0 1) within 1e-9 and the
/// rotation block must have defect <= 1e-3 (beyond that, including any
/// reflection, the file is rejected with a parse error).
void save_pose_file(const std::filesystem::path& path, const Pose& pose);
PoseLoadResult load_pose_file(const std::filesystem::path& path);

/// 16-bit depth image, millimeters, sentinels 0 and 65535 meaning no
/// depth. Format chosen by extension: ".pgm" (binary P5, maxval 65535) or
/// ".png" (16-bit grayscale). Valid depths are rounded to the nearest
/// millimeter and pinned to [1, 65534] so they never collide with a
/// sentinel.
void save_depth_image(const std::filesystem::path& path, const DepthMap& depth);
DepthMap load_depth_image(const std::filesystem::path& path);

/// FrameSample as a self-describing JSON document; grids are base64 of
/// little-endian binary (float64 for depth/coordinates, bytes for masks),
/// so the round trip is bitwise exact.
void save_frame(const std::filesystem::path& path, const FrameSample& f);
FrameSample load_frame(const std::filesystem::path& path);

/// Simulation config JSON: {"scene": {...}, "noise": {...}}, both
/// optional, unknown keys ignored, missing keys defaulted.
struct SimulationConfig {
  SceneConfig scene;
  NoiseModel noise;
};
SimulationConfig load_simulation_config(const std::filesystem::path& path);
OptimizerConfig load_optimizer_config(const std::filesystem::path& path);

/// Scene coordinates of every valid depth pixel under `pose`
/// (transform(pose, unproject(...))); invalid pixels stay zero and their
/// validity is recoverable from the depth map. Throws empty-mask when no
/// pixel has depth.
SceneCoordinateMap depth_to_scene_coords(const DepthMap& depth, const Pose& pose,
                                         const CameraIntrinsics& intr);

std::string base64_encode(const std::uint8_t* data, std::size_t size);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace rigidpose
