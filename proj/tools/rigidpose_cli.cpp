#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rigidpose/error.hpp"
#include "rigidpose/geometry.hpp"
#include "rigidpose/io.hpp"
#include "rigidpose/kabsch_grad.hpp"
#include "rigidpose/losses.hpp"
#include "rigidpose/metrics.hpp"
#include "rigidpose/parallel.hpp"
#include "rigidpose/rng.hpp"
#include "rigidpose/synth.hpp"
#include "rigidpose/weighting.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace rigidpose;

namespace {

std::vector<fs::path> sorted_files(const fs::path& dir,
                                   const std::vector<std::string>& extensions) {
  if (!fs::is_directory(dir))
    throw Error(ErrorCode::kIoError, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (std::find(extensions.begin(), extensions.end(), ext) != extensions.end())
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

ordered_json pose_to_json(const Pose& pose) {
  std::vector<double> rot;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(pose.rotation(r, c));
  ordered_json j;
  j["rotation"] = rot;  // row-major
  j["translation"] = {pose.translation(0), pose.translation(1), pose.translation(2)};
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failure on " + path.string());
}

// ---- align ----

struct AlignArgs {
  std::string input, output, weights;
};

int run_align(const AlignArgs& args) {
  CorrespondenceSet c = load_correspondences(args.input);
  if (!args.weights.empty()) {
    if (args.weights == "uniform") {
      c.weights = uniform_weights(c.size());
    } else {
      const Eigen::VectorXd w = load_weights(args.weights);
      if (w.size() != c.size())
        throw Error(ErrorCode::kInvalidArgument,
                    "weight file has " + std::to_string(w.size()) +
                        " entries for " + std::to_string(c.size()) +
                        " correspondences");
      c.weights = w;
    }
  }
  const Pose pose = weighted_kabsch(c);
  ordered_json j = pose_to_json(pose);
  j["objective"] = weighted_objective(c, pose);
  write_text(args.output, j.dump(2) + "\n");
  return 0;
}

// ---- simulate ----

struct SimulateArgs {
  std::string config, out;
  std::uint64_t seed = 0;
  int frames = 1;
};

int run_simulate(const SimulateArgs& args) {
  SimulationConfig cfg;
  if (!args.config.empty()) cfg = load_simulation_config(args.config);
  if (args.frames < 1)
    throw Error(ErrorCode::kInvalidArgument, "--frames must be at least 1");
  fs::create_directories(args.out);

  parallel_for(args.frames, [&](int k) {
    const std::uint64_t frame_seed = derive_stream(args.seed, k);
    FrameSample frame = generate_frame(cfg.scene, derive_stream(frame_seed, 0));
    NoiseModel nm = cfg.noise;
    nm.seed = derive_stream(frame_seed, 1);
    frame = corrupt(frame, nm);
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06d.json", k);
    save_frame(fs::path(args.out) / name, frame);
  });
  return 0;
}

// ---- grad-check ----

struct GradCheckArgs {
  std::uint64_t seed = 0;
  int n = 20;
  std::vector<int> sizes = {3, 10, 100};
  double step = 1e-5;
};

int run_grad_check(const GradCheckArgs& args) {
  if (args.n < 1) throw Error(ErrorCode::kInvalidArgument, "--n must be at least 1");
  constexpr double kNoise[] = {0.0, 0.01, 0.1};
  std::cout << "size,noise_sigma,boundary,max_rel_err,worst_index,analytic,numeric\n";
  double worst = 0.0;
  for (const int size : args.sizes) {
    if (size < 3)
      throw Error(ErrorCode::kInvalidArgument, "instance sizes must be >= 3");
    for (int i = 0; i < args.n; ++i) {
      const std::uint64_t instance_seed =
          derive_stream(args.seed, static_cast<std::uint64_t>(size) * 100000 + i);
      Rng rng(instance_seed);
      const double sigma = kNoise[i % 3];
      // A zero weight on a 3-point instance always degenerates (the two
      // remaining centered points are collinear), so the boundary case
      // needs size >= 4.
      const bool boundary = i % 4 == 3 && size >= 4;

      const Pose pose = random_pose(
          rng, Eigen::AlignedBox3d(Eigen::Vector3d(-2, -2, -2), Eigen::Vector3d(2, 2, 2)));
      CorrespondenceSet c;
      c.weights.resize(size);
      for (int p = 0; p < size; ++p) {
        const Eigen::Vector3d a(rng.normal(), rng.normal(), rng.normal());
        Eigen::Vector3d b = transform(pose, a);
        for (int k = 0; k < 3; ++k) b(k) += rng.normal(sigma);
        c.camera_points.push_back(a);
        c.scene_points.push_back(b);
        c.weights(p) = 1.0 - rng.uniform01();  // (0, 1]
      }
      if (boundary) c.weights(0) = 0.0;

      const GradCheckReport r = grad_check(c, instance_seed, args.step);
      worst = std::max(worst, r.max_relative_error);
      std::cout << size << "," << format_double(sigma) << "," << (boundary ? 1 : 0)
                << "," << format_double(r.max_relative_error) << ","
                << r.worst_parameter_index << "," << format_double(r.analytic_at_worst)
                << "," << format_double(r.numeric_at_worst) << "\n";
    }
  }
  std::cout << "max_relative_error," << format_double(worst) << "\n";
  return worst > 1e-4 ? 1 : 0;
}

// ---- optimize ----

struct OptimizeArgs {
  std::string frames, config, out, trace;
  std::uint64_t seed = 0;
};

int run_optimize(const OptimizeArgs& args) {
  const std::vector<fs::path> files = sorted_files(args.frames, {".json"});
  if (files.empty())
    throw Error(ErrorCode::kIoError, "no frame .json files in " + args.frames);

  OptimizerConfig cfg;
  if (!args.config.empty()) cfg = load_optimizer_config(args.config);

  std::vector<TrainingFrame> training(files.size());
  parallel_for(static_cast<int>(files.size()), [&](int i) {
    const FrameSample f = load_frame(files[i]);
    training[i] = {to_correspondences(f, /*use_pred=*/true), f.gt_pose};
  });

  const OptimizationResult result = optimize_weights(training, cfg, args.seed);

  for (std::size_t i = 0; i < files.size(); ++i)
    if (!result.frame_errors[i].empty())
      std::cerr << "warning: " << files[i].filename().string() << ": "
                << result.frame_errors[i] << "\n";

  if (!args.out.empty()) {
    fs::create_directories(args.out);
    for (std::size_t i = 0; i < files.size(); ++i) {
      const Eigen::VectorXd w = result.logits[i].z.unaryExpr(
          [](double z) { return sigmoid(z); });
      save_weights(fs::path(args.out) / (files[i].stem().string() + ".csv"), w);
    }
  }
  if (!args.trace.empty()) {
    std::string csv = "epoch,mean_l_pose\n";
    for (std::size_t e = 0; e < result.loss_trace.size(); ++e)
      csv += std::to_string(e) + "," + format_double(result.loss_trace[e]) + "\n";
    write_text(args.trace, csv);
  }
  return 0;
}

// ---- eval ----

struct EvalArgs {
  std::string frames, weights, out, hist;
  int bins = 50;
};

int run_eval(const EvalArgs& args) {
  const std::vector<fs::path> files = sorted_files(args.frames, {".json"});
  if (files.empty())
    throw Error(ErrorCode::kIoError, "no frame .json files in " + args.frames);

  std::vector<PoseError> errors(files.size());
  parallel_for(static_cast<int>(files.size()), [&](int i) {
    const FrameSample f = load_frame(files[i]);
    CorrespondenceSet c = to_correspondences(f, /*use_pred=*/true);
    if (!args.weights.empty()) {
      const fs::path wpath = fs::path(args.weights) / (files[i].stem().string() + ".csv");
      const Eigen::VectorXd w = load_weights(wpath);
      if (w.size() != c.size())
        throw Error(ErrorCode::kInvalidArgument,
                    wpath.string() + " has " + std::to_string(w.size()) +
                        " weights for " + std::to_string(c.size()) +
                        " correspondences");
      c.weights = w;
    }
    errors[i] = pose_error(weighted_kabsch(c), f.gt_pose);
  });

  const ErrorStats stats = aggregate(errors);
  ordered_json j;
  j["count"] = stats.count;
  j["median_position_m"] = stats.median_position_m;
  j["median_rotation_deg"] = stats.median_rotation_deg;
  j["mean_position_m"] = stats.mean_position_m;
  j["mean_rotation_deg"] = stats.mean_rotation_deg;
  j["accuracy_5cm_5deg"] = stats.accuracy;
  write_text(args.out, j.dump(2) + "\n");

  if (!args.hist.empty()) {
    std::string csv = "axis,edge,fraction\n";
    const CumulativeHistogram pos =
        cumulative_histogram(errors, ErrorAxis::kPosition, 1.0, args.bins);
    const CumulativeHistogram rot =
        cumulative_histogram(errors, ErrorAxis::kRotation, 25.0, args.bins);
    for (const auto* h : {&pos, &rot}) {
      const char* axis = h->axis == ErrorAxis::kPosition ? "position" : "rotation";
      for (Eigen::Index b = 0; b < h->edges.size(); ++b)
        csv += std::string(axis) + "," + format_double(h->edges(b)) + "," +
               format_double(h->fractions(b)) + "\n";
    }
    write_text(args.hist, csv);
  }
  return 0;
}

// ---- depth-eval ----

struct DepthEvalArgs {
  std::string pred, gt, out;
};

int run_depth_eval(const DepthEvalArgs& args) {
  const std::vector<fs::path> gt_files = sorted_files(args.gt, {".png", ".pgm"});
  if (gt_files.empty())
    throw Error(ErrorCode::kIoError, "no depth images in " + args.gt);

  std::string csv = "file,count,mean_abs_error_m,acc_0125,acc_025,acc_05\n";
  // Pooled maps let the aggregate row reuse the same counting code instead
  // of averaging per-file fractions.
  std::vector<double> pool_pred, pool_gt;
  for (const fs::path& gt_path : gt_files) {
    const fs::path pred_path = fs::path(args.pred) / gt_path.filename();
    const DepthMap gt = load_depth_image(gt_path);
    const DepthMap pred = load_depth_image(pred_path);
    const DepthStats stats = depth_stats(pred, gt);
    csv += gt_path.filename().string() + "," + std::to_string(stats.count) + "," +
           format_double(stats.mean_abs_error_m) + "," +
           format_double(stats.acc_0125) + "," + format_double(stats.acc_025) + "," +
           format_double(stats.acc_05) + "\n";
    for (int i = 0; i < gt.size(); ++i) {
      if (!gt.valid(i)) continue;
      pool_gt.push_back(gt.values[i]);
      pool_pred.push_back(pred.values[i]);
    }
  }

  DepthMap pooled_gt(static_cast<int>(pool_gt.size()), 1);
  DepthMap pooled_pred(static_cast<int>(pool_pred.size()), 1);
  pooled_gt.values = pool_gt;
  pooled_pred.values = pool_pred;
  const DepthStats total = depth_stats(pooled_pred, pooled_gt);
  csv += "aggregate," + std::to_string(total.count) + "," +
         format_double(total.mean_abs_error_m) + "," + format_double(total.acc_0125) +
         "," + format_double(total.acc_025) + "," + format_double(total.acc_05) + "\n";
  write_text(args.out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rigid pose estimation from weighted 3D-3D correspondences"};
  app.require_subcommand(1);

  AlignArgs align_args;
  CLI::App* align = app.add_subcommand(
      "align", "solve the weighted alignment for a correspondence CSV");
  align->add_option("--input", align_args.input, "correspondence CSV")->required();
  align->add_option("--output", align_args.output, "output pose JSON")->required();
  align->add_option("--weights", align_args.weights,
                    "'uniform' or a weight file overriding the CSV column");

  SimulateArgs sim_args;
  CLI::App* simulate =
      app.add_subcommand("simulate", "generate corrupted synthetic frames");
  simulate->add_option("--config", sim_args.config, "scene/noise config JSON");
  simulate->add_option("--seed", sim_args.seed, "master seed");
  simulate->add_option("--frames", sim_args.frames, "number of frames");
  simulate->add_option("--out", sim_args.out, "output directory")->required();

  GradCheckArgs grad_args;
  CLI::App* grad = app.add_subcommand(
      "grad-check", "compare analytic pose gradients with finite differences");
  grad->add_option("--seed", grad_args.seed, "master seed");
  grad->add_option("--n", grad_args.n, "instances per size");
  grad->add_option("--sizes", grad_args.sizes, "correspondence counts")
      ->delimiter(',');
  grad->add_option("--step", grad_args.step, "finite difference step");

  OptimizeArgs opt_args;
  CLI::App* optimize =
      app.add_subcommand("optimize", "fit per-correspondence weights to the pose loss");
  optimize->add_option("--frames", opt_args.frames, "frame directory")->required();
  optimize->add_option("--config", opt_args.config, "optimizer config JSON");
  optimize->add_option("--out", opt_args.out, "directory for per-frame weight files");
  optimize->add_option("--trace", opt_args.trace, "loss trace CSV");
  optimize->add_option("--seed", opt_args.seed, "reserved for stochastic variants");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "pose-error statistics over frames");
  eval->add_option("--frames", eval_args.frames, "frame directory")->required();
  eval->add_option("--weights", eval_args.weights, "per-frame weight directory");
  eval->add_option("--out", eval_args.out, "stats JSON")->required();
  eval->add_option("--hist", eval_args.hist, "cumulative histogram CSV");
  eval->add_option("--bins", eval_args.bins, "histogram bins");

  DepthEvalArgs depth_args;
  CLI::App* depth_eval =
      app.add_subcommand("depth-eval", "depth accuracy against ground truth images");
  depth_eval->add_option("--pred", depth_args.pred, "predicted depth directory")
      ->required();
  depth_eval->add_option("--gt", depth_args.gt, "ground truth depth directory")
      ->required();
  depth_eval->add_option("--out", depth_args.out, "output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (align->parsed()) return run_align(align_args);
    if (simulate->parsed()) return run_simulate(sim_args);
    if (grad->parsed()) return run_grad_check(grad_args);
    if (optimize->parsed()) return run_optimize(opt_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (depth_eval->parsed()) return run_depth_eval(depth_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
