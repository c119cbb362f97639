#include "cubepose/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <ostream>

#include "cubepose/bench.hpp"
#include "cubepose/dataset.hpp"
#include "cubepose/error.hpp"
#include "cubepose/io.hpp"
#include "json.hpp"

namespace cubepose {

namespace {

void report_errors(const std::vector<LineError>& errors, RunStats& stats, const DiagFn& diag) {
  for (const auto& e : errors) {
    ++stats.records;
    ++stats.failed;
    if (diag) diag("line " + std::to_string(e.line) + ": " + e.message);
  }
}

std::string detection_json(const std::string& image_id, std::size_t index, const Detection& d) {
  nlohmann::ordered_json j;
  j["image_id"] = image_id;
  j["det"] = index;
  j["yaw"] = d.pose.yaw;
  j["pitch"] = d.pose.pitch;
  j["roll"] = d.pose.roll;
  j["score"] = d.score;
  j["center"] = {d.center.x(), d.center.y()};
  j["box"] = {d.box.x(), d.box.y()};
  j["keypoints"] = nlohmann::ordered_json::array();
  for (const Vec2& k : d.keypoints) {
    j["keypoints"].push_back({k.x(), k.y()});
  }
  return j.dump();
}

}  // namespace

InvertMethod invert_method_from_string(const std::string& s) {
  if (s == "matrix") return InvertMethod::kMatrix;
  if (s == "ratios") return InvertMethod::kRatios;
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + s + "' (expected matrix|ratios)");
}

InvertAdjust invert_adjust_from_string(const std::string& s) {
  if (s == "none") return InvertAdjust::kNone;
  if (s == "edge") return InvertAdjust::kEdge;
  if (s == "rectify") return InvertAdjust::kRectify;
  throw Error(ErrorCode::kInvalidArgument, "unknown adjustment '" + s + "' (expected none|edge|rectify)");
}

RunStats convert_file(const std::string& in, const std::string& out, const DiagFn& diag) {
  auto input = open_input(in);
  const auto labels = read_head_labels(*input);
  auto output = open_output(out);

  RunStats stats;
  report_errors(labels.errors, stats, diag);
  for (const auto& [line, label] : labels.records) {
    ++stats.records;
    try {
      *output << cube_label_to_json(label_to_cube(label)) << '\n';
      ++stats.ok;
    } catch (const Error& e) {
      ++stats.failed;
      if (diag) diag("line " + std::to_string(line) + ": " + e.what());
    }
  }
  output->flush();
  return stats;
}

RunStats invert_file(const std::string& in, const std::string& out, InvertMethod method, InvertAdjust adjust,
                     const std::string& dump_cubes, const DiagFn& diag) {
  auto input = open_input(in);
  const auto cubes = read_cube_labels(*input);
  auto output = open_output(out);
  std::shared_ptr<std::ostream> dump;
  if (!dump_cubes.empty()) {
    dump = open_output(dump_cubes);
  }

  RunStats stats;
  report_errors(cubes.errors, stats, diag);
  for (const auto& [line, label] : cubes.records) {
    ++stats.records;
    try {
      CubeLabel used = label;
      if (adjust == InvertAdjust::kEdge) {
        used.cube = edge_adjust(label.cube, label.dims);
      } else if (adjust == InvertAdjust::kRectify) {
        used.cube = rectify_orthoscale(label.cube).cube;
      }
      const EulerPose pose =
          method == InvertMethod::kMatrix ? cube2euler_matrix(used.cube) : cube2euler_ratios(used.cube);
      *output << prediction_to_json({label.image_id, pose}) << '\n';
      if (dump) {
        used.pose = pose;
        *dump << cube_label_to_json(used) << '\n';
      }
      ++stats.ok;
    } catch (const Error& e) {
      ++stats.failed;
      *output << prediction_error_to_json(label.image_id, e.what()) << '\n';
      if (diag) diag("line " + std::to_string(line) + " (" + label.image_id + "): " + e.what());
    }
  }
  output->flush();
  return stats;
}

RunStats adjust_file(const std::string& in, const std::string& out, InvertAdjust mode, const DiagFn& diag) {
  if (mode == InvertAdjust::kNone) {
    throw Error(ErrorCode::kInvalidArgument, "adjust mode must be edge or rectify");
  }
  auto input = open_input(in);
  const auto cubes = read_cube_labels(*input);
  auto output = open_output(out);

  RunStats stats;
  report_errors(cubes.errors, stats, diag);
  for (const auto& [line, label] : cubes.records) {
    ++stats.records;
    try {
      CubeLabel adjusted = label;
      adjusted.cube = mode == InvertAdjust::kEdge ? edge_adjust(label.cube, label.dims)
                                                  : rectify_orthoscale(label.cube).cube;
      *output << cube_label_to_json(adjusted) << '\n';
      ++stats.ok;
    } catch (const Error& e) {
      ++stats.failed;
      if (diag) diag("line " + std::to_string(line) + " (" + label.image_id + "): " + e.what());
    }
  }
  output->flush();
  return stats;
}

RunStats decode_file(const std::string& maps_path, const std::string& out, const DecodeConfig& cfg, int workers,
                     const std::string& image_id, const DiagFn& diag) {
  const TensorMaps maps = read_maps(maps_path);
  const std::string id =
      !image_id.empty() ? image_id : (maps_path == "-" ? "stdin" : std::filesystem::path(maps_path).stem().string());
  const auto dets = decode_pose(maps, cfg, workers);
  auto output = open_output(out);
  RunStats stats;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    ++stats.records;
    if (dets[i].error) {
      ++stats.failed;
      *output << prediction_error_to_json(id, *dets[i].error) << '\n';
      if (diag) diag("detection " + std::to_string(i) + ": " + *dets[i].error);
    } else {
      ++stats.ok;
      *output << detection_json(id, i, dets[i]) << '\n';
    }
  }
  output->flush();
  return stats;
}

void render_file(const std::string& cubes_path, const std::string& out, int image_w, int image_h, int stride) {
  auto input = open_input(cubes_path);
  const auto cubes = read_cube_labels(*input, /*strict=*/true);
  write_maps(out, render_targets(cubes.values(), image_w, image_h, stride));
}

bool run_selftest(std::ostream& log) {
  bool all_ok = true;
  auto check = [&](const char* name, bool ok, double value) {
    log << (ok ? "PASS " : "FAIL ") << name << " (" << value << ")\n";
    all_ok = all_ok && ok;
  };

  constexpr int kSamples = 2000;
  double max_roundtrip = 0.0, max_delta_err = 0.0, max_dual = 0.0, max_parallel = 0.0;
  int delta_violations = 0;
  for (int i = 0; i < kSamples; ++i) {
    SampleRng rng(7, std::uint64_t(i));
    const EulerPose p = sample_pose(rng, PoseRange::kFull);
    const EulerPose c = canonicalize(p);
    const Cube2D cube = euler2cube(p, Vec2(rng.uniform(-500, 500), rng.uniform(-500, 500)), rng.uniform(1, 512));
    try {
      const EulerPose back = cube2euler_matrix(cube);
      max_roundtrip = std::max({max_roundtrip, angle_diff(back.yaw, c.yaw), angle_diff(back.pitch, c.pitch),
                                angle_diff(back.roll, c.roll)});
      const double delta = delta_of_cube(cube);
      delta_violations += !(delta >= 0.0 && delta <= 2.0);
      max_delta_err = std::max(max_delta_err, std::abs(delta - (1.0 - std::cos(2.0 * deg2rad(p.yaw)))));

      const Cube2D dual = dual_hexahedron(dual_octahedron(cube));
      for (int k = 0; k < 8; ++k) {
        max_dual = std::max(max_dual, (dual.vertices[k] - cube.vertices[k]).cwiseAbs().maxCoeff());
      }
      Cube2D noisy = cube;
      for (auto& v : noisy.vertices) v += Vec2(rng.normal(), rng.normal());
      max_parallel = std::max(max_parallel, parallelism_residual(edge_adjust(noisy)));
    } catch (const Error& e) {
      log << "FAIL sample " << i << ": " << e.what() << '\n';
      all_ok = false;
    }
  }
  check("matrix round trip max error (deg) < 1e-6", max_roundtrip < 1e-6, max_roundtrip);
  check("delta in [0, 2] violations == 0", delta_violations == 0, delta_violations);
  check("|delta - (1 - cos 2y)| < 1e-9", max_delta_err < 1e-9, max_delta_err);
  check("dual-of-dual identity (px) < 1e-9", max_dual < 1e-9, max_dual);
  check("edge_adjust parallelism residual (rad) < 1e-9", max_parallel < 1e-9, max_parallel);

  double max_pose = 0.0;
  bool decoded = true;
  for (int i = 0; i < 20; ++i) {
    SampleRng rng(11, std::uint64_t(i));
    HeadLabel label;
    label.image_id = "selftest";
    label.bbox = {rng.uniform(110, 130), rng.uniform(110, 130), 80, 80};
    label.pose = sample_pose(rng, PoseRange::kFull);
    const CubeLabel cube = label_to_cube(label);
    const auto dets = decode_pose(render_targets({cube}, 320, 320, 4), DecodeConfig{});
    if (dets.size() != 1 || dets[0].error) {
      decoded = false;
      continue;
    }
    const EulerPose c = *cube.pose;
    max_pose = std::max({max_pose, angle_diff(dets[0].pose.yaw, c.yaw), angle_diff(dets[0].pose.pitch, c.pitch),
                         angle_diff(dets[0].pose.roll, c.roll)});
  }
  check("render -> decode pose error (deg) < 0.1", decoded && max_pose < 0.1, max_pose);
  return all_ok;
}

}  // namespace cubepose
