#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cubepose/cube_fit.hpp"
#include "cubepose/io.hpp"
#include "cubepose/tensor.hpp"

namespace cubepose {

/// How a pose is read from a decoded hexahedron.
enum class Decoder {
  kRaw,         // no adjustment: axes from the edges at vertex 0
  kEdgeAdjust,  // dual-octahedron edge adjustment, then cube2euler_matrix
  kRectify,     // projection-constraint rectification, then cube2euler_matrix
};

const char* to_string(Decoder d);
/// Accepts "raw", "edge_adjust", "rectify"; throws kInvalidArgument otherwise.
Decoder decoder_from_string(const std::string& name);

/// Pose of `cube` under the given decoder. When `adjusted` is non-null it
/// receives the cube the pose was read from (the input itself for kRaw).
EulerPose decode_cube(const Cube2D& cube, Decoder decoder, const RelDims& dims = {},
                      Cube2D* adjusted = nullptr);

struct DecodeConfig {
  double center_threshold = 0.3;
  double kp_threshold = 0.1;
  double margin_frac = 0.25;
  int max_det = 32;
  bool use_heatmap_kp = true;
  bool use_displacement_kp = true;
  bool use_edge_adjust = true;
  bool use_rectify = false;

  Decoder decoder() const;
  /// Throws kInvalidArgument for out-of-range values or both keypoint sources off.
  void validate() const;

  /// Keys not listed above are rejected unless `allow_unknown`.
  static DecodeConfig from_key_values(const KeyValues& kv, bool allow_unknown = false);
};

struct Peak {
  int x = 0;
  int y = 0;
  double score = 0.0;

  friend bool operator==(const Peak&, const Peak&) = default;
};

/// 3x3 max-pool peaks of one channel: the cell must equal its neighborhood max
/// (ties go to the smaller row-major index) and exceed `threshold`. Sorted by
/// score descending, then row-major; truncated to `max_peaks`.
std::vector<Peak> nms_peaks(const Tensor& heat, int channel, double threshold, int max_peaks);

struct Detection {
  Vec2 center = Vec2::Zero();  // input px
  double score = 0.0;
  Vec2 box = Vec2::Zero();  // width, height in input px
  int cell_x = 0;
  int cell_y = 0;
  std::array<Vec2, 8> keypoints = zero_points<8>();
  Cube2D raw_cube;
  Cube2D adjusted_cube;
  RelDims dims;
  EulerPose pose;
  std::optional<std::string> error;
};

std::vector<Detection> decode_centers(const TensorMaps& maps, double threshold, int max_det);

/// Fuses displacement proposals with heatmap peaks inside the detection box
/// expanded by margin_frac * max(box side); falls back to the displacement
/// proposal when no peak lies within that radius. Input px.
std::array<Vec2, 8> decode_keypoints(const Detection& det, const TensorMaps& maps, const DecodeConfig& cfg);

/// Full pipeline. Per-detection failures are recorded in Detection::error.
/// The result does not depend on `workers`.
std::vector<Detection> decode_pose(const TensorMaps& maps, const DecodeConfig& cfg, int workers = 1);

}  // namespace cubepose
