#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace cubepose {

/// Dense H x W x C float32 tensor, row-major with channels innermost.
struct Tensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  Tensor() = default;
  Tensor(int h, int w, int c) : height(h), width(w), channels(c), data(std::size_t(h) * w * c, 0.0f) {}

  float& at(int y, int x, int c) { return data[(std::size_t(y) * width + x) * channels + c]; }
  float at(int y, int x, int c) const { return data[(std::size_t(y) * width + x) * channels + c]; }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// Multi-tensor container (.tmap).
///
/// Line 1 is a JSON manifest
///   {"format":"tmap","version":1,"stride":S,"tensors":[{"name":..,"offset":..,"length":..},..]}
/// with offsets counted from the first byte after the manifest newline. Each
/// section is a JSON header line
///   {"shape":[H,W,C],"dtype":"f32","order":"row-major","byte_order":"little"}
/// a newline, and H*W*C little-endian IEEE-754 float32 values.
struct TensorFile {
  int stride = 1;
  std::vector<NamedTensor> tensors;

  const Tensor* find(const std::string& name) const;
};

void write_tensor_file(std::ostream& out, const TensorFile& file);
/// Throws kParse with the byte offset on malformed input, and names the
/// expected vs actual byte counts when a section is truncated.
TensorFile read_tensor_file(std::istream& in);

/// Dense regression outputs at stride s (map units are input px / s).
struct TensorMaps {
  int stride = 4;
  Tensor center_heat;  // H x W x 1, scores in [0, 1]
  Tensor center_off;   // H x W x 2, sub-cell offset of the center
  Tensor box_size;     // H x W x 2, box (w, h) in map units
  Tensor kp_heat;      // H x W x 8
  Tensor kp_off;       // H x W x 2 (shared) or 16 (per keypoint)
  Tensor kp_disp;      // H x W x 16, vertex cell minus center cell
  Tensor dims;         // H x W x 3

  static constexpr int kKeypoints = 8;

  /// All-zero maps; kp_off_channels must be 2 or 16.
  static TensorMaps zeros(int height, int width, int stride, int kp_off_channels = 16);

  int height() const { return center_heat.height; }
  int width() const { return center_heat.width; }

  /// Throws kInvalidArgument when shapes disagree, stride < 1, or a heat
  /// score falls outside [0, 1].
  void validate() const;

  TensorFile to_file() const;
  static TensorMaps from_file(const TensorFile& file);
};

TensorMaps read_maps(const std::string& path);
void write_maps(const std::string& path, const TensorMaps& maps);

}  // namespace cubepose
