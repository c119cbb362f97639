#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cubepose/dataset.hpp"
#include "cubepose/io.hpp"
#include "cubepose/keypoint_decode.hpp"

namespace cubepose {

/// Per-sample random stream: std::mt19937_64 seeded with
/// splitmix64(seed ^ splitmix64(stream)). Variates are produced here rather
/// than by <random> distributions so output is identical across standard
/// libraries.
class SampleRng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64+splitmix64/box-muller";

  SampleRng(std::uint64_t seed, std::uint64_t stream);

  /// Uniform in the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

enum class PoseRange { kFull, kNarrow };
enum class BenchMode { kVertexNoise, kMapRender };

const char* to_string(PoseRange r);
const char* to_string(BenchMode m);

/// narrow: each angle uniform in (-99, 99). full: yaw and roll uniform in
/// (-180, 180), pitch uniform in (-89, 89).
EulerPose sample_pose(SampleRng& rng, PoseRange range);

/// Adds N(0, (sigma_frac * l)^2) to every vertex coordinate (l from
/// cube_to_axes of the input) and recenters. sigma_frac = 0 returns the input.
Cube2D perturb_cube(const Cube2D& cube, double sigma_frac, SampleRng& rng);

struct BenchConfig {
  std::uint64_t seed = 42;
  int n_samples = 1000;
  PoseRange pose_range = PoseRange::kFull;
  std::vector<double> noise_sigmas{0.0, 0.01, 0.02, 0.04};
  std::vector<Decoder> decoders{Decoder::kRaw, Decoder::kEdgeAdjust, Decoder::kRectify};
  BenchMode mode = BenchMode::kVertexNoise;
  double edge_length = 100.0;  // px
  int image_size = 320;        // map-render mode
  int stride = 4;              // map-render mode
  int workers = 1;
  DecodeConfig decode;  // map-render mode; the decoder flags are overridden per decoder

  void validate() const;

  /// Bench keys: seed, n_samples, pose_range, noise_sigmas, decoders, mode,
  /// edge_length, image_size, stride, workers; DecodeConfig keys are accepted too.
  static BenchConfig from_key_values(const KeyValues& kv);
};

struct BenchCell {
  Decoder decoder = Decoder::kRaw;
  double sigma = 0.0;
  EvalReport report;
  double geodesic_mae = 0.0;  // mean rotation angle between decoded and true pose (deg); JSON only
  std::size_t errors = 0;
};

struct BenchReport {
  BenchConfig config;
  std::vector<BenchCell> cells;  // sigma-major, decoders in config order
  std::size_t delta_violations = 0;
  std::size_t delta_checked = 0;
  double runtime_seconds = 0.0;  // not part of the golden outputs

  const BenchCell& cell(Decoder d, double sigma) const;
};

/// Deterministic in the config (including seed) and independent of `workers`.
BenchReport run_benchmark(const BenchConfig& cfg);

/// `decoder,sigma,yaw_mae,pitch_mae,roll_mae,mean_mae,n,errors` preceded by a
/// `#` comment naming the generator; no timing information.
std::string bench_report_csv(const BenchReport& r);
std::string bench_report_table(const BenchReport& r);
std::string bench_report_json(const BenchReport& r);

}  // namespace cubepose
