#include "cubepose/bench.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <optional>
#include <sstream>
#include <thread>

#include "cubepose/error.hpp"
#include "json.hpp"

namespace cubepose {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string format_fixed(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

struct CellResult {
  bool ok = false;
  EulerPose pose;
};

// Everything one sample contributes, in (sigma, decoder) order.
struct SampleResult {
  EulerPose truth;
  std::vector<CellResult> cells;
  bool delta_checked = false;
  bool delta_violation = false;
};

std::optional<EulerPose> decode_rendered(const Cube2D& noisy, Decoder decoder, const BenchConfig& cfg) {
  CubeLabel label;
  label.image_id = "bench";
  label.cube = noisy;
  const Vec2 c = noisy.center;
  label.bbox = {c.x() - 0.5 * cfg.edge_length, c.y() - 0.5 * cfg.edge_length, cfg.edge_length, cfg.edge_length};
  const TensorMaps maps = render_targets({label}, cfg.image_size, cfg.image_size, cfg.stride);

  DecodeConfig dc = cfg.decode;
  dc.use_edge_adjust = decoder == Decoder::kEdgeAdjust;
  dc.use_rectify = decoder == Decoder::kRectify;
  const auto dets = decode_pose(maps, dc);
  if (dets.empty() || dets.front().error) {
    return std::nullopt;
  }
  return dets.front().pose;
}

SampleResult run_sample(const BenchConfig& cfg, std::size_t index) {
  SampleRng rng(cfg.seed, index);
  SampleResult out;
  const EulerPose pose = sample_pose(rng, cfg.pose_range);
  out.truth = canonicalize(pose);

  const double half = 0.5 * cfg.image_size;
  const Cube2D clean = euler2cube(pose, Vec2(half, half), cfg.edge_length);

  try {
    const double delta = delta_of_cube(clean);
    out.delta_checked = true;
    out.delta_violation = !(delta >= 0.0 && delta <= 2.0);
  } catch (const Error& e) {
    // A singular ratio path is not a range violation; a failed constraint is.
    if (e.code() == ErrorCode::kConstraintViolation) {
      out.delta_checked = true;
      out.delta_violation = true;
    }
  }

  // One standard-normal draw per vertex coordinate, shared by every sigma.
  std::array<double, 16> z;
  for (double& v : z) v = rng.normal();

  for (double sigma : cfg.noise_sigmas) {
    Cube2D noisy = clean;
    if (sigma > 0.0) {
      Vec2 sum = Vec2::Zero();
      for (int k = 0; k < 8; ++k) {
        noisy.vertices[k] += sigma * cfg.edge_length * Vec2(z[2 * k], z[2 * k + 1]);
        sum += noisy.vertices[k];
      }
      noisy.center = sum / 8.0;
    }
    for (Decoder d : cfg.decoders) {
      CellResult cell;
      try {
        if (cfg.mode == BenchMode::kVertexNoise) {
          cell.pose = decode_cube(noisy, d);
          cell.ok = true;
        } else if (auto p = decode_rendered(noisy, d, cfg)) {
          cell.pose = *p;
          cell.ok = true;
        }
      } catch (const Error&) {
        cell.ok = false;
      }
      out.cells.push_back(cell);
    }
  }
  return out;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

SampleRng::SampleRng(std::uint64_t seed, std::uint64_t stream) : engine_(splitmix64(seed ^ splitmix64(stream))) {}

double SampleRng::uniform() { return (double(engine_() >> 11) + 0.5) * 0x1.0p-53; }

double SampleRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

const char* to_string(PoseRange r) { return r == PoseRange::kFull ? "full" : "narrow"; }
const char* to_string(BenchMode m) { return m == BenchMode::kVertexNoise ? "vertex-noise" : "map-render"; }

EulerPose sample_pose(SampleRng& rng, PoseRange range) {
  if (range == PoseRange::kNarrow) {
    const double y = rng.uniform(-99.0, 99.0);
    const double p = rng.uniform(-99.0, 99.0);
    const double r = rng.uniform(-99.0, 99.0);
    return {y, p, r};
  }
  // Pitch stays 1 degree away from +-90 so ground truth never sits on the
  // canonical-range seam.
  const double y = rng.uniform(-180.0, 180.0);
  const double p = rng.uniform(-89.0, 89.0);
  const double r = rng.uniform(-180.0, 180.0);
  return {y, p, r};
}

Cube2D perturb_cube(const Cube2D& cube, double sigma_frac, SampleRng& rng) {
  if (!(sigma_frac >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "perturb_cube: sigma must be >= 0");
  }
  const double scale = sigma_frac * cube_to_axes(cube).axes.l;
  Cube2D out = cube;
  Vec2 sum = Vec2::Zero();
  for (Vec2& v : out.vertices) {
    const double dx = rng.normal();
    const double dy = rng.normal();
    v += scale * Vec2(dx, dy);
    sum += v;
  }
  if (sigma_frac == 0.0) {
    return cube;
  }
  out.center = sum / 8.0;
  return out;
}

void BenchConfig::validate() const {
  if (n_samples <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "bench: n_samples must be > 0");
  }
  if (noise_sigmas.empty() || decoders.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "bench: need at least one sigma and one decoder");
  }
  for (double s : noise_sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw Error(ErrorCode::kInvalidArgument, "bench: sigmas must be >= 0");
    }
  }
  if (!(edge_length > 0.0) || stride < 1 || image_size < stride || workers < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bench: invalid geometry or worker count");
  }
  decode.validate();
}

BenchConfig BenchConfig::from_key_values(const KeyValues& kv) {
  BenchConfig cfg;
  cfg.decode = DecodeConfig::from_key_values(kv, /*allow_unknown=*/true);
  static const char* kDecodeKeys[] = {"center_threshold", "kp_threshold",   "margin_frac",  "max_det",
                                      "use_heatmap_kp",   "use_displacement_kp", "use_edge_adjust", "use_rectify"};
  for (const auto& [key, value] : kv) {
    if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "n_samples") {
      cfg.n_samples = static_cast<int>(parse_int(key, value));
    } else if (key == "pose_range") {
      if (value == "full") cfg.pose_range = PoseRange::kFull;
      else if (value == "narrow") cfg.pose_range = PoseRange::kNarrow;
      else throw Error(ErrorCode::kParse, "bench: pose_range must be full|narrow");
    } else if (key == "noise_sigmas") {
      cfg.noise_sigmas.clear();
      for (const auto& s : split_list(value)) cfg.noise_sigmas.push_back(parse_double(key, s));
    } else if (key == "decoders") {
      cfg.decoders.clear();
      for (const auto& s : split_list(value)) cfg.decoders.push_back(decoder_from_string(s));
    } else if (key == "mode") {
      if (value == "vertex-noise") cfg.mode = BenchMode::kVertexNoise;
      else if (value == "map-render") cfg.mode = BenchMode::kMapRender;
      else throw Error(ErrorCode::kParse, "bench: mode must be vertex-noise|map-render");
    } else if (key == "edge_length") {
      cfg.edge_length = parse_double(key, value);
    } else if (key == "image_size") {
      cfg.image_size = static_cast<int>(parse_int(key, value));
    } else if (key == "stride") {
      cfg.stride = static_cast<int>(parse_int(key, value));
    } else if (key == "workers") {
      cfg.workers = static_cast<int>(parse_int(key, value));
    } else if (std::find_if(std::begin(kDecodeKeys), std::end(kDecodeKeys),
                            [&](const char* k) { return key == k; }) == std::end(kDecodeKeys)) {
      throw Error(ErrorCode::kParse, "bench: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

const BenchCell& BenchReport::cell(Decoder d, double sigma) const {
  for (const auto& c : cells) {
    if (c.decoder == d && c.sigma == sigma) return c;
  }
  throw Error(ErrorCode::kInvalidArgument, "bench report has no such cell");
}

BenchReport run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = std::size_t(cfg.n_samples);
  std::vector<SampleResult> results(n);

  const int workers = std::clamp(cfg.workers, 1, cfg.n_samples);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) results[i] = run_sample(cfg, i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = std::size_t(t); i < n; i += std::size_t(workers)) results[i] = run_sample(cfg, i);
      });
    }
    for (auto& th : pool) th.join();
  }

  // Accumulate in sample order so the sums do not depend on scheduling.
  BenchReport report;
  report.config = cfg;
  const std::size_t nd = cfg.decoders.size();
  for (std::size_t si = 0; si < cfg.noise_sigmas.size(); ++si) {
    for (std::size_t di = 0; di < nd; ++di) {
      BenchCell cell;
      cell.decoder = cfg.decoders[di];
      cell.sigma = cfg.noise_sigmas[si];
      double sy = 0, sp = 0, sr = 0, sg = 0;
      for (const SampleResult& s : results) {
        const CellResult& c = s.cells[si * nd + di];
        if (!c.ok) {
          ++cell.errors;
          continue;
        }
        const EulerPose e = canonicalize(c.pose);
        sy += angle_diff(e.yaw, s.truth.yaw);
        sp += angle_diff(e.pitch, s.truth.pitch);
        sr += angle_diff(e.roll, s.truth.roll);
        sg += rotation_angle_between(e, s.truth);
        ++cell.report.count;
      }
      if (cell.report.count > 0) {
        const double m = double(cell.report.count);
        cell.report.yaw_mae = sy / m;
        cell.report.pitch_mae = sp / m;
        cell.report.roll_mae = sr / m;
        cell.report.mean_mae = (cell.report.yaw_mae + cell.report.pitch_mae + cell.report.roll_mae) / 3.0;
        cell.geodesic_mae = sg / m;
      }
      report.cells.push_back(cell);
    }
  }
  for (const SampleResult& s : results) {
    report.delta_checked += s.delta_checked;
    report.delta_violations += s.delta_violation;
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string bench_report_csv(const BenchReport& r) {
  std::ostringstream os;
  os << "# rng=" << SampleRng::kAlgorithm << " seed=" << r.config.seed << " n_samples=" << r.config.n_samples
     << " pose_range=" << to_string(r.config.pose_range) << " mode=" << to_string(r.config.mode) << '\n';
  os << "decoder,sigma,yaw_mae,pitch_mae,roll_mae,mean_mae,n,errors\n";
  for (const auto& c : r.cells) {
    os << to_string(c.decoder) << ',' << format_fixed(c.sigma) << ',' << format_fixed(c.report.yaw_mae) << ','
       << format_fixed(c.report.pitch_mae) << ',' << format_fixed(c.report.roll_mae) << ','
       << format_fixed(c.report.mean_mae) << ',' << c.report.count << ',' << c.errors << '\n';
  }
  return os.str();
}

std::string bench_report_table(const BenchReport& r) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "decoder" << std::right << std::setw(10) << "sigma" << std::setw(12) << "yaw"
     << std::setw(12) << "pitch" << std::setw(12) << "roll" << std::setw(12) << "mean" << std::setw(8) << "n"
     << std::setw(8) << "errors" << '\n';
  for (const auto& c : r.cells) {
    os << std::left << std::setw(12) << to_string(c.decoder) << std::right << std::setw(10) << format_fixed(c.sigma)
       << std::setw(12) << format_fixed(c.report.yaw_mae) << std::setw(12) << format_fixed(c.report.pitch_mae)
       << std::setw(12) << format_fixed(c.report.roll_mae) << std::setw(12) << format_fixed(c.report.mean_mae)
       << std::setw(8) << c.report.count << std::setw(8) << c.errors << '\n';
  }
  return os.str();
}

std::string bench_report_json(const BenchReport& r) {
  nlohmann::ordered_json j;
  j["rng"] = SampleRng::kAlgorithm;
  j["seed"] = r.config.seed;
  j["n_samples"] = r.config.n_samples;
  j["pose_range"] = to_string(r.config.pose_range);
  j["mode"] = to_string(r.config.mode);
  j["edge_length"] = r.config.edge_length;
  j["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : r.cells) {
    nlohmann::ordered_json cell;
    cell["decoder"] = to_string(c.decoder);
    cell["sigma"] = c.sigma;
    cell["yaw_mae"] = c.report.yaw_mae;
    cell["pitch_mae"] = c.report.pitch_mae;
    cell["roll_mae"] = c.report.roll_mae;
    cell["mean_mae"] = c.report.mean_mae;
    cell["geodesic_mae"] = c.geodesic_mae;
    cell["n"] = c.report.count;
    cell["errors"] = c.errors;
    j["cells"].push_back(cell);
  }
  j["delta_checked"] = r.delta_checked;
  j["delta_violations"] = r.delta_violations;
  j["note"] =
      "Noise is isotropic Gaussian on cube vertices standing in for network error; the ordering of decoders "
      "is meaningful, absolute MAE values are not comparable to trained-network results.";
  j["meta"] = {{"golden", false}, {"runtime_seconds", r.runtime_seconds}};
  return j.dump(2);
}

}  // namespace cubepose
