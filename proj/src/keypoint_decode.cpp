#include "cubepose/keypoint_decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "cubepose/error.hpp"

namespace cubepose {

namespace {

int clamp_cell(double v, int size) {
  if (!std::isfinite(v)) {
    return 0;
  }
  return static_cast<int>(std::clamp(std::floor(v), 0.0, double(size - 1)));
}

Vec2 keypoint_offset(const TensorMaps& maps, int x, int y, int k) {
  const int c = maps.kp_off.channels == 2 ? 0 : 2 * k;
  return {maps.kp_off.at(y, x, c), maps.kp_off.at(y, x, c + 1)};
}

RelDims dims_at(const TensorMaps& maps, int x, int y) {
  const double du = maps.dims.at(y, x, 0), dv = maps.dims.at(y, x, 1), dw = maps.dims.at(y, x, 2);
  if (du > 0.0 && dv > 0.0 && dw > 0.0) {
    return RelDims(du, dv, dw);
  }
  return {};
}

void decode_one(Detection& det, const TensorMaps& maps, const DecodeConfig& cfg) {
  try {
    det.keypoints = decode_keypoints(det, maps, cfg);
    Cube2D raw;
    Vec2 sum = Vec2::Zero();
    for (int k = 0; k < 8; ++k) {
      raw.vertices[k] = det.keypoints[k];
      sum += det.keypoints[k];
    }
    raw.center = sum / 8.0;
    det.raw_cube = raw;
    det.dims = dims_at(maps, det.cell_x, det.cell_y);
    det.pose = decode_cube(raw, cfg.decoder(), det.dims, &det.adjusted_cube);
  } catch (const Error& e) {
    det.error = e.what();
  }
}

}  // namespace

const char* to_string(Decoder d) {
  switch (d) {
    case Decoder::kRaw:
      return "raw";
    case Decoder::kEdgeAdjust:
      return "edge_adjust";
    case Decoder::kRectify:
      return "rectify";
  }
  return "?";
}

Decoder decoder_from_string(const std::string& name) {
  if (name == "raw") return Decoder::kRaw;
  if (name == "edge_adjust") return Decoder::kEdgeAdjust;
  if (name == "rectify") return Decoder::kRectify;
  throw Error(ErrorCode::kInvalidArgument, "unknown decoder '" + name + "'");
}

EulerPose decode_cube(const Cube2D& cube, Decoder decoder, const RelDims& dims, Cube2D* adjusted) {
  switch (decoder) {
    case Decoder::kRaw:
      if (adjusted) *adjusted = cube;
      return pose_from_axes(corner_axes(cube));
    case Decoder::kEdgeAdjust: {
      const Cube2D out = edge_adjust(cube, dims);
      if (adjusted) *adjusted = out;
      return cube2euler_matrix(out);
    }
    case Decoder::kRectify: {
      const Cube2D out = rectify_orthoscale(cube).cube;
      if (adjusted) *adjusted = out;
      return cube2euler_matrix(out);
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown decoder");
}

Decoder DecodeConfig::decoder() const {
  if (use_rectify) return Decoder::kRectify;
  if (use_edge_adjust) return Decoder::kEdgeAdjust;
  return Decoder::kRaw;
}

void DecodeConfig::validate() const {
  if (!(center_threshold >= 0.0 && center_threshold < 1.0) || !(kp_threshold >= 0.0 && kp_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "decode config: thresholds must lie in [0, 1)");
  }
  if (!(margin_frac >= 0.0) || !std::isfinite(margin_frac)) {
    throw Error(ErrorCode::kInvalidArgument, "decode config: margin_frac must be >= 0");
  }
  if (max_det < 1) {
    throw Error(ErrorCode::kInvalidArgument, "decode config: max_det must be >= 1");
  }
  if (!use_heatmap_kp && !use_displacement_kp) {
    throw Error(ErrorCode::kInvalidArgument, "decode config: at least one keypoint source must be enabled");
  }
}

DecodeConfig DecodeConfig::from_key_values(const KeyValues& kv, bool allow_unknown) {
  DecodeConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "center_threshold") cfg.center_threshold = parse_double(key, value);
    else if (key == "kp_threshold") cfg.kp_threshold = parse_double(key, value);
    else if (key == "margin_frac") cfg.margin_frac = parse_double(key, value);
    else if (key == "max_det") cfg.max_det = static_cast<int>(parse_int(key, value));
    else if (key == "use_heatmap_kp") cfg.use_heatmap_kp = parse_bool(key, value);
    else if (key == "use_displacement_kp") cfg.use_displacement_kp = parse_bool(key, value);
    else if (key == "use_edge_adjust") cfg.use_edge_adjust = parse_bool(key, value);
    else if (key == "use_rectify") cfg.use_rectify = parse_bool(key, value);
    else if (!allow_unknown) {
      throw Error(ErrorCode::kParse, "decode config: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::vector<Peak> nms_peaks(const Tensor& heat, int channel, double threshold, int max_peaks) {
  std::vector<Peak> peaks;
  const int h = heat.height, w = heat.width;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float v = heat.at(y, x, channel);
      if (!(v > threshold)) {
        continue;
      }
      bool is_peak = true;
      for (int dy = -1; dy <= 1 && is_peak; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int ny = y + dy, nx = x + dx;
          if ((dx == 0 && dy == 0) || ny < 0 || ny >= h || nx < 0 || nx >= w) {
            continue;
          }
          const float n = heat.at(ny, nx, channel);
          // Neighbors earlier in row-major order win ties.
          if (n > v || (n == v && (dy < 0 || (dy == 0 && dx < 0)))) {
            is_peak = false;
            break;
          }
        }
      }
      if (is_peak) {
        peaks.push_back({x, y, v});
      }
    }
  }
  // Cells were visited row-major, so a stable sort keeps that tie order.
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.score > b.score; });
  if (max_peaks >= 0 && peaks.size() > std::size_t(max_peaks)) {
    peaks.resize(std::size_t(max_peaks));
  }
  return peaks;
}

std::vector<Detection> decode_centers(const TensorMaps& maps, double threshold, int max_det) {
  std::vector<Detection> dets;
  const double s = maps.stride;
  for (const Peak& p : nms_peaks(maps.center_heat, 0, threshold, max_det)) {
    Detection d;
    d.cell_x = p.x;
    d.cell_y = p.y;
    d.score = p.score;
    d.center = Vec2(p.x + maps.center_off.at(p.y, p.x, 0), p.y + maps.center_off.at(p.y, p.x, 1)) * s;
    d.box = Vec2(maps.box_size.at(p.y, p.x, 0), maps.box_size.at(p.y, p.x, 1)) * s;
    dets.push_back(d);
  }
  return dets;
}

std::array<Vec2, 8> decode_keypoints(const Detection& det, const TensorMaps& maps, const DecodeConfig& cfg) {
  const double s = maps.stride;
  const int h = maps.height(), w = maps.width();
  const Vec2 box = det.box / s;
  const double margin = cfg.margin_frac * std::max(box.x(), box.y());
  const Vec2 c = det.center / s;
  const int x0 = clamp_cell(c.x() - 0.5 * box.x() - margin, w);
  const int x1 = clamp_cell(c.x() + 0.5 * box.x() + margin, w);
  const int y0 = clamp_cell(c.y() - 0.5 * box.y() - margin, h);
  const int y1 = clamp_cell(c.y() + 0.5 * box.y() + margin, h);

  std::array<Vec2, 8> out;
  for (int k = 0; k < 8; ++k) {
    std::vector<Peak> candidates;
    if (cfg.use_heatmap_kp) {
      for (const Peak& p : nms_peaks(maps.kp_heat, k, cfg.kp_threshold, -1)) {
        if (p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1) {
          candidates.push_back(p);
        }
      }
    }

    int fx = det.cell_x, fy = det.cell_y;
    if (cfg.use_displacement_kp) {
      const double px = det.cell_x + maps.kp_disp.at(det.cell_y, det.cell_x, 2 * k);
      const double py = det.cell_y + maps.kp_disp.at(det.cell_y, det.cell_x, 2 * k + 1);
      fx = clamp_cell(std::round(px), w);
      fy = clamp_cell(std::round(py), h);
      double best = std::numeric_limits<double>::infinity();
      for (const Peak& p : candidates) {
        const double dist = std::hypot(p.x - px, p.y - py);
        if (dist <= margin && dist < best) {
          best = dist;
          fx = p.x;
          fy = p.y;
        }
      }
    } else if (!candidates.empty()) {
      // Heatmap only: the most confident peak near the head.
      fx = candidates.front().x;
      fy = candidates.front().y;
    }
    out[k] = (Vec2(fx, fy) + keypoint_offset(maps, fx, fy, k)) * s;
  }
  return out;
}

std::vector<Detection> decode_pose(const TensorMaps& maps, const DecodeConfig& cfg, int workers) {
  cfg.validate();
  maps.validate();
  std::vector<Detection> dets = decode_centers(maps, cfg.center_threshold, cfg.max_det);
  const int n = static_cast<int>(dets.size());
  workers = std::clamp(workers, 1, std::max(1, n));
  if (workers == 1) {
    for (auto& d : dets) {
      decode_one(d, maps, cfg);
    }
    return dets;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += workers) {
        decode_one(dets[i], maps, cfg);
      }
    });
  }
  for (auto& th : pool) {
    th.join();
  }
  return dets;
}

}  // namespace cubepose
