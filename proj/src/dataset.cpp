#include "cubepose/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "cubepose/error.hpp"
#include "cubepose/io.hpp"
#include "json.hpp"

namespace cubepose {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

ordered_json vec_json(const Vec2& v) { return ordered_json::array({v.x(), v.y()}); }

Vec2 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw Error(ErrorCode::kParse, "expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

BBox bbox_from(const json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw Error(ErrorCode::kParse, "bbox must be [x, y, w, h]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

ordered_json bbox_json(const BBox& b) { return ordered_json::array({b.x, b.y, b.w, b.h}); }

void put_pose(ordered_json& j, const EulerPose& p) {
  j["yaw"] = p.yaw;
  j["pitch"] = p.pitch;
  j["roll"] = p.roll;
}

EulerPose pose_from(const json& j) {
  return {j.at("yaw").get<double>(), j.at("pitch").get<double>(), j.at("roll").get<double>()};
}

json parse_object(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::kParse, "expected a JSON object");
  }
  return j;
}

template <typename T, typename Fn>
JsonlRead<T> read_jsonl(std::istream& in, bool strict, Fn&& parse) {
  JsonlRead<T> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      std::optional<T> rec = parse(line);
      if (rec) {
        out.records.emplace_back(lineno, std::move(*rec));
      }
    } catch (const std::exception& e) {
      if (strict) {
        throw Error(ErrorCode::kParse, "line " + std::to_string(lineno) + ": " + e.what());
      }
      out.errors.push_back({lineno, e.what()});
    }
  }
  return out;
}

// Splats a Gaussian with peak 1 at (cx, cy), combining by max.
void splat(Tensor& t, int channel, int cx, int cy, int radius) {
  const double sigma = (2.0 * radius + 1.0) / 6.0;
  const double denom = 2.0 * sigma * sigma;
  for (int dy = -radius; dy <= radius; ++dy) {
    const int y = cy + dy;
    if (y < 0 || y >= t.height) continue;
    for (int dx = -radius; dx <= radius; ++dx) {
      const int x = cx + dx;
      if (x < 0 || x >= t.width) continue;
      const float g = static_cast<float>(std::exp(-(dx * dx + dy * dy) / denom));
      float& cell = t.at(y, x, channel);
      cell = std::max(cell, g);
    }
  }
}

int cell_of(double v, int size) { return static_cast<int>(std::clamp(std::floor(v), 0.0, double(size - 1))); }

}  // namespace

CubeLabel label_to_cube(const HeadLabel& label) {
  const BBox& b = label.bbox;
  if (!(b.w > 0.0) || !(b.h > 0.0) || !std::isfinite(b.x) || !std::isfinite(b.y)) {
    throw Error(ErrorCode::kInvalidArgument, "label '" + label.image_id + "': degenerate bbox");
  }
  const double l = label.l.value_or(std::min(b.w, b.h));
  const EulerPose pose = canonicalize(label.pose);
  const AxisProjection axes = euler_to_axes(pose, l);
  Vec2 center = b.center();
  if (label.nose) {
    center += *label.nose - (center + 0.5 * axes.w);
  }
  CubeLabel out;
  out.image_id = label.image_id;
  out.cube = axes_to_cube(axes, center);
  out.bbox = b;
  out.pose = pose;
  return out;
}

double gaussian_radius(double height, double width, double min_overlap) {
  const double b1 = height + width;
  const double c1 = width * height * (1 - min_overlap) / (1 + min_overlap);
  const double r1 = (b1 + std::sqrt(b1 * b1 - 4 * c1)) / 2;

  const double a2 = 4;
  const double b2 = 2 * (height + width);
  const double c2 = (1 - min_overlap) * width * height;
  const double r2 = (b2 + std::sqrt(b2 * b2 - 4 * a2 * c2)) / 2;

  const double a3 = 4 * min_overlap;
  const double b3 = -2 * min_overlap * (height + width);
  const double c3 = (min_overlap - 1) * width * height;
  const double r3 = (b3 + std::sqrt(b3 * b3 - 4 * a3 * c3)) / 2;
  return std::min({r1, r2, r3});
}

int SigmaPolicy::radius(double box_w_cells, double box_h_cells) const {
  const int r = kind == Kind::kFixed ? fixed_radius
                                     : static_cast<int>(gaussian_radius(box_h_cells, box_w_cells, min_overlap));
  return std::max(min_radius, r);
}

TensorMaps render_targets(const std::vector<CubeLabel>& labels, int image_w, int image_h, int stride,
                          const SigmaPolicy& policy) {
  if (image_w <= 0 || image_h <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "render_targets: zero image size");
  }
  if (stride < 1 || image_w < stride || image_h < stride) {
    throw Error(ErrorCode::kInvalidArgument, "render_targets: stride larger than the image");
  }
  TensorMaps maps = TensorMaps::zeros(image_h / stride, image_w / stride, stride, 2 * TensorMaps::kKeypoints);
  const int h = maps.height(), w = maps.width();
  const double s = stride;

  for (const CubeLabel& label : labels) {
    const Vec2 c = label.cube.center / s;
    const int cx = cell_of(c.x(), w), cy = cell_of(c.y(), h);
    const int radius = policy.radius(label.bbox.w / s, label.bbox.h / s);

    splat(maps.center_heat, 0, cx, cy, radius);
    maps.center_off.at(cy, cx, 0) = static_cast<float>(c.x() - cx);
    maps.center_off.at(cy, cx, 1) = static_cast<float>(c.y() - cy);
    maps.box_size.at(cy, cx, 0) = static_cast<float>(label.bbox.w / s);
    maps.box_size.at(cy, cx, 1) = static_cast<float>(label.bbox.h / s);
    for (int k = 0; k < 3; ++k) {
      maps.dims.at(cy, cx, k) = static_cast<float>(label.dims[k]);
    }

    for (int k = 0; k < TensorMaps::kKeypoints; ++k) {
      const Vec2 v = label.cube.vertices[k] / s;
      const int vx = cell_of(v.x(), w), vy = cell_of(v.y(), h);
      splat(maps.kp_heat, k, vx, vy, radius);
      maps.kp_off.at(vy, vx, 2 * k) = static_cast<float>(v.x() - vx);
      maps.kp_off.at(vy, vx, 2 * k + 1) = static_cast<float>(v.y() - vy);
      maps.kp_disp.at(cy, cx, 2 * k) = static_cast<float>(vx - cx);
      maps.kp_disp.at(cy, cx, 2 * k + 1) = static_cast<float>(vy - cy);
    }
  }
  return maps;
}

const char* to_string(Subset s) { return s == Subset::kAll ? "all" : "frontal"; }

Subset subset_from_string(const std::string& name) {
  if (name == "all") return Subset::kAll;
  if (name == "frontal") return Subset::kFrontal;
  throw Error(ErrorCode::kInvalidArgument, "unknown subset '" + name + "' (expected all|frontal)");
}

EvalReport evaluate(const std::vector<PosePrediction>& preds, const std::vector<PosePrediction>& gts,
                    Subset subset) {
  std::map<std::string, EulerPose> gt_by_id;
  for (const auto& g : gts) {
    if (!gt_by_id.emplace(g.image_id, canonicalize(g.pose)).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate ground-truth image_id '" + g.image_id + "'");
    }
  }
  std::set<std::string> seen;
  std::vector<std::string> unmatched;
  for (const auto& p : preds) {
    if (!seen.insert(p.image_id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate prediction image_id '" + p.image_id + "'");
    }
    if (!gt_by_id.count(p.image_id)) {
      unmatched.push_back(p.image_id);
    }
  }
  if (!unmatched.empty()) {
    std::string ids;
    for (const auto& id : unmatched) {
      ids += (ids.empty() ? "" : ", ") + id;
    }
    throw Error(ErrorCode::kUnmatched, "predictions without ground truth: " + ids);
  }

  EvalReport r;
  r.subset = subset;
  double sy = 0, sp = 0, sr = 0;
  for (const auto& p : preds) {
    const EulerPose& g = gt_by_id.at(p.image_id);
    if (subset == Subset::kFrontal && !(std::abs(g.yaw) < 90.0)) {
      continue;
    }
    const EulerPose e = canonicalize(p.pose);
    sy += angle_diff(e.yaw, g.yaw);
    sp += angle_diff(e.pitch, g.pitch);
    sr += angle_diff(e.roll, g.roll);
    ++r.count;
  }
  if (r.count == 0) {
    throw Error(ErrorCode::kUnmatched, "no prediction/ground-truth pairs to evaluate");
  }
  const double n = double(r.count);
  r.yaw_mae = sy / n;
  r.pitch_mae = sp / n;
  r.roll_mae = sr / n;
  r.mean_mae = (r.yaw_mae + r.pitch_mae + r.roll_mae) / 3.0;
  return r;
}

std::string eval_report_json(const EvalReport& r) {
  ordered_json j;
  j["subset"] = to_string(r.subset);
  j["count"] = r.count;
  j["yaw_mae"] = r.yaw_mae;
  j["pitch_mae"] = r.pitch_mae;
  j["roll_mae"] = r.roll_mae;
  j["mean_mae"] = r.mean_mae;
  return j.dump(2);
}

std::string eval_report_table(const EvalReport& r) {
  std::ostringstream os;
  os << std::left << std::setw(9) << "subset" << std::right << std::setw(8) << "count" << std::setw(14) << "yaw"
     << std::setw(14) << "pitch" << std::setw(14) << "roll" << std::setw(14) << "mean" << '\n';
  os << std::left << std::setw(9) << to_string(r.subset) << std::right << std::setw(8) << r.count << std::fixed
     << std::setprecision(6) << std::setw(14) << r.yaw_mae << std::setw(14) << r.pitch_mae << std::setw(14)
     << r.roll_mae << std::setw(14) << r.mean_mae << '\n';
  return os.str();
}

std::string head_label_to_json(const HeadLabel& l) {
  ordered_json j;
  j["image_id"] = l.image_id;
  j["bbox"] = bbox_json(l.bbox);
  put_pose(j, l.pose);
  if (l.nose) j["nose"] = vec_json(*l.nose);
  if (l.l) j["l"] = *l.l;
  return j.dump();
}

std::string cube_label_to_json(const CubeLabel& l) {
  ordered_json j;
  j["image_id"] = l.image_id;
  j["bbox"] = bbox_json(l.bbox);
  if (l.pose) put_pose(j, *l.pose);
  j["center"] = vec_json(l.cube.center);
  j["vertices"] = ordered_json::array();
  for (const Vec2& v : l.cube.vertices) {
    j["vertices"].push_back(vec_json(v));
  }
  j["dims"] = ordered_json::array({l.dims[0], l.dims[1], l.dims[2]});
  return j.dump();
}

std::string prediction_to_json(const PosePrediction& p) {
  ordered_json j;
  j["image_id"] = p.image_id;
  put_pose(j, p.pose);
  return j.dump();
}

std::string prediction_error_to_json(const std::string& image_id, const std::string& message) {
  ordered_json j;
  j["image_id"] = image_id;
  j["error"] = message;
  return j.dump();
}

HeadLabel head_label_from_json(const std::string& line) {
  const json j = parse_object(line);
  try {
    HeadLabel l;
    l.image_id = j.at("image_id").get<std::string>();
    l.bbox = bbox_from(j.at("bbox"));
    l.pose = pose_from(j);
    if (j.contains("nose") && !j["nose"].is_null()) l.nose = vec_from(j["nose"]);
    if (j.contains("l") && !j["l"].is_null()) l.l = j["l"].get<double>();
    if (!(l.bbox.w > 0.0) || !(l.bbox.h > 0.0)) {
      throw Error(ErrorCode::kParse, "bbox width and height must be positive");
    }
    if (l.l && !(*l.l > 0.0)) {
      throw Error(ErrorCode::kParse, "l must be positive");
    }
    return l;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad head label: ") + e.what());
  }
}

CubeLabel cube_label_from_json(const std::string& line) {
  const json j = parse_object(line);
  try {
    CubeLabel l;
    l.image_id = j.at("image_id").get<std::string>();
    l.bbox = bbox_from(j.at("bbox"));
    if (j.contains("yaw")) l.pose = pose_from(j);
    const json& verts = j.at("vertices");
    if (!verts.is_array() || verts.size() != 8) {
      throw Error(ErrorCode::kParse, "vertices must hold 8 [x, y] pairs");
    }
    for (int k = 0; k < 8; ++k) {
      l.cube.vertices[k] = vec_from(verts[k]);
    }
    if (j.contains("center")) {
      l.cube.center = vec_from(j["center"]);
    } else {
      Vec2 sum = Vec2::Zero();
      for (const Vec2& v : l.cube.vertices) sum += v;
      l.cube.center = sum / 8.0;
    }
    if (j.contains("dims")) {
      const json& d = j["dims"];
      if (!d.is_array() || d.size() != 3) {
        throw Error(ErrorCode::kParse, "dims must hold 3 values");
      }
      l.dims = RelDims(d[0].get<double>(), d[1].get<double>(), d[2].get<double>());
    }
    return l;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad cube label: ") + e.what());
  }
}

std::optional<PosePrediction> prediction_from_json(const std::string& line) {
  const json j = parse_object(line);
  try {
    if (j.contains("error")) {
      return std::nullopt;
    }
    return PosePrediction{j.at("image_id").get<std::string>(), pose_from(j)};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad prediction: ") + e.what());
  }
}

JsonlRead<HeadLabel> read_head_labels(std::istream& in, bool strict) {
  return read_jsonl<HeadLabel>(in, strict, [](const std::string& s) { return std::optional(head_label_from_json(s)); });
}

JsonlRead<CubeLabel> read_cube_labels(std::istream& in, bool strict) {
  return read_jsonl<CubeLabel>(in, strict, [](const std::string& s) { return std::optional(cube_label_from_json(s)); });
}

JsonlRead<PosePrediction> read_predictions(std::istream& in, bool strict) {
  return read_jsonl<PosePrediction>(in, strict, [](const std::string& s) { return prediction_from_json(s); });
}

std::vector<PosePrediction> read_poses_file(const std::string& path) {
  auto in = open_input(path);
  return read_predictions(*in, /*strict=*/true).values();
}

void write_head_labels(std::ostream& out, const std::vector<HeadLabel>& labels) {
  for (const auto& l : labels) out << head_label_to_json(l) << '\n';
}

void write_cube_labels(std::ostream& out, const std::vector<CubeLabel>& labels) {
  for (const auto& l : labels) out << cube_label_to_json(l) << '\n';
}

void write_predictions(std::ostream& out, const std::vector<PosePrediction>& preds) {
  for (const auto& p : preds) out << prediction_to_json(p) << '\n';
}

}  // namespace cubepose
