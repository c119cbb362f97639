#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cubepose/cube_fit.hpp"
#include "cubepose/tensor.hpp"

namespace cubepose {

struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  Vec2 center() const { return {x + 0.5 * w, y + 0.5 * h}; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Ground-truth head: box, pose, optional nose landmark and head size.
struct HeadLabel {
  std::string image_id;
  BBox bbox;
  EulerPose pose;
  std::optional<Vec2> nose;
  std::optional<double> l;
};

struct CubeLabel {
  std::string image_id;
  Cube2D cube;
  BBox bbox;
  RelDims dims;
  std::optional<EulerPose> pose;  // carried over from the HeadLabel when known
};

struct PosePrediction {
  std::string image_id;
  EulerPose pose;
};

/// Builds the cube label: edge length l (default min(w, h)) centered on the
/// box, then translated so the front-face center (center + w/2) lands on the
/// nose when one is given. Translation never changes the pose.
/// Throws kInvalidArgument for a degenerate box.
CubeLabel label_to_cube(const HeadLabel& label);

/// CenterNet Gaussian radius (map units) for a box of the given size, the
/// minimum of the three overlap cases at `min_overlap`.
double gaussian_radius(double height, double width, double min_overlap = 0.7);

struct SigmaPolicy {
  enum class Kind { kBoxRadius, kFixed };
  Kind kind = Kind::kBoxRadius;
  double min_overlap = 0.7;  // kBoxRadius
  int fixed_radius = 2;      // kFixed
  int min_radius = 1;

  /// Splat radius in cells; sigma = (2 * radius + 1) / 6.
  int radius(double box_w_cells, double box_h_cells) const;
};

/// Ground-truth maps for an image of the given size at stride s. Peaks are
/// combined by element-wise max; targets outside the map are clamped to the
/// border cell with the exact offset written there. Keypoint offsets use one
/// channel pair per keypoint.
TensorMaps render_targets(const std::vector<CubeLabel>& labels, int image_w, int image_h, int stride,
                          const SigmaPolicy& policy = {});

enum class Subset { kAll, kFrontal };

const char* to_string(Subset s);
Subset subset_from_string(const std::string& name);

struct EvalReport {
  double yaw_mae = 0.0;
  double pitch_mae = 0.0;
  double roll_mae = 0.0;
  double mean_mae = 0.0;
  std::size_t count = 0;
  Subset subset = Subset::kAll;
};

/// Wrap-aware per-angle MAE over pairs matched by image_id. The frontal subset
/// keeps ground truths with |yaw| < 90. Throws kUnmatched listing prediction
/// ids without a ground truth, or when nothing is left to score.
EvalReport evaluate(const std::vector<PosePrediction>& preds, const std::vector<PosePrediction>& gts,
                    Subset subset = Subset::kAll);

std::string eval_report_json(const EvalReport& r);
std::string eval_report_table(const EvalReport& r);

// JSONL records. Each reader returns (line number, record) pairs and collects
// per-line errors instead of stopping; `strict` turns the first error into a
// thrown kParse naming the line.
struct LineError {
  std::size_t line = 0;
  std::string message;
};

template <typename T>
struct JsonlRead {
  std::vector<std::pair<std::size_t, T>> records;
  std::vector<LineError> errors;

  std::vector<T> values() const {
    std::vector<T> out;
    for (const auto& r : records) out.push_back(r.second);
    return out;
  }
};

std::string head_label_to_json(const HeadLabel& l);
std::string cube_label_to_json(const CubeLabel& l);
std::string prediction_to_json(const PosePrediction& p);
/// A per-line failure record in a predictions file.
std::string prediction_error_to_json(const std::string& image_id, const std::string& message);

HeadLabel head_label_from_json(const std::string& line);
CubeLabel cube_label_from_json(const std::string& line);
/// Returns nullopt for an error record.
std::optional<PosePrediction> prediction_from_json(const std::string& line);

JsonlRead<HeadLabel> read_head_labels(std::istream& in, bool strict = false);
JsonlRead<CubeLabel> read_cube_labels(std::istream& in, bool strict = false);
/// Error records are skipped and not reported as errors.
JsonlRead<PosePrediction> read_predictions(std::istream& in, bool strict = false);

/// Predictions from either a predictions file or a label file (labels carry a pose).
std::vector<PosePrediction> read_poses_file(const std::string& path);

void write_head_labels(std::ostream& out, const std::vector<HeadLabel>& labels);
void write_cube_labels(std::ostream& out, const std::vector<CubeLabel>& labels);
void write_predictions(std::ostream& out, const std::vector<PosePrediction>& preds);

}  // namespace cubepose
