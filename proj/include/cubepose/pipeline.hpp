#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>

#include "cubepose/keypoint_decode.hpp"

namespace cubepose {

// File-to-file operations behind the CLI subcommands. Malformed or failing
// records are reported through `diag` with their line number and counted in
// RunStats; I/O problems throw kIo.

struct RunStats {
  std::size_t records = 0;
  std::size_t ok = 0;
  std::size_t failed = 0;
};

using DiagFn = std::function<void(const std::string&)>;

enum class InvertMethod { kMatrix, kRatios };
enum class InvertAdjust { kNone, kEdge, kRectify };

InvertMethod invert_method_from_string(const std::string& s);
InvertAdjust invert_adjust_from_string(const std::string& s);

/// labels.jsonl -> cubes.jsonl via label_to_cube.
RunStats convert_file(const std::string& in, const std::string& out, const DiagFn& diag);

/// cubes.jsonl -> preds.jsonl. Failing lines become {"image_id", "error"}
/// records. When `dump_cubes` is non-empty the cubes actually inverted are
/// written there as cube labels.
RunStats invert_file(const std::string& in, const std::string& out, InvertMethod method, InvertAdjust adjust,
                     const std::string& dump_cubes, const DiagFn& diag);

/// Cube labels -> adjusted cube labels (kEdge uses each label's dims).
RunStats adjust_file(const std::string& in, const std::string& out, InvertAdjust mode, const DiagFn& diag);

/// maps.tmap -> preds.jsonl, one line per detection. `image_id` defaults to
/// the file stem of the maps path.
RunStats decode_file(const std::string& maps_path, const std::string& out, const DecodeConfig& cfg, int workers,
                     const std::string& image_id, const DiagFn& diag);

/// Renders cube labels into a .tmap (ground-truth maps).
void render_file(const std::string& cubes_path, const std::string& out, int image_w, int image_h, int stride);

/// Noise-free invariant suite; one line per check on `log`.
bool run_selftest(std::ostream& log);

}  // namespace cubepose
