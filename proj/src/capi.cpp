#include "cubepose/cubepose.h"

#include <mutex>
#include <new>
#include <sstream>
#include <string>
#include <variant>

#include "cubepose/bench.hpp"
#include "cubepose/dataset.hpp"
#include "cubepose/error.hpp"
#include "cubepose/pipeline.hpp"
#include "json.hpp"

using namespace cubepose;

struct cp_decode_config {
  KeyValues kv;
  DecodeConfig cfg;
};

struct cp_bench_config {
  KeyValues kv;
  BenchConfig cfg;
};

struct cp_maps {
  TensorMaps maps;
};

struct cp_detections {
  std::vector<Detection> dets;
};

struct SelftestResult {
  bool passed = false;
  std::string log;
};

struct cp_report {
  std::variant<EvalReport, BenchReport, SelftestResult> value;
  std::string rendered;
};

namespace {

thread_local std::string g_last_error;

std::mutex g_diag_mutex;
cp_diag_fn g_diag_fn = nullptr;
void* g_diag_user = nullptr;

cp_status fail(cp_status s, const std::string& message) {
  g_last_error = message;
  return s;
}

template <class F>
cp_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const Error& e) {
    return fail(static_cast<cp_status>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(CP_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CP_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CP_INTERNAL, e.what());
  } catch (...) {
    return fail(CP_INTERNAL, "unknown exception");
  }
}

#define CP_REQUIRE(ptr)                                                 \
  do {                                                                  \
    if ((ptr) == nullptr) return fail(CP_INVALID_ARGUMENT, #ptr " is NULL"); \
  } while (0)

Cube2D to_cube(const cp_cube& c) {
  Cube2D out;
  out.center = Vec2(c.center[0], c.center[1]);
  for (int b = 0; b < 8; ++b) out.vertices[b] = Vec2(c.vertices[b][0], c.vertices[b][1]);
  return out;
}

cp_cube from_cube(const Cube2D& c) {
  cp_cube out{};
  out.center[0] = c.center.x();
  out.center[1] = c.center.y();
  for (int b = 0; b < 8; ++b) {
    out.vertices[b][0] = c.vertices[b].x();
    out.vertices[b][1] = c.vertices[b].y();
  }
  return out;
}

cp_pose from_pose(const EulerPose& p) { return {p.yaw, p.pitch, p.roll}; }

DiagFn diag() {
  return [](const std::string& msg) {
    std::lock_guard lock(g_diag_mutex);
    if (g_diag_fn) g_diag_fn(msg.c_str(), g_diag_user);
  };
}

cp_status finish(const RunStats& s, cp_run_stats* stats) {
  if (stats) *stats = {s.records, s.ok, s.failed};
  if (s.failed > 0) {
    return fail(CP_PARTIAL, std::to_string(s.failed) + " of " + std::to_string(s.records) + " records failed");
  }
  return CP_OK;
}

}  // namespace

extern "C" {

const char* cp_last_error(void) { return g_last_error.c_str(); }

const char* cp_version(void) { return "0.1.0"; }

const char* cp_status_name(cp_status status) {
  switch (status) {
    case CP_OK: return "ok";
    case CP_INVALID_ARGUMENT: return "invalid argument";
    case CP_DEGENERATE: return "degenerate";
    case CP_SINGULAR: return "singular";
    case CP_CONSTRAINT_VIOLATION: return "constraint violation";
    case CP_PARSE: return "parse error";
    case CP_IO: return "i/o error";
    case CP_UNMATCHED: return "unmatched";
    case CP_PARTIAL: return "partial";
    case CP_INTERNAL: return "internal error";
  }
  return "unknown";
}

cp_status cp_canonicalize(cp_pose pose, cp_pose* out) {
  CP_REQUIRE(out);
  return guarded([&] {
    *out = from_pose(canonicalize({pose.yaw, pose.pitch, pose.roll}));
    return CP_OK;
  });
}

cp_status cp_euler2cube(cp_pose pose, double cx, double cy, double l, cp_cube* out) {
  CP_REQUIRE(out);
  return guarded([&] {
    *out = from_cube(euler2cube({pose.yaw, pose.pitch, pose.roll}, Vec2(cx, cy), l));
    return CP_OK;
  });
}

cp_status cp_cube2euler(const cp_cube* cube, cp_method method, cp_pose* out) {
  CP_REQUIRE(cube);
  CP_REQUIRE(out);
  return guarded([&] {
    const Cube2D c = to_cube(*cube);
    switch (method) {
      case CP_METHOD_MATRIX: *out = from_pose(cube2euler_matrix(c)); return CP_OK;
      case CP_METHOD_RATIOS: *out = from_pose(cube2euler_ratios(c)); return CP_OK;
    }
    return fail(CP_INVALID_ARGUMENT, "unknown method");
  });
}

cp_status cp_cube_delta(const cp_cube* cube, double* out) {
  CP_REQUIRE(cube);
  CP_REQUIRE(out);
  return guarded([&] {
    *out = delta_of_cube(to_cube(*cube));
    return CP_OK;
  });
}

cp_status cp_edge_adjust(const cp_cube* cube, const double* dims, cp_cube* out) {
  CP_REQUIRE(cube);
  CP_REQUIRE(out);
  return guarded([&] {
    const RelDims d = dims ? RelDims(dims[0], dims[1], dims[2]) : RelDims();
    *out = from_cube(edge_adjust(to_cube(*cube), d));
    return CP_OK;
  });
}

cp_status cp_rectify(const cp_cube* cube, cp_cube* out, double* l) {
  CP_REQUIRE(cube);
  CP_REQUIRE(out);
  return guarded([&] {
    const RectifiedCube r = rectify_orthoscale(to_cube(*cube));
    *out = from_cube(r.cube);
    if (l) *l = r.l;
    return CP_OK;
  });
}

cp_status cp_parallelism_residual(const cp_cube* cube, double* out) {
  CP_REQUIRE(cube);
  CP_REQUIRE(out);
  return guarded([&] {
    *out = parallelism_residual(to_cube(*cube));
    return CP_OK;
  });
}

void cp_set_diagnostic_callback(cp_diag_fn fn, void* user) {
  std::lock_guard lock(g_diag_mutex);
  g_diag_fn = fn;
  g_diag_user = user;
}

cp_status cp_convert_file(const char* in, const char* out, cp_run_stats* stats) {
  CP_REQUIRE(in);
  CP_REQUIRE(out);
  return guarded([&] { return finish(convert_file(in, out, diag()), stats); });
}

cp_status cp_invert_file(const char* in, const char* out, const char* method, const char* adjust,
                         const char* dump_cubes, cp_run_stats* stats) {
  CP_REQUIRE(in);
  CP_REQUIRE(out);
  return guarded([&] {
    const InvertMethod m = invert_method_from_string(method ? method : "matrix");
    const InvertAdjust a = invert_adjust_from_string(adjust ? adjust : "none");
    return finish(invert_file(in, out, m, a, dump_cubes ? dump_cubes : "", diag()), stats);
  });
}

cp_status cp_adjust_file(const char* in, const char* out, const char* mode, cp_run_stats* stats) {
  CP_REQUIRE(in);
  CP_REQUIRE(out);
  return guarded([&] {
    return finish(adjust_file(in, out, invert_adjust_from_string(mode ? mode : "edge"), diag()), stats);
  });
}

cp_status cp_render_file(const char* cubes, const char* out, int image_w, int image_h, int stride) {
  CP_REQUIRE(cubes);
  CP_REQUIRE(out);
  return guarded([&] {
    render_file(cubes, out, image_w, image_h, stride);
    return CP_OK;
  });
}

cp_status cp_decode_config_new(cp_decode_config** out) {
  CP_REQUIRE(out);
  return guarded([&] {
    *out = new cp_decode_config{};
    return CP_OK;
  });
}

cp_status cp_decode_config_load(const char* path, cp_decode_config** out) {
  CP_REQUIRE(path);
  CP_REQUIRE(out);
  return guarded([&] {
    KeyValues kv = read_key_values(path);
    DecodeConfig cfg = DecodeConfig::from_key_values(kv);
    *out = new cp_decode_config{std::move(kv), cfg};
    return CP_OK;
  });
}

cp_status cp_decode_config_set(cp_decode_config* cfg, const char* key, const char* value) {
  CP_REQUIRE(cfg);
  CP_REQUIRE(key);
  CP_REQUIRE(value);
  return guarded([&] {
    KeyValues kv = cfg->kv;
    kv[key] = value;
    cfg->cfg = DecodeConfig::from_key_values(kv);
    cfg->kv = std::move(kv);
    return CP_OK;
  });
}

void cp_decode_config_free(cp_decode_config* cfg) { delete cfg; }

cp_status cp_maps_read(const char* path, cp_maps** out) {
  CP_REQUIRE(path);
  CP_REQUIRE(out);
  return guarded([&] {
    *out = new cp_maps{read_maps(path)};
    return CP_OK;
  });
}

cp_status cp_maps_write(const cp_maps* maps, const char* path) {
  CP_REQUIRE(maps);
  CP_REQUIRE(path);
  return guarded([&] {
    write_maps(path, maps->maps);
    return CP_OK;
  });
}

cp_status cp_maps_shape(const cp_maps* maps, int* height, int* width, int* stride) {
  CP_REQUIRE(maps);
  if (height) *height = maps->maps.center_heat.height;
  if (width) *width = maps->maps.center_heat.width;
  if (stride) *stride = maps->maps.stride;
  return CP_OK;
}

void cp_maps_free(cp_maps* maps) { delete maps; }

cp_status cp_decode(const cp_maps* maps, const cp_decode_config* cfg, int workers, cp_detections** out) {
  CP_REQUIRE(maps);
  CP_REQUIRE(out);
  return guarded([&] {
    const DecodeConfig c = cfg ? cfg->cfg : DecodeConfig{};
    *out = new cp_detections{decode_pose(maps->maps, c, workers)};
    return CP_OK;
  });
}

size_t cp_detections_count(const cp_detections* dets) { return dets ? dets->dets.size() : 0; }

cp_status cp_detections_get(const cp_detections* dets, size_t index, cp_detection* out) {
  CP_REQUIRE(dets);
  CP_REQUIRE(out);
  if (index >= dets->dets.size()) return fail(CP_INVALID_ARGUMENT, "detection index out of range");
  const Detection& d = dets->dets[index];
  *out = cp_detection{};
  out->center[0] = d.center.x();
  out->center[1] = d.center.y();
  out->box[0] = d.box.x();
  out->box[1] = d.box.y();
  out->score = d.score;
  for (int k = 0; k < 8; ++k) {
    out->keypoints[k][0] = d.keypoints[k].x();
    out->keypoints[k][1] = d.keypoints[k].y();
  }
  out->pose = from_pose(d.pose);
  out->error = d.error ? d.error->c_str() : nullptr;
  return CP_OK;
}

void cp_detections_free(cp_detections* dets) { delete dets; }

cp_status cp_decode_file(const char* maps, const char* out, const cp_decode_config* cfg, int workers,
                         const char* image_id, cp_run_stats* stats) {
  CP_REQUIRE(maps);
  CP_REQUIRE(out);
  return guarded([&] {
    const DecodeConfig c = cfg ? cfg->cfg : DecodeConfig{};
    return finish(decode_file(maps, out, c, workers, image_id ? image_id : "", diag()), stats);
  });
}

cp_status cp_evaluate_files(const char* preds, const char* gts, const char* subset, cp_report** out) {
  CP_REQUIRE(preds);
  CP_REQUIRE(gts);
  CP_REQUIRE(out);
  return guarded([&] {
    const Subset s = subset_from_string(subset ? subset : "all");
    EvalReport r = evaluate(read_poses_file(preds), read_poses_file(gts), s);
    *out = new cp_report{std::move(r), {}};
    return CP_OK;
  });
}

cp_status cp_report_mae(const cp_report* report, double mae[4], size_t* count) {
  CP_REQUIRE(report);
  const auto* r = std::get_if<EvalReport>(&report->value);
  if (!r) return fail(CP_INVALID_ARGUMENT, "not an evaluation report");
  if (mae) {
    mae[0] = r->yaw_mae;
    mae[1] = r->pitch_mae;
    mae[2] = r->roll_mae;
    mae[3] = r->mean_mae;
  }
  if (count) *count = r->count;
  return CP_OK;
}

cp_status cp_report_render(cp_report* report, const char* format, const char** text) {
  CP_REQUIRE(report);
  CP_REQUIRE(format);
  CP_REQUIRE(text);
  return guarded([&] {
    const std::string f = format;
    if (const auto* e = std::get_if<EvalReport>(&report->value)) {
      if (f == "json") {
        report->rendered = eval_report_json(*e);
      } else if (f == "table") {
        report->rendered = eval_report_table(*e);
      } else {
        return fail(CP_INVALID_ARGUMENT, "evaluation reports render as json or table");
      }
    } else if (const auto* b = std::get_if<BenchReport>(&report->value)) {
      if (f == "json") {
        report->rendered = bench_report_json(*b);
      } else if (f == "csv") {
        report->rendered = bench_report_csv(*b);
      } else if (f == "table") {
        report->rendered = bench_report_table(*b);
      } else {
        return fail(CP_INVALID_ARGUMENT, "unknown format '" + f + "'");
      }
    } else {
      const auto& s = std::get<SelftestResult>(report->value);
      if (f == "json") {
        report->rendered = nlohmann::ordered_json{{"passed", s.passed}, {"log", s.log}}.dump(2) + "\n";
      } else if (f == "table") {
        report->rendered = s.log;
      } else {
        return fail(CP_INVALID_ARGUMENT, "selftest reports render as json or table");
      }
    }
    *text = report->rendered.c_str();
    return CP_OK;
  });
}

int cp_report_passed(const cp_report* report) {
  if (!report) return 0;
  const auto* s = std::get_if<SelftestResult>(&report->value);
  return s && s->passed ? 1 : 0;
}

void cp_report_free(cp_report* report) { delete report; }

cp_status cp_bench_config_new(cp_bench_config** out) {
  CP_REQUIRE(out);
  return guarded([&] {
    *out = new cp_bench_config{};
    return CP_OK;
  });
}

cp_status cp_bench_config_load(const char* path, cp_bench_config** out) {
  CP_REQUIRE(path);
  CP_REQUIRE(out);
  return guarded([&] {
    KeyValues kv = read_key_values(path);
    BenchConfig cfg = BenchConfig::from_key_values(kv);
    *out = new cp_bench_config{std::move(kv), cfg};
    return CP_OK;
  });
}

cp_status cp_bench_config_set(cp_bench_config* cfg, const char* key, const char* value) {
  CP_REQUIRE(cfg);
  CP_REQUIRE(key);
  CP_REQUIRE(value);
  return guarded([&] {
    KeyValues kv = cfg->kv;
    kv[key] = value;
    cfg->cfg = BenchConfig::from_key_values(kv);
    cfg->kv = std::move(kv);
    return CP_OK;
  });
}

void cp_bench_config_free(cp_bench_config* cfg) { delete cfg; }

cp_status cp_bench_run(const cp_bench_config* cfg, cp_report** out) {
  CP_REQUIRE(out);
  return guarded([&] {
    const BenchConfig c = cfg ? cfg->cfg : BenchConfig{};
    *out = new cp_report{run_benchmark(c), {}};
    return CP_OK;
  });
}

cp_status cp_selftest(cp_report** out) {
  CP_REQUIRE(out);
  return guarded([&] {
    std::ostringstream log;
    const bool passed = run_selftest(log);
    *out = new cp_report{SelftestResult{passed, log.str()}, {}};
    return CP_OK;
  });
}

}  // extern "C"
