/* C interface to libcubepose. All functions are safe to call from multiple
 * threads on distinct handles. On failure a function returns a non-zero
 * cp_status and cp_last_error() describes it (per thread). */
#ifndef CUBEPOSE_H
#define CUBEPOSE_H

#include <stddef.h>

#if defined(_WIN32)
#define CP_API __declspec(dllexport)
#else
#define CP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cp_status {
  CP_OK = 0,
  CP_INVALID_ARGUMENT = 1,
  CP_DEGENERATE = 2,
  CP_SINGULAR = 3,
  CP_CONSTRAINT_VIOLATION = 4,
  CP_PARSE = 5,
  CP_IO = 6,
  CP_UNMATCHED = 7,
  CP_PARTIAL = 8, /* some records failed; see cp_run_stats */
  CP_INTERNAL = 9
} cp_status;

CP_API const char* cp_last_error(void);
CP_API const char* cp_version(void);
CP_API const char* cp_status_name(cp_status status);

/* degrees */
typedef struct cp_pose {
  double yaw;
  double pitch;
  double roll;
} cp_pose;

/* vertex b sits at center + sum_i s_i(b) * axis_i / 2, s_i = +1 iff bit i of b */
typedef struct cp_cube {
  double center[2];
  double vertices[8][2];
} cp_cube;

typedef enum cp_method { CP_METHOD_MATRIX = 0, CP_METHOD_RATIOS = 1 } cp_method;

CP_API cp_status cp_canonicalize(cp_pose pose, cp_pose* out);
CP_API cp_status cp_euler2cube(cp_pose pose, double cx, double cy, double l, cp_cube* out);
CP_API cp_status cp_cube2euler(const cp_cube* cube, cp_method method, cp_pose* out);
CP_API cp_status cp_cube_delta(const cp_cube* cube, double* out);
/* dims may be NULL for a cube (1, 1, 1) */
CP_API cp_status cp_edge_adjust(const cp_cube* cube, const double* dims, cp_cube* out);
CP_API cp_status cp_rectify(const cp_cube* cube, cp_cube* out, double* l);
CP_API cp_status cp_parallelism_residual(const cp_cube* cube, double* out);

/* Diagnostics from the file operations (one message per call). Process-wide;
 * NULL restores the default (silent). */
typedef void (*cp_diag_fn)(const char* message, void* user);
CP_API void cp_set_diagnostic_callback(cp_diag_fn fn, void* user);

typedef struct cp_run_stats {
  size_t records;
  size_t ok;
  size_t failed;
} cp_run_stats;

/* Paths may be "-" for stdin/stdout. Return CP_PARTIAL when some records
 * failed and the rest were written. */
CP_API cp_status cp_convert_file(const char* in, const char* out, cp_run_stats* stats);
/* method: "matrix" | "ratios"; adjust: "none" | "edge" | "rectify";
 * dump_cubes may be NULL */
CP_API cp_status cp_invert_file(const char* in, const char* out, const char* method, const char* adjust,
                                const char* dump_cubes, cp_run_stats* stats);
/* mode: "edge" | "rectify"; cube labels in, adjusted cube labels out */
CP_API cp_status cp_adjust_file(const char* in, const char* out, const char* mode, cp_run_stats* stats);
CP_API cp_status cp_render_file(const char* cubes, const char* out, int image_w, int image_h, int stride);

/* key=value configuration handles */
typedef struct cp_decode_config cp_decode_config;
CP_API cp_status cp_decode_config_new(cp_decode_config** out);
CP_API cp_status cp_decode_config_load(const char* path, cp_decode_config** out);
CP_API cp_status cp_decode_config_set(cp_decode_config* cfg, const char* key, const char* value);
CP_API void cp_decode_config_free(cp_decode_config* cfg);

typedef struct cp_maps cp_maps;
CP_API cp_status cp_maps_read(const char* path, cp_maps** out);
CP_API cp_status cp_maps_write(const cp_maps* maps, const char* path);
CP_API cp_status cp_maps_shape(const cp_maps* maps, int* height, int* width, int* stride);
CP_API void cp_maps_free(cp_maps* maps);

typedef struct cp_detection {
  double center[2];
  double box[2];
  double score;
  double keypoints[8][2];
  cp_pose pose;
  const char* error; /* NULL on success; owned by the detections handle */
} cp_detection;

typedef struct cp_detections cp_detections;
CP_API cp_status cp_decode(const cp_maps* maps, const cp_decode_config* cfg, int workers, cp_detections** out);
CP_API size_t cp_detections_count(const cp_detections* dets);
CP_API cp_status cp_detections_get(const cp_detections* dets, size_t index, cp_detection* out);
CP_API void cp_detections_free(cp_detections* dets);
/* image_id may be NULL (file stem) */
CP_API cp_status cp_decode_file(const char* maps, const char* out, const cp_decode_config* cfg, int workers,
                                const char* image_id, cp_run_stats* stats);

/* Evaluation, benchmark and selftest results. */
typedef struct cp_report cp_report;
/* subset: "all" | "frontal" */
CP_API cp_status cp_evaluate_files(const char* preds, const char* gts, const char* subset, cp_report** out);
/* mae = {yaw, pitch, roll, mean}; evaluation reports only */
CP_API cp_status cp_report_mae(const cp_report* report, double mae[4], size_t* count);
/* format: "json" | "table" | "csv"; the string is owned by the report */
CP_API cp_status cp_report_render(cp_report* report, const char* format, const char** text);
/* 1 when every check of a selftest report passed */
CP_API int cp_report_passed(const cp_report* report);
CP_API void cp_report_free(cp_report* report);

typedef struct cp_bench_config cp_bench_config;
CP_API cp_status cp_bench_config_new(cp_bench_config** out);
CP_API cp_status cp_bench_config_load(const char* path, cp_bench_config** out);
CP_API cp_status cp_bench_config_set(cp_bench_config* cfg, const char* key, const char* value);
CP_API void cp_bench_config_free(cp_bench_config* cfg);
CP_API cp_status cp_bench_run(const cp_bench_config* cfg, cp_report** out);

CP_API cp_status cp_selftest(cp_report** out);

#ifdef __cplusplus
}
#endif

#endif /* CUBEPOSE_H */
