// cubepose command-line tool. Links only the C interface.
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cubepose/cubepose.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

void print_diag(const char* message, void*) { std::fprintf(stderr, "cubepose: warning: %s\n", message); }

int report_failure(cp_status s) {
  std::fprintf(stderr, "cubepose: error: %s\n", cp_last_error());
  return s == CP_INVALID_ARGUMENT ? kExitUsage : kExitIo;
}

int exit_for(cp_status s, bool strict) {
  if (s == CP_OK) return kExitOk;
  if (s == CP_PARTIAL) {
    std::fprintf(stderr, "cubepose: %s\n", cp_last_error());
    return strict ? kExitPartial : kExitOk;
  }
  return report_failure(s);
}

int write_text(const std::string& path, const char* text) {
  if (path == "-") {
    std::fputs(text, stdout);
    return std::fflush(stdout) == 0 ? kExitOk : kExitIo;
  }
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) {
    std::fprintf(stderr, "cubepose: error: cannot open '%s' for writing\n", path.c_str());
    return kExitIo;
  }
  const bool ok = std::fputs(text, f) >= 0;
  return std::fclose(f) == 0 && ok ? kExitOk : kExitIo;
}

int emit_report(cp_report* report, const std::string& format, const std::string& out) {
  const char* text = nullptr;
  const cp_status s = cp_report_render(report, format.c_str(), &text);
  if (s != CP_OK) return report_failure(s);
  return write_text(out, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D head-cube pose conversions, decoding, evaluation and benchmark"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cp_version());

  bool strict = false;
  std::string in, out, method = "matrix", adjust = "none", dump_cubes, mode = "edge";
  std::string config, image_id, subset = "all", format, preds, gts;
  int workers = 1, width = 320, height = 320, stride = 4;
  long long seed = -1, n_samples = -1;

  auto* convert = app.add_subcommand("convert", "head labels -> cube labels");
  convert->add_option("input", in, "labels.jsonl or -")->required();
  convert->add_option("output", out, "cubes.jsonl or -")->required();
  convert->add_flag("--strict", strict, "exit 1 if any line fails");

  auto* invert = app.add_subcommand("invert", "cube labels -> poses");
  invert->add_option("input", in, "cubes.jsonl or -")->required();
  invert->add_option("output", out, "preds.jsonl or -")->required();
  invert->add_option("--method", method, "matrix|ratios")->check(CLI::IsMember({"matrix", "ratios"}));
  invert->add_option("--adjust", adjust, "none|edge|rectify")->check(CLI::IsMember({"none", "edge", "rectify"}));
  invert->add_option("--dump-cubes", dump_cubes, "write the cubes actually inverted");
  invert->add_flag("--strict", strict, "exit 1 if any line fails");

  auto* adj = app.add_subcommand("adjust", "cube labels -> adjusted cube labels");
  adj->add_option("input", in, "cubes.jsonl or -")->required();
  adj->add_option("output", out, "cubes.jsonl or -")->required();
  adj->add_option("--mode", mode, "edge|rectify")->check(CLI::IsMember({"edge", "rectify"}));
  adj->add_flag("--strict", strict, "exit 1 if any line fails");

  auto* render = app.add_subcommand("render", "cube labels -> ground-truth maps (.tmap)");
  render->add_option("input", in, "cubes.jsonl or -")->required();
  render->add_option("output", out, "maps.tmap or -")->required();
  render->add_option("--width", width, "image width (px)")->check(CLI::PositiveNumber);
  render->add_option("--height", height, "image height (px)")->check(CLI::PositiveNumber);
  render->add_option("--stride", stride, "output stride")->check(CLI::PositiveNumber);

  auto* decode = app.add_subcommand("decode", "maps -> poses");
  decode->add_option("input", in, "maps.tmap or -")->required();
  decode->add_option("output", out, "preds.jsonl or -")->required();
  decode->add_option("--config", config, "key=value decode config");
  decode->add_option("--workers", workers, "decode threads")->check(CLI::PositiveNumber);
  decode->add_option("--image-id", image_id, "image_id for the output (default: file stem)");
  decode->add_flag("--strict", strict, "exit 1 if any detection fails");

  auto* eval = app.add_subcommand("eval", "per-angle MAE of predictions against ground truth");
  eval->add_option("preds", preds, "predictions (.jsonl)")->required();
  eval->add_option("gts", gts, "ground truth (.jsonl; head labels or poses)")->required();
  eval->add_option("--subset", subset, "all|frontal")->check(CLI::IsMember({"all", "frontal"}));
  eval->add_option("--format", format, "json|table")->check(CLI::IsMember({"json", "table"}));
  eval->add_option("-o,--output", out, "report path or -");

  auto* bench = app.add_subcommand("bench", "synthetic decoder benchmark");
  bench->add_option("--config", config, "key=value bench config");
  bench->add_option("--seed", seed, "overrides the config seed")->check(CLI::NonNegativeNumber);
  bench->add_option("--n", n_samples, "overrides n_samples")->check(CLI::PositiveNumber);
  bench->add_option("--workers", workers, "threads")->check(CLI::PositiveNumber);
  bench->add_option("--format", format, "csv|json|table")->check(CLI::IsMember({"csv", "json", "table"}));
  bench->add_option("-o,--output", out, "report path or -");

  auto* selftest = app.add_subcommand("selftest", "noise-free invariant suite");
  selftest->add_option("--format", format, "table|json")->check(CLI::IsMember({"table", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  cp_set_diagnostic_callback(print_diag, nullptr);
  cp_run_stats stats{};

  if (*convert) return exit_for(cp_convert_file(in.c_str(), out.c_str(), &stats), strict);
  if (*invert) {
    const cp_status s = cp_invert_file(in.c_str(), out.c_str(), method.c_str(), adjust.c_str(),
                                       dump_cubes.empty() ? nullptr : dump_cubes.c_str(), &stats);
    return exit_for(s, strict);
  }
  if (*adj) return exit_for(cp_adjust_file(in.c_str(), out.c_str(), mode.c_str(), &stats), strict);
  if (*render) return exit_for(cp_render_file(in.c_str(), out.c_str(), width, height, stride), false);

  if (*decode) {
    cp_decode_config* cfg = nullptr;
    cp_status s = config.empty() ? cp_decode_config_new(&cfg) : cp_decode_config_load(config.c_str(), &cfg);
    if (s != CP_OK) return report_failure(s);
    s = cp_decode_file(in.c_str(), out.c_str(), cfg, workers, image_id.empty() ? nullptr : image_id.c_str(), &stats);
    cp_decode_config_free(cfg);
    return exit_for(s, strict);
  }

  if (*eval) {
    cp_report* report = nullptr;
    const cp_status s = cp_evaluate_files(preds.c_str(), gts.c_str(), subset.c_str(), &report);
    if (s != CP_OK) return report_failure(s);
    const int rc = emit_report(report, format.empty() ? "table" : format, out.empty() ? "-" : out);
    cp_report_free(report);
    return rc;
  }

  if (*bench) {
    cp_bench_config* cfg = nullptr;
    cp_status s = config.empty() ? cp_bench_config_new(&cfg) : cp_bench_config_load(config.c_str(), &cfg);
    if (s != CP_OK) return report_failure(s);
    if (seed >= 0) s = cp_bench_config_set(cfg, "seed", std::to_string(seed).c_str());
    if (s == CP_OK && n_samples > 0) s = cp_bench_config_set(cfg, "n_samples", std::to_string(n_samples).c_str());
    if (s == CP_OK && bench->count("--workers")) {
      s = cp_bench_config_set(cfg, "workers", std::to_string(workers).c_str());
    }
    cp_report* report = nullptr;
    if (s == CP_OK) s = cp_bench_run(cfg, &report);
    cp_bench_config_free(cfg);
    if (s != CP_OK) return report_failure(s);
    const int rc = emit_report(report, format.empty() ? "csv" : format, out.empty() ? "-" : out);
    cp_report_free(report);
    return rc;
  }

  cp_report* report = nullptr;
  const cp_status s = cp_selftest(&report);
  if (s != CP_OK) return report_failure(s);
  int rc = emit_report(report, format.empty() ? "table" : format, "-");
  if (rc == kExitOk && !cp_report_passed(report)) rc = kExitPartial;
  cp_report_free(report);
  return rc;
}
