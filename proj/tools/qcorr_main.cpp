/**
 * Copyright 2026 The qcorr Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// qcorr command-line front end.  Talks to the library only through the C API.

#include <cstdio>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qcorr/qcorr.h"

namespace {

enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 2,
  kRuntimeError = 3,
  kCheckFailed = 4,
};

/// Config and usage problems exit 2; everything else is a runtime error.
int report(qcorr_status status) {
  std::fprintf(stderr, "qcorr: %s: %s\n", qcorr_status_string(status),
               qcorr_last_error());
  bool config = status == QCORR_ERR_CONFIG ||
                status == QCORR_ERR_INVALID_ARGUMENT;
  return config ? kConfigError : kRuntimeError;
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ConfigPtr = std::unique_ptr<qcorr_config, Deleter<qcorr_config, qcorr_config_free>>;
using ReportPtr = std::unique_ptr<qcorr_report, Deleter<qcorr_report, qcorr_report_free>>;
using ShotsPtr = std::unique_ptr<qcorr_shots, Deleter<qcorr_shots, qcorr_shots_free>>;
using CurvePtr = std::unique_ptr<qcorr_curve, Deleter<qcorr_curve, qcorr_curve_free>>;

struct RunArgs {
  std::string config;
  bool check = false;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
};

int cmd_run(const RunArgs& a) {
  qcorr_config* raw = nullptr;
  if (auto s = qcorr_config_load(a.config.c_str(), &raw); s != QCORR_OK) {
    return report(s);
  }
  ConfigPtr config(raw);
  if (a.seed) qcorr_config_set_seed(config.get(), *a.seed);
  if (a.out) {
    if (auto s = qcorr_config_set_output_dir(config.get(), a.out->c_str());
        s != QCORR_OK) {
      return report(s);
    }
  }
  const char* name = nullptr;
  qcorr_config_scenario(config.get(), &name);

  qcorr_report* rep = nullptr;
  if (auto s = qcorr_run(config.get(), &rep); s != QCORR_OK) return report(s);
  ReportPtr result(rep);

  for (std::size_t i = 0; i < qcorr_report_check_count(result.get()); ++i) {
    const char* check = nullptr;
    const char* detail = nullptr;
    int pass = 0;
    qcorr_report_check(result.get(), i, &check, &pass, &detail);
    std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", check, detail);
  }
  std::size_t n = qcorr_report_file_count(result.get());
  std::printf("%s: wrote %zu files\n", name, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::printf("  %s\n", qcorr_report_file(result.get(), i));
  }
  if (a.check && !qcorr_report_all_pass(result.get())) return kCheckFailed;
  return kSuccess;
}

struct AnalyzeArgs {
  std::string events;
  std::string axis = "r";
  std::string bins;
  std::string norm = "mixed";
  double gate_x = 0.0, gate_y = 0.0, gate_t = 0.0;
  std::size_t mix_depth = 0;
  unsigned threads = 0;
  std::string out = ".";
};

int cmd_analyze(const AnalyzeArgs& a) {
  qcorr_g2_options opt;
  qcorr_g2_options_init(&opt);
  if (a.axis == "dx") opt.axis = QCORR_AXIS_DX;
  else if (a.axis == "dy") opt.axis = QCORR_AXIS_DY;
  else if (a.axis == "dt") opt.axis = QCORR_AXIS_DT;
  else opt.axis = QCORR_AXIS_RADIAL;
  opt.normalization = a.norm == "singles" ? QCORR_NORM_SINGLES : QCORR_NORM_MIXED;
  opt.bins = a.bins.c_str();
  opt.gate_x_mm = a.gate_x;
  opt.gate_y_mm = a.gate_y;
  opt.gate_t_ns = a.gate_t;
  if (a.mix_depth > 0) opt.mix_depth = a.mix_depth;
  opt.threads = a.threads;

  qcorr_curve* raw = nullptr;
  qcorr_status s = qcorr_analyze_file(a.events.c_str(), &opt, a.out.c_str(), &raw);
  if (s == QCORR_ERR_PARSE || s == QCORR_ERR_IO || s == QCORR_ERR_VALIDATION) {
    std::fprintf(stderr, "qcorr: %s: %s\n", qcorr_status_string(s),
                 qcorr_last_error());
    return kRuntimeError;
  }
  if (s != QCORR_OK) return report(s);
  CurvePtr curve(raw);
  std::printf("bin_lo,bin_hi,g2,stderr,pair_count\n");
  for (std::size_t i = 0; i < qcorr_curve_bin_count(curve.get()); ++i) {
    double lo, hi, g2, se;
    std::uint64_t pairs;
    qcorr_curve_bin(curve.get(), i, &lo, &hi, &g2, &se, &pairs, nullptr);
    std::printf("%.9g,%.9g,%.9g,%.9g,%llu\n", lo, hi, g2, se,
                static_cast<unsigned long long>(pairs));
  }
  int nonclassical = 0;
  double g0 = 0.0, se0 = 0.0;
  if (qcorr_curve_classicality(curve.get(), &nonclassical, &g0, &se0) == QCORR_OK) {
    std::printf("verdict: %s (g2(0) = %.4f +- %.4f)\n",
                nonclassical ? "NONCLASSICAL" : "CLASSICAL-COMPATIBLE", g0, se0);
  }
  return kSuccess;
}

int cmd_shuffle(const std::string& in, const std::string& out,
                std::uint64_t seed, std::uint64_t stream) {
  qcorr_shots* raw = nullptr;
  if (auto s = qcorr_shots_read_csv(in.c_str(), &raw); s != QCORR_OK) {
    std::fprintf(stderr, "qcorr: %s: %s\n", qcorr_status_string(s),
                 qcorr_last_error());
    return kRuntimeError;
  }
  ShotsPtr shots(raw);
  qcorr_shots* mixed = nullptr;
  if (auto s = qcorr_shots_shuffle(shots.get(), seed, stream, &mixed);
      s != QCORR_OK) {
    return report(s);
  }
  ShotsPtr shuffled(mixed);
  if (auto s = qcorr_shots_write_csv(shuffled.get(), out.c_str()); s != QCORR_OK) {
    return report(s);
  }
  std::printf("shuffled %zu events across %zu shots into %s\n",
              qcorr_shots_event_count(shuffled.get()),
              qcorr_shots_count(shuffled.get()), out.c_str());
  return kSuccess;
}

int cmd_verify(const std::string& dir) {
  int ok = 0;
  std::size_t checked = 0, bad = 0;
  if (auto s = qcorr_verify_manifest(dir.c_str(), &ok, &checked, &bad);
      s != QCORR_OK) {
    std::fprintf(stderr, "qcorr: %s: %s\n", qcorr_status_string(s),
                 qcorr_last_error());
    return kRuntimeError;
  }
  if (!ok) {
    std::fprintf(stderr, "qcorr: %zu of %zu files fail verification: %s\n", bad,
                 checked, qcorr_last_error());
    return kRuntimeError;
  }
  std::printf("%zu files verified\n", checked);
  return kSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcorr: quantum correlation simulator and analyzer"};
  app.set_version_flag("--version", std::string(qcorr_version()));
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a configured scenario");
  run_cmd->add_option("config", run.config, "Scenario JSON file")->required();
  run_cmd->add_flag("--check", run.check,
                    "Exit 4 unless every acceptance check passes");
  run_cmd->add_option("--out", run.out, "Output directory (overrides config)");
  run_cmd->add_option("--seed", run.seed, "Seed (overrides config)");

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "Correlate an event CSV");
  an_cmd->add_option("events", an.events, "Event CSV file")->required();
  an_cmd->add_option("--axis", an.axis, "Binned separation")
      ->check(CLI::IsMember({"dx", "dy", "dt", "r", "radial"}))
      ->capture_default_str();
  an_cmd->add_option("--bins", an.bins, "lo:hi:n or comma-separated edges")
      ->required();
  an_cmd->add_option("--norm", an.norm, "Normalization")
      ->check(CLI::IsMember({"mixed", "singles"}))
      ->capture_default_str();
  an_cmd->add_option("--gate-x", an.gate_x, "Gate |dx| < value (mm)");
  an_cmd->add_option("--gate-y", an.gate_y, "Gate |dy| < value (mm)");
  an_cmd->add_option("--gate-t", an.gate_t, "Gate |dt| < value (ns)");
  an_cmd->add_option("--mix-depth", an.mix_depth, "Partner shots per shot");
  an_cmd->add_option("--threads", an.threads, "Worker threads (0 = auto)");
  an_cmd->add_option("--out", an.out, "Output directory")->capture_default_str();

  std::string sh_in, sh_out;
  std::uint64_t sh_seed = 1, sh_stream = 0;
  auto* sh_cmd = app.add_subcommand("shuffle", "Shuffle events across shots");
  sh_cmd->add_option("events", sh_in, "Event CSV file")->required();
  sh_cmd->add_option("--out", sh_out, "Output CSV")->required();
  sh_cmd->add_option("--seed", sh_seed, "Seed")->capture_default_str();
  sh_cmd->add_option("--stream", sh_stream, "Stream id")->capture_default_str();

  std::string verify_dir;
  auto* ver_cmd = app.add_subcommand("verify", "Check a run's manifest digests");
  ver_cmd->add_option("dir", verify_dir, "Run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  if (run_cmd->parsed()) return cmd_run(run);
  if (an_cmd->parsed()) return cmd_analyze(an);
  if (sh_cmd->parsed()) return cmd_shuffle(sh_in, sh_out, sh_seed, sh_stream);
  if (ver_cmd->parsed()) return cmd_verify(verify_dir);
  return kConfigError;
}
