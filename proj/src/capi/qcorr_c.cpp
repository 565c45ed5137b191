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

#include <algorithm>
#include <cmath>
#include <limits>
#include <new>
#include <string>

#include "qcorr/qcorr.h"
#include "qcorr/scenario.hpp"

using namespace qcorr;

struct qcorr_config {
  scenario::ScenarioConfig config;
  std::string scenario;
  std::string canonical;
};

struct qcorr_report {
  scenario::RunResult result;
};

struct qcorr_shots {
  ShotList shots;
};

struct qcorr_curve {
  correlator::CorrelationCurve curve;
};

namespace {

thread_local std::string g_last_error;

qcorr_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return QCORR_ERR_INVALID_ARGUMENT;
    case ErrorKind::validation: return QCORR_ERR_VALIDATION;
    case ErrorKind::parse: return QCORR_ERR_PARSE;
    case ErrorKind::config: return QCORR_ERR_CONFIG;
    case ErrorKind::internal: return QCORR_ERR_INTERNAL;
    case ErrorKind::io: return QCORR_ERR_IO;
  }
  return QCORR_ERR_INTERNAL;
}

/// Runs fn, translating exceptions into status codes and messages.
template <typename Fn>
qcorr_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return QCORR_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return QCORR_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QCORR_ERR_INTERNAL;
  }
}

qcorr_status null_pointer(const char* what) {
  g_last_error = std::string(what) + " must not be NULL";
  return QCORR_ERR_NULL_POINTER;
}

correlator::Axis to_axis(qcorr_axis a) {
  switch (a) {
    case QCORR_AXIS_DX: return correlator::Axis::dx;
    case QCORR_AXIS_DY: return correlator::Axis::dy;
    case QCORR_AXIS_DT: return correlator::Axis::dt;
    case QCORR_AXIS_RADIAL: return correlator::Axis::radial;
  }
  throw InvalidArgument("unknown axis value");
}

void to_options(const qcorr_g2_options& in, correlator::BinningSpec& binning,
                correlator::G2Options& g2) {
  if (!in.bins) throw InvalidArgument("bins must not be NULL");
  binning.axis = to_axis(in.axis);
  binning.edges = correlator::parse_bin_edges(in.bins);
  const double inf = std::numeric_limits<double>::infinity();
  binning.gate_x_mm = in.gate_x_mm > 0.0 ? in.gate_x_mm : inf;
  binning.gate_y_mm = in.gate_y_mm > 0.0 ? in.gate_y_mm : inf;
  binning.gate_t_ns = in.gate_t_ns > 0.0 ? in.gate_t_ns : inf;
  binning.validate();
  switch (in.normalization) {
    case QCORR_NORM_MIXED: g2.normalization = correlator::Normalization::shot_mixed; break;
    case QCORR_NORM_SINGLES:
      g2.normalization = correlator::Normalization::product_of_singles;
      break;
    default: throw InvalidArgument("unknown normalization value");
  }
  if (in.mix_depth == 0 || in.singles_draws == 0) {
    throw InvalidArgument("mix_depth and singles_draws must be >= 1");
  }
  g2.mix_depth = in.mix_depth;
  g2.singles_draws = in.singles_draws;
  g2.threads = in.threads;
}

qcorr_config* wrap(scenario::ScenarioConfig c) {
  auto* h = new qcorr_config{std::move(c), {}, {}};
  h->scenario = scenario::scenario_name(h->config.scenario);
  return h;
}

}  // namespace

extern "C" {

const char* qcorr_version(void) { return scenario::library_version(); }

const char* qcorr_status_string(qcorr_status status) {
  switch (status) {
    case QCORR_OK: return "ok";
    case QCORR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case QCORR_ERR_VALIDATION: return "validation error";
    case QCORR_ERR_PARSE: return "parse error";
    case QCORR_ERR_CONFIG: return "config error";
    case QCORR_ERR_INTERNAL: return "internal error";
    case QCORR_ERR_IO: return "I/O error";
    case QCORR_ERR_NULL_POINTER: return "null pointer";
  }
  return "unknown status";
}

const char* qcorr_last_error(void) { return g_last_error.c_str(); }

qcorr_status qcorr_config_load(const char* path, qcorr_config** out) {
  if (!path) return null_pointer("path");
  if (!out) return null_pointer("out");
  *out = nullptr;
  return guarded([&] { *out = wrap(scenario::load_config(path)); });
}

qcorr_status qcorr_config_parse(const char* json_text, qcorr_config** out) {
  if (!json_text) return null_pointer("json_text");
  if (!out) return null_pointer("out");
  *out = nullptr;
  return guarded([&] { *out = wrap(scenario::parse_config(json_text)); });
}

void qcorr_config_free(qcorr_config* config) { delete config; }

qcorr_status qcorr_config_set_seed(qcorr_config* config, uint64_t seed) {
  if (!config) return null_pointer("config");
  g_last_error.clear();
  config->config.rng.seed = seed;
  return QCORR_OK;
}

qcorr_status qcorr_config_set_output_dir(qcorr_config* config, const char* dir) {
  if (!config) return null_pointer("config");
  if (!dir) return null_pointer("dir");
  return guarded([&] {
    if (*dir == '\0') throw ConfigError("output_dir: must not be empty");
    config->config.output_dir = dir;
  });
}

qcorr_status qcorr_config_scenario(const qcorr_config* config, const char** name) {
  if (!config) return null_pointer("config");
  if (!name) return null_pointer("name");
  g_last_error.clear();
  *name = config->scenario.c_str();
  return QCORR_OK;
}

qcorr_status qcorr_config_canonical(const qcorr_config* config,
                                    const char** json_text) {
  if (!config) return null_pointer("config");
  if (!json_text) return null_pointer("json_text");
  return guarded([&] {
    auto* mut = const_cast<qcorr_config*>(config);
    mut->canonical = config->config.canonical_json();
    *json_text = mut->canonical.c_str();
  });
}

qcorr_status qcorr_run(const qcorr_config* config, qcorr_report** out) {
  if (!config) return null_pointer("config");
  if (!out) return null_pointer("out");
  *out = nullptr;
  return guarded([&] {
    auto* r = new qcorr_report{};
    try {
      r->result = scenario::run_scenario(config->config, {});
    } catch (...) {
      delete r;
      throw;
    }
    *out = r;
  });
}

void qcorr_report_free(qcorr_report* report) { delete report; }

size_t qcorr_report_check_count(const qcorr_report* report) {
  return report ? report->result.checks.size() : 0;
}

qcorr_status qcorr_report_check(const qcorr_report* report, size_t index,
                                const char** name, int* pass,
                                const char** detail) {
  if (!report) return null_pointer("report");
  return guarded([&] {
    if (index >= report->result.checks.size()) {
      throw InvalidArgument("check index out of range");
    }
    const auto& c = report->result.checks[index];
    if (name) *name = c.name.c_str();
    if (pass) *pass = c.pass ? 1 : 0;
    if (detail) *detail = c.detail.c_str();
  });
}

int qcorr_report_all_pass(const qcorr_report* report) {
  return report && report->result.checks_pass ? 1 : 0;
}

size_t qcorr_report_file_count(const qcorr_report* report) {
  return report ? report->result.files.size() : 0;
}

const char* qcorr_report_file(const qcorr_report* report, size_t index) {
  if (!report || index >= report->result.files.size()) return nullptr;
  return report->result.files[index].c_str();
}

qcorr_status qcorr_verify_manifest(const char* dir, int* ok, size_t* checked,
                                   size_t* bad) {
  if (!dir) return null_pointer("dir");
  return guarded([&] {
    auto r = scenario::verify_manifest(dir);
    if (ok) *ok = r.ok ? 1 : 0;
    if (checked) *checked = r.checked;
    if (bad) *bad = r.missing.size() + r.mismatched.size();
    if (!r.ok) {
      std::string msg;
      for (const auto& m : r.missing) msg += (msg.empty() ? "" : "; ") + m + " missing";
      for (const auto& m : r.mismatched) {
        msg += (msg.empty() ? "" : "; ") + m + " digest mismatch";
      }
      g_last_error = msg;
    }
  });
}

qcorr_status qcorr_shots_create(qcorr_shots** out) {
  if (!out) return null_pointer("out");
  return guarded([&] { *out = new qcorr_shots{}; });
}

qcorr_status qcorr_shots_read_csv(const char* path, qcorr_shots** out) {
  if (!path) return null_pointer("path");
  if (!out) return null_pointer("out");
  *out = nullptr;
  return guarded([&] { *out = new qcorr_shots{read_shots_csv(path)}; });
}

qcorr_status qcorr_shots_write_csv(const qcorr_shots* shots, const char* path) {
  if (!shots) return null_pointer("shots");
  if (!path) return null_pointer("path");
  return guarded([&] { write_shots_csv(path, shots->shots); });
}

void qcorr_shots_free(qcorr_shots* shots) { delete shots; }

qcorr_status qcorr_shots_add_event(qcorr_shots* shots, int64_t shot_id,
                                   double x_mm, double y_mm, double t_ns) {
  if (!shots) return null_pointer("shots");
  return guarded([&] {
    if (!std::isfinite(x_mm) || !std::isfinite(y_mm) || !std::isfinite(t_ns)) {
      throw ValidationError("event coordinates must be finite");
    }
    if (t_ns < 0.0) throw ValidationError("event time must be >= 0");
    auto& list = shots->shots;
    auto it = std::lower_bound(
        list.begin(), list.end(), shot_id,
        [](const Shot& s, std::int64_t id) { return s.shot_id < id; });
    if (it == list.end() || it->shot_id != shot_id) {
      it = list.insert(it, Shot{shot_id, {}});
    }
    it->events.push_back(make_event(x_mm, y_mm, t_ns));
    it->canonicalize();
  });
}

size_t qcorr_shots_count(const qcorr_shots* shots) {
  return shots ? shots->shots.size() : 0;
}

size_t qcorr_shots_event_count(const qcorr_shots* shots) {
  return shots ? total_events(shots->shots) : 0;
}

qcorr_status qcorr_shots_shuffle(const qcorr_shots* shots, uint64_t seed,
                                 uint64_t stream, qcorr_shots** out) {
  if (!shots) return null_pointer("shots");
  if (!out) return null_pointer("out");
  *out = nullptr;
  return guarded([&] {
    *out = new qcorr_shots{
        correlator::shuffle_across_shots(shots->shots, RngSpec{seed, stream})};
  });
}

void qcorr_g2_options_init(qcorr_g2_options* options) {
  if (!options) return;
  correlator::G2Options d;
  options->axis = QCORR_AXIS_RADIAL;
  options->bins = nullptr;
  options->gate_x_mm = 0.0;
  options->gate_y_mm = 0.0;
  options->gate_t_ns = 0.0;
  options->normalization = QCORR_NORM_MIXED;
  options->mix_depth = d.mix_depth;
  options->singles_draws = d.singles_draws;
  options->threads = 0;
}

qcorr_status qcorr_g2_from_shots(const qcorr_shots* shots,
                                 const qcorr_g2_options* options,
                                 qcorr_curve** out) {
  if (!shots) return null_pointer("shots");
  if (!options) return null_pointer("options");
  if (!out) return null_pointer("out");
  *out = nullptr;
  return guarded([&] {
    correlator::BinningSpec b;
    correlator::G2Options g;
    to_options(*options, b, g);
    *out = new qcorr_curve{correlator::g2_from_events(shots->shots, b, g)};
  });
}

qcorr_status qcorr_analyze_file(const char* events_path,
                                const qcorr_g2_options* options,
                                const char* output_dir, qcorr_curve** out) {
  if (!events_path) return null_pointer("events_path");
  if (!options) return null_pointer("options");
  if (!output_dir) return null_pointer("output_dir");
  if (out) *out = nullptr;
  return guarded([&] {
    scenario::AnalyzeOptions a;
    to_options(*options, a.binning, a.g2);
    a.output_dir = output_dir;
    auto r = scenario::analyze_file(events_path, a);
    if (out) *out = new qcorr_curve{std::move(r.curve)};
  });
}

void qcorr_curve_free(qcorr_curve* curve) { delete curve; }

size_t qcorr_curve_bin_count(const qcorr_curve* curve) {
  return curve ? curve->curve.n_bins() : 0;
}

qcorr_status qcorr_curve_bin(const qcorr_curve* curve, size_t index, double* lo,
                             double* hi, double* g2, double* stderr_g2,
                             uint64_t* pairs, int* defined) {
  if (!curve) return null_pointer("curve");
  return guarded([&] {
    const auto& c = curve->curve;
    if (index >= c.n_bins()) throw InvalidArgument("bin index out of range");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    bool ok = c.defined[index] != 0;
    if (lo) *lo = c.edges[index];
    if (hi) *hi = c.edges[index + 1];
    if (g2) *g2 = ok ? c.g2[index] : nan;
    if (stderr_g2) *stderr_g2 = ok ? c.stderr_[index] : nan;
    if (pairs) *pairs = c.pair_count[index];
    if (defined) *defined = ok ? 1 : 0;
  });
}

qcorr_status qcorr_curve_classicality(const qcorr_curve* curve,
                                      int* nonclassical, double* g2_zero,
                                      double* stderr_g2) {
  if (!curve) return null_pointer("curve");
  return guarded([&] {
    auto v = correlator::classicality_check(curve->curve);
    if (nonclassical) {
      *nonclassical = v.verdict == correlator::Classicality::nonclassical ? 1 : 0;
    }
    if (g2_zero) *g2_zero = v.g2_zero;
    if (stderr_g2) *stderr_g2 = v.stderr_;
  });
}

qcorr_status qcorr_hom_coincidence(double delay_ns, double packet_sigma_ns,
                                   const char* source, double nbar,
                                   int max_pairs, double* out) {
  if (!source) return null_pointer("source");
  if (!out) return null_pointer("out");
  return guarded([&] {
    fock::HomSource s{fock::parse_source(source), nbar, max_pairs};
    *out = fock::hom_coincidence(delay_ns, packet_sigma_ns, s);
  });
}

qcorr_status qcorr_chsh(double a, double a_prime, double b, double b_prime,
                        double* s) {
  if (!s) return null_pointer("s");
  return guarded([&] {
    for (double v : {a, a_prime, b, b_prime}) {
      if (!std::isfinite(v)) throw InvalidArgument("phases must be finite");
    }
    *s = fock::chsh(fock::ChshSettings{a, a_prime, b, b_prime});
  });
}

}  // extern "C"
