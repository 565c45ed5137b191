/*
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

/*
 * qcorr C API.
 *
 * Every function returns a qcorr_status.  On failure the message is
 * available from qcorr_last_error() on the calling thread until the next
 * call into the library from that thread.  Objects are opaque handles
 * released with the matching *_free function; passing NULL to a free
 * function is a no-op.  Strings returned by accessors are owned by the
 * handle they came from.
 */

#ifndef QCORR_QCORR_H_INCLUDED_
#define QCORR_QCORR_H_INCLUDED_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define QCORR_API __declspec(dllexport)
#elif defined(__GNUC__)
#define QCORR_API __attribute__((visibility("default")))
#else
#define QCORR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qcorr_status {
  QCORR_OK = 0,
  QCORR_ERR_INVALID_ARGUMENT = 1,
  QCORR_ERR_VALIDATION = 2,
  QCORR_ERR_PARSE = 3,
  QCORR_ERR_CONFIG = 4,
  QCORR_ERR_INTERNAL = 5,
  QCORR_ERR_IO = 6,
  QCORR_ERR_NULL_POINTER = 7
} qcorr_status;

typedef enum qcorr_axis {
  QCORR_AXIS_DX = 0,
  QCORR_AXIS_DY = 1,
  QCORR_AXIS_DT = 2,
  QCORR_AXIS_RADIAL = 3
} qcorr_axis;

typedef enum qcorr_normalization {
  QCORR_NORM_MIXED = 0,
  QCORR_NORM_SINGLES = 1
} qcorr_normalization;

typedef struct qcorr_config qcorr_config;
typedef struct qcorr_report qcorr_report;
typedef struct qcorr_shots qcorr_shots;
typedef struct qcorr_curve qcorr_curve;

QCORR_API const char* qcorr_version(void);
QCORR_API const char* qcorr_status_string(qcorr_status status);
QCORR_API const char* qcorr_last_error(void);

/* ---- Scenario configuration and runs ---------------------------------- */

QCORR_API qcorr_status qcorr_config_load(const char* path, qcorr_config** out);
QCORR_API qcorr_status qcorr_config_parse(const char* json_text,
                                          qcorr_config** out);
QCORR_API void qcorr_config_free(qcorr_config* config);
QCORR_API qcorr_status qcorr_config_set_seed(qcorr_config* config,
                                             uint64_t seed);
QCORR_API qcorr_status qcorr_config_set_output_dir(qcorr_config* config,
                                                   const char* dir);
/* Scenario name, e.g. "hbt-speckle". */
QCORR_API qcorr_status qcorr_config_scenario(const qcorr_config* config,
                                             const char** name);
/* Resolved configuration as canonical JSON. */
QCORR_API qcorr_status qcorr_config_canonical(const qcorr_config* config,
                                              const char** json_text);

/* Runs the scenario and writes its outputs and manifest.  A runtime error
 * leaves no partial outputs behind. */
QCORR_API qcorr_status qcorr_run(const qcorr_config* config,
                                 qcorr_report** out);
QCORR_API void qcorr_report_free(qcorr_report* report);
QCORR_API size_t qcorr_report_check_count(const qcorr_report* report);
QCORR_API qcorr_status qcorr_report_check(const qcorr_report* report,
                                          size_t index, const char** name,
                                          int* pass, const char** detail);
/* 1 when every acceptance check passed. */
QCORR_API int qcorr_report_all_pass(const qcorr_report* report);
QCORR_API size_t qcorr_report_file_count(const qcorr_report* report);
QCORR_API const char* qcorr_report_file(const qcorr_report* report,
                                        size_t index);

/* Recomputes the digests listed in dir/manifest.json.  *ok is 1 when every
 * listed file exists and matches. */
QCORR_API qcorr_status qcorr_verify_manifest(const char* dir, int* ok,
                                             size_t* checked, size_t* bad);

/* ---- Event datasets ---------------------------------------------------- */

QCORR_API qcorr_status qcorr_shots_create(qcorr_shots** out);
QCORR_API qcorr_status qcorr_shots_read_csv(const char* path,
                                            qcorr_shots** out);
QCORR_API qcorr_status qcorr_shots_write_csv(const qcorr_shots* shots,
                                             const char* path);
QCORR_API void qcorr_shots_free(qcorr_shots* shots);
/* Appends an event to the shot with this id, creating the shot if needed.
 * Shots are kept in ascending id order with events in canonical order. */
QCORR_API qcorr_status qcorr_shots_add_event(qcorr_shots* shots,
                                             int64_t shot_id, double x_mm,
                                             double y_mm, double t_ns);
QCORR_API size_t qcorr_shots_count(const qcorr_shots* shots);
QCORR_API size_t qcorr_shots_event_count(const qcorr_shots* shots);
/* Null test: every event moves to a uniformly drawn shot. */
QCORR_API qcorr_status qcorr_shots_shuffle(const qcorr_shots* shots,
                                           uint64_t seed, uint64_t stream,
                                           qcorr_shots** out);

/* ---- Correlation ------------------------------------------------------- */

typedef struct qcorr_g2_options {
  qcorr_axis axis;
  /* "lo:hi:n" or a comma-separated edge list. */
  const char* bins;
  /* Gates on the other axes; a value <= 0 disables the gate. */
  double gate_x_mm;
  double gate_y_mm;
  double gate_t_ns;
  qcorr_normalization normalization;
  size_t mix_depth;
  size_t singles_draws;
  unsigned threads;
} qcorr_g2_options;

/* Radial axis, no bins, no gates, mixed normalization, library defaults. */
QCORR_API void qcorr_g2_options_init(qcorr_g2_options* options);

QCORR_API qcorr_status qcorr_g2_from_shots(const qcorr_shots* shots,
                                           const qcorr_g2_options* options,
                                           qcorr_curve** out);
/* Reads events, writes output_dir/correlation.csv and verdict.json.  out
 * may be NULL. */
QCORR_API qcorr_status qcorr_analyze_file(const char* events_path,
                                          const qcorr_g2_options* options,
                                          const char* output_dir,
                                          qcorr_curve** out);
QCORR_API void qcorr_curve_free(qcorr_curve* curve);
QCORR_API size_t qcorr_curve_bin_count(const qcorr_curve* curve);
/* Any output pointer may be NULL.  Undefined bins report NaN. */
QCORR_API qcorr_status qcorr_curve_bin(const qcorr_curve* curve, size_t index,
                                       double* lo, double* hi, double* g2,
                                       double* stderr_g2, uint64_t* pairs,
                                       int* defined);
/* Cauchy-Schwarz verdict on the bin starting at 0: *nonclassical is 1 when
 * g2(0) < 1 - 3 stderr. */
QCORR_API qcorr_status qcorr_curve_classicality(const qcorr_curve* curve,
                                                int* nonclassical,
                                                double* g2_zero,
                                                double* stderr_g2);

/* ---- Closed-form helpers ----------------------------------------------- */

/* Joint-detection probability of the HOM splitter.  source is
 * "ideal_pair", "tmsv" or "classical"; nbar and max_pairs apply to tmsv. */
QCORR_API qcorr_status qcorr_hom_coincidence(double delay_ns,
                                             double packet_sigma_ns,
                                             const char* source, double nbar,
                                             int max_pairs, double* out);
/* CHSH value of the four-mode Bell setup for the given phases. */
QCORR_API qcorr_status qcorr_chsh(double a, double a_prime, double b,
                                  double b_prime, double* s);

#ifdef __cplusplus
}
#endif

#endif /* QCORR_QCORR_H_INCLUDED_ */
