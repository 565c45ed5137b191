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

/**
 * @file core.hpp
 * @brief Shared domain types, error hierarchy, deterministic RNG streams and
 *        the canonical event CSV codec.
 */

#ifndef QCORR_CORE_HPP_INCLUDED_
#define QCORR_CORE_HPP_INCLUDED_

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qcorr {

/// Broad error classes; the C API maps each one to a status code.
enum class ErrorKind {
  invalid_argument,
  validation,
  parse,
  config,
  internal,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
    : Error(ErrorKind::invalid_argument, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
    : Error(ErrorKind::validation, what) {}
};

/// Malformed textual input; carries the 1-based line number (0 if unknown).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
    : Error(ErrorKind::parse, "line " + std::to_string(line) + ": " + what),
      line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
    : Error(ErrorKind::config, what) {}
};

/// A broken internal guarantee (e.g. a violated sampling envelope).
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what)
    : Error(ErrorKind::internal, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

using ComplexAmplitude = std::complex<double>;

/// Round a coordinate to the 9 significant digits used by the event CSV.
/// Simulators emit quantized coordinates so that CSV round-trips are exact.
double quantize_coordinate(double value);

struct DetectionEvent {
  double x_mm = 0.0;
  double y_mm = 0.0;
  double t_ns = 0.0;

  friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

/// Event with each coordinate passed through quantize_coordinate().
DetectionEvent make_event(double x_mm, double y_mm, double t_ns);

/// Canonical (t, x, y) ascending order.
bool canonical_less(const DetectionEvent& a, const DetectionEvent& b);

struct Shot {
  std::int64_t shot_id = 0;
  std::vector<DetectionEvent> events;

  /// Sort events into canonical order.
  void canonicalize();

  friend bool operator==(const Shot&, const Shot&) = default;
};

using ShotList = std::vector<Shot>;

std::size_t total_events(const ShotList& shots);

/**
 * Detector geometry and response.  A radius of 0 denotes an unbounded
 * detector plane (no aperture clipping).
 */
struct Detector {
  double radius_mm = 35.0;
  double psf_sigma_x_mm = 0.0;
  double psf_sigma_y_mm = 0.0;
  double psf_sigma_t_ns = 0.0;
  double dead_radius_mm = 0.0;

  void validate() const;
  bool contains(double x_mm, double y_mm) const;
};

struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const RngSpec&, const RngSpec&) = default;
};

/// Purpose tags that separate the substreams of one RngSpec.
enum class StreamTag : std::uint64_t {
  speckle_emitters = 1,
  speckle_phases = 2,
  speckle_thinning = 3,
  psf = 4,
  boson_field = 5,
  fermion_cloud = 6,
  toy_model = 7,
  hom_scan = 8,
  classical_baseline = 9,
  pair_source = 10,
  bell = 11,
  lhv = 12,
  shuffle = 13,
  user = 100,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/**
 * Random stream keyed by (seed, stream_id, tag, index).  Every shot or
 * realization draws from its own key, so output is independent of the
 * order and thread in which shots are generated.
 */
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng(const RngSpec& spec, StreamTag tag, std::uint64_t index = 0);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return normal_(engine_); }
  std::uint64_t poisson(double mean);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Canonical event CSV (header `shot_id,x_mm,y_mm,t_ns`).  Shots are written
/// in ascending shot_id order.  A shot without events is written as one row
/// with empty coordinate fields so that it survives a round-trip.
std::string encode_shots(const ShotList& shots);
ShotList decode_shots(std::string_view text);

void write_shots_csv(const std::string& path, const ShotList& shots);
ShotList read_shots_csv(const std::string& path);

/// Validate dataset invariants: unique ids, finite coordinates, t >= 0 and
/// canonical order.  Throws ValidationError naming the offending shot.
void validate_shots(const ShotList& shots);

/// Shortest text for `value` with 9 significant digits (same as "%.9g").
std::string format_g9(double value);

/// Read and write whole files.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace qcorr

#endif  // QCORR_CORE_HPP_INCLUDED_
