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
 * @file scenario.hpp
 * @brief JSON-configured scenario runner, external-data analysis and
 *        output manifests.
 */

#ifndef QCORR_SCENARIO_HPP_INCLUDED_
#define QCORR_SCENARIO_HPP_INCLUDED_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcorr/atom_hom.hpp"
#include "qcorr/correlator.hpp"
#include "qcorr/fock_optics.hpp"
#include "qcorr/speckle.hpp"
#include "qcorr/two_particle.hpp"

namespace qcorr::scenario {

inline constexpr int kSchemaVersion = 1;

enum class ScenarioKind {
  hbt_speckle,
  hbt_boson_cloud,
  hbt_fermion_cloud,
  hbt_bec_flat,
  hom_photon,
  hom_atom,
  hom_classical_baseline,
  bell_chsh,
  bell_lhv,
};

std::string scenario_name(ScenarioKind kind);
ScenarioKind parse_scenario(const std::string& name);
const std::vector<ScenarioKind>& all_scenarios();

struct SpeckleBlock {
  std::size_t n_emitters = 100;
  double source_diameter_m = 2e-3;
  double distance_m = 20.0;
  double wavelength_m = 5e-7;
  double bandwidth_rad_s = 0.0;
  bool coherent = false;
  double mean_events = 50.0;
  std::size_t n_shots = 10000;
  double exposure_ns = 1.0;
  double prescan_fraction = 0.25;
  double envelope_factor = 1.2;
};

struct EstimatorBlock {
  correlator::Normalization normalization =
      correlator::Normalization::shot_mixed;
  std::size_t mix_depth = 8;
  std::size_t singles_draws = 16;
  /// Upper separation for the zero-separation fit (binned units).
  double zero_fit_max = 0.0;
  /// Lower separation for the far-value average.
  double far_min = 0.0;
};

struct SiegertBlock {
  bool enabled = true;
  std::size_t n_realizations = 2000;
  std::size_t n_points = 24;
  double spacing_mm = 0.5;
};

struct MapBlock {
  bool enabled = true;
  std::size_t nx = 64;
  std::size_t ny = 64;
  double pitch_mm = 0.5;
  std::uint64_t realization_id = 0;
};

struct CloudBlock {
  two_particle::CloudSpec spec;
  std::size_t n_shots = 4000;
  /// One run per entry; the first is the reference species.
  std::vector<double> mass_ratios{1.0};
};

struct HomBlock {
  fock::HomSource source;
  double packet_sigma_ns = 1.0;
  std::vector<double> delays_ns;
  std::size_t n_shots = 20000;
  std::size_t n_phase_samples = 1000000;
};

struct AtomBlock {
  atom::TrajectorySpec trajectory;
  std::vector<double> t2_values_ms;
  double packet_sigma_ns = 2e4;
  fock::HomSource source;
  std::size_t n_shots = 20000;
  std::vector<double> contamination_nbar{0.05, 0.1, 0.2};
  std::size_t contamination_shots = 100000;
};

struct BellBlock {
  fock::ChshSettings settings = fock::ChshSettings::optimal();
  std::size_t n_shots = 100000;
  std::size_t grid_points = 24;
};

struct LhvBlock {
  std::vector<std::string> strategies{"uniform_random", "hom_mimic"};
  std::size_t n_shots = 100000;
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  ScenarioKind scenario = ScenarioKind::hbt_speckle;
  RngSpec rng{1, 0};
  unsigned threads = 0;
  std::string output_dir = "qcorr_out";
  bool write_events = true;

  SpeckleBlock speckle;
  Detector detector;
  correlator::BinningSpec binning;
  EstimatorBlock estimator;
  SiegertBlock siegert;
  MapBlock map;
  CloudBlock cloud;
  HomBlock hom;
  AtomBlock atom;
  BellBlock bell;
  LhvBlock lhv;

  /// Fully resolved configuration (defaults filled), sorted keys.
  std::string canonical_json() const;
};

/// Defaults for a scenario before any user overrides.
ScenarioConfig default_config(ScenarioKind kind);

/// Parse and validate.  Errors are ConfigError with a field path.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunOptions {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  bool check = false;
};

struct RunResult {
  std::string output_dir;
  std::vector<std::string> files;
  std::vector<CheckResult> checks;
  bool checks_pass = true;
};

/// In-memory output bundle, written atomically-ish by write_bundle().
using Bundle = std::map<std::string, std::string>;

/**
 * Runs a scenario and returns the files it would write (no disk access).
 * The acceptance assertions are always evaluated and recorded in
 * verdict.json; `checks` receives them when non-null.
 */
Bundle build_outputs(const ScenarioConfig& config,
                     std::vector<CheckResult>* checks = nullptr);

RunResult run_scenario(ScenarioConfig config, const RunOptions& options);

/// Writes every file plus manifest.json; on failure removes what it wrote.
std::vector<std::string> write_bundle(const std::string& dir,
                                      const Bundle& bundle,
                                      const ScenarioConfig& config);

std::string sha256_hex(const std::string& data);

/// Library version recorded in manifests.
const char* library_version();

struct VerifyResult {
  bool ok = true;
  std::vector<std::string> mismatched;
  std::vector<std::string> missing;
  std::size_t checked = 0;
};

VerifyResult verify_manifest(const std::string& dir);

struct AnalyzeOptions {
  correlator::BinningSpec binning;
  correlator::G2Options g2;
  std::string output_dir = ".";
};

struct AnalyzeResult {
  correlator::CorrelationCurve curve;
  std::optional<correlator::ClassicalityVerdict> verdict;
  std::vector<std::string> files;
};

AnalyzeResult analyze_file(const std::string& events_path,
                           const AnalyzeOptions& options);

}  // namespace qcorr::scenario

#endif  // QCORR_SCENARIO_HPP_INCLUDED_
