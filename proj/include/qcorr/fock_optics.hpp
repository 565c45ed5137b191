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
 * @file fock_optics.hpp
 * @brief Few-particle Fock-space optics: real beam splitters, the HOM dip,
 *        its classical random-phase counterpart, a twin-pair source and a
 *        four-mode Bell test.
 */

#ifndef QCORR_FOCK_OPTICS_HPP_INCLUDED_
#define QCORR_FOCK_OPTICS_HPP_INCLUDED_

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qcorr/core.hpp"

namespace qcorr::fock {

using Occupation = std::vector<int>;

/// Pure state over labeled modes, stored as occupation vector -> amplitude.
class FockState {
 public:
  static constexpr int kMaxParticles = 8;
  static constexpr double kNormTolerance = 1e-12;

  FockState() = default;
  /// Single basis state with amplitude 1.
  FockState(std::vector<std::string> modes, const Occupation& occupation);
  FockState(std::vector<std::string> modes,
            std::map<Occupation, ComplexAmplitude> terms);

  const std::vector<std::string>& modes() const { return modes_; }
  const std::map<Occupation, ComplexAmplitude>& terms() const { return terms_; }
  std::size_t mode_index(const std::string& label) const;

  /// Amplitude of a basis state, 0 when absent.
  ComplexAmplitude amplitude(const Occupation& occupation) const;
  double probability(const Occupation& occupation) const;
  double norm_squared() const;

  /// Throws ValidationError unless normalized, nonnegative and within the cap.
  void validate() const;

 private:
  void check_shape() const;

  std::vector<std::string> modes_;
  std::map<Occupation, ComplexAmplitude> terms_;
};

/**
 * Real two-mode splitter: a† → t a† + r b†, b† → t b† − r a†.
 */
struct SplitterSpec {
  double t = 0.0;
  double r = 0.0;

  /// r = sqrt(1 − t²).  t must be in [0, 1].
  static SplitterSpec from_transmission(double t);
  /// t = r = 1/√2 exactly in the same floating-point value.
  static SplitterSpec balanced();
  /// t = 0, r = 1: a → b, b → −a.
  static SplitterSpec mirror();
  SplitterSpec inverse() const { return SplitterSpec{t, -r}; }
  void validate() const;
};

FockState splitter_transform(const FockState& state,
                             const SplitterSpec& splitter,
                             const std::string& mode_a,
                             const std::string& mode_b);

/// Multiplies each term by exp(i φ n_mode).
FockState phase_shift(const FockState& state, const std::string& mode,
                      double phi);

/// Joint detection pattern (counts per detector) -> probability.
using OutcomeTable = std::map<Occupation, double>;

/// Probabilities of every basis state, optionally merging modes onto
/// detectors (detector_of[m] = detector index of mode m).
OutcomeTable outcome_table(const FockState& state,
                           const std::vector<int>& detector_of = {});

// ---------------------------------------------------------------------------
// HOM interference

enum class SourceKind { ideal_pair, tmsv, classical };

struct HomSource {
  SourceKind kind = SourceKind::ideal_pair;
  double nbar = 0.0;     ///< tmsv only
  int max_pairs = 2;     ///< tmsv pair sectors kept (2 pairs = 4 particles)

  void validate() const;
  static HomSource ideal() { return HomSource{}; }
  static HomSource twin(double nbar, int max_pairs = 2) {
    return HomSource{SourceKind::tmsv, nbar, max_pairs};
  }
  static HomSource classical_field() {
    return HomSource{SourceKind::classical, 0.0, 0};
  }
};

std::string source_name(SourceKind kind);
SourceKind parse_source(const std::string& name);

/// Temporal-mode overlap of identical Gaussian packets offset by delay.
double mode_overlap(double delay, double packet_sigma);

/// Probability of at least one detection on each output side.
double hom_coincidence(double delay, double packet_sigma,
                       const HomSource& source);

/// Probability mass of tmsv pair sectors beyond max_pairs.
double tmsv_truncation_tail(const HomSource& source);

/// Output state of n pairs with b delayed, modes {a, b, a_perp, b_perp}.
FockState hom_output_state(int pairs, double overlap);

struct ClassicalBaseline {
  double w1_d3 = 0.0, w1_d4 = 0.0, w2_joint = 0.0, ratio = 0.0;
  double w2_stderr = 0.0, ratio_stderr = 0.0;
  std::size_t samples = 0;
};

/// Rates for one random-phase draw.
struct ClassicalRates {
  double w1_d3, w1_d4, w2_joint;
};
ClassicalRates classical_rates(double phi);

ClassicalBaseline classical_hom_baseline(std::size_t n_phase_samples,
                                         const RngSpec& rng);

enum class Witness { quantum_witness, no_witness, inconclusive };
std::string witness_name(Witness w);

struct DipScan {
  std::vector<double> delays_ns;
  std::vector<double> p_joint;
  std::vector<double> stderr_;
  std::vector<std::size_t> coincidences;
  std::size_t shots_per_delay = 0;
  double packet_sigma_ns = 0.0;
  SourceKind source = SourceKind::ideal_pair;

  double visibility = 0.0;
  double visibility_stderr = 0.0;
  double p_zero = 0.0;
  double p_far = 0.0;
  Witness witness = Witness::inconclusive;

  /// `delay_ns,p_joint,stderr`
  std::string to_csv() const;
};

/// Delays at or beyond this many packet widths count as "far".
inline constexpr double kFarDelaySigmas = 5.0;
/// Minimum shots per delay for a witness verdict.
inline constexpr std::size_t kWitnessMinShots = 100;

DipScan hom_dip_scan(const std::vector<double>& delays_ns,
                     double packet_sigma_ns, const HomSource& source,
                     std::size_t n_shots, const RngSpec& rng);

// ---------------------------------------------------------------------------
// Twin-pair source

struct PairSourceSpec {
  double nbar = 0.1;
  std::size_t n_shots = 0;
  void validate() const;
};

std::vector<std::pair<int, int>> tmsv_sample(const PairSourceSpec& source,
                                             const RngSpec& rng);

struct ContaminationEstimate {
  double mean_occupation = 0.0;
  double pair_rate = 0.0;         ///< ⟨n(n−1)⟩
  double local_g2 = 0.0;          ///< ⟨n(n−1)⟩ / ⟨n⟩²
  double nbar = 0.0;              ///< sqrt(pair_rate / 2), thermal inversion
  double nbar_stderr = 0.0;
  double two_particle_fraction = 0.0;  ///< among shots with n ≥ 1
  std::size_t shots = 0;
};

ContaminationEstimate infer_contamination(const std::vector<int>& occupations);

// ---------------------------------------------------------------------------
// Four-mode Bell test

/// Modes {p3, p3', p4, p4'}; the initial state is (|p3,p4⟩ + |p3',p4'⟩)/√2.
FockState rarity_tapster_state(double phi_a, double phi_b);

/// Keys are {n_p3, n_p3', n_p4, n_p4'} after the splitters.
OutcomeTable rarity_tapster(double phi_a, double phi_b);

/// (+1 for p3/p4, −1 for the primed port) correlator from a table.
double correlation(const OutcomeTable& table);

struct ChshSettings {
  double a = 0.0, a_prime = 0.0, b = 0.0, b_prime = 0.0;
  /// Maximal violation for E = cos(φa + φb).
  static ChshSettings optimal();
  std::array<std::pair<double, double>, 4> pairs() const {
    return {{{a, b}, {a, b_prime}, {a_prime, b}, {a_prime, b_prime}}};
  }
};

/// S = |E(a,b) + E(a,b') + E(a',b) − E(a',b')|.
double chsh_combination(const std::array<double, 4>& e);
double chsh(const ChshSettings& settings);

struct ChshSample {
  std::array<double, 4> e{};
  std::array<double, 4> e_stderr{};
  std::array<std::size_t, 4> shots{};
  double s = 0.0;
  double s_stderr = 0.0;
};

/// Each shot picks one of the four setting pairs uniformly and draws a
/// detector pattern from the Rarity–Tapster table.
ChshSample chsh_sample(const ChshSettings& settings, std::size_t n_shots,
                       const RngSpec& rng);

enum class LhvKind { deterministic, uniform_random, hom_mimic };

/// Deterministic strategy index bits: A(a), A(a'), B(b), B(b') (1 → +1).
struct LhvStrategy {
  LhvKind kind = LhvKind::deterministic;
  unsigned index = 0;
};

std::string lhv_name(const LhvStrategy& s);
LhvStrategy parse_lhv(const std::string& name);

/// Outcome pair (±1, ±1) for setting pair k (0..3) and hidden variable.
std::pair<int, int> lhv_outcome(const LhvStrategy& s, int setting,
                                std::uint64_t hidden);

/// Exact S of a deterministic strategy (integer arithmetic).
int lhv_deterministic_s(unsigned index);
/// Maximum |S| over the 16 deterministic strategies.
int lhv_max_s();

ChshSample lhv_simulation(const LhvStrategy& strategy, std::size_t n_shots,
                          const RngSpec& rng);

/// HOM-mimic source: both particles leave the same side, side set by a
/// hidden coin.  Returns the empirical (n_c, n_d) outcome table.
OutcomeTable hom_mimic_outcomes(std::size_t n_shots, const RngSpec& rng);

}  // namespace qcorr::fock

#endif  // QCORR_FOCK_OPTICS_HPP_INCLUDED_
