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
 * @file correlator.hpp
 * @brief g1/g2 estimation from field records and detection events, the
 *        detector point-spread function, and the Siegert and
 *        Cauchy-Schwarz checks.
 */

#ifndef QCORR_CORRELATOR_HPP_INCLUDED_
#define QCORR_CORRELATOR_HPP_INCLUDED_

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qcorr/core.hpp"
#include "qcorr/speckle.hpp"

namespace qcorr::correlator {

enum class Axis { dx, dy, dt, radial };

/// Parse "dx", "dy", "dt", "r"/"radial".
Axis parse_axis(const std::string& name);
std::string axis_name(Axis axis);

/**
 * Separation binning.  The binned quantity is |Δx|, |Δy|, |Δt| or the
 * in-plane distance sqrt(Δx² + Δy²).  Gates restrict the other axes to
 * |Δ| < gate; an infinite gate disables it.  Gates on axes that are part of
 * the binned quantity are ignored.
 */
struct BinningSpec {
  Axis axis = Axis::radial;
  std::vector<double> edges;
  double gate_x_mm = std::numeric_limits<double>::infinity();
  double gate_y_mm = std::numeric_limits<double>::infinity();
  double gate_t_ns = std::numeric_limits<double>::infinity();

  static BinningSpec uniform(Axis axis, double lo, double hi, std::size_t n);
  std::size_t n_bins() const { return edges.empty() ? 0 : edges.size() - 1; }
  void validate() const;
};

/// Parse "lo:hi:n" (uniform) or an explicit comma-separated edge list.
std::vector<double> parse_bin_edges(const std::string& spec);

enum class Normalization { product_of_singles, shot_mixed };

Normalization parse_normalization(const std::string& name);  // mixed|singles
std::string normalization_name(Normalization norm);

enum class PairEngine { brute_force, sorted };

struct G2Options {
  Normalization normalization = Normalization::shot_mixed;
  /// Partner shots (s + k) mod N, k = 1..mix_depth, for the mixed estimator.
  std::size_t mix_depth = 8;
  /// Random pooled partners per event for the product-of-singles estimator.
  std::size_t singles_draws = 16;
  PairEngine engine = PairEngine::sorted;
  unsigned threads = 0;
};

struct CorrelationCurve {
  std::vector<double> edges;
  std::vector<double> g2;
  std::vector<double> stderr_;
  std::vector<std::uint64_t> pair_count;       ///< same-shot pairs
  std::vector<std::uint64_t> reference_count;  ///< normalization pairs
  std::vector<unsigned char> defined;          ///< 0 where g2 is undefined
  Normalization normalization = Normalization::shot_mixed;
  std::size_t n_shots = 0;
  std::size_t n_events = 0;

  std::size_t n_bins() const { return g2.size(); }
  /// `bin_lo,bin_hi,g2,stderr,pair_count`; undefined bins print nan.
  std::string to_csv() const;
};

/// Bin index of the pair (a, b), or -1 when outside all bins or gates.
int classify_pair(const BinningSpec& binning, const DetectionEvent& a,
                  const DetectionEvent& b);

/// Unordered same-shot pairs, added to hist (size n_bins).
void count_pairs_within(std::span<const DetectionEvent> events,
                        const BinningSpec& binning, PairEngine engine,
                        std::span<std::uint64_t> hist);

/// All pairs (a_i, b_j) across two event sets, added to hist.
void count_pairs_between(std::span<const DetectionEvent> a,
                         std::span<const DetectionEvent> b,
                         const BinningSpec& binning, PairEngine engine,
                         std::span<std::uint64_t> hist);

/**
 * g2 per separation bin: same-shot pair counts normalized by the pair rate
 * expected from independent events; stderr from leave-one-shot-out
 * jackknife.
 */
CorrelationCurve g2_from_events(const ShotList& shots,
                                const BinningSpec& binning,
                                const G2Options& options = {});

/// Reassign every event to an independently drawn uniform shot (same shot
/// ids).  Destroys all same-shot correlations: the built-in null test.
ShotList shuffle_across_shots(const ShotList& shots, const RngSpec& rng);

/**
 * Gaussian displacement per axis, aperture clipping, then dead-radius
 * pile-up: scanning in canonical order, an event closer than dead_radius
 * (in-plane) to an already kept event of the same shot is dropped.
 * Events displaced to t < 0 leave the exposure window and are dropped.
 */
ShotList apply_detector_psf(const ShotList& shots, const Detector& detector,
                            const RngSpec& rng);

// ---------------------------------------------------------------------------
// Field-level estimators

struct PointPair {
  std::size_t first = 0;
  std::size_t second = 0;
  double separation = 0.0;  ///< binned coordinate of the pair
};

struct G1Curve {
  std::vector<double> edges;
  std::vector<ComplexAmplitude> g1;
  std::vector<double> modulus_stderr;  ///< jackknife stderr of |g1|
  /// Pair-averaged |g1|².  Differs from |g1|² when the pairs of a bin carry
  /// different deterministic phases (e.g. Fresnel curvature).
  std::vector<double> modulus_squared;
  std::vector<double> modulus_squared_stderr;
  std::vector<std::size_t> pair_count;
  std::vector<unsigned char> defined;

  std::size_t n_bins() const { return g1.size(); }
};

/// ⟨E*(r1) E(r2)⟩ / sqrt(⟨I(r1)⟩⟨I(r2)⟩) averaged over the pairs of a bin.
G1Curve g1_estimate(const speckle::FieldRecords& records,
                    std::span<const PointPair> pairs,
                    std::span<const double> edges);

/// ⟨I(r1) I(r2)⟩ / (⟨I(r1)⟩⟨I(r2)⟩) averaged over the pairs of a bin.
CorrelationCurve g2_from_field(const speckle::FieldRecords& records,
                               std::span<const PointPair> pairs,
                               std::span<const double> edges);

struct SiegertBin {
  std::size_t index = 0;
  double g2 = 0.0;
  double expected = 0.0;  ///< 1 + |g1|²
  double z = 0.0;         ///< |g2 - expected| / combined stderr
};

struct SiegertReport {
  bool pass = true;
  double tolerance = 3.0;
  double max_z = 0.0;
  std::size_t bins_checked = 0;
  std::vector<SiegertBin> failing;
};

/// Compares g2 with 1 + pair-averaged |g1|² (or 1 + |g1|² when the curve
/// has no modulus_squared), bin by bin.
SiegertReport siegert_check(const G1Curve& g1, const CorrelationCurve& g2,
                            double tolerance = 3.0);

enum class Classicality { classical_compatible, nonclassical };

std::string classicality_name(Classicality verdict);

struct ClassicalityVerdict {
  Classicality verdict = Classicality::classical_compatible;
  double g2_zero = 0.0;
  double stderr_ = 0.0;
  double bin_lo = 0.0;
  double bin_hi = 0.0;
};

/// Cauchy-Schwarz test on the zero-separation bin (the bin starting at 0).
ClassicalityVerdict classicality_check(const CorrelationCurve& curve);

// ---------------------------------------------------------------------------
// Curve fits

struct ValueWithError {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Weighted least squares g2 = c0 + c1 s² over defined bins with
/// hi <= max_separation; returns the intercept c0.  s² is the bin average
/// for the given number of dimensions of the binned quantity.
ValueWithError fit_zero_separation(const CorrelationCurve& curve,
                                   double max_separation, int dims);

/// Inverse-variance mean of g2 over defined bins with lo >= min_separation.
ValueWithError far_value(const CorrelationCurve& curve, double min_separation);

struct GaussianBumpFit {
  double baseline = 1.0;
  double amplitude = 0.0;
  double width = 0.0;  ///< l in B + A exp(-s²/l²)
  double width_stderr = 0.0;
  double chi2_per_dof = 0.0;
  bool converged = false;
};

/**
 * Fit B + A exp(-s²/l²), bin-averaged over each bin with the pair measure
 * of a `dims`-dimensional separation (1: uniform in s, 2: ∝ s ds).
 */
GaussianBumpFit fit_gaussian_bump(const CorrelationCurve& curve, int dims,
                                  double initial_width);

}  // namespace qcorr::correlator

#endif  // QCORR_CORRELATOR_HPP_INCLUDED_
