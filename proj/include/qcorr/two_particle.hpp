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
 * @file two_particle.hpp
 * @brief Multi-particle detection amplitudes (permanent / determinant), the
 *        two-emitter two-detector toy model, and bosonic / fermionic cloud
 *        samplers.
 */

#ifndef QCORR_TWO_PARTICLE_HPP_INCLUDED_
#define QCORR_TWO_PARTICLE_HPP_INCLUDED_

#include <array>
#include <string>
#include <vector>

#include "qcorr/core.hpp"
#include "qcorr/correlator.hpp"
#include "qcorr/speckle.hpp"

namespace qcorr::two_particle {

enum class Statistics { boson, fermion, distinguishable };

Statistics parse_statistics(const std::string& name);
std::string statistics_name(Statistics s);

/// n×n single-particle amplitudes, entry (i, j) from emitter i to detector j.
class AmplitudeMatrix {
 public:
  static constexpr std::size_t kMinSize = 2;
  static constexpr std::size_t kMaxSize = 6;

  AmplitudeMatrix(std::size_t n, std::vector<ComplexAmplitude> row_major,
                  Statistics statistics);

  std::size_t size() const { return n_; }
  Statistics statistics() const { return statistics_; }
  const ComplexAmplitude& at(std::size_t i, std::size_t j) const {
    return entries_[i * n_ + j];
  }
  const std::vector<ComplexAmplitude>& entries() const { return entries_; }

 private:
  std::size_t n_;
  std::vector<ComplexAmplitude> entries_;
  Statistics statistics_;
};

/// Ryser's formula with Gray-code row-sum updates.
ComplexAmplitude permanent(const AmplitudeMatrix& m);
/// LU determinant.
ComplexAmplitude determinant(const AmplitudeMatrix& m);
/// Σ over permutations of Π |m_{iσ(i)}|² (the permanent of |m|²).
double distinguishable_weight(const AmplitudeMatrix& m);

struct JointProbability {
  double raw = 0.0;              ///< |perm|², |det|² or the distinguishable sum
  double distinguishable = 0.0;  ///< normalizer
  double factor = 0.0;           ///< raw / distinguishable
};

JointProbability joint_probability(const AmplitudeMatrix& m);

/**
 * Two emitters, two detectors.  Each realization draws independent emitter
 * phases and, when source_extent_m > 0, displaces each emitter uniformly
 * within a transverse square of that side around its nominal position
 * (a realization is one pair of emitters drawn from the extended source).
 */
struct ToyModelGeometry {
  std::array<speckle::Vec3, 2> emitters{};
  std::array<speckle::Vec3, 2> detectors{};
  double wavenumber = 0.0;  ///< rad/m
  double source_extent_m = 0.0;

  void validate() const;
};

struct ToyModelResult {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t realizations = 0;
};

ToyModelResult toy_model_g2(const ToyModelGeometry& geometry,
                            Statistics statistics,
                            std::size_t n_phase_realizations,
                            const RngSpec& rng);

enum class CloudStatistics { boson, fermion };

/**
 * Synthetic cloud in the detector frame.  extent_mm are full box widths;
 * x and y are centred on 0, z spans [0, extent_z) and maps to arrival time
 * t = z / fall_velocity.  extent_z = 0 gives a planar cloud at t = 0.
 */
struct CloudSpec {
  std::array<double, 3> correlation_length_mm{0.5, 0.5, 0.5};
  std::array<double, 3> extent_mm{4.0, 4.0, 0.0};
  double mean_atoms = 30.0;
  CloudStatistics statistics = CloudStatistics::boson;
  /// Species mass relative to the reference species; l scales as 1/mass.
  double mass_ratio = 1.0;
  double fall_velocity_mm_per_ns = 3e-6;
  /// Grid pitch as a fraction of l; 0 picks 1/4 (boson) or 1/6 (fermion).
  double pitch_fraction = 0.0;

  void validate() const;
  /// Correlation lengths after the mass-ratio scaling.
  std::array<double, 3> effective_lengths() const;
  bool planar() const { return extent_mm[2] == 0.0; }
  int dimensions() const { return planar() ? 2 : 3; }
};

/// Thermal-boson point process: Poisson thinning of |F|² for a complex
/// Gaussian field F with g1 = exp(-Σ Δ²/(2 l²)).
ShotList sample_boson_cloud(const CloudSpec& spec, std::size_t n_shots,
                            const RngSpec& rng, unsigned threads = 0);

/**
 * Discretized Gaussian DPP kernel K = ρ h^d exp(-Σ Δ²/(2 l²)) on the cloud
 * grid, factorized per axis.  Eigenvalues are products of per-axis
 * eigenvalues.
 */
class FermionKernel {
 public:
  explicit FermionKernel(const CloudSpec& spec);

  double trace() const { return trace_; }
  double max_eigenvalue() const { return max_eigenvalue_; }
  std::size_t retained() const { return eig_.size(); }
  /// Sum of retained (clipped) eigenvalues = expected points per shot.
  double expected_count() const;

  Shot sample(Rng& gen) const;

 private:
  struct Axis {
    std::size_t n = 1;
    double pitch = 0.0;
    double origin = 0.0;  // lower box edge
    std::vector<double> values;    // per-axis eigenvalues
    std::vector<double> vectors;   // column-major n×n
    std::vector<double> cdf;       // per vector cumulative |u|², n×n
  };
  struct Eigen3 {
    double lambda;
    std::array<std::uint32_t, 3> index;
  };

  double vec(int axis, std::size_t k, std::size_t cell) const {
    const Axis& a = axes_[static_cast<std::size_t>(axis)];
    return a.vectors[k * a.n + cell];
  }

  CloudSpec spec_;
  std::array<Axis, 3> axes_;
  int dims_ = 2;
  double trace_ = 0.0;
  double max_eigenvalue_ = 0.0;
  std::vector<Eigen3> eig_;
};

ShotList sample_fermion_cloud(const CloudSpec& spec, std::size_t n_shots,
                              const RngSpec& rng, unsigned threads = 0);

/**
 * Expected g2 in one bin for a planar thermal-boson cloud seen through the
 * detector PSF.  The ideal excess exp(-Δx²/lx² - Δy²/ly²) is weighted by
 * the box pair-separation density, convolved numerically with the
 * pair-difference PSF (σ√2 per axis) and averaged over the bin and gates.
 * Needs an unbounded detector (radius 0) without dead radius; the binned
 * axis must be dx, dy or radial.
 */
double psf_washout_g2(const CloudSpec& spec, const Detector& detector,
                      const correlator::BinningSpec& binning, std::size_t bin);

}  // namespace qcorr::two_particle

#endif  // QCORR_TWO_PARTICLE_HPP_INCLUDED_
