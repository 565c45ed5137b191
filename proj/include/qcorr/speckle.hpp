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
 * @file speckle.hpp
 * @brief Incoherent extended source: random-phase emitter sums, speckle
 *        intensity maps and intensity-driven detection events.
 *
 * Units: emitter geometry in metres, field time in seconds.  Detection
 * events use the detector-plane frame in mm and ns, centred on the optical
 * axis.
 */

#ifndef QCORR_SPECKLE_HPP_INCLUDED_
#define QCORR_SPECKLE_HPP_INCLUDED_

#include <cstdint>
#include <string>
#include <vector>

#include "qcorr/core.hpp"

namespace qcorr::speckle {

constexpr double kSpeedOfLight = 299792458.0;  // m/s
constexpr std::size_t kMinThermalEmitters = 100;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct SpeckleSource {
  std::vector<Vec3> positions_m;
  std::vector<double> amplitudes;
  std::vector<double> angular_frequencies;  ///< rad/s
  double wavelength_m = 0.0;
  double angular_diameter_rad = 0.0;
  double bandwidth_rad_s = 0.0;   ///< std of the Gaussian frequency band
  double detector_plane_z_m = 0.0;
  /// Single-emitter reference source; exempt from the emitter minimum.
  bool coherent = false;

  std::size_t n_emitters() const { return positions_m.size(); }
  /// Ensemble-mean intensity Σ a_j².
  double mean_intensity() const;
  /// 1/Δω, or +inf for a monochromatic source.
  double coherence_time_s() const;
  void validate() const;
};

struct DiskSourceParams {
  std::size_t n_emitters = 1000;
  double source_diameter_m = 1e-3;
  double distance_m = 2.0;
  double wavelength_m = 5e-7;
  double bandwidth_rad_s = 0.0;
};

/// Emitters uniform on a disk in the z = 0 plane, equal amplitudes
/// 1/sqrt(N), frequencies from a Gaussian band; α = diameter / distance.
SpeckleSource make_disk_source(const DiskSourceParams& params,
                               const RngSpec& rng);

/// One on-axis emitter of unit amplitude at z = 0.
SpeckleSource make_coherent_source(double wavelength_m, double distance_m);

double coherence_length(double wavelength_m, double angular_diameter_rad);

/**
 * One phase draw {φ_j} of a source.  The field is a deterministic function
 * of (point, time) for a fixed (rng, realization_id).
 */
class FieldRealization {
 public:
  FieldRealization(const SpeckleSource& source, const RngSpec& rng,
                   std::uint64_t realization_id);

  ComplexAmplitude at(const Vec3& point_m, double time_s) const;
  const std::vector<double>& phases() const { return phases_; }
  /// Emitter phase plus k × (axial distance to the detector plane), mod 2π.
  const std::vector<double>& base_phases() const { return base_; }
  /// Carrier frequency 2πc/λ whose time phase is factored out per call.
  double reference_omega() const { return omega_ref_; }

 private:
  const SpeckleSource* source_;
  std::vector<double> phases_;
  std::vector<double> wavenumbers_;
  std::vector<double> axial_;
  std::vector<double> base_;
  double omega_ref_ = 0.0;
};

ComplexAmplitude sample_field(const SpeckleSource& source, const Vec3& point_m,
                              double time_s, const RngSpec& rng,
                              std::uint64_t realization_id);

/// Square pixel grid in the detector plane (z = detector_plane_z_m).
struct GridSpec {
  std::size_t nx = 64;
  std::size_t ny = 64;
  double pitch_m = 1e-4;
  double center_x_m = 0.0;
  double center_y_m = 0.0;
};

struct IntensityMap {
  GridSpec grid;
  double time_s = 0.0;
  std::uint64_t realization_id = 0;
  double wavelength_m = 0.0;
  double angular_diameter_rad = 0.0;
  bool pitch_too_coarse = false;
  std::vector<double> values;  ///< row-major, values[iy * nx + ix]

  double at(std::size_t ix, std::size_t iy) const {
    return values[iy * grid.nx + ix];
  }
  double x_m(std::size_t ix) const;
  double y_m(std::size_t iy) const;
  /// CSV grid: header `x_m,y_m,intensity`, one row per pixel.
  std::string to_csv() const;
  /// JSON sidecar with pitch, λ, α, realization id and the coarseness flag.
  std::string metadata_json() const;
};

IntensityMap generate_intensity_map(const SpeckleSource& source,
                                    const GridSpec& grid, double time_s,
                                    const RngSpec& rng,
                                    std::uint64_t realization_id);

struct ExposureModel {
  double duration_ns = 1.0;  ///< events uniform-in-time over [0, duration)
};

struct EventSamplingOptions {
  /// Pre-scan pitch as a fraction of L_c (and of τ_c for time slices).
  double prescan_fraction = 1.0 / 6.0;
  double envelope_factor = 1.2;
  unsigned threads = 0;
};

/**
 * Inhomogeneous Poisson events with rate ∝ I(r, t), one field realization
 * per shot (realization_id = shot index), sampled by thinning against
 * 1.2 × the maximum of a pre-scan grid.  Shot i uses realization i.
 */
ShotList sample_detection_events(const SpeckleSource& source,
                                 const Detector& detector, std::size_t n_shots,
                                 double mean_events_per_shot,
                                 const ExposureModel& exposure,
                                 const RngSpec& rng,
                                 const EventSamplingOptions& options = {});

/// Complex field values, n_realizations × n_points, row-major by realization.
struct FieldRecords {
  std::size_t n_realizations = 0;
  std::size_t n_points = 0;
  std::vector<ComplexAmplitude> values;

  const ComplexAmplitude& at(std::size_t r, std::size_t p) const {
    return values[r * n_points + p];
  }
};

struct SpaceTimePoint {
  Vec3 position_m;
  double time_s = 0.0;
};

/// Record the field at fixed points for realizations [0, n_realizations).
FieldRecords record_field(const SpeckleSource& source,
                          const std::vector<SpaceTimePoint>& points,
                          std::size_t n_realizations, const RngSpec& rng,
                          unsigned threads = 0);

}  // namespace qcorr::speckle

#endif  // QCORR_SPECKLE_HPP_INCLUDED_
