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

#include "qcorr/speckle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <json.hpp>

#include "qcorr/parallel.hpp"

namespace qcorr::speckle {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Largest Fresnel phase error (rad) tolerated in the separable pre-scan.
constexpr double kFresnelPhaseTolerance = 0.05;

}  // namespace

double SpeckleSource::mean_intensity() const {
  double s = 0.0;
  for (double a : amplitudes) s += a * a;
  return s;
}

double SpeckleSource::coherence_time_s() const {
  if (bandwidth_rad_s <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / bandwidth_rad_s;
}

void SpeckleSource::validate() const {
  std::size_t n = positions_m.size();
  if (n == 0) throw ValidationError("speckle source has no emitters");
  if (amplitudes.size() != n || angular_frequencies.size() != n) {
    throw ValidationError(
        "speckle source: positions, amplitudes and frequencies differ in "
        "length");
  }
  if (!coherent && n < kMinThermalEmitters) {
    throw ValidationError("speckle source needs at least " +
                          std::to_string(kMinThermalEmitters) +
                          " emitters for a Gaussian field, got " +
                          std::to_string(n));
  }
  if (!(wavelength_m > 0.0) || !std::isfinite(wavelength_m)) {
    throw ValidationError("speckle source: wavelength must be positive");
  }
  if (!(angular_diameter_rad >= 0.0) || !std::isfinite(angular_diameter_rad)) {
    throw ValidationError("speckle source: angular diameter must be >= 0");
  }
  if (!(bandwidth_rad_s >= 0.0) || !std::isfinite(bandwidth_rad_s)) {
    throw ValidationError("speckle source: bandwidth must be >= 0");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(amplitudes[j] >= 0.0) || !std::isfinite(amplitudes[j])) {
      throw ValidationError("speckle source: amplitudes must be >= 0");
    }
    if (!(angular_frequencies[j] > 0.0) ||
        !std::isfinite(angular_frequencies[j])) {
      throw ValidationError("speckle source: frequencies must be positive");
    }
    const auto& p = positions_m[j];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw ValidationError("speckle source: non-finite emitter position");
    }
  }
}

SpeckleSource make_disk_source(const DiskSourceParams& params,
                               const RngSpec& rng) {
  if (!(params.source_diameter_m > 0.0) || !(params.distance_m > 0.0)) {
    throw ValidationError("disk source: diameter and distance must be > 0");
  }
  if (!(params.wavelength_m > 0.0)) {
    throw ValidationError("disk source: wavelength must be > 0");
  }
  SpeckleSource src;
  std::size_t n = params.n_emitters;
  src.positions_m.resize(n);
  src.amplitudes.assign(n, n > 0 ? 1.0 / std::sqrt(static_cast<double>(n))
                                 : 0.0);
  src.angular_frequencies.resize(n);
  src.wavelength_m = params.wavelength_m;
  src.angular_diameter_rad = params.source_diameter_m / params.distance_m;
  src.bandwidth_rad_s = params.bandwidth_rad_s;
  src.detector_plane_z_m = params.distance_m;

  Rng gen(rng, StreamTag::speckle_emitters);
  double radius = 0.5 * params.source_diameter_m;
  double omega0 = kTwoPi * kSpeedOfLight / params.wavelength_m;
  for (std::size_t j = 0; j < n; ++j) {
    double r = radius * std::sqrt(gen.uniform());
    double th = kTwoPi * gen.uniform();
    src.positions_m[j] = Vec3{r * std::cos(th), r * std::sin(th), 0.0};
    double w = omega0 + params.bandwidth_rad_s * gen.normal();
    src.angular_frequencies[j] = w;
  }
  src.validate();
  return src;
}

SpeckleSource make_coherent_source(double wavelength_m, double distance_m) {
  if (!(wavelength_m > 0.0) || !(distance_m > 0.0)) {
    throw ValidationError(
        "coherent source: wavelength and distance must be > 0");
  }
  SpeckleSource src;
  src.positions_m = {Vec3{}};
  src.amplitudes = {1.0};
  src.angular_frequencies = {kTwoPi * kSpeedOfLight / wavelength_m};
  src.wavelength_m = wavelength_m;
  src.angular_diameter_rad = 0.0;
  src.detector_plane_z_m = distance_m;
  src.coherent = true;
  return src;
}

double coherence_length(double wavelength_m, double angular_diameter_rad) {
  if (!(wavelength_m > 0.0) || !std::isfinite(wavelength_m)) {
    throw InvalidArgument("coherence_length: wavelength must be > 0");
  }
  if (angular_diameter_rad == 0.0) {
    throw InvalidArgument(
        "coherence_length: zero angular diameter (plane wave, infinite "
        "coherence length)");
  }
  if (!(angular_diameter_rad > 0.0) || !std::isfinite(angular_diameter_rad)) {
    throw InvalidArgument("coherence_length: angular diameter must be > 0");
  }
  return wavelength_m / angular_diameter_rad;
}

// ---------------------------------------------------------------------------

FieldRealization::FieldRealization(const SpeckleSource& source,
                                   const RngSpec& rng,
                                   std::uint64_t realization_id)
  : source_(&source) {
  std::size_t n = source.n_emitters();
  phases_.resize(n);
  wavenumbers_.resize(n);
  axial_.resize(n);
  base_.resize(n);
  Rng gen(rng, StreamTag::speckle_phases, realization_id);
  for (std::size_t j = 0; j < n; ++j) {
    phases_[j] = kTwoPi * gen.uniform();
    wavenumbers_[j] = source.angular_frequencies[j] / kSpeedOfLight;
    // Split k d into k d_axial (reduced once) plus a small remainder so the
    // per-point phase stays well inside the fast range of sin/cos.
    axial_[j] = source.detector_plane_z_m - source.positions_m[j].z;
    base_[j] = phases_[j] + std::fmod(wavenumbers_[j] * axial_[j], kTwoPi);
  }
  omega_ref_ = kTwoPi * kSpeedOfLight / source.wavelength_m;
}

ComplexAmplitude FieldRealization::at(const Vec3& p, double time_s) const {
  const auto& pos = source_->positions_m;
  const auto& amp = source_->amplitudes;
  const auto& omega = source_->angular_frequencies;
  // exp(-i ω_ref t) is common to every emitter; reduce it once.
  double common = std::fmod(omega_ref_ * time_s, kTwoPi);
  double re = 0.0;
  double im = 0.0;
  for (std::size_t j = 0; j < pos.size(); ++j) {
    double dx = p.x - pos[j].x;
    double dy = p.y - pos[j].y;
    double dz = p.z - pos[j].z;
    double d = std::sqrt(dx * dx + dy * dy + dz * dz);
    if (d < 1e-12) {
      throw InvalidArgument(
          "sample_field: point coincides with an emitter (singular "
          "geometry)");
    }
    // d - axial without cancellation.
    double excess = (dx * dx + dy * dy + (dz - axial_[j]) * (dz + axial_[j])) /
                    (d + std::fabs(axial_[j]));
    if (axial_[j] < 0.0) excess = d - axial_[j];
    double ph = base_[j] + wavenumbers_[j] * excess -
                (omega[j] - omega_ref_) * time_s - common;
    re += amp[j] * std::cos(ph);
    im += amp[j] * std::sin(ph);
  }
  return {re, im};
}

ComplexAmplitude sample_field(const SpeckleSource& source, const Vec3& point_m,
                              double time_s, const RngSpec& rng,
                              std::uint64_t realization_id) {
  source.validate();
  FieldRealization fr(source, rng, realization_id);
  return fr.at(point_m, time_s);
}

// ---------------------------------------------------------------------------

double IntensityMap::x_m(std::size_t ix) const {
  return grid.center_x_m +
         (static_cast<double>(ix) - 0.5 * static_cast<double>(grid.nx - 1)) *
             grid.pitch_m;
}

double IntensityMap::y_m(std::size_t iy) const {
  return grid.center_y_m +
         (static_cast<double>(iy) - 0.5 * static_cast<double>(grid.ny - 1)) *
             grid.pitch_m;
}

std::string IntensityMap::to_csv() const {
  std::string out = "x_m,y_m,intensity\n";
  out.reserve(out.size() + values.size() * 36);
  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      out += format_g9(x_m(ix));
      out += ',';
      out += format_g9(y_m(iy));
      out += ',';
      out += format_g9(at(ix, iy));
      out += '\n';
    }
  }
  return out;
}

std::string IntensityMap::metadata_json() const {
  nlohmann::json j;
  j["nx"] = grid.nx;
  j["ny"] = grid.ny;
  j["pitch_m"] = grid.pitch_m;
  j["center_x_m"] = grid.center_x_m;
  j["center_y_m"] = grid.center_y_m;
  j["time_s"] = time_s;
  j["wavelength_m"] = wavelength_m;
  j["angular_diameter_rad"] = angular_diameter_rad;
  j["coherence_length_m"] =
      angular_diameter_rad > 0.0 ? wavelength_m / angular_diameter_rad
                                 : std::numeric_limits<double>::infinity();
  j["realization_id"] = realization_id;
  j["pitch_too_coarse"] = pitch_too_coarse;
  return j.dump(2) + "\n";
}

IntensityMap generate_intensity_map(const SpeckleSource& source,
                                    const GridSpec& grid, double time_s,
                                    const RngSpec& rng,
                                    std::uint64_t realization_id) {
  source.validate();
  if (grid.nx == 0 || grid.ny == 0 || !(grid.pitch_m > 0.0)) {
    throw ValidationError("intensity map: empty grid or non-positive pitch");
  }
  IntensityMap map;
  map.grid = grid;
  map.time_s = time_s;
  map.realization_id = realization_id;
  map.wavelength_m = source.wavelength_m;
  map.angular_diameter_rad = source.angular_diameter_rad;
  if (source.angular_diameter_rad > 0.0) {
    double lc = source.wavelength_m / source.angular_diameter_rad;
    map.pitch_too_coarse = !(grid.pitch_m < 0.25 * lc);
  }
  map.values.assign(grid.nx * grid.ny, 0.0);
  FieldRealization fr(source, rng, realization_id);
  parallel_chunks(grid.ny, 0, [&](unsigned, std::size_t b, std::size_t e) {
    for (std::size_t iy = b; iy < e; ++iy) {
      for (std::size_t ix = 0; ix < grid.nx; ++ix) {
        Vec3 p{map.x_m(ix), map.y_m(iy), source.detector_plane_z_m};
        map.values[iy * grid.nx + ix] = std::norm(fr.at(p, time_s));
      }
    }
  });
  return map;
}

// ---------------------------------------------------------------------------
// Detection events

namespace {

/**
 * Pre-scan of |E|² on a grid covering the detector disk.  Far from the
 * source the path length factorizes in the Fresnel approximation, so the
 * grid field is U^T diag(c) V with U, V fixed per source and c holding the
 * per-realization phases.  Falls back to the exact sum when the Fresnel
 * phase error bound is too large.
 */
class PrescanGrid {
 public:
  PrescanGrid(const SpeckleSource& src, double radius_m, double pitch_m)
    : src_(src), radius_m_(radius_m) {
    std::size_t half = static_cast<std::size_t>(std::ceil(radius_m / pitch_m));
    n_ = 2 * half + 1;
    coords_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      coords_[i] = (static_cast<double>(i) - static_cast<double>(half)) *
                   pitch_m;
    }
    double reach = radius_m + pitch_m;
    mask_.assign(n_ * n_, 0);
    for (std::size_t iy = 0; iy < n_; ++iy) {
      for (std::size_t ix = 0; ix < n_; ++ix) {
        double r2 = coords_[ix] * coords_[ix] + coords_[iy] * coords_[iy];
        mask_[iy * n_ + ix] = r2 <= reach * reach ? 1 : 0;
      }
    }

    std::size_t m = src.n_emitters();
    double rho_src = 0.0;
    double dmin = std::numeric_limits<double>::infinity();
    double kmax = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const auto& p = src.positions_m[j];
      rho_src = std::max(rho_src, std::hypot(p.x, p.y));
      dmin = std::min(dmin, src.detector_plane_z_m - p.z);
      kmax = std::max(kmax, src.angular_frequencies[j] / kSpeedOfLight);
    }
    double rho = reach * std::sqrt(2.0) + rho_src;
    fresnel_ = dmin > 0.0 &&
               kmax * std::pow(rho, 4) / (8.0 * dmin * dmin * dmin) <=
                   kFresnelPhaseTolerance;
    if (!fresnel_) return;

    u_.resize(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(m));
    v_.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n_));
    for (std::size_t j = 0; j < m; ++j) {
      const auto& p = src.positions_m[j];
      double k = src.angular_frequencies[j] / kSpeedOfLight;
      double d = src.detector_plane_z_m - p.z;
      for (std::size_t i = 0; i < n_; ++i) {
        double ax = coords_[i] - p.x;
        double ay = coords_[i] - p.y;
        u_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            std::polar(1.0, k * ax * ax / (2.0 * d));
        v_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
            std::polar(1.0, k * ay * ay / (2.0 * d));
      }
    }
  }

  /// Maximum |E|² over the masked grid at one time slice.
  double max_intensity(const FieldRealization& fr, double time_s) const {
    double best = 0.0;
    if (fresnel_) {
      std::size_t m = src_.n_emitters();
      Eigen::MatrixXcd cv(static_cast<Eigen::Index>(m),
                          static_cast<Eigen::Index>(n_));
      for (std::size_t j = 0; j < m; ++j) {
        double ph = fr.base_phases()[j] -
                    (src_.angular_frequencies[j] - fr.reference_omega()) *
                        time_s -
                    std::fmod(fr.reference_omega() * time_s, kTwoPi);
        cv.row(static_cast<Eigen::Index>(j)) =
            std::polar(src_.amplitudes[j], ph) *
            v_.row(static_cast<Eigen::Index>(j));
      }
      Eigen::MatrixXcd field = u_ * cv;  // (x, y)
      for (std::size_t iy = 0; iy < n_; ++iy) {
        for (std::size_t ix = 0; ix < n_; ++ix) {
          if (!mask_[iy * n_ + ix]) continue;
          best = std::max(best, std::norm(field(static_cast<Eigen::Index>(ix),
                                                static_cast<Eigen::Index>(iy))));
        }
      }
      return best;
    }
    for (std::size_t iy = 0; iy < n_; ++iy) {
      for (std::size_t ix = 0; ix < n_; ++ix) {
        if (!mask_[iy * n_ + ix]) continue;
        Vec3 p{coords_[ix], coords_[iy], src_.detector_plane_z_m};
        best = std::max(best, std::norm(fr.at(p, time_s)));
      }
    }
    return best;
  }

 private:
  const SpeckleSource& src_;
  double radius_m_;
  std::size_t n_ = 0;
  std::vector<double> coords_;
  std::vector<unsigned char> mask_;
  bool fresnel_ = false;
  Eigen::MatrixXcd u_;
  Eigen::MatrixXcd v_;
};

}  // namespace

ShotList sample_detection_events(const SpeckleSource& source,
                                 const Detector& detector, std::size_t n_shots,
                                 double mean_events_per_shot,
                                 const ExposureModel& exposure,
                                 const RngSpec& rng,
                                 const EventSamplingOptions& options) {
  source.validate();
  detector.validate();
  if (!(mean_events_per_shot > 0.0) || !std::isfinite(mean_events_per_shot)) {
    throw ValidationError("mean_events_per_shot must be > 0");
  }
  if (!(detector.radius_mm > 0.0)) {
    throw ValidationError(
        "speckle events need a finite detector radius (> 0)");
  }
  if (!(exposure.duration_ns > 0.0) || !std::isfinite(exposure.duration_ns)) {
    throw ValidationError("exposure duration must be > 0");
  }
  if (!(options.prescan_fraction > 0.0) || !(options.envelope_factor >= 1.0)) {
    throw ValidationError("invalid pre-scan options");
  }

  const double radius_m = detector.radius_mm * 1e-3;
  const double duration_s = exposure.duration_ns * 1e-9;
  double lc = source.angular_diameter_rad > 0.0
                  ? source.wavelength_m / source.angular_diameter_rad
                  : radius_m;
  double pitch_m = std::min(options.prescan_fraction * lc, radius_m);

  // Time slices centred in sub-intervals no longer than fraction * τ_c.
  double tau_c = source.coherence_time_s();
  std::size_t n_slices = 1;
  if (std::isfinite(tau_c)) {
    n_slices = static_cast<std::size_t>(
        std::ceil(duration_s / (options.prescan_fraction * tau_c)));
    n_slices = std::max<std::size_t>(n_slices, 1);
  }

  PrescanGrid prescan(source, radius_m, pitch_m);
  const double mean_i = source.mean_intensity();
  if (!(mean_i > 0.0)) throw ValidationError("source has zero intensity");

  ShotList shots(n_shots);
  parallel_chunks(n_shots, options.threads,
                  [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      FieldRealization fr(source, rng, s);
      double imax = 0.0;
      for (std::size_t k = 0; k < n_slices; ++k) {
        double t = (static_cast<double>(k) + 0.5) /
                   static_cast<double>(n_slices) * duration_s;
        imax = std::max(imax, prescan.max_intensity(fr, t));
      }
      double envelope = options.envelope_factor * imax;
      Shot& shot = shots[s];
      shot.shot_id = static_cast<std::int64_t>(s);
      if (!(envelope > 0.0)) continue;

      Rng gen(rng, StreamTag::speckle_thinning, s);
      std::uint64_t n_cand =
          gen.poisson(mean_events_per_shot * envelope / mean_i);
      for (std::uint64_t c = 0; c < n_cand; ++c) {
        double r = radius_m * std::sqrt(gen.uniform());
        double th = kTwoPi * gen.uniform();
        double t = duration_s * gen.uniform();
        double u = gen.uniform();
        Vec3 p{r * std::cos(th), r * std::sin(th), source.detector_plane_z_m};
        double inten = std::norm(fr.at(p, t));
        if (inten > envelope) {
          throw InternalError(
              "thinning envelope violated in shot " + std::to_string(s) +
              ": intensity " + std::to_string(inten) + " exceeds bound " +
              std::to_string(envelope));
        }
        if (u * envelope < inten) {
          shot.events.push_back(make_event(p.x * 1e3, p.y * 1e3, t * 1e9));
        }
      }
      shot.canonicalize();
    }
  });
  return shots;
}

FieldRecords record_field(const SpeckleSource& source,
                          const std::vector<SpaceTimePoint>& points,
                          std::size_t n_realizations, const RngSpec& rng,
                          unsigned threads) {
  source.validate();
  FieldRecords rec;
  rec.n_realizations = n_realizations;
  rec.n_points = points.size();
  rec.values.assign(n_realizations * points.size(), ComplexAmplitude{});
  parallel_chunks(n_realizations, threads,
                  [&](unsigned, std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      FieldRealization fr(source, rng, r);
      for (std::size_t p = 0; p < points.size(); ++p) {
        rec.values[r * points.size() + p] =
            fr.at(points[p].position_m, points[p].time_s);
      }
    }
  });
  return rec;
}

}  // namespace qcorr::speckle
