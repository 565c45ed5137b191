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
 * @file atom_hom.hpp
 * @brief Free-fall kinematics of a twin-atom pair with a mirror pulse at t1
 *        and a splitter pulse at t2, mapped onto the HOM dip.
 *
 * Units: time in ms, position in mm, velocity in mm/ms.  The emission point
 * is z = 0 at t0.
 */

#ifndef QCORR_ATOM_HOM_HPP_INCLUDED_
#define QCORR_ATOM_HOM_HPP_INCLUDED_

#include <string>
#include <utility>
#include <vector>

#include "qcorr/fock_optics.hpp"

namespace qcorr::atom {

inline constexpr double kStandardGravity = 9.81e-3;  // mm/ms²
inline constexpr double kNsPerMs = 1e6;

struct TrajectorySpec {
  double t0_ms = 0.0;
  double t1_ms = 1.0;
  double t2_ms = 2.0;
  double v_mm_per_ms = 0.05;
  double v_prime_mm_per_ms = -0.05;
  double gravity = kStandardGravity;
  /// Pulses act in the falling frame (chirped standing wave).
  bool chirped = true;

  void validate() const;
  double cm_velocity() const { return 0.5 * (v_mm_per_ms + v_prime_mm_per_ms); }
  double relative_speed() const;
  /// Time at which the branches cross after the mirror pulse: 2 t1 − t0.
  double crossing_time() const { return 2.0 * t1_ms - t0_ms; }
};

struct TrajectoryPoint {
  double t_ms = 0.0;
  double z_mm = 0.0;
};

/// Branch 0 starts with v, branch 1 with v'.  Velocities are exchanged at
/// t1 (the mirror reverses the relative motion).
double lab_position(const TrajectorySpec& spec, int branch, double t_ms);
std::vector<TrajectoryPoint> lab_trajectory(const TrajectorySpec& spec,
                                            int branch,
                                            const std::vector<double>& times);

/// Center-of-mass parabola z_cm(t) = v_cm (t − t0) − g (t − t0)² / 2.
double center_of_mass(const TrajectorySpec& spec, double t_ms);

std::vector<TrajectoryPoint> to_freefall_frame(
    const TrajectorySpec& spec, const std::vector<TrajectoryPoint>& lab);
std::vector<TrajectoryPoint> to_lab_frame(
    const TrajectorySpec& spec, const std::vector<TrajectoryPoint>& frame);

enum class PulseArea { pi, pi_over_2 };

struct PulseSpec {
  PulseArea area = PulseArea::pi;
  std::pair<std::string, std::string> modes{"p", "p'"};
};

/// π acts as a mirror (a → b, b → −a); π/2 as a balanced splitter.
fock::FockState apply_pulse(const fock::FockState& state,
                            const PulseSpec& pulse);

/// Residual timing error Δ = t2 − (2 t1 − t0) in ms.
double timing_detuning(const TrajectorySpec& spec);

/**
 * Arrival-time mismatch at the splitter pulse in ns.  At t2 the branches
 * sit at ∓u Δ / 2 in the falling frame; each output momentum mode collects
 * one packet from each branch, offset by u Δ at speed u / 2, so the delay
 * is 2 Δ.
 */
double overlap_from_timing(const TrajectorySpec& spec);

struct TrajectoryScan {
  std::vector<double> t2_ms;
  fock::DipScan dip;
  /// `t2_ms,delay_ns,p_joint,stderr`
  std::string to_csv() const;
};

TrajectoryScan scan_t2(const TrajectorySpec& spec,
                       const std::vector<double>& t2_values_ms,
                       double packet_sigma_ns, const fock::HomSource& source,
                       std::size_t n_shots, const RngSpec& rng);

}  // namespace qcorr::atom

#endif  // QCORR_ATOM_HOM_HPP_INCLUDED_
