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

#include <cmath>

#include "qcorr/atom_hom.hpp"

namespace qcorr::atom {

void TrajectorySpec::validate() const {
  for (double v : {t0_ms, t1_ms, t2_ms, v_mm_per_ms, v_prime_mm_per_ms,
                   gravity}) {
    if (!std::isfinite(v)) throw ValidationError("trajectory values must be finite");
  }
  if (!(t0_ms < t1_ms && t1_ms < t2_ms)) {
    throw ValidationError("trajectory needs t0 < t1 < t2");
  }
  if (v_mm_per_ms == v_prime_mm_per_ms) {
    throw ValidationError("pair velocities must differ");
  }
  if (!chirped) {
    throw ValidationError(
        "pulses must be stationary in the falling frame (chirped = true)");
  }
}

double TrajectorySpec::relative_speed() const {
  return std::fabs(v_mm_per_ms - v_prime_mm_per_ms);
}

double center_of_mass(const TrajectorySpec& spec, double t_ms) {
  double s = t_ms - spec.t0_ms;
  return spec.cm_velocity() * s - 0.5 * spec.gravity * s * s;
}

double lab_position(const TrajectorySpec& spec, int branch, double t_ms) {
  if (branch != 0 && branch != 1) throw InvalidArgument("branch must be 0 or 1");
  double v = branch == 0 ? spec.v_mm_per_ms : spec.v_prime_mm_per_ms;
  double v_other = branch == 0 ? spec.v_prime_mm_per_ms : spec.v_mm_per_ms;
  double s = t_ms - spec.t0_ms;
  if (t_ms <= spec.t1_ms) return v * s - 0.5 * spec.gravity * s * s;
  double s1 = spec.t1_ms - spec.t0_ms;
  double z1 = v * s1 - 0.5 * spec.gravity * s1 * s1;
  // Mirror at t1: the branches exchange their initial velocities.
  double vel1 = v_other - spec.gravity * s1;
  double d = t_ms - spec.t1_ms;
  return z1 + vel1 * d - 0.5 * spec.gravity * d * d;
}

std::vector<TrajectoryPoint> lab_trajectory(const TrajectorySpec& spec,
                                            int branch,
                                            const std::vector<double>& times) {
  spec.validate();
  std::vector<TrajectoryPoint> out;
  out.reserve(times.size());
  for (double t : times) out.push_back({t, lab_position(spec, branch, t)});
  return out;
}

std::vector<TrajectoryPoint> to_freefall_frame(
    const TrajectorySpec& spec, const std::vector<TrajectoryPoint>& lab) {
  std::vector<TrajectoryPoint> out(lab.size());
  for (std::size_t i = 0; i < lab.size(); ++i) {
    out[i] = {lab[i].t_ms, lab[i].z_mm - center_of_mass(spec, lab[i].t_ms)};
  }
  return out;
}

std::vector<TrajectoryPoint> to_lab_frame(
    const TrajectorySpec& spec, const std::vector<TrajectoryPoint>& frame) {
  std::vector<TrajectoryPoint> out(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) {
    out[i] = {frame[i].t_ms,
              frame[i].z_mm + center_of_mass(spec, frame[i].t_ms)};
  }
  return out;
}

fock::FockState apply_pulse(const fock::FockState& state,
                            const PulseSpec& pulse) {
  const auto& [a, b] = pulse.modes;
  // Resolve both labels first so a missing mode reports cleanly.
  state.mode_index(a);
  state.mode_index(b);
  fock::SplitterSpec s = pulse.area == PulseArea::pi
                             ? fock::SplitterSpec::mirror()
                             : fock::SplitterSpec::balanced();
  return fock::splitter_transform(state, s, a, b);
}

double timing_detuning(const TrajectorySpec& spec) {
  return spec.t2_ms - spec.crossing_time();
}

double overlap_from_timing(const TrajectorySpec& spec) {
  spec.validate();
  return 2.0 * timing_detuning(spec) * kNsPerMs;
}

std::string TrajectoryScan::to_csv() const {
  std::string out = "t2_ms,delay_ns,p_joint,stderr\n";
  for (std::size_t i = 0; i < t2_ms.size(); ++i) {
    out += format_g9(t2_ms[i]);
    out += ',';
    out += format_g9(dip.delays_ns[i]);
    out += ',';
    out += format_g9(dip.p_joint[i]);
    out += ',';
    out += format_g9(dip.stderr_[i]);
    out += '\n';
  }
  return out;
}

TrajectoryScan scan_t2(const TrajectorySpec& spec,
                       const std::vector<double>& t2_values_ms,
                       double packet_sigma_ns, const fock::HomSource& source,
                       std::size_t n_shots, const RngSpec& rng) {
  if (t2_values_ms.empty()) throw ValidationError("t2 scan needs >= 1 value");
  std::vector<double> delays;
  delays.reserve(t2_values_ms.size());
  for (double t2 : t2_values_ms) {
    TrajectorySpec s = spec;
    s.t2_ms = t2;
    delays.push_back(overlap_from_timing(s));
  }
  TrajectoryScan scan;
  scan.t2_ms = t2_values_ms;
  scan.dip = fock::hom_dip_scan(delays, packet_sigma_ns, source, n_shots, rng);
  return scan;
}

}  // namespace qcorr::atom
