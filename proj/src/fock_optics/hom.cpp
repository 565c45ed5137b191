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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qcorr/fock_optics.hpp"

namespace qcorr::fock {

namespace {

const std::vector<std::string>& hom_modes() {
  static const std::vector<std::string> modes{"a", "b", "a_perp", "b_perp"};
  return modes;
}

double pair_weight(double nbar, int n) {
  double x = nbar / (1.0 + nbar);
  return (1.0 - x) * std::pow(x, n);
}

}  // namespace

void HomSource::validate() const {
  if (kind != SourceKind::tmsv) return;
  if (!(nbar >= 0.0 && nbar < 1.0)) {
    throw ValidationError("tmsv mean occupation must be in [0, 1)");
  }
  int cap = FockState::kMaxParticles / 2;
  if (max_pairs < 1 || max_pairs > cap) {
    throw ValidationError("tmsv max_pairs must be in [1, " +
                          std::to_string(cap) + "]");
  }
}

std::string source_name(SourceKind kind) {
  switch (kind) {
    case SourceKind::ideal_pair: return "ideal_pair";
    case SourceKind::tmsv: return "tmsv";
    case SourceKind::classical: return "classical";
  }
  return "ideal_pair";
}

SourceKind parse_source(const std::string& name) {
  if (name == "ideal_pair") return SourceKind::ideal_pair;
  if (name == "tmsv") return SourceKind::tmsv;
  if (name == "classical") return SourceKind::classical;
  throw InvalidArgument("unknown source '" + name + "'");
}

double mode_overlap(double delay, double packet_sigma) {
  if (!(packet_sigma > 0.0) || !std::isfinite(packet_sigma)) {
    throw ValidationError("packet sigma must be > 0");
  }
  if (!std::isfinite(delay)) throw ValidationError("delay must be finite");
  return std::exp(-delay * delay / (4.0 * packet_sigma * packet_sigma));
}

FockState hom_output_state(int pairs, double overlap) {
  if (pairs < 1 || 2 * pairs > FockState::kMaxParticles) {
    throw ValidationError("pair count outside the Fock cap");
  }
  if (!(overlap >= 0.0 && overlap <= 1.0)) {
    throw ValidationError("mode overlap must be in [0, 1]");
  }
  // b's packet = v (a-matched mode) + w (orthogonal mode).
  const double v = overlap;
  const double w = std::sqrt((1.0 - v) * (1.0 + v));
  std::map<Occupation, ComplexAmplitude> terms;
  double nf = std::tgamma(pairs + 1.0);
  for (int k = 0; k <= pairs; ++k) {
    double c = std::tgamma(pairs + 1.0) /
               (std::tgamma(k + 1.0) * std::tgamma(pairs - k + 1.0)) *
               std::pow(v, k) * std::pow(w, pairs - k) *
               std::sqrt(std::tgamma(k + 1.0) * std::tgamma(pairs - k + 1.0) /
                         nf);
    if (c == 0.0) continue;
    terms[{pairs, k, 0, pairs - k}] = ComplexAmplitude(c, 0.0);
  }
  // Renormalize away rounding in the binomial expansion.
  double n2 = 0.0;
  for (const auto& [o, a] : terms) n2 += std::norm(a);
  if (std::fabs(n2 - 1.0) > 1e-14) {
    for (auto& [o, a] : terms) a /= std::sqrt(n2);
  }
  FockState in(hom_modes(), std::move(terms));
  FockState mid = splitter_transform(in, SplitterSpec::balanced(), "a", "b");
  return splitter_transform(mid, SplitterSpec::balanced(), "a_perp", "b_perp");
}

namespace {

double joint_from_state(const FockState& s) {
  double p = 0.0;
  for (const auto& [occ, amp] : s.terms()) {
    if (occ[0] + occ[2] >= 1 && occ[1] + occ[3] >= 1) p += std::norm(amp);
  }
  return p;
}

}  // namespace

double hom_coincidence(double delay, double packet_sigma,
                       const HomSource& source) {
  source.validate();
  double v = mode_overlap(delay, packet_sigma);
  switch (source.kind) {
    case SourceKind::ideal_pair:
      return joint_from_state(hom_output_state(1, v));
    case SourceKind::classical:
      return 0.25 * (1.0 - 0.5 * v * v);
    case SourceKind::tmsv: {
      double p = 0.0;
      for (int n = 1; n <= source.max_pairs; ++n) {
        p += pair_weight(source.nbar, n) *
             joint_from_state(hom_output_state(n, v));
      }
      return p;
    }
  }
  return 0.0;
}

double tmsv_truncation_tail(const HomSource& source) {
  source.validate();
  if (source.kind != SourceKind::tmsv) return 0.0;
  double x = source.nbar / (1.0 + source.nbar);
  return std::pow(x, source.max_pairs + 1);
}

// ---------------------------------------------------------------------------

ClassicalRates classical_rates(double phi) {
  double s = std::sin(phi), c = std::cos(phi);
  return ClassicalRates{s * s, c * c, s * s * c * c};
}

ClassicalBaseline classical_hom_baseline(std::size_t n_phase_samples,
                                         const RngSpec& rng) {
  if (n_phase_samples < 10000) {
    throw ValidationError("classical baseline needs >= 1e4 phase samples");
  }
  Rng gen(rng, StreamTag::classical_baseline);
  double s3 = 0.0, s4 = 0.0, s2 = 0.0, s22 = 0.0;
  // Per-sample values for the ratio's delta-method variance.
  double s33 = 0.0, s44 = 0.0, s34 = 0.0, s23 = 0.0, s24 = 0.0;
  for (std::size_t i = 0; i < n_phase_samples; ++i) {
    ClassicalRates r = classical_rates(2.0 * std::numbers::pi * gen.uniform());
    s3 += r.w1_d3;
    s4 += r.w1_d4;
    s2 += r.w2_joint;
    s22 += r.w2_joint * r.w2_joint;
    s33 += r.w1_d3 * r.w1_d3;
    s44 += r.w1_d4 * r.w1_d4;
    s34 += r.w1_d3 * r.w1_d4;
    s23 += r.w2_joint * r.w1_d3;
    s24 += r.w2_joint * r.w1_d4;
  }
  double n = static_cast<double>(n_phase_samples);
  ClassicalBaseline out;
  out.samples = n_phase_samples;
  out.w1_d3 = s3 / n;
  out.w1_d4 = s4 / n;
  out.w2_joint = s2 / n;
  out.ratio = out.w2_joint / (out.w1_d3 * out.w1_d4);
  out.w2_stderr = std::sqrt(std::max(0.0, s22 / n - out.w2_joint * out.w2_joint) / n);

  // ratio = m2 / (m3 m4); gradient g = (1/(m3 m4), −R/m3, −R/m4).
  double m2 = out.w2_joint, m3 = out.w1_d3, m4 = out.w1_d4, R = out.ratio;
  double c22 = s22 / n - m2 * m2, c33 = s33 / n - m3 * m3,
         c44 = s44 / n - m4 * m4, c23 = s23 / n - m2 * m3,
         c24 = s24 / n - m2 * m4, c34 = s34 / n - m3 * m4;
  double g2 = 1.0 / (m3 * m4), g3 = -R / m3, g4 = -R / m4;
  double var = g2 * g2 * c22 + g3 * g3 * c33 + g4 * g4 * c44 +
               2.0 * (g2 * g3 * c23 + g2 * g4 * c24 + g3 * g4 * c34);
  out.ratio_stderr = std::sqrt(std::max(0.0, var) / n);
  return out;
}

// ---------------------------------------------------------------------------

std::string witness_name(Witness w) {
  switch (w) {
    case Witness::quantum_witness: return "QUANTUM-WITNESS";
    case Witness::no_witness: return "NO-WITNESS";
    case Witness::inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

std::string DipScan::to_csv() const {
  std::string out = "delay_ns,p_joint,stderr\n";
  for (std::size_t i = 0; i < delays_ns.size(); ++i) {
    out += format_g9(delays_ns[i]);
    out += ',';
    out += format_g9(p_joint[i]);
    out += ',';
    out += format_g9(stderr_[i]);
    out += '\n';
  }
  return out;
}

DipScan hom_dip_scan(const std::vector<double>& delays_ns,
                     double packet_sigma_ns, const HomSource& source,
                     std::size_t n_shots, const RngSpec& rng) {
  source.validate();
  if (!(packet_sigma_ns > 0.0)) throw ValidationError("packet sigma must be > 0");
  if (n_shots == 0) throw ValidationError("dip scan needs >= 1 shot per delay");
  const double far = kFarDelaySigmas * packet_sigma_ns;
  bool has_zero = false, has_far = false;
  for (double d : delays_ns) {
    if (!std::isfinite(d)) throw ValidationError("delays must be finite");
    has_zero = has_zero || d == 0.0;
    has_far = has_far || std::fabs(d) >= far;
  }
  if (!has_zero) throw ValidationError("dip scan delays must include 0");
  if (!has_far) {
    throw ValidationError("dip scan delays must include points at |delay| >= " +
                          format_g9(far) + " ns");
  }

  DipScan scan;
  scan.delays_ns = delays_ns;
  scan.packet_sigma_ns = packet_sigma_ns;
  scan.shots_per_delay = n_shots;
  scan.source = source.kind;
  const double n = static_cast<double>(n_shots);
  std::size_t k0 = 0, n0 = 0, kf = 0, nf = 0;
  for (std::size_t i = 0; i < delays_ns.size(); ++i) {
    double p = hom_coincidence(delays_ns[i], packet_sigma_ns, source);
    Rng gen(rng, StreamTag::hom_scan, i);
    std::size_t hits = 0;
    for (std::size_t s = 0; s < n_shots; ++s) {
      if (gen.uniform() < p) ++hits;
    }
    double ph = static_cast<double>(hits) / n;
    scan.coincidences.push_back(hits);
    scan.p_joint.push_back(ph);
    scan.stderr_.push_back(std::sqrt(ph * (1.0 - ph) / n));
    if (delays_ns[i] == 0.0) {
      k0 += hits;
      n0 += n_shots;
    }
    if (std::fabs(delays_ns[i]) >= far) {
      kf += hits;
      nf += n_shots;
    }
  }
  scan.p_zero = static_cast<double>(k0) / static_cast<double>(n0);
  scan.p_far = static_cast<double>(kf) / static_cast<double>(nf);
  if (kf == 0 || n_shots < kWitnessMinShots) {
    scan.witness = Witness::inconclusive;
    scan.visibility = kf == 0 ? 0.0 : 1.0 - scan.p_zero / scan.p_far;
    return scan;
  }
  scan.visibility = 1.0 - scan.p_zero / scan.p_far;
  // Binomial errors; an empty zero-delay count is floored at one event so a
  // perfect dip still carries a finite uncertainty.
  double se0 = std::sqrt(static_cast<double>(std::max<std::size_t>(k0, 1)) *
                         (1.0 - scan.p_zero)) /
               static_cast<double>(n0);
  double sef = std::sqrt(scan.p_far * (1.0 - scan.p_far) /
                         static_cast<double>(nf));
  double r = scan.p_zero / scan.p_far;
  scan.visibility_stderr =
      std::sqrt(se0 * se0 / (scan.p_far * scan.p_far) +
                r * r * sef * sef / (scan.p_far * scan.p_far));
  scan.witness = scan.visibility - 0.5 >= 3.0 * scan.visibility_stderr
                     ? Witness::quantum_witness
                     : Witness::no_witness;
  return scan;
}

}  // namespace qcorr::fock
