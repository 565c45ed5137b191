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
#include <set>

#include "qcorr/fock_optics.hpp"

namespace qcorr::fock {

namespace {

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

FockState::FockState(std::vector<std::string> modes,
                     const Occupation& occupation)
  : modes_(std::move(modes)) {
  terms_[occupation] = ComplexAmplitude(1.0, 0.0);
  validate();
}

FockState::FockState(std::vector<std::string> modes,
                     std::map<Occupation, ComplexAmplitude> terms)
  : modes_(std::move(modes)), terms_(std::move(terms)) {
  validate();
}

std::size_t FockState::mode_index(const std::string& label) const {
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (modes_[i] == label) return i;
  }
  throw InvalidArgument("unknown mode '" + label + "'");
}

ComplexAmplitude FockState::amplitude(const Occupation& occupation) const {
  auto it = terms_.find(occupation);
  return it == terms_.end() ? ComplexAmplitude{} : it->second;
}

double FockState::probability(const Occupation& occupation) const {
  return std::norm(amplitude(occupation));
}

double FockState::norm_squared() const {
  double s = 0.0;
  for (const auto& [occ, amp] : terms_) s += std::norm(amp);
  return s;
}

void FockState::check_shape() const {
  if (modes_.empty()) throw ValidationError("Fock state needs >= 1 mode");
  std::set<std::string> labels(modes_.begin(), modes_.end());
  if (labels.size() != modes_.size()) {
    throw ValidationError("Fock state mode labels must be distinct");
  }
  for (const auto& [occ, amp] : terms_) {
    if (occ.size() != modes_.size()) {
      throw ValidationError("occupation vector length differs from mode count");
    }
    int total = 0;
    for (int n : occ) {
      if (n < 0) throw ValidationError("negative occupation number");
      total += n;
    }
    if (total > kMaxParticles) {
      throw ValidationError("particle number " + std::to_string(total) +
                            " exceeds the cap of " +
                            std::to_string(kMaxParticles));
    }
    if (!std::isfinite(amp.real()) || !std::isfinite(amp.imag())) {
      throw ValidationError("non-finite Fock amplitude");
    }
  }
}

void FockState::validate() const {
  check_shape();
  double n2 = norm_squared();
  if (std::fabs(n2 - 1.0) > kNormTolerance) {
    throw ValidationError("Fock state is not normalized (norm² = " +
                          std::to_string(n2) + ")");
  }
}

SplitterSpec SplitterSpec::from_transmission(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw ValidationError("splitter transmission must be in [0, 1]");
  }
  return SplitterSpec{t, std::sqrt((1.0 - t) * (1.0 + t))};
}

SplitterSpec SplitterSpec::balanced() {
  return SplitterSpec{M_SQRT1_2, M_SQRT1_2};
}

SplitterSpec SplitterSpec::mirror() { return SplitterSpec{0.0, 1.0}; }

void SplitterSpec::validate() const {
  if (!(t >= 0.0 && t <= 1.0) || !std::isfinite(r)) {
    throw ValidationError("splitter transmission must be in [0, 1]");
  }
  if (std::fabs(t * t + r * r - 1.0) > 1e-15) {
    throw ValidationError("splitter is not unitary (t² + r² != 1)");
  }
}

FockState splitter_transform(const FockState& state,
                             const SplitterSpec& splitter,
                             const std::string& mode_a,
                             const std::string& mode_b) {
  splitter.validate();
  std::size_t ia = state.mode_index(mode_a);
  std::size_t ib = state.mode_index(mode_b);
  if (ia == ib) throw InvalidArgument("splitter needs two distinct modes");

  std::map<Occupation, ComplexAmplitude> out;
  std::vector<double> tp(FockState::kMaxParticles + 1, 1.0);
  std::vector<double> rp(FockState::kMaxParticles + 1, 1.0);
  for (int i = 1; i <= FockState::kMaxParticles; ++i) {
    tp[static_cast<std::size_t>(i)] = tp[static_cast<std::size_t>(i - 1)] * splitter.t;
    rp[static_cast<std::size_t>(i)] = rp[static_cast<std::size_t>(i - 1)] * splitter.r;
  }
  for (const auto& [occ, amp] : state.terms()) {
    const int ni = occ[ia];
    const int nj = occ[ib];
    // (t a + r b)^ni (t b − r a)^nj, expanded term by term.
    for (int k = 0; k <= ni; ++k) {
      for (int l = 0; l <= nj; ++l) {
        int p = k + nj - l;
        int q = ni - k + l;
        double sign = ((nj - l) & 1) ? -1.0 : 1.0;
        double c = binomial(ni, k) * binomial(nj, l) *
                   tp[static_cast<std::size_t>(k)] *
                   rp[static_cast<std::size_t>(ni - k)] *
                   tp[static_cast<std::size_t>(l)] *
                   rp[static_cast<std::size_t>(nj - l)] * sign;
        if (c == 0.0) continue;
        c *= std::sqrt(factorial(p) * factorial(q) /
                       (factorial(ni) * factorial(nj)));
        Occupation o = occ;
        o[ia] = p;
        o[ib] = q;
        out[o] += amp * c;
      }
    }
  }
  for (auto it = out.begin(); it != out.end();) {
    if (it->second == ComplexAmplitude{}) {
      it = out.erase(it);
    } else {
      ++it;
    }
  }
  return FockState(state.modes(), std::move(out));
}

FockState phase_shift(const FockState& state, const std::string& mode,
                      double phi) {
  std::size_t m = state.mode_index(mode);
  std::map<Occupation, ComplexAmplitude> out;
  for (const auto& [occ, amp] : state.terms()) {
    out[occ] = occ[m] == 0 ? amp : amp * std::polar(1.0, phi * occ[m]);
  }
  return FockState(state.modes(), std::move(out));
}

OutcomeTable outcome_table(const FockState& state,
                           const std::vector<int>& detector_of) {
  OutcomeTable table;
  if (detector_of.empty()) {
    for (const auto& [occ, amp] : state.terms()) table[occ] += std::norm(amp);
    return table;
  }
  if (detector_of.size() != state.modes().size()) {
    throw InvalidArgument("detector map length differs from mode count");
  }
  int n_det = 0;
  for (int d : detector_of) {
    if (d < 0) throw InvalidArgument("negative detector index");
    n_det = std::max(n_det, d + 1);
  }
  for (const auto& [occ, amp] : state.terms()) {
    Occupation key(static_cast<std::size_t>(n_det), 0);
    for (std::size_t m = 0; m < occ.size(); ++m) {
      key[static_cast<std::size_t>(detector_of[m])] += occ[m];
    }
    table[key] += std::norm(amp);
  }
  return table;
}

}  // namespace qcorr::fock
