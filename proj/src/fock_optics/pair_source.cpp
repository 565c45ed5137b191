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
#include <random>

#include "qcorr/fock_optics.hpp"

namespace qcorr::fock {

void PairSourceSpec::validate() const {
  if (!(nbar >= 0.0 && nbar < 1.0)) {
    throw ValidationError("pair source mean occupation must be in [0, 1)");
  }
}

std::vector<std::pair<int, int>> tmsv_sample(const PairSourceSpec& source,
                                             const RngSpec& rng) {
  source.validate();
  // P(n) = (1 − x) x^n with x = n̄ / (1 + n̄): geometric with success 1 − x.
  double x = source.nbar / (1.0 + source.nbar);
  std::geometric_distribution<int> dist(1.0 - x);
  Rng gen(rng, StreamTag::pair_source);
  std::vector<std::pair<int, int>> out;
  out.reserve(source.n_shots);
  for (std::size_t s = 0; s < source.n_shots; ++s) {
    int n = dist(gen);
    out.emplace_back(n, n);
  }
  return out;
}

ContaminationEstimate infer_contamination(const std::vector<int>& occupations) {
  if (occupations.empty()) {
    throw ValidationError("contamination inference needs >= 1 shot");
  }
  double sum = 0.0, pairs = 0.0, pairs2 = 0.0;
  std::size_t nonempty = 0, multi = 0;
  for (int n : occupations) {
    if (n < 0) throw ValidationError("negative occupation sample");
    double d = n;
    double pr = d * (d - 1.0);
    sum += d;
    pairs += pr;
    pairs2 += pr * pr;
    if (n >= 1) ++nonempty;
    if (n >= 2) ++multi;
  }
  if (sum == 0.0) {
    throw ValidationError(
        "contamination inference: zero occupancy in every shot");
  }
  double N = static_cast<double>(occupations.size());
  ContaminationEstimate est;
  est.shots = occupations.size();
  est.mean_occupation = sum / N;
  est.pair_rate = pairs / N;
  est.local_g2 = est.pair_rate / (est.mean_occupation * est.mean_occupation);
  // A thermal single-mode marginal has ⟨n(n−1)⟩ = 2 n̄².
  est.nbar = std::sqrt(est.pair_rate / 2.0);
  double var_pr = std::max(0.0, pairs2 / N - est.pair_rate * est.pair_rate);
  double se_pr = std::sqrt(var_pr / N);
  est.nbar_stderr = est.pair_rate > 0.0
                        ? se_pr / (2.0 * std::sqrt(2.0 * est.pair_rate))
                        : 0.0;
  est.two_particle_fraction =
      static_cast<double>(multi) / static_cast<double>(nonempty);
  return est;
}

}  // namespace qcorr::fock
