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

// Internal pair-enumeration kernels shared by the estimators.

#ifndef QCORR_SRC_CORRELATOR_PAIRS_HPP_INCLUDED_
#define QCORR_SRC_CORRELATOR_PAIRS_HPP_INCLUDED_

#include <span>
#include <vector>

#include "qcorr/correlator.hpp"

namespace qcorr::correlator {

/**
 * Pair classifier.  Both engines call the same operator(), so a pair is
 * either classified identically or provably skipped: the sorted engine
 * only skips pairs whose key difference exceeds the last edge by a relative
 * margin of 1e-12, and every binned separation is at least that difference.
 */
class BinClassifier {
 public:
  explicit BinClassifier(const BinningSpec& b);

  double key(const DetectionEvent& e) const;
  double prune() const { return prune_; }
  int operator()(const DetectionEvent& a, const DetectionEvent& b) const;

 private:
  Axis axis_;
  std::vector<double> edges_;
  double gate_x_, gate_y_, gate_t_;
  double lo_ = 0.0, hi_ = 0.0, prune_ = 0.0;
};

std::vector<DetectionEvent> sort_by_key(std::span<const DetectionEvent> ev,
                                        const BinClassifier& c);

void count_within_brute(std::span<const DetectionEvent> ev,
                        const BinClassifier& c, std::span<std::uint64_t> hist);
void count_between_brute(std::span<const DetectionEvent> a,
                         std::span<const DetectionEvent> b,
                         const BinClassifier& c,
                         std::span<std::uint64_t> hist);
/// Inputs must be sorted by c.key().
void count_within_sorted(std::span<const DetectionEvent> ev,
                         const BinClassifier& c,
                         std::span<std::uint64_t> hist);
void count_between_sorted(std::span<const DetectionEvent> a,
                          std::span<const DetectionEvent> b,
                          const BinClassifier& c,
                          std::span<std::uint64_t> hist);

}  // namespace qcorr::correlator

#endif  // QCORR_SRC_CORRELATOR_PAIRS_HPP_INCLUDED_
