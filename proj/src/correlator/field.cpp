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
#include <limits>

#include "qcorr/correlator.hpp"

namespace qcorr::correlator {

namespace {

constexpr std::size_t kMaxJackknifeBlocks = 100;

int bin_of(std::span<const double> edges, double s) {
  if (s < edges.front() || s >= edges.back()) return -1;
  auto it = std::upper_bound(edges.begin(), edges.end(), s);
  return static_cast<int>(it - edges.begin()) - 1;
}

void check_edges(std::span<const double> edges) {
  if (edges.size() < 2) throw ValidationError("binning needs >= 2 edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw ValidationError("bin edges must be strictly increasing");
    }
  }
}

/**
 * Per-block sums of field moments.  Block b holds realizations
 * [b*R/B, (b+1)*R/B); leave-one-block-out replicates give the stderr.
 */
struct MomentBlocks {
  std::size_t blocks = 0;
  std::vector<double> counts;                  // [block]
  std::vector<double> intensity;               // [block][point]
  std::vector<ComplexAmplitude> cross;         // [block][pair] E1* E2
  std::vector<double> intensity_product;       // [block][pair] I1 I2
};

MomentBlocks accumulate(const speckle::FieldRecords& rec,
                        std::span<const PointPair> pairs) {
  if (rec.n_realizations < 2) {
    throw ValidationError("field estimators need >= 2 realizations");
  }
  if (rec.values.size() != rec.n_realizations * rec.n_points) {
    throw ValidationError("field records have inconsistent size");
  }
  for (const auto& p : pairs) {
    if (p.first >= rec.n_points || p.second >= rec.n_points) {
      throw InvalidArgument("point pair index out of range");
    }
  }
  MomentBlocks m;
  m.blocks = std::min(rec.n_realizations, kMaxJackknifeBlocks);
  const std::size_t P = rec.n_points;
  const std::size_t Q = pairs.size();
  m.counts.assign(m.blocks, 0.0);
  m.intensity.assign(m.blocks * P, 0.0);
  m.cross.assign(m.blocks * Q, ComplexAmplitude{});
  m.intensity_product.assign(m.blocks * Q, 0.0);
  for (std::size_t r = 0; r < rec.n_realizations; ++r) {
    std::size_t b = r * m.blocks / rec.n_realizations;
    m.counts[b] += 1.0;
    for (std::size_t p = 0; p < P; ++p) {
      m.intensity[b * P + p] += std::norm(rec.at(r, p));
    }
    for (std::size_t q = 0; q < Q; ++q) {
      const auto& e1 = rec.at(r, pairs[q].first);
      const auto& e2 = rec.at(r, pairs[q].second);
      m.cross[b * Q + q] += std::conj(e1) * e2;
      m.intensity_product[b * Q + q] += std::norm(e1) * std::norm(e2);
    }
  }
  return m;
}

/// Totals over all blocks except `drop` (drop == blocks: all).
struct Totals {
  double count = 0.0;
  std::vector<double> intensity;
  std::vector<ComplexAmplitude> cross;
  std::vector<double> intensity_product;
};

Totals totals(const MomentBlocks& m, std::size_t P, std::size_t Q,
              std::size_t drop) {
  Totals t;
  t.intensity.assign(P, 0.0);
  t.cross.assign(Q, ComplexAmplitude{});
  t.intensity_product.assign(Q, 0.0);
  for (std::size_t b = 0; b < m.blocks; ++b) {
    if (b == drop) continue;
    t.count += m.counts[b];
    for (std::size_t p = 0; p < P; ++p) t.intensity[p] += m.intensity[b * P + p];
    for (std::size_t q = 0; q < Q; ++q) {
      t.cross[q] += m.cross[b * Q + q];
      t.intensity_product[q] += m.intensity_product[b * Q + q];
    }
  }
  return t;
}

double block_jackknife(const std::vector<double>& reps) {
  std::size_t n = reps.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double r : reps) mean += r;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double r : reps) ss += (r - mean) * (r - mean);
  return std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n));
}

/// Per-bin g1 and g2 from totals; NaN marks bins with no pairs.
void bin_estimates(const Totals& t, std::span<const PointPair> pairs,
                   std::span<const double> edges,
                   std::vector<ComplexAmplitude>& g1,
                   std::vector<double>& g2, std::vector<std::size_t>& count,
                   std::vector<double>* g1_sq = nullptr) {
  std::size_t nb = edges.size() - 1;
  g1.assign(nb, ComplexAmplitude{});
  g2.assign(nb, 0.0);
  if (g1_sq) g1_sq->assign(nb, 0.0);
  count.assign(nb, 0);
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    int b = bin_of(edges, pairs[q].separation);
    if (b < 0) continue;
    double i1 = t.intensity[pairs[q].first] / t.count;
    double i2 = t.intensity[pairs[q].second] / t.count;
    if (!(i1 > 0.0) || !(i2 > 0.0)) {
      throw ValidationError(
          "zero average intensity at a sampling point (g1/g2 normalization "
          "undefined)");
    }
    ComplexAmplitude pair_g1 = (t.cross[q] / t.count) / std::sqrt(i1 * i2);
    g1[static_cast<std::size_t>(b)] += pair_g1;
    if (g1_sq) (*g1_sq)[static_cast<std::size_t>(b)] += std::norm(pair_g1);
    g2[static_cast<std::size_t>(b)] +=
        (t.intensity_product[q] / t.count) / (i1 * i2);
    ++count[static_cast<std::size_t>(b)];
  }
  for (std::size_t b = 0; b < nb; ++b) {
    if (count[b] == 0) {
      g1[b] = ComplexAmplitude(std::numeric_limits<double>::quiet_NaN(), 0.0);
      g2[b] = std::numeric_limits<double>::quiet_NaN();
      if (g1_sq) (*g1_sq)[b] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    g1[b] /= static_cast<double>(count[b]);
    if (g1_sq) (*g1_sq)[b] /= static_cast<double>(count[b]);
    g2[b] /= static_cast<double>(count[b]);
  }
}

}  // namespace

G1Curve g1_estimate(const speckle::FieldRecords& records,
                    std::span<const PointPair> pairs,
                    std::span<const double> edges) {
  check_edges(edges);
  MomentBlocks m = accumulate(records, pairs);
  const std::size_t P = records.n_points;
  const std::size_t Q = pairs.size();
  const std::size_t nb = edges.size() - 1;

  G1Curve out;
  out.edges.assign(edges.begin(), edges.end());
  std::vector<double> g2_unused;
  bin_estimates(totals(m, P, Q, m.blocks), pairs, edges, out.g1, g2_unused,
                out.pair_count, &out.modulus_squared);
  out.defined.assign(nb, 0);
  out.modulus_stderr.assign(nb, 0.0);
  out.modulus_squared_stderr.assign(nb, 0.0);

  std::vector<std::vector<double>> reps(nb), reps_sq(nb);
  std::vector<ComplexAmplitude> g1b;
  std::vector<double> g2b, sqb;
  std::vector<std::size_t> cb;
  for (std::size_t d = 0; d < m.blocks; ++d) {
    bin_estimates(totals(m, P, Q, d), pairs, edges, g1b, g2b, cb, &sqb);
    for (std::size_t b = 0; b < nb; ++b) {
      reps[b].push_back(std::abs(g1b[b]));
      reps_sq[b].push_back(sqb[b]);
    }
  }
  for (std::size_t b = 0; b < nb; ++b) {
    if (out.pair_count[b] == 0) continue;
    out.defined[b] = 1;
    out.modulus_stderr[b] = block_jackknife(reps[b]);
    out.modulus_squared_stderr[b] = block_jackknife(reps_sq[b]);
  }
  return out;
}

CorrelationCurve g2_from_field(const speckle::FieldRecords& records,
                               std::span<const PointPair> pairs,
                               std::span<const double> edges) {
  check_edges(edges);
  MomentBlocks m = accumulate(records, pairs);
  const std::size_t P = records.n_points;
  const std::size_t Q = pairs.size();
  const std::size_t nb = edges.size() - 1;

  CorrelationCurve out;
  out.edges.assign(edges.begin(), edges.end());
  out.normalization = Normalization::product_of_singles;
  out.n_shots = records.n_realizations;
  std::vector<ComplexAmplitude> g1_unused;
  std::vector<std::size_t> count;
  bin_estimates(totals(m, P, Q, m.blocks), pairs, edges, g1_unused, out.g2,
                count);
  out.stderr_.assign(nb, 0.0);
  out.defined.assign(nb, 0);
  out.pair_count.assign(nb, 0);
  out.reference_count.assign(nb, 0);

  std::vector<std::vector<double>> reps(nb);
  std::vector<ComplexAmplitude> g1b;
  std::vector<double> g2b;
  std::vector<std::size_t> cb;
  for (std::size_t d = 0; d < m.blocks; ++d) {
    bin_estimates(totals(m, P, Q, d), pairs, edges, g1b, g2b, cb);
    for (std::size_t b = 0; b < nb; ++b) reps[b].push_back(g2b[b]);
  }
  for (std::size_t b = 0; b < nb; ++b) {
    out.pair_count[b] = count[b];
    if (count[b] == 0) {
      out.g2[b] = 0.0;
      continue;
    }
    out.defined[b] = 1;
    out.stderr_[b] = block_jackknife(reps[b]);
  }
  return out;
}

SiegertReport siegert_check(const G1Curve& g1, const CorrelationCurve& g2,
                            double tolerance) {
  if (g1.edges != g2.edges) {
    throw InvalidArgument("siegert_check: g1 and g2 curves use different bins");
  }
  SiegertReport rep;
  rep.tolerance = tolerance;
  for (std::size_t b = 0; b < g1.n_bins(); ++b) {
    if (!g1.defined[b] || !g2.defined[b]) continue;
    double expected, se_expected;
    if (g1.modulus_squared.size() == g1.n_bins()) {
      expected = 1.0 + g1.modulus_squared[b];
      se_expected = g1.modulus_squared_stderr.size() == g1.n_bins()
                        ? g1.modulus_squared_stderr[b]
                        : 0.0;
    } else {
      double mod = std::abs(g1.g1[b]);
      expected = 1.0 + mod * mod;
      se_expected = 2.0 * mod * g1.modulus_stderr[b];
    }
    double combined = std::hypot(g2.stderr_[b], se_expected);
    double diff = std::fabs(g2.g2[b] - expected);
    double z = 0.0;
    if (combined > 0.0) {
      z = diff / combined;
    } else if (diff > 1e-12) {
      z = std::numeric_limits<double>::infinity();
    }
    ++rep.bins_checked;
    rep.max_z = std::max(rep.max_z, z);
    if (!(z <= tolerance)) {
      rep.pass = false;
      rep.failing.push_back(SiegertBin{b, g2.g2[b], expected, z});
    }
  }
  return rep;
}

std::string classicality_name(Classicality verdict) {
  return verdict == Classicality::nonclassical ? "NONCLASSICAL"
                                               : "CLASSICAL-COMPATIBLE";
}

ClassicalityVerdict classicality_check(const CorrelationCurve& curve) {
  if (curve.n_bins() == 0 || curve.edges.front() != 0.0) {
    throw ValidationError(
        "classicality_check: curve has no zero-separation bin");
  }
  if (!curve.defined[0]) {
    throw ValidationError(
        "classicality_check: zero-separation bin is undefined");
  }
  ClassicalityVerdict v;
  v.g2_zero = curve.g2[0];
  v.stderr_ = curve.stderr_[0];
  v.bin_lo = curve.edges[0];
  v.bin_hi = curve.edges[1];
  v.verdict = v.g2_zero < 1.0 - 3.0 * v.stderr_
                  ? Classicality::nonclassical
                  : Classicality::classical_compatible;
  return v;
}

}  // namespace qcorr::correlator
