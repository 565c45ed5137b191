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
#include <functional>
#include <limits>

#include "pairs.hpp"
#include "qcorr/parallel.hpp"

namespace qcorr::correlator {

namespace {

constexpr std::uint64_t kSinglesKey = 0x5A17E5D0C0FFEE11ULL;

/// Leave-one-shot-out jackknife standard error of a set of replicates.
double jackknife_stderr(const std::vector<double>& reps) {
  std::size_t n = reps.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double r : reps) mean += r;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double r : reps) ss += (r - mean) * (r - mean);
  return std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n));
}

}  // namespace

std::string CorrelationCurve::to_csv() const {
  std::string out = "bin_lo,bin_hi,g2,stderr,pair_count\n";
  for (std::size_t b = 0; b < n_bins(); ++b) {
    out += format_g9(edges[b]);
    out += ',';
    out += format_g9(edges[b + 1]);
    out += ',';
    out += defined[b] ? format_g9(g2[b]) : std::string("nan");
    out += ',';
    out += defined[b] ? format_g9(stderr_[b]) : std::string("nan");
    out += ',';
    out += std::to_string(pair_count[b]);
    out += '\n';
  }
  return out;
}

CorrelationCurve g2_from_events(const ShotList& shots,
                                const BinningSpec& binning,
                                const G2Options& options) {
  binning.validate();
  const std::size_t n = shots.size();
  if (n < 2) {
    throw ValidationError("g2_from_events needs at least two shots");
  }
  const std::size_t n_ev = total_events(shots);
  if (n_ev == 0) throw ValidationError("g2_from_events: all shots are empty");
  const std::size_t nb = binning.n_bins();
  const BinClassifier cls(binning);
  const bool sorted = options.engine == PairEngine::sorted;

  std::vector<std::vector<DetectionEvent>> keyed(n);
  parallel_chunks(n, options.threads,
                  [&](unsigned, std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      keyed[s] = sorted ? sort_by_key(shots[s].events, cls)
                        : shots[s].events;
    }
  });

  // Same-shot pairs per shot.
  std::vector<std::uint64_t> same(n * nb, 0);
  parallel_chunks(n, options.threads,
                  [&](unsigned, std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      std::span<std::uint64_t> h(&same[s * nb], nb);
      if (sorted) {
        count_within_sorted(keyed[s], cls, h);
      } else {
        count_within_brute(keyed[s], cls, h);
      }
    }
  });

  // Reference pairs attributed to every shot involved (for the jackknife).
  std::vector<std::uint64_t> ref(n * nb, 0);
  std::vector<double> ref_weight(n, 0.0);  // normalization units per shot
  double total_weight = 0.0;
  std::vector<std::uint64_t> ref_total(nb, 0);

  CorrelationCurve curve;
  curve.edges = binning.edges;
  curve.normalization = options.normalization;
  curve.n_shots = n;
  curve.n_events = n_ev;
  curve.g2.assign(nb, 0.0);
  curve.stderr_.assign(nb, 0.0);
  curve.pair_count.assign(nb, 0);
  curve.reference_count.assign(nb, 0);
  curve.defined.assign(nb, 0);

  std::vector<std::uint64_t> same_total(nb, 0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t b = 0; b < nb; ++b) same_total[b] += same[s * nb + b];
  }

  std::vector<std::size_t> n_s(n);
  for (std::size_t s = 0; s < n; ++s) n_s[s] = shots[s].events.size();

  // g2 estimate with shot `drop` removed (drop == n: full sample).
  std::function<double(std::size_t, std::size_t)> estimate;

  if (options.normalization == Normalization::shot_mixed) {
    const std::size_t depth = std::min(std::max<std::size_t>(
                                           options.mix_depth, 1), n - 1);
    unsigned workers = worker_count(n, options.threads);
    std::vector<std::vector<std::uint64_t>> second(
        workers, std::vector<std::uint64_t>(n * nb, 0));
    std::vector<std::uint64_t> first(n * nb, 0);
    parallel_chunks(n, options.threads,
                    [&](unsigned w, std::size_t b, std::size_t e) {
      std::vector<std::uint64_t> tmp(nb);
      for (std::size_t s = b; s < e; ++s) {
        for (std::size_t k = 1; k <= depth; ++k) {
          std::size_t p = (s + k) % n;
          std::fill(tmp.begin(), tmp.end(), 0);
          if (sorted) {
            count_between_sorted(keyed[s], keyed[p], cls, tmp);
          } else {
            count_between_brute(keyed[s], keyed[p], cls, tmp);
          }
          for (std::size_t i = 0; i < nb; ++i) {
            first[s * nb + i] += tmp[i];
            second[w][p * nb + i] += tmp[i];
          }
        }
      }
    });
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t i = 0; i < nb; ++i) {
        std::uint64_t f = first[s * nb + i];
        ref_total[i] += f;
        std::uint64_t sec = 0;
        for (const auto& wv : second) sec += wv[s * nb + i];
        ref[s * nb + i] = f + sec;
      }
    }
    const double K = static_cast<double>(depth);
    estimate = [&, K](std::size_t drop, std::size_t b) -> double {
      double S = static_cast<double>(same_total[b]);
      double M = static_cast<double>(ref_total[b]);
      double shots_left = static_cast<double>(n);
      double slots = static_cast<double>(n) * K;
      if (drop < n) {
        S -= static_cast<double>(same[drop * nb + b]);
        M -= static_cast<double>(ref[drop * nb + b]);
        shots_left -= 1.0;
        slots -= 2.0 * K;
      }
      if (!(M > 0.0) || !(slots > 0.0)) {
        return std::numeric_limits<double>::quiet_NaN();
      }
      return (2.0 * S / shots_left) / (M / slots);
    };
  } else {
    // Pooled-density reference: each event is paired with hashed random
    // partners from other shots, giving the separation distribution of
    // independent events under the pooled single-event density.
    std::vector<std::size_t> offset(n + 1, 0);
    for (std::size_t s = 0; s < n; ++s) offset[s + 1] = offset[s] + n_s[s];
    std::vector<DetectionEvent> pool;
    std::vector<std::uint32_t> owner;
    pool.reserve(n_ev);
    owner.reserve(n_ev);
    for (std::size_t s = 0; s < n; ++s) {
      for (const auto& e : shots[s].events) {
        pool.push_back(e);
        owner.push_back(static_cast<std::uint32_t>(s));
      }
    }
    const std::size_t draws = std::max<std::size_t>(options.singles_draws, 1);
    std::vector<double> drawn(n, 0.0);
    parallel_chunks(n, options.threads,
                    [&](unsigned, std::size_t b, std::size_t e) {
      for (std::size_t s = b; s < e; ++s) {
        for (std::size_t i = offset[s]; i < offset[s + 1]; ++i) {
          for (std::size_t r = 0; r < draws; ++r) {
            std::uint64_t h = mix64(kSinglesKey ^ mix64(i * draws + r));
            std::size_t j = static_cast<std::size_t>(h % n_ev);
            if (owner[j] == s) continue;
            drawn[s] += 1.0;
            int bin = cls(pool[i], pool[j]);
            if (bin >= 0) ++ref[s * nb + static_cast<std::size_t>(bin)];
          }
        }
      }
    });
    for (std::size_t s = 0; s < n; ++s) {
      total_weight += drawn[s];
      ref_weight[s] = drawn[s];
      for (std::size_t i = 0; i < nb; ++i) ref_total[i] += ref[s * nb + i];
    }
    estimate = [&](std::size_t drop, std::size_t b) -> double {
      double S = static_cast<double>(same_total[b]);
      double D = static_cast<double>(ref_total[b]);
      double W = total_weight;
      double shots_left = static_cast<double>(n);
      double events = static_cast<double>(n_ev);
      if (drop < n) {
        S -= static_cast<double>(same[drop * nb + b]);
        D -= static_cast<double>(ref[drop * nb + b]);
        W -= ref_weight[drop];
        shots_left -= 1.0;
        events -= static_cast<double>(n_s[drop]);
      }
      if (!(D > 0.0) || !(W > 0.0) || !(events > 0.0)) {
        return std::numeric_limits<double>::quiet_NaN();
      }
      double density = events / shots_left;
      return (2.0 * S / shots_left) / (density * density * (D / W));
    };
  }

  std::vector<double> reps;
  reps.reserve(n);
  for (std::size_t b = 0; b < nb; ++b) {
    curve.pair_count[b] = same_total[b];
    curve.reference_count[b] = ref_total[b];
    double g = estimate(n, b);
    if (!std::isfinite(g)) continue;
    curve.defined[b] = 1;
    curve.g2[b] = g;
    reps.clear();
    bool usable = n >= 3;
    for (std::size_t s = 0; s < n && usable; ++s) {
      double r = estimate(s, b);
      if (!std::isfinite(r)) usable = false;
      reps.push_back(r);
    }
    double se = usable ? jackknife_stderr(reps) : 0.0;
    if (!(se > 0.0) && same_total[b] > 0) {
      se = g / std::sqrt(static_cast<double>(same_total[b]));
    }
    curve.stderr_[b] = se;
  }
  return curve;
}

ShotList shuffle_across_shots(const ShotList& shots, const RngSpec& rng) {
  ShotList out(shots.size());
  for (std::size_t s = 0; s < shots.size(); ++s) {
    out[s].shot_id = shots[s].shot_id;
  }
  if (shots.empty()) return out;
  Rng gen(rng, StreamTag::shuffle);
  for (const auto& shot : shots) {
    for (const auto& e : shot.events) {
      out[gen.below(shots.size())].events.push_back(e);
    }
  }
  for (auto& s : out) s.canonicalize();
  return out;
}

ShotList apply_detector_psf(const ShotList& shots, const Detector& detector,
                            const RngSpec& rng) {
  detector.validate();
  ShotList out(shots.size());
  const double dead2 = detector.dead_radius_mm * detector.dead_radius_mm;
  parallel_chunks(shots.size(), 0,
                  [&](unsigned, std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      const Shot& in = shots[s];
      Shot& shot = out[s];
      shot.shot_id = in.shot_id;
      Rng gen(rng, StreamTag::psf, static_cast<std::uint64_t>(in.shot_id));
      std::vector<DetectionEvent> moved;
      moved.reserve(in.events.size());
      for (const auto& ev : in.events) {
        double x = ev.x_mm + detector.psf_sigma_x_mm * gen.normal();
        double y = ev.y_mm + detector.psf_sigma_y_mm * gen.normal();
        double t = ev.t_ns + detector.psf_sigma_t_ns * gen.normal();
        if (!detector.contains(x, y) || t < 0.0) continue;
        moved.push_back(make_event(x, y, t));
      }
      std::sort(moved.begin(), moved.end(), canonical_less);
      if (dead2 > 0.0) {
        for (const auto& ev : moved) {
          bool blocked = false;
          for (const auto& kept : shot.events) {
            double dx = ev.x_mm - kept.x_mm;
            double dy = ev.y_mm - kept.y_mm;
            if (dx * dx + dy * dy < dead2) {
              blocked = true;
              break;
            }
          }
          if (!blocked) shot.events.push_back(ev);
        }
      } else {
        shot.events = std::move(moved);
      }
    }
  });
  return out;
}

}  // namespace qcorr::correlator
