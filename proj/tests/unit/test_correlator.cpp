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

#include <doctest.h>

#include "qcorr/correlator.hpp"

using namespace qcorr;
using namespace qcorr::correlator;

namespace {


/// Straight transcription of the binning rules: half-open bins, strict gates.
int reference_bin(const BinningSpec& b, const DetectionEvent& p,
                  const DetectionEvent& q) {
  double dx = std::fabs(p.x_mm - q.x_mm);
  double dy = std::fabs(p.y_mm - q.y_mm);
  double dt = std::fabs(p.t_ns - q.t_ns);
  double s;
  if (b.axis == Axis::dx) {
    if (!(dy < b.gate_y_mm && dt < b.gate_t_ns)) return -1;
    s = dx;
  } else if (b.axis == Axis::dy) {
    if (!(dx < b.gate_x_mm && dt < b.gate_t_ns)) return -1;
    s = dy;
  } else if (b.axis == Axis::dt) {
    if (!(dx < b.gate_x_mm && dy < b.gate_y_mm)) return -1;
    s = dt;
  } else {
    if (!(dt < b.gate_t_ns)) return -1;
    s = std::sqrt(dx * dx + dy * dy);
  }
  for (std::size_t k = 0; k + 1 < b.edges.size(); ++k) {
    if (s >= b.edges[k] && s < b.edges[k + 1]) return static_cast<int>(k);
  }
  return -1;
}

std::vector<DetectionEvent> random_events(Rng& gen, std::size_t n, double box) {
  std::vector<DetectionEvent> ev(n);
  for (auto& e : ev) {
    // Coarse lattice so that exact ties and edge hits occur.
    e = make_event(std::round(gen.uniform(-box, box) * 20.0) / 20.0,
                   std::round(gen.uniform(-box, box) * 20.0) / 20.0,
                   std::round(gen.uniform(0.0, box) * 20.0) / 20.0);
  }
  return ev;
}

BinningSpec random_binning(Rng& gen) {
  BinningSpec b;
  b.axis = static_cast<Axis>(gen.below(4));
  double hi = gen.uniform(0.5, 3.0);
  b.edges = {0.0};
  while (b.edges.back() < hi) b.edges.push_back(b.edges.back() + 0.05 * (1 + gen.below(6)));
  if (gen.below(2) && b.edges[1] > 0.1) b.edges.front() = 0.1;
  if (gen.below(2)) b.gate_x_mm = 0.05 * (1 + gen.below(20));
  if (gen.below(2)) b.gate_y_mm = 0.05 * (1 + gen.below(20));
  if (gen.below(2)) b.gate_t_ns = 0.05 * (1 + gen.below(20));
  b.validate();
  return b;
}

ShotList poisson_shots(std::size_t n_shots, double mean, std::uint64_t seed) {
  Rng gen(RngSpec{seed, 0}, StreamTag::user);
  ShotList shots(n_shots);
  for (std::size_t s = 0; s < n_shots; ++s) {
    shots[s].shot_id = static_cast<std::int64_t>(s);
    auto n = gen.poisson(mean);
    for (std::uint64_t i = 0; i < n; ++i) {
      shots[s].events.push_back(
          make_event(gen.uniform(-5, 5), gen.uniform(-5, 5), gen.uniform(0, 1)));
    }
    shots[s].canonicalize();
  }
  return shots;
}

CorrelationCurve synthetic_curve(const std::vector<double>& edges,
                                 const std::vector<double>& g2,
                                 const std::vector<double>& se) {
  CorrelationCurve c;
  c.edges = edges;
  c.g2 = g2;
  c.stderr_ = se;
  c.pair_count.assign(g2.size(), 100);
  c.reference_count.assign(g2.size(), 100);
  c.defined.assign(g2.size(), 1);
  return c;
}

}  // namespace

TEST_SUITE("correlator") {

TEST_CASE("bin specs") {
  auto e = parse_bin_edges("0:1:4");
  REQUIRE(e.size() == 5);
  CHECK(e[2] == doctest::Approx(0.5));
  CHECK(e.back() == 1.0);
  CHECK(parse_bin_edges("0,0.5,2") == std::vector<double>{0, 0.5, 2});
  for (const char* bad : {"", "1", "0:1", "0:1:0", "a:1:2", "0:1:2x", "0,,1"}) {
    CHECK_THROWS_AS(parse_bin_edges(bad), InvalidArgument);
  }
  BinningSpec b;
  b.edges = {0.0, 1.0, 0.5};
  CHECK_THROWS_AS(b.validate(), ValidationError);
  b.edges = {-1.0, 1.0};
  CHECK_THROWS_AS(b.validate(), ValidationError);
  CHECK(parse_axis("r") == Axis::radial);
  CHECK(parse_axis("dt") == Axis::dt);
  CHECK_THROWS(parse_axis("dz"));
}

TEST_CASE("pair classification matches the reference rules") {
  Rng gen(RngSpec{77, 0}, StreamTag::user);
  for (int trial = 0; trial < 40; ++trial) {
    BinningSpec b = random_binning(gen);
    auto ev = random_events(gen, 60, 2.0);
    for (std::size_t i = 0; i < ev.size(); ++i) {
      for (std::size_t j = 0; j < ev.size(); ++j) {
        REQUIRE(classify_pair(b, ev[i], ev[j]) == reference_bin(b, ev[i], ev[j]));
      }
    }
  }
}

TEST_CASE("sorted pair engine equals brute force") {
  Rng gen(RngSpec{78, 0}, StreamTag::user);
  for (int trial = 0; trial < 30; ++trial) {
    BinningSpec b = random_binning(gen);
    auto a = random_events(gen, 1 + gen.below(400), 3.0);
    auto c = random_events(gen, gen.below(300), 3.0);
    std::vector<std::uint64_t> want(b.n_bins(), 0), got(b.n_bins(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = i + 1; j < a.size(); ++j) {
        int k = reference_bin(b, a[i], a[j]);
        if (k >= 0) ++want[static_cast<std::size_t>(k)];
      }
    }
    count_pairs_within(a, b, PairEngine::sorted, got);
    CHECK(got == want);

    std::fill(want.begin(), want.end(), 0);
    std::fill(got.begin(), got.end(), 0);
    for (const auto& p : a) {
      for (const auto& q : c) {
        int k = reference_bin(b, p, q);
        if (k >= 0) ++want[static_cast<std::size_t>(k)];
      }
    }
    count_pairs_between(a, c, b, PairEngine::sorted, got);
    CHECK(got == want);
    std::vector<std::uint64_t> brute(b.n_bins(), 0);
    count_pairs_between(a, c, b, PairEngine::brute_force, brute);
    CHECK(brute == want);
  }
}

TEST_CASE("independent events give a flat g2 under both estimators") {
  auto shots = poisson_shots(3000, 12.0, 5);
  auto b = BinningSpec::uniform(Axis::radial, 0.0, 6.0, 6);
  for (auto norm : {Normalization::shot_mixed, Normalization::product_of_singles}) {
    G2Options o;
    o.normalization = norm;
    o.threads = 2;
    auto c = g2_from_events(shots, b, o);
    REQUIRE(c.n_bins() == 6);
    CHECK(c.n_shots == 3000);
    for (std::size_t k = 0; k < c.n_bins(); ++k) {
      REQUIRE(c.defined[k]);
      CHECK(std::fabs(c.g2[k] - 1.0) < 4.0 * c.stderr_[k] + 1e-3);
      CHECK(c.stderr_[k] > 0.0);
    }
    o.threads = 1;
    CHECK(g2_from_events(shots, b, o).to_csv() == c.to_csv());
  }
}

TEST_CASE("a single shot cannot be normalized") {
  auto shots = poisson_shots(1, 20.0, 1);
  auto b = BinningSpec::uniform(Axis::radial, 0.0, 6.0, 3);
  CHECK_THROWS(g2_from_events(shots, b));
}

TEST_CASE("shuffle keeps ids and events and erases same-shot correlation") {
  // Perfectly bunched input: each shot is two coincident events.
  ShotList shots;
  Rng gen(RngSpec{3, 0}, StreamTag::user);
  for (int s = 0; s < 2000; ++s) {
    auto e = make_event(gen.uniform(-5, 5), gen.uniform(-5, 5), 0.0);
    shots.push_back(Shot{s, {e, e}});
  }
  auto mixed = shuffle_across_shots(shots, RngSpec{1, 2});
  REQUIRE(mixed.size() == shots.size());
  CHECK(total_events(mixed) == total_events(shots));
  for (std::size_t i = 0; i < shots.size(); ++i) CHECK(mixed[i].shot_id == shots[i].shot_id);
  CHECK_NOTHROW(validate_shots(mixed));

  auto b = BinningSpec::uniform(Axis::radial, 0.0, 4.0, 4);
  auto before = g2_from_events(shots, b);
  auto after = g2_from_events(mixed, b);
  CHECK(before.g2[0] > 10.0);
  CHECK(std::fabs(after.g2[0] - 1.0) < 4.0 * after.stderr_[0]);
}

TEST_CASE("detector response") {
  auto shots = poisson_shots(500, 20.0, 9);
  Detector d;
  d.radius_mm = 0.0;
  CHECK(encode_shots(apply_detector_psf(shots, d, RngSpec{})) == encode_shots(shots));

  d.psf_sigma_x_mm = 0.3;
  d.psf_sigma_y_mm = 0.1;
  d.radius_mm = 4.0;
  auto blurred = apply_detector_psf(shots, d, RngSpec{4, 0});
  CHECK_NOTHROW(validate_shots(blurred));
  for (const auto& s : blurred) {
    for (const auto& e : s.events) CHECK(std::hypot(e.x_mm, e.y_mm) <= 4.0);
  }

  // Displacement spread, measured on events that stay inside the aperture.
  Detector wide;
  wide.radius_mm = 0.0;
  wide.psf_sigma_x_mm = 0.3;
  ShotList one{Shot{0, {}}};
  for (int i = 0; i < 20000; ++i) one[0].events.push_back(DetectionEvent{0.0, 0.0, 1.0});
  auto moved = apply_detector_psf(one, wide, RngSpec{8, 0});
  double s2 = 0;
  for (const auto& e : moved[0].events) {
    CHECK(e.y_mm == 0.0);
    s2 += e.x_mm * e.x_mm;
  }
  CHECK(std::sqrt(s2 / 20000.0) == doctest::Approx(0.3).epsilon(0.02));

  Detector dead;
  dead.radius_mm = 0.0;
  dead.dead_radius_mm = 0.4;
  auto thinned = apply_detector_psf(shots, dead, RngSpec{});
  CHECK(total_events(thinned) < total_events(shots));
  for (const auto& s : thinned) {
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      for (std::size_t j = i + 1; j < s.events.size(); ++j) {
        CHECK(std::hypot(s.events[i].x_mm - s.events[j].x_mm,
                         s.events[i].y_mm - s.events[j].y_mm) >= 0.4);
      }
    }
  }
}

TEST_CASE("field estimators match the finite-emitter ensemble") {
  // Fixed emitters, uniform random phases: ⟨E1* E2⟩ = Σ a² e^{ik(d2 - d1)}
  // and ⟨I1 I2⟩ = S² + |G|² − Σ a⁴ exactly.
  speckle::DiskSourceParams p;
  p.n_emitters = 100;
  p.source_diameter_m = 2e-3;
  p.distance_m = 20.0;
  auto src = speckle::make_disk_source(p, RngSpec{21, 0});
  std::vector<speckle::SpaceTimePoint> pts{
      {{0, 0, 20}, 0}, {{1e-3, 0, 20}, 0}, {{3e-3, 1e-3, 20}, 0}};
  const std::size_t n = 40000;
  auto rec = speckle::record_field(src, pts, n, RngSpec{21, 1});

  std::vector<PointPair> pairs{{0, 1, 1.0}, {0, 2, 3.2}, {1, 1, 0.0}};
  std::vector<double> edges{0.0, 0.5, 2.0, 4.0};
  auto g1 = g1_estimate(rec, pairs, edges);
  auto g2 = g2_from_field(rec, pairs, edges);

  const double k = 2.0 * std::numbers::pi / p.wavelength_m;
  double s = 0.0, s4 = 0.0;
  for (double a : src.amplitudes) {
    s += a * a;
    s4 += a * a * a * a;
  }
  auto exact_g1 = [&](std::size_t i, std::size_t j) {
    ComplexAmplitude sum = 0.0;
    for (std::size_t e = 0; e < src.n_emitters(); ++e) {
      auto dist = [&](const speckle::Vec3& q) {
        const auto& r = src.positions_m[e];
        return std::sqrt((q.x - r.x) * (q.x - r.x) + (q.y - r.y) * (q.y - r.y) +
                         (q.z - r.z) * (q.z - r.z));
      };
      double dd = dist(pts[j].position_m) - dist(pts[i].position_m);
      sum += src.amplitudes[e] * src.amplitudes[e] * std::polar(1.0, k * dd);
    }
    return sum / s;
  };
  const std::size_t bin_of[3] = {1, 2, 0};
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    std::size_t bin = bin_of[q];
    auto want = exact_g1(pairs[q].first, pairs[q].second);
    REQUIRE(g1.defined[bin]);
    double tol = 5.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(g1.g1[bin] - want) < tol);
    CHECK(g1.modulus_squared[bin] == doctest::Approx(std::norm(want)).epsilon(0.02));
    double want_g2 = 1.0 + std::norm(want) - s4 / (s * s);
    CHECK(std::fabs(g2.g2[bin] - want_g2) < 4.0 * g2.stderr_[bin]);
  }
  auto rep = siegert_check(g1, g2);
  CHECK(rep.bins_checked == 3);
}

TEST_CASE("siegert check flags a deviating bin") {
  G1Curve g1;
  g1.edges = {0, 1, 2};
  g1.g1 = {ComplexAmplitude(1.0, 0.0), ComplexAmplitude(0.0, 0.5)};
  g1.modulus_stderr = {0.0, 0.01};
  g1.modulus_squared = {1.0, 0.25};
  g1.modulus_squared_stderr = {0.0, 0.01};
  g1.pair_count = {10, 10};
  g1.defined = {1, 1};
  auto good = synthetic_curve({0, 1, 2}, {2.02, 1.25}, {0.02, 0.02});
  auto rep = siegert_check(g1, good);
  CHECK(rep.pass);
  CHECK(rep.max_z == doctest::Approx(1.0));
  auto bad = synthetic_curve({0, 1, 2}, {2.0, 1.5}, {0.02, 0.02});
  rep = siegert_check(g1, bad);
  CHECK_FALSE(rep.pass);
  REQUIRE(rep.failing.size() == 1);
  CHECK(rep.failing[0].index == 1);
}

TEST_CASE("cauchy-schwarz verdict") {
  auto anti = synthetic_curve({0, 1, 2}, {0.5, 1.0}, {0.1, 0.1});
  CHECK(classicality_check(anti).verdict == Classicality::nonclassical);
  auto edge = synthetic_curve({0, 1, 2}, {0.75, 1.0}, {0.1, 0.1});
  CHECK(classicality_check(edge).verdict == Classicality::classical_compatible);
  auto bunched = synthetic_curve({0, 1, 2}, {2.0, 1.0}, {0.1, 0.1});
  auto v = classicality_check(bunched);
  CHECK(v.verdict == Classicality::classical_compatible);
  CHECK(v.g2_zero == 2.0);
  CHECK(classicality_name(Classicality::nonclassical) == "NONCLASSICAL");
}

TEST_CASE("zero-separation and far-value fits") {
  // g2 = 2 - 0.5 s², bin-averaged exactly: 1D mean of s² on [lo, hi).
  std::vector<double> edges, g2, se;
  for (int k = 0; k <= 10; ++k) edges.push_back(0.1 * k);
  for (int k = 0; k < 10; ++k) {
    double lo = edges[k], hi = edges[k + 1];
    g2.push_back(2.0 - 0.5 * (lo * lo + lo * hi + hi * hi) / 3.0);
    se.push_back(0.01);
  }
  auto c = synthetic_curve(edges, g2, se);
  auto z = fit_zero_separation(c, 0.5, 1);
  CHECK(z.value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(z.stderr_ > 0.0);

  // 2D: mean of s² over an annulus is (lo² + hi²) / 2.
  for (int k = 0; k < 10; ++k) {
    double lo = edges[k], hi = edges[k + 1];
    c.g2[k] = 2.0 - 0.5 * (lo * lo + hi * hi) / 2.0;
  }
  CHECK(fit_zero_separation(c, 0.5, 2).value == doctest::Approx(2.0).epsilon(1e-9));

  auto far = synthetic_curve({0, 1, 2, 3}, {5.0, 1.0, 1.2}, {1.0, 0.1, 0.2});
  auto fv = far_value(far, 1.0);
  double w1 = 100.0, w2 = 25.0;
  CHECK(fv.value == doctest::Approx((w1 * 1.0 + w2 * 1.2) / (w1 + w2)));
  CHECK(fv.stderr_ == doctest::Approx(1.0 / std::sqrt(w1 + w2)));
}

TEST_CASE("gaussian bump fit recovers the width") {
  const double l = 0.4, a = 0.9, base = 1.0;
  for (int dims : {1, 2}) {
    std::vector<double> edges, g2, se;
    for (int k = 0; k <= 60; ++k) edges.push_back(0.025 * k);
    for (int k = 0; k < 60; ++k) {
      // Bin average by fine midpoint sums with the pair measure.
      double num = 0, den = 0;
      for (int m = 0; m < 200; ++m) {
        double s = edges[k] + (m + 0.5) * 0.025 / 200.0;
        double w = dims == 2 ? s : 1.0;
        num += w * (base + a * std::exp(-s * s / (l * l)));
        den += w;
      }
      g2.push_back(num / den);
      se.push_back(0.01);
    }
    auto fit = fit_gaussian_bump(synthetic_curve(edges, g2, se), dims, 0.3);
    CHECK(fit.converged);
    CHECK(fit.width == doctest::Approx(l).epsilon(1e-3));
    CHECK(fit.amplitude == doctest::Approx(a).epsilon(1e-3));
    CHECK(fit.baseline == doctest::Approx(base).epsilon(1e-4));
  }
}

}  // TEST_SUITE
