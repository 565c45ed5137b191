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
#include <numeric>

#include <doctest.h>

#include "qcorr/two_particle.hpp"

using namespace qcorr;
using namespace qcorr::two_particle;

namespace {

std::vector<ComplexAmplitude> random_entries(Rng& gen, std::size_t n) {
  std::vector<ComplexAmplitude> e(n * n);
  for (auto& z : e) z = {gen.normal(), gen.normal()};
  return e;
}

/// Leibniz expansion over all permutations; sign applied when `signed_sum`.
ComplexAmplitude leibniz(const std::vector<ComplexAmplitude>& m, std::size_t n,
                         bool signed_sum) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  ComplexAmplitude total = 0.0;
  do {
    ComplexAmplitude prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) prod *= m[i * n + perm[i]];
    int inversions = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) inversions += perm[i] > perm[j];
    }
    total += (signed_sum && (inversions & 1)) ? -prod : prod;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

double dist(const speckle::Vec3& a, const speckle::Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

}  // namespace

TEST_SUITE("two_particle") {

TEST_CASE("permanent and determinant equal the permutation sums") {
  Rng gen(RngSpec{12, 0}, StreamTag::user);
  for (std::size_t n = 2; n <= 6; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      auto e = random_entries(gen, n);
      AmplitudeMatrix m(n, e, Statistics::boson);
      auto perm = leibniz(e, n, false);
      auto det = leibniz(e, n, true);
      double scale = std::max(1.0, std::abs(perm));
      CHECK(std::abs(permanent(m) - perm) < 1e-10 * scale);
      CHECK(std::abs(determinant(m) - det) < 1e-10 * std::max(1.0, std::abs(det)));
      std::vector<ComplexAmplitude> sq(e.size());
      for (std::size_t k = 0; k < e.size(); ++k) sq[k] = std::norm(e[k]);
      double w = leibniz(sq, n, false).real();
      CHECK(distinguishable_weight(m) == doctest::Approx(w).epsilon(1e-12));
    }
  }
}

TEST_CASE("matrix validation") {
  CHECK_THROWS_AS(AmplitudeMatrix(1, {1.0}, Statistics::boson), ValidationError);
  CHECK_THROWS_AS(AmplitudeMatrix(7, std::vector<ComplexAmplitude>(49, 1.0),
                                  Statistics::boson),
                  ValidationError);
  CHECK_THROWS_AS(AmplitudeMatrix(2, {1.0, 2.0, 3.0}, Statistics::boson),
                  ValidationError);
  CHECK_THROWS_AS(joint_probability(AmplitudeMatrix(2, {0.0, 0.0, 0.0, 0.0},
                                                    Statistics::fermion)),
                  ValidationError);
  CHECK_THROWS_AS(parse_statistics("anyon"), InvalidArgument);
}

TEST_CASE("two-path interference factors") {
  // Equal-modulus paths with relative phase θ: 1 ± cos θ.
  for (double theta : {0.0, 0.7, 2.0, 3.14159}) {
    std::vector<ComplexAmplitude> e{1.0, 1.0, 1.0, std::polar(1.0, theta)};
    double b = joint_probability(AmplitudeMatrix(2, e, Statistics::boson)).factor;
    double f = joint_probability(AmplitudeMatrix(2, e, Statistics::fermion)).factor;
    double d = joint_probability(AmplitudeMatrix(2, e, Statistics::distinguishable)).factor;
    CHECK(b == doctest::Approx(1.0 + std::cos(theta)));
    CHECK(f == doctest::Approx(1.0 - std::cos(theta)));
    CHECK(d == doctest::Approx(1.0));
  }
}

TEST_CASE("toy model without source extent is phase independent") {
  ToyModelGeometry g;
  g.emitters = {speckle::Vec3{-1e-3, 0, 0}, speckle::Vec3{1e-3, 0, 0}};
  g.detectors = {speckle::Vec3{0, 0, 1.0}, speckle::Vec3{1.3e-4, 0, 1.0}};
  g.wavenumber = 2.0 * std::numbers::pi / 5e-7;
  ComplexAmplitude a[2][2];
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      double d = dist(g.emitters[i], g.detectors[j]);
      a[i][j] = std::polar(1.0 / d, g.wavenumber * d);
    }
  }
  ComplexAmplitude direct = a[0][0] * a[1][1], exchange = a[0][1] * a[1][0];
  double denom = std::norm(direct) + std::norm(exchange);
  double boson = std::norm(direct + exchange) / denom;
  double fermion = std::norm(direct - exchange) / denom;

  auto rb = toy_model_g2(g, Statistics::boson, 50, RngSpec{1, 0});
  auto rf = toy_model_g2(g, Statistics::fermion, 50, RngSpec{1, 0});
  CHECK(rb.mean == doctest::Approx(boson).epsilon(1e-9));
  CHECK(rf.mean == doctest::Approx(fermion).epsilon(1e-9));
  CHECK(rb.mean + rf.mean == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rb.stderr_ < 1e-9);

  g.detectors[1] = g.detectors[0];
  g.detectors[1].y = 1e-12;
  CHECK(toy_model_g2(g, Statistics::boson, 10, RngSpec{}).mean ==
        doctest::Approx(2.0).epsilon(1e-6));
  CHECK(toy_model_g2(g, Statistics::fermion, 10, RngSpec{}).mean < 1e-6);

  g.emitters[1] = g.emitters[0];
  CHECK_THROWS_AS(toy_model_g2(g, Statistics::boson, 10, RngSpec{}), ValidationError);
}

TEST_CASE("toy model bunching washes out beyond the coherence length") {
  ToyModelGeometry g;
  g.emitters = {speckle::Vec3{-5e-4, 0, 0}, speckle::Vec3{5e-4, 0, 0}};
  g.wavenumber = 2.0 * std::numbers::pi / 5e-7;
  g.source_extent_m = 1e-3;
  g.detectors = {speckle::Vec3{0, 0, 1.0}, speckle::Vec3{2e-2, 0, 1.0}};
  auto far = toy_model_g2(g, Statistics::boson, 20000, RngSpec{4, 0});
  CHECK(std::fabs(far.mean - 1.0) < 4.0 * far.stderr_ + 0.01);
  g.detectors[1] = speckle::Vec3{1e-6, 0, 1.0};
  auto near = toy_model_g2(g, Statistics::boson, 2000, RngSpec{4, 0});
  CHECK(near.mean > 1.95);
}

TEST_CASE("boson cloud sampler") {
  CloudSpec s;
  s.correlation_length_mm = {0.5, 0.5, 0.5};
  s.extent_mm = {4.0, 4.0, 0.0};
  s.mean_atoms = 25.0;
  auto shots = sample_boson_cloud(s, 2000, RngSpec{6, 0}, 1);
  REQUIRE(shots.size() == 2000);
  CHECK_NOTHROW(validate_shots(shots));
  double n = static_cast<double>(total_events(shots));
  CHECK(n / 2000.0 == doctest::Approx(25.0).epsilon(0.05));
  for (const auto& sh : shots) {
    for (const auto& e : sh.events) {
      CHECK(std::fabs(e.x_mm) <= 2.0);
      CHECK(std::fabs(e.y_mm) <= 2.0);
      CHECK(e.t_ns == 0.0);
    }
  }
  CHECK(encode_shots(sample_boson_cloud(s, 2000, RngSpec{6, 0}, 3)) ==
        encode_shots(shots));

  s.mass_ratio = 0.75;
  auto l = s.effective_lengths();
  CHECK(l[0] == doctest::Approx(0.5 / 0.75));
  s.correlation_length_mm[1] = 0.0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("fermion kernel and sampler") {
  CloudSpec s;
  s.statistics = CloudStatistics::fermion;
  s.correlation_length_mm = {0.5, 0.5, 0.5};
  s.extent_mm = {10.0, 10.0, 0.0};
  s.mean_atoms = 30.0;
  FermionKernel k(s);
  CHECK(k.max_eigenvalue() <= 1.0);
  CHECK(k.trace() == doctest::Approx(30.0).epsilon(1e-6));
  CHECK(k.expected_count() == doctest::Approx(30.0).epsilon(0.02));

  auto shots = sample_fermion_cloud(s, 3000, RngSpec{2, 0}, 1);
  double sum = 0, sum2 = 0;
  for (const auto& sh : shots) {
    double c = static_cast<double>(sh.events.size());
    sum += c;
    sum2 += c * c;
  }
  double mean = sum / 3000.0, var = sum2 / 3000.0 - mean * mean;
  CHECK(mean == doctest::Approx(k.expected_count()).epsilon(0.02));
  // A projection-mixture DPP has Var N = Σ λ(1−λ) < E N.
  CHECK(var < mean);
  CHECK_NOTHROW(validate_shots(shots));

  CloudSpec dense = s;
  dense.extent_mm = {1.0, 1.0, 0.0};
  dense.mean_atoms = 40.0;
  CHECK_THROWS_AS(FermionKernel{dense}, ValidationError);
  dense.mean_atoms = 65.0;
  CHECK_THROWS_AS(dense.validate(), ValidationError);
}

TEST_CASE("washout model without blur is the plain bin average") {
  CloudSpec s;
  s.correlation_length_mm = {0.3, 0.6, 1.0};
  s.extent_mm = {4.0, 6.0, 0.0};
  Detector d;
  d.radius_mm = 0.0;
  correlator::BinningSpec b;
  b.axis = correlator::Axis::dx;
  b.edges = {0.0, 0.2, 0.6};
  b.gate_y_mm = 0.8;
  // Midpoint sums of w(Δx) w(Δy) e^{−Δx²/lx² − Δy²/ly²} over |Δy| < gate.
  auto oracle = [&](double lo, double hi) {
    const int nx = 400, ny = 800;
    double num = 0, den = 0;
    for (int i = 0; i < nx; ++i) {
      double x = lo + (i + 0.5) * (hi - lo) / nx;
      for (int j = 0; j < ny; ++j) {
        double y = -0.8 + (j + 0.5) * 1.6 / ny;
        double w = (4.0 - x) * (6.0 - std::fabs(y));
        den += w;
        num += w * std::exp(-x * x / 0.09 - y * y / 0.36);
      }
    }
    return 1.0 + num / den;
  };
  CHECK(psf_washout_g2(s, d, b, 0) == doctest::Approx(oracle(0.0, 0.2)).epsilon(1e-4));
  CHECK(psf_washout_g2(s, d, b, 1) == doctest::Approx(oracle(0.2, 0.6)).epsilon(1e-4));

  d.psf_sigma_x_mm = 2.0;
  d.psf_sigma_y_mm = 2.0;
  double blurred = psf_washout_g2(s, d, b, 0);
  CHECK(blurred > 1.0);
  CHECK(blurred < psf_washout_g2(s, Detector{0, 0, 0, 0, 0}, b, 0));

  d.radius_mm = 35.0;
  CHECK_THROWS_AS(psf_washout_g2(s, d, b, 0), InvalidArgument);
  d.radius_mm = 0.0;
  CHECK_THROWS_AS(psf_washout_g2(s, d, b, 5), InvalidArgument);
  b.axis = correlator::Axis::dt;
  CHECK_THROWS_AS(psf_washout_g2(s, d, b, 0), InvalidArgument);
}

}  // TEST_SUITE
