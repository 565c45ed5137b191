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
#include <map>
#include <numbers>

#include <doctest.h>

#include "qcorr/fock_optics.hpp"

using namespace qcorr;
using namespace qcorr::fock;

namespace {

using Poly = std::map<std::vector<int>, ComplexAmplitude>;

/// Product of creation operators, each a linear combination over output
/// modes, applied to the vacuum and returned as basis-state amplitudes.
Poly expand(const std::vector<std::vector<double>>& operators,
            std::size_t n_modes, double prefactor) {
  Poly p{{std::vector<int>(n_modes, 0), prefactor}};
  for (const auto& op : operators) {
    Poly next;
    for (const auto& [mono, c] : p) {
      for (std::size_t m = 0; m < n_modes; ++m) {
        if (op[m] == 0.0) continue;
        auto out = mono;
        ++out[m];
        next[out] += c * op[m];
      }
    }
    p = std::move(next);
  }
  Poly amps;
  for (const auto& [mono, c] : p) {
    double f = 1.0;
    for (int k : mono) f *= std::tgamma(k + 1.0);
    amps[mono] = c * std::sqrt(f);
  }
  return amps;
}

/// |n, m⟩ through a real splitter a → t a + r b, b → t b − r a.
Poly splitter_oracle(int n, int m, double t, double r) {
  std::vector<std::vector<double>> ops;
  for (int i = 0; i < n; ++i) ops.push_back({t, r});
  for (int i = 0; i < m; ++i) ops.push_back({-r, t});
  return expand(ops, 2, 1.0 / std::sqrt(std::tgamma(n + 1.0) * std::tgamma(m + 1.0)));
}

/// Coincidence probability of n pairs whose b packet has overlap v with a.
/// Output modes {c, d, c_perp, d_perp}.
double pairs_coincidence_oracle(int n, double v) {
  const double h = 1.0 / std::sqrt(2.0);
  const double w = std::sqrt(1.0 - v * v);
  std::vector<std::vector<double>> ops;
  for (int i = 0; i < n; ++i) ops.push_back({h, h, 0, 0});
  for (int i = 0; i < n; ++i) ops.push_back({-h * v, h * v, -h * w, h * w});
  auto amps = expand(ops, 4, 1.0 / std::tgamma(n + 1.0));
  double p = 0.0;
  for (const auto& [o, a] : amps) {
    if (o[0] + o[2] >= 1 && o[1] + o[3] >= 1) p += std::norm(a);
  }
  return p;
}

}  // namespace

TEST_SUITE("fock_optics") {

TEST_CASE("balanced splitter on |1,1> empties the coincidence port") {
  FockState in({"a", "b"}, Occupation{1, 1});
  auto out = splitter_transform(in, SplitterSpec::balanced(), "a", "b");
  CHECK(out.amplitude({1, 1}) == ComplexAmplitude(0.0, 0.0));
  CHECK(out.probability({1, 1}) == 0.0);
  // NOON output with the sign fixed by b → t b − r a.
  CHECK(out.amplitude({0, 2}).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(out.amplitude({2, 0}).real() == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(out.norm_squared() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("splitter output equals the operator expansion") {
  for (double t : {1.0 / std::sqrt(2.0), 0.3, 0.9, 0.0, 1.0}) {
    auto spec = SplitterSpec::from_transmission(t);
    for (auto [n, m] : {std::pair{2, 2}, std::pair{1, 2}, std::pair{3, 1}, std::pair{0, 4}}) {
      FockState in({"a", "b"}, Occupation{n, m});
      auto out = splitter_transform(in, spec, "a", "b");
      auto want = splitter_oracle(n, m, spec.t, spec.r);
      double total = 0.0;
      for (const auto& [occ, amp] : want) {
        CHECK(std::abs(out.amplitude(occ) - amp) < 1e-12);
        total += std::norm(amp);
      }
      CHECK(total == doctest::Approx(1.0));
      CHECK(out.norm_squared() == doctest::Approx(1.0).epsilon(1e-13));
    }
  }
  // |2,2⟩ on a balanced splitter: P(2,2) = 1/4, P(4,0) = P(0,4) = 3/8.
  FockState in({"a", "b"}, Occupation{2, 2});
  auto out = splitter_transform(in, SplitterSpec::balanced(), "a", "b");
  CHECK(out.probability({2, 2}) == doctest::Approx(0.25));
  CHECK(out.probability({4, 0}) == doctest::Approx(0.375));
  CHECK(out.probability({3, 1}) == doctest::Approx(0.0));
}

TEST_CASE("inverse splitter, mirror and phase shift") {
  std::map<Occupation, ComplexAmplitude> terms{{{2, 1, 0}, {0.6, 0.0}},
                                               {{0, 1, 2}, {0.0, 0.8}}};
  FockState s({"a", "b", "c"}, terms);
  auto spec = SplitterSpec::from_transmission(0.35);
  auto back = splitter_transform(splitter_transform(s, spec, "a", "c"),
                                 spec.inverse(), "a", "c");
  for (const auto& [o, a] : terms) CHECK(std::abs(back.amplitude(o) - a) < 1e-12);

  FockState one({"a", "b"}, Occupation{1, 0});
  auto mirrored = splitter_transform(one, SplitterSpec::mirror(), "a", "b");
  CHECK(mirrored.probability({0, 1}) == doctest::Approx(1.0));

  auto shifted = phase_shift(s, "c", 0.5);
  CHECK(std::abs(shifted.amplitude({0, 1, 2}) -
                 ComplexAmplitude(0.0, 0.8) * std::polar(1.0, 1.0)) < 1e-14);
  CHECK(shifted.amplitude({2, 1, 0}) == ComplexAmplitude(0.6, 0.0));
}

TEST_CASE("state validation") {
  CHECK_THROWS_AS(FockState({"a", "b"}, Occupation{5, 4}).validate(), ValidationError);
  std::map<Occupation, ComplexAmplitude> unnormalized{{{1, 0}, {1.0, 0.0}},
                                                      {{0, 1}, {1.0, 0.0}}};
  CHECK_THROWS_AS(FockState({"a", "b"}, unnormalized).validate(), ValidationError);
  CHECK_THROWS(FockState({"a", "b"}, Occupation{-1, 1}).validate());
  CHECK_THROWS(SplitterSpec::from_transmission(1.2));
  FockState s({"a", "b"}, Occupation{1, 1});
  CHECK_THROWS(splitter_transform(s, SplitterSpec::balanced(), "a", "z"));
}

TEST_CASE("outcome tables merge modes onto detectors") {
  std::map<Occupation, ComplexAmplitude> terms{
      {{1, 0, 1, 0}, {0.5, 0.0}}, {{0, 1, 0, 1}, {0.5, 0.0}},
      {{1, 1, 0, 0}, {0.5, 0.0}}, {{0, 0, 1, 1}, {0.5, 0.0}}};
  FockState s({"a", "a'", "b", "b'"}, terms);
  auto t = outcome_table(s, {0, 0, 1, 1});
  CHECK(t.at({1, 1}) == doctest::Approx(0.5));
  CHECK(t.at({2, 0}) == doctest::Approx(0.25));
  CHECK(t.at({0, 2}) == doctest::Approx(0.25));
}

TEST_CASE("HOM coincidence closed forms") {
  CHECK(mode_overlap(0.0, 1.0) == 1.0);
  CHECK(mode_overlap(2.0, 1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(hom_coincidence(0.0, 1.0, HomSource::ideal()) == 0.0);
  for (double delay : {0.3, 1.0, 2.5, 8.0}) {
    double v = mode_overlap(delay, 1.0);
    CHECK(hom_coincidence(delay, 1.0, HomSource::ideal()) ==
          doctest::Approx(0.5 * (1.0 - v * v)));
    CHECK(hom_coincidence(delay, 1.0, HomSource::classical_field()) ==
          doctest::Approx(0.25 * (1.0 - 0.5 * v * v)));
  }
}

TEST_CASE("truncated twin-source coincidence equals the Fock oracle") {
  for (double nbar : {0.05, 0.2, 0.5}) {
    for (int max_pairs : {1, 2, 3}) {
      auto src = HomSource::twin(nbar, max_pairs);
      for (double delay : {0.0, 0.8, 3.0, 10.0}) {
        double v = mode_overlap(delay, 1.0);
        double x = nbar / (1.0 + nbar);
        double want = 0.0;
        for (int n = 1; n <= max_pairs; ++n) {
          want += (1.0 - x) * std::pow(x, n) * pairs_coincidence_oracle(n, v);
        }
        CHECK(hom_coincidence(delay, 1.0, src) == doctest::Approx(want).epsilon(1e-12));
      }
      CHECK(tmsv_truncation_tail(src) ==
            doctest::Approx(std::pow(nbar / (1.0 + nbar), max_pairs + 1)));
    }
  }
  CHECK_THROWS_AS(HomSource::twin(1.5).validate(), ValidationError);
  CHECK_THROWS_AS(HomSource::twin(0.2, 9).validate(), ValidationError);
}

TEST_CASE("HOM output state for n pairs") {
  for (int n : {1, 2}) {
    for (double v : {0.0, 0.4, 1.0}) {
      auto s = hom_output_state(n, v);
      CHECK(s.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
      double p = 0.0;
      for (const auto& [o, a] : s.terms()) {
        if (o[0] + o[2] >= 1 && o[1] + o[3] >= 1) p += std::norm(a);
      }
      CHECK(p == doctest::Approx(pairs_coincidence_oracle(n, v)).epsilon(1e-12));
    }
  }
}

TEST_CASE("classical random-phase baseline") {
  auto r = classical_rates(std::numbers::pi / 4.0);
  CHECK(r.w1_d3 == doctest::Approx(0.5));
  CHECK(r.w2_joint == doctest::Approx(0.25));
  auto b = classical_hom_baseline(200000, RngSpec{3, 0});
  CHECK(std::fabs(b.ratio - 0.5) < 4.0 * b.ratio_stderr);
  CHECK(std::fabs(b.w2_joint - 0.125) < 4.0 * b.w2_stderr);
  CHECK_THROWS_AS(classical_hom_baseline(100, RngSpec{}), ValidationError);
}

TEST_CASE("dip scans") {
  std::vector<double> delays{-8, -1, 0, 1, 8};
  auto ideal = hom_dip_scan(delays, 1.0, HomSource::ideal(), 5000, RngSpec{1, 0});
  CHECK(ideal.coincidences[2] == 0);
  CHECK(ideal.p_joint[2] == 0.0);
  CHECK(std::fabs(ideal.p_far - 0.5) < 0.03);
  CHECK(ideal.witness == Witness::quantum_witness);
  CHECK(ideal.to_csv().rfind("delay_ns,p_joint,stderr\n", 0) == 0);

  auto classical = hom_dip_scan(delays, 1.0, HomSource::classical_field(), 5000,
                                RngSpec{1, 0});
  CHECK(classical.witness != Witness::quantum_witness);
  CHECK(std::fabs(classical.visibility - 0.5) < 4.0 * classical.visibility_stderr);
}

TEST_CASE("twin source sampling and contamination inference") {
  PairSourceSpec spec{0.2, 100000};
  auto pairs = tmsv_sample(spec, RngSpec{5, 0});
  REQUIRE(pairs.size() == 100000);
  std::vector<int> occ;
  double sum = 0.0;
  for (auto [a, b] : pairs) {
    CHECK(a == b);
    occ.push_back(a);
    sum += a;
  }
  CHECK(sum / 1e5 == doctest::Approx(0.2).epsilon(0.03));
  auto est = infer_contamination(occ);
  CHECK(std::fabs(est.nbar - 0.2) < 4.0 * est.nbar_stderr);
  CHECK(est.local_g2 == doctest::Approx(2.0).epsilon(0.1));

  // Poisson occupations: local g2 of 1.
  Rng gen(RngSpec{6, 0}, StreamTag::user);
  std::vector<int> poisson(100000);
  for (auto& n : poisson) n = static_cast<int>(gen.poisson(0.3));
  CHECK(infer_contamination(poisson).local_g2 == doctest::Approx(1.0).epsilon(0.05));
  CHECK_THROWS(infer_contamination({}));
}

TEST_CASE("four-mode Bell correlations") {
  for (double a = -3.0; a <= 3.0; a += 0.37) {
    for (double b = -3.0; b <= 3.0; b += 0.41) {
      auto table = rarity_tapster(a, b);
      double total = 0.0;
      for (const auto& [o, p] : table) total += p;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(correlation(table) == doctest::Approx(std::cos(a + b)).epsilon(1e-12));
    }
  }
  CHECK(std::fabs(chsh(ChshSettings::optimal()) - 2.0 * std::sqrt(2.0)) < 1e-12);
  CHECK(chsh_combination({1, 1, 1, -1}) == 4.0);

  auto s = chsh_sample(ChshSettings::optimal(), 40000, RngSpec{2, 0});
  CHECK(std::fabs(s.s - 2.0 * std::sqrt(2.0)) < 4.0 * s.s_stderr);
  std::size_t shots = 0;
  for (auto n : s.shots) shots += n;
  CHECK(shots == 40000);
}

TEST_CASE("local hidden variables never exceed 2") {
  // Independent enumeration: S = |A B + A B' + A' B − A' B'|.
  int best = 0;
  for (int A : {-1, 1}) {
    for (int Ap : {-1, 1}) {
      for (int B : {-1, 1}) {
        for (int Bp : {-1, 1}) {
          best = std::max(best, std::abs(A * B + A * Bp + Ap * B - Ap * Bp));
        }
      }
    }
  }
  CHECK(best == 2);
  CHECK(lhv_max_s() == 2);
  for (unsigned i = 0; i < 16; ++i) CHECK(lhv_deterministic_s(i) == 2);

  auto u = lhv_simulation(parse_lhv("uniform_random"), 40000, RngSpec{1, 0});
  CHECK(std::fabs(u.s) < 4.0 * u.s_stderr);
  auto h = lhv_simulation(parse_lhv("hom_mimic"), 40000, RngSpec{1, 0});
  CHECK(h.s <= 2.0 + 3.0 * h.s_stderr);
  auto d = lhv_simulation(parse_lhv("deterministic:9"), 1000, RngSpec{1, 0});
  CHECK(d.s == 2.0);
  CHECK(lhv_name(parse_lhv("deterministic:9")) == "deterministic:9");
  CHECK_THROWS_AS(parse_lhv("deterministic:16"), InvalidArgument);
  CHECK_THROWS_AS(parse_lhv("superdeterminism"), InvalidArgument);

  auto table = hom_mimic_outcomes(1000, RngSpec{});
  CHECK(table.count({1, 1}) == 0);
}

}  // TEST_SUITE
