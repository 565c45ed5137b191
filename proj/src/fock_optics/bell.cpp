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
#include <numbers>

#include "qcorr/fock_optics.hpp"

namespace qcorr::fock {

FockState rarity_tapster_state(double phi_a, double phi_b) {
  const std::vector<std::string> modes{"p3", "p3'", "p4", "p4'"};
  std::map<Occupation, ComplexAmplitude> terms{
      {{1, 0, 1, 0}, ComplexAmplitude(M_SQRT1_2, 0.0)},
      {{0, 1, 0, 1}, ComplexAmplitude(M_SQRT1_2, 0.0)}};
  FockState s(modes, std::move(terms));
  s = phase_shift(s, "p3'", phi_a);
  s = phase_shift(s, "p4'", phi_b);
  s = splitter_transform(s, SplitterSpec::balanced(), "p3", "p3'");
  return splitter_transform(s, SplitterSpec::balanced(), "p4", "p4'");
}

OutcomeTable rarity_tapster(double phi_a, double phi_b) {
  return outcome_table(rarity_tapster_state(phi_a, phi_b));
}

double correlation(const OutcomeTable& table) {
  double e = 0.0;
  for (const auto& [occ, p] : table) {
    if (occ.size() != 4) {
      throw InvalidArgument("correlation needs four-detector outcomes");
    }
    int sa = occ[0] - occ[1];
    int sb = occ[2] - occ[3];
    e += p * sa * sb;
  }
  return e;
}

ChshSettings ChshSettings::optimal() {
  const double q = std::numbers::pi / 4.0;
  return ChshSettings{0.0, 2.0 * q, -q, q};
}

double chsh_combination(const std::array<double, 4>& e) {
  return std::fabs(e[0] + e[1] + e[2] - e[3]);
}

double chsh(const ChshSettings& settings) {
  std::array<double, 4> e{};
  auto pairs = settings.pairs();
  for (std::size_t k = 0; k < 4; ++k) {
    e[k] = correlation(rarity_tapster(pairs[k].first, pairs[k].second));
  }
  return chsh_combination(e);
}

namespace {

/// Accumulates ±1 products per setting and finalizes E, stderr and S.
struct ChshTally {
  std::array<double, 4> sum{};
  std::array<std::size_t, 4> n{};

  void add(int k, int product) {
    sum[static_cast<std::size_t>(k)] += product;
    ++n[static_cast<std::size_t>(k)];
  }

  ChshSample finish() const {
    ChshSample out;
    double var_s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      out.shots[k] = n[k];
      if (n[k] == 0) {
        throw ValidationError("CHSH sample has a setting with no shots");
      }
      double nk = static_cast<double>(n[k]);
      out.e[k] = sum[k] / nk;
      out.e_stderr[k] = std::sqrt(std::max(0.0, 1.0 - out.e[k] * out.e[k]) / nk);
      var_s += out.e_stderr[k] * out.e_stderr[k];
    }
    out.s = chsh_combination(out.e);
    out.s_stderr = std::sqrt(var_s);
    return out;
  }
};

}  // namespace

ChshSample chsh_sample(const ChshSettings& settings, std::size_t n_shots,
                       const RngSpec& rng) {
  if (n_shots < 4) throw ValidationError("CHSH sampling needs >= 4 shots");
  auto pairs = settings.pairs();
  std::array<std::vector<std::pair<double, int>>, 4> cdf;
  for (std::size_t k = 0; k < 4; ++k) {
    double acc = 0.0;
    for (const auto& [occ, p] : rarity_tapster(pairs[k].first, pairs[k].second)) {
      acc += p;
      cdf[k].emplace_back(acc, (occ[0] - occ[1]) * (occ[2] - occ[3]));
    }
  }
  Rng gen(rng, StreamTag::bell);
  ChshTally tally;
  for (std::size_t s = 0; s < n_shots; ++s) {
    auto k = static_cast<std::size_t>(gen.below(4));
    double u = gen.uniform() * cdf[k].back().first;
    int product = cdf[k].back().second;
    for (const auto& [c, prod] : cdf[k]) {
      if (u < c) {
        product = prod;
        break;
      }
    }
    tally.add(static_cast<int>(k), product);
  }
  return tally.finish();
}

// ---------------------------------------------------------------------------

std::string lhv_name(const LhvStrategy& s) {
  switch (s.kind) {
    case LhvKind::deterministic:
      return "deterministic:" + std::to_string(s.index);
    case LhvKind::uniform_random: return "uniform_random";
    case LhvKind::hom_mimic: return "hom_mimic";
  }
  return "uniform_random";
}

LhvStrategy parse_lhv(const std::string& name) {
  if (name == "uniform_random") return {LhvKind::uniform_random, 0};
  if (name == "hom_mimic") return {LhvKind::hom_mimic, 0};
  const std::string prefix = "deterministic:";
  if (name.rfind(prefix, 0) == 0) {
    std::string rest = name.substr(prefix.size());
    if (!rest.empty() && rest.size() <= 2 &&
        rest.find_first_not_of("0123456789") == std::string::npos) {
      unsigned idx = static_cast<unsigned>(std::stoul(rest));
      if (idx < 16) return {LhvKind::deterministic, idx};
    }
  }
  throw InvalidArgument("unknown LHV strategy '" + name +
                        "' (deterministic:0..15, uniform_random, hom_mimic)");
}

std::pair<int, int> lhv_outcome(const LhvStrategy& s, int setting,
                                std::uint64_t hidden) {
  if (setting < 0 || setting > 3) throw InvalidArgument("setting must be 0..3");
  auto pm = [](bool bit) { return bit ? 1 : -1; };
  switch (s.kind) {
    case LhvKind::deterministic: {
      unsigned a_bit = setting < 2 ? 0u : 1u;
      unsigned b_bit = (setting % 2 == 0) ? 2u : 3u;
      return {pm((s.index >> a_bit) & 1u), pm((s.index >> b_bit) & 1u)};
    }
    case LhvKind::uniform_random:
      return {pm(hidden & 1u), pm((hidden >> 1) & 1u)};
    case LhvKind::hom_mimic: {
      int side = pm(hidden & 1u);
      return {side, side};
    }
  }
  return {1, 1};
}

int lhv_deterministic_s(unsigned index) {
  if (index >= 16) throw InvalidArgument("deterministic strategy index 0..15");
  LhvStrategy s{LhvKind::deterministic, index};
  std::array<int, 4> e{};
  for (int k = 0; k < 4; ++k) {
    auto [a, b] = lhv_outcome(s, k, 0);
    e[static_cast<std::size_t>(k)] = a * b;
  }
  int v = e[0] + e[1] + e[2] - e[3];
  return v < 0 ? -v : v;
}

int lhv_max_s() {
  int best = 0;
  for (unsigned i = 0; i < 16; ++i) best = std::max(best, lhv_deterministic_s(i));
  return best;
}

ChshSample lhv_simulation(const LhvStrategy& strategy, std::size_t n_shots,
                          const RngSpec& rng) {
  if (n_shots < 4) throw ValidationError("LHV simulation needs >= 4 shots");
  if (strategy.kind == LhvKind::deterministic && strategy.index >= 16) {
    throw InvalidArgument("deterministic strategy index 0..15");
  }
  Rng gen(rng, StreamTag::lhv);
  ChshTally tally;
  for (std::size_t s = 0; s < n_shots; ++s) {
    int k = static_cast<int>(gen.below(4));
    std::uint64_t hidden = gen();
    auto [a, b] = lhv_outcome(strategy, k, hidden);
    tally.add(k, a * b);
  }
  return tally.finish();
}

OutcomeTable hom_mimic_outcomes(std::size_t n_shots, const RngSpec& rng) {
  if (n_shots == 0) throw ValidationError("HOM mimic needs >= 1 shot");
  Rng gen(rng, StreamTag::lhv, 1);
  std::size_t c_side = 0;
  for (std::size_t s = 0; s < n_shots; ++s) {
    if (gen() & 1u) ++c_side;
  }
  double n = static_cast<double>(n_shots);
  OutcomeTable t;
  t[{2, 0}] = static_cast<double>(c_side) / n;
  t[{0, 2}] = static_cast<double>(n_shots - c_side) / n;
  return t;
}

}  // namespace qcorr::fock
