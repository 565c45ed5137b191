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

#include <bit>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "qcorr/two_particle.hpp"

namespace qcorr::two_particle {

Statistics parse_statistics(const std::string& name) {
  if (name == "boson") return Statistics::boson;
  if (name == "fermion") return Statistics::fermion;
  if (name == "distinguishable") return Statistics::distinguishable;
  throw InvalidArgument("unknown statistics '" + name + "'");
}

std::string statistics_name(Statistics s) {
  switch (s) {
    case Statistics::boson: return "boson";
    case Statistics::fermion: return "fermion";
    case Statistics::distinguishable: return "distinguishable";
  }
  return "boson";
}

AmplitudeMatrix::AmplitudeMatrix(std::size_t n,
                                 std::vector<ComplexAmplitude> row_major,
                                 Statistics statistics)
  : n_(n), entries_(std::move(row_major)), statistics_(statistics) {
  if (n_ < kMinSize || n_ > kMaxSize) {
    throw ValidationError("amplitude matrix size must be in [2, 6], got " +
                          std::to_string(n_));
  }
  if (entries_.size() != n_ * n_) {
    throw ValidationError("amplitude matrix needs n*n entries");
  }
  for (const auto& z : entries_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw ValidationError("amplitude matrix entries must be finite");
    }
  }
}

namespace {

template <typename T, typename Get>
T ryser(std::size_t n, Get get) {
  // perm = (-1)^n Σ_{S ≠ ∅} (-1)^{|S|} Π_i Σ_{j∈S} a_ij, Gray-code order.
  std::vector<T> row_sum(n, T{});
  T total{};
  std::uint32_t gray_prev = 0;
  const std::uint32_t count = 1u << n;
  for (std::uint32_t k = 1; k < count; ++k) {
    std::uint32_t gray = k ^ (k >> 1);
    std::uint32_t diff = gray ^ gray_prev;
    std::size_t j = static_cast<std::size_t>(std::countr_zero(diff));
    bool added = (gray & diff) != 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (added) {
        row_sum[i] += get(i, j);
      } else {
        row_sum[i] -= get(i, j);
      }
    }
    gray_prev = gray;
    T prod = row_sum[0];
    for (std::size_t i = 1; i < n; ++i) prod *= row_sum[i];
    int bits = std::popcount(gray);
    if (((static_cast<int>(n) - bits) & 1) == 0) {
      total += prod;
    } else {
      total -= prod;
    }
  }
  return total;
}

}  // namespace

ComplexAmplitude permanent(const AmplitudeMatrix& m) {
  return ryser<ComplexAmplitude>(
      m.size(), [&](std::size_t i, std::size_t j) { return m.at(i, j); });
}

ComplexAmplitude determinant(const AmplitudeMatrix& m) {
  std::size_t n = m.size();
  Eigen::MatrixXcd a(static_cast<Eigen::Index>(n),
                     static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m.at(i, j);
    }
  }
  return a.determinant();
}

double distinguishable_weight(const AmplitudeMatrix& m) {
  return ryser<double>(m.size(), [&](std::size_t i, std::size_t j) {
    return std::norm(m.at(i, j));
  });
}

JointProbability joint_probability(const AmplitudeMatrix& m) {
  JointProbability p;
  p.distinguishable = distinguishable_weight(m);
  if (!(p.distinguishable > 0.0)) {
    throw ValidationError(
        "joint_probability: distinguishable normalizer is zero (no "
        "detection probability)");
  }
  switch (m.statistics()) {
    case Statistics::boson: p.raw = std::norm(permanent(m)); break;
    case Statistics::fermion: p.raw = std::norm(determinant(m)); break;
    case Statistics::distinguishable: p.raw = p.distinguishable; break;
  }
  p.factor = p.raw / p.distinguishable;
  return p;
}

// ---------------------------------------------------------------------------

namespace {

double distance(const speckle::Vec3& a, const speckle::Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

constexpr double kMinDistance = 1e-15;

}  // namespace

void ToyModelGeometry::validate() const {
  if (!(wavenumber > 0.0) || !std::isfinite(wavenumber)) {
    throw ValidationError("toy model: wavenumber must be > 0");
  }
  if (!(source_extent_m >= 0.0) || !std::isfinite(source_extent_m)) {
    throw ValidationError("toy model: source extent must be >= 0");
  }
  if (distance(emitters[0], emitters[1]) < kMinDistance) {
    throw ValidationError("toy model: coincident emitters");
  }
  for (const auto& e : emitters) {
    for (const auto& d : detectors) {
      if (distance(e, d) < kMinDistance) {
        throw ValidationError(
            "toy model: detector coincides with an emitter");
      }
    }
  }
}

ToyModelResult toy_model_g2(const ToyModelGeometry& geometry,
                            Statistics statistics,
                            std::size_t n_phase_realizations,
                            const RngSpec& rng) {
  geometry.validate();
  if (n_phase_realizations < 2) {
    throw ValidationError("toy model needs >= 2 realizations");
  }
  Rng gen(rng, StreamTag::toy_model);
  const double two_pi = 2.0 * std::numbers::pi;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t r = 0; r < n_phase_realizations; ++r) {
    std::array<speckle::Vec3, 2> em = geometry.emitters;
    std::array<double, 2> phase{};
    for (std::size_t i = 0; i < 2; ++i) {
      phase[i] = two_pi * gen.uniform();
      if (geometry.source_extent_m > 0.0) {
        em[i].x += geometry.source_extent_m * (gen.uniform() - 0.5);
        em[i].y += geometry.source_extent_m * (gen.uniform() - 0.5);
      }
    }
    std::vector<ComplexAmplitude> entries(4);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        double d = distance(em[i], geometry.detectors[j]);
        if (d < kMinDistance) {
          throw ValidationError(
              "toy model: displaced emitter coincides with a detector");
        }
        entries[i * 2 + j] =
            std::polar(1.0 / d, phase[i] + geometry.wavenumber * d);
      }
    }
    double f = joint_probability(
                   AmplitudeMatrix(2, std::move(entries), statistics))
                   .factor;
    sum += f;
    sum2 += f * f;
  }
  double n = static_cast<double>(n_phase_realizations);
  ToyModelResult res;
  res.mean = sum / n;
  double var = std::max(0.0, (sum2 / n - res.mean * res.mean)) * n / (n - 1.0);
  res.stderr_ = std::sqrt(var / n);
  res.realizations = n_phase_realizations;
  return res;
}

}  // namespace qcorr::two_particle
