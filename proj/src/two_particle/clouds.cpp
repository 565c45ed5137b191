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
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qcorr/parallel.hpp"
#include "qcorr/two_particle.hpp"

namespace qcorr::two_particle {

namespace {

constexpr double kBosonPitch = 0.25;
constexpr double kFermionPitch = 1.0 / 6.0;
constexpr double kMaxPitch = 0.25;
constexpr double kEigenTolerance = 1e-9;
constexpr double kEigenFloor = 1e-12;
constexpr double kMaxFermionMean = 64.0;
constexpr std::size_t kMaxCells = 20'000'000;

struct AxisGrid {
  std::size_t n = 1;
  double pitch = 0.0;
  double origin = 0.0;
};

double pitch_fraction(const CloudSpec& spec) {
  if (spec.pitch_fraction > 0.0) return spec.pitch_fraction;
  return spec.statistics == CloudStatistics::boson ? kBosonPitch
                                                   : kFermionPitch;
}

std::array<AxisGrid, 3> make_axes(const CloudSpec& spec) {
  std::array<double, 3> l = spec.effective_lengths();
  double pf = pitch_fraction(spec);
  std::array<AxisGrid, 3> axes;
  double cells = 1.0;
  for (int i = 0; i < spec.dimensions(); ++i) {
    double extent = spec.extent_mm[static_cast<std::size_t>(i)];
    double target = pf * l[static_cast<std::size_t>(i)];
    double n = std::max(1.0, std::ceil(extent / target - 1e-9));
    cells *= n;
    if (cells > static_cast<double>(kMaxCells)) {
      throw ValidationError("cloud grid too large (more than " +
                            std::to_string(kMaxCells) + " cells)");
    }
    AxisGrid& a = axes[static_cast<std::size_t>(i)];
    a.n = static_cast<std::size_t>(n);
    a.pitch = extent / n;
    a.origin = i < 2 ? -0.5 * extent : 0.0;
  }
  return axes;
}

DetectionEvent to_event(const CloudSpec& spec, double x, double y, double z) {
  double t = spec.planar() ? 0.0 : z / spec.fall_velocity_mm_per_ns;
  return make_event(x, y, t);
}

}  // namespace

void CloudSpec::validate() const {
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(correlation_length_mm[i] > 0.0) ||
        !std::isfinite(correlation_length_mm[i])) {
      throw ValidationError("cloud correlation lengths must be > 0");
    }
  }
  if (!(extent_mm[0] > 0.0) || !(extent_mm[1] > 0.0) ||
      !std::isfinite(extent_mm[0]) || !std::isfinite(extent_mm[1])) {
    throw ValidationError("cloud x/y extents must be > 0");
  }
  if (!(extent_mm[2] >= 0.0) || !std::isfinite(extent_mm[2])) {
    throw ValidationError("cloud z extent must be >= 0");
  }
  if (!(mean_atoms >= 1.0) || !std::isfinite(mean_atoms)) {
    throw ValidationError("cloud mean atom number must be >= 1");
  }
  if (!(mass_ratio > 0.0) || !std::isfinite(mass_ratio)) {
    throw ValidationError("cloud mass ratio must be > 0");
  }
  if (!planar() && !(fall_velocity_mm_per_ns > 0.0)) {
    throw ValidationError("cloud fall velocity must be > 0");
  }
  if (pitch_fraction < 0.0 || pitch_fraction > kMaxPitch + 1e-12) {
    throw ValidationError(
        "cloud grid resolution coarser than l/4 (pitch fraction " +
        std::to_string(pitch_fraction) + ")");
  }
  if (statistics == CloudStatistics::fermion && mean_atoms > kMaxFermionMean) {
    throw ValidationError("fermion cloud mean atom number must be <= 64");
  }
}

std::array<double, 3> CloudSpec::effective_lengths() const {
  return {correlation_length_mm[0] / mass_ratio,
          correlation_length_mm[1] / mass_ratio,
          correlation_length_mm[2] / mass_ratio};
}

// ---------------------------------------------------------------------------
// Bosons: Gaussian-kernel smoothing of complex white noise, then thinning.

namespace {

class BosonSampler {
 public:
  explicit BosonSampler(const CloudSpec& spec) : spec_(spec) {
    axes_ = make_axes(spec);
    std::array<double, 3> l = spec.effective_lengths();
    for (int i = 0; i < spec.dimensions(); ++i) {
      auto& k = kernel_[static_cast<std::size_t>(i)];
      // g1 = exp(-Δ²/(2l²)) needs a Gaussian kernel of width l/√2.
      double s = l[static_cast<std::size_t>(i)] / std::sqrt(2.0) /
                 axes_[static_cast<std::size_t>(i)].pitch;
      int m = static_cast<int>(std::ceil(3.0 * s));
      k.resize(static_cast<std::size_t>(2 * m + 1));
      double norm = 0.0;
      for (int j = -m; j <= m; ++j) {
        double v = std::exp(-0.5 * j * j / (s * s));
        k[static_cast<std::size_t>(j + m)] = v;
        norm += v * v;
      }
      for (double& v : k) v /= std::sqrt(norm);
    }
    if (spec.planar()) kernel_[2] = {1.0};
  }

  Shot sample(std::size_t shot_id, Rng& gen) const {
    std::array<std::size_t, 3> n{axes_[0].n, axes_[1].n, axes_[2].n};
    std::array<std::size_t, 3> padded{};
    for (std::size_t i = 0; i < 3; ++i) padded[i] = n[i] + kernel_[i].size() - 1;

    // Layout index = (x * ny + y) * nz + z for the current array dims.
    std::vector<ComplexAmplitude> noise(padded[0] * padded[1] * padded[2]);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (auto& w : noise) {
      double re = gen.normal();
      double im = gen.normal();
      w = ComplexAmplitude(re * inv_sqrt2, im * inv_sqrt2);
    }
    std::array<std::size_t, 3> dims = padded;
    std::vector<ComplexAmplitude> field = std::move(noise);
    for (std::size_t axis = 0; axis < 3; ++axis) {
      field = convolve(field, dims, axis, n[axis]);
      dims[axis] = n[axis];
    }

    std::vector<double> intensity(field.size());
    double imax = 0.0;
    for (std::size_t c = 0; c < field.size(); ++c) {
      intensity[c] = std::norm(field[c]);
      imax = std::max(imax, intensity[c]);
    }

    Shot shot;
    shot.shot_id = shot_id;
    // E[I] = 1, so a density of mean_atoms/volume thinned by I/imax gives
    // mean_atoms expected events.
    std::uint64_t candidates = gen.poisson(spec_.mean_atoms * imax);
    for (std::uint64_t c = 0; c < candidates; ++c) {
      std::array<double, 3> pos{};
      std::array<std::size_t, 3> cell{};
      for (std::size_t i = 0; i < 3; ++i) {
        if (i == 2 && spec_.planar()) break;
        double u = gen.uniform();
        cell[i] = std::min(n[i] - 1, static_cast<std::size_t>(u * n[i]));
        pos[i] = axes_[i].origin + u * spec_.extent_mm[i];
      }
      double v = intensity[(cell[0] * n[1] + cell[1]) * n[2] + cell[2]];
      if (gen.uniform() * imax < v) {
        shot.events.push_back(to_event(spec_, pos[0], pos[1], pos[2]));
      }
    }
    shot.canonicalize();
    return shot;
  }

 private:
  std::vector<ComplexAmplitude> convolve(const std::vector<ComplexAmplitude>& in,
                                         const std::array<std::size_t, 3>& dims,
                                         std::size_t axis,
                                         std::size_t out_len) const {
    const auto& k = kernel_[axis];
    std::array<std::size_t, 3> od = dims;
    od[axis] = out_len;
    std::vector<ComplexAmplitude> out(od[0] * od[1] * od[2]);
    std::array<std::size_t, 3> in_stride{dims[1] * dims[2], dims[2], 1};
    std::array<std::size_t, 3> out_stride{od[1] * od[2], od[2], 1};
    for (std::size_t a = 0; a < od[0]; ++a) {
      for (std::size_t b = 0; b < od[1]; ++b) {
        for (std::size_t c = 0; c < od[2]; ++c) {
          std::size_t base =
              a * in_stride[0] + b * in_stride[1] + c * in_stride[2];
          ComplexAmplitude acc{};
          for (std::size_t j = 0; j < k.size(); ++j) {
            acc += k[j] * in[base + j * in_stride[axis]];
          }
          out[a * out_stride[0] + b * out_stride[1] + c] = acc;
        }
      }
    }
    return out;
  }

  CloudSpec spec_;
  std::array<AxisGrid, 3> axes_;
  std::array<std::vector<double>, 3> kernel_;
};

template <typename Sampler>
ShotList sample_shots(const Sampler& sampler, std::size_t n_shots,
                      const RngSpec& rng, StreamTag tag, unsigned threads) {
  ShotList shots(n_shots);
  parallel_chunks(n_shots, threads,
                  [&](unsigned, std::size_t begin, std::size_t end) {
                    for (std::size_t s = begin; s < end; ++s) {
                      Rng gen(rng, tag, s);
                      shots[s] = sampler.sample(s, gen);
                    }
                  });
  return shots;
}

}  // namespace

ShotList sample_boson_cloud(const CloudSpec& spec, std::size_t n_shots,
                            const RngSpec& rng, unsigned threads) {
  spec.validate();
  if (spec.statistics != CloudStatistics::boson) {
    throw InvalidArgument("sample_boson_cloud: spec statistics must be boson");
  }
  BosonSampler sampler(spec);
  return sample_shots(sampler, n_shots, rng, StreamTag::boson_field, threads);
}

// ---------------------------------------------------------------------------
// Fermions: spectral sampling of the discretized Gaussian DPP.

FermionKernel::FermionKernel(const CloudSpec& spec) : spec_(spec) {
  spec.validate();
  if (spec.statistics != CloudStatistics::fermion) {
    throw InvalidArgument("FermionKernel: spec statistics must be fermion");
  }
  dims_ = spec.dimensions();
  std::array<AxisGrid, 3> grid = make_axes(spec);
  std::array<double, 3> l = spec.effective_lengths();
  double volume = spec.extent_mm[0] * spec.extent_mm[1] *
                  (spec.planar() ? 1.0 : spec.extent_mm[2]);
  double density = spec.mean_atoms / volume;

  for (int i = 0; i < 3; ++i) {
    Axis& ax = axes_[static_cast<std::size_t>(i)];
    const AxisGrid& g = grid[static_cast<std::size_t>(i)];
    ax.n = g.n;
    ax.pitch = g.pitch;
    ax.origin = g.origin;
    if (i >= dims_) {
      ax.values = {1.0};
      ax.vectors = {1.0};
      ax.cdf = {1.0};
      continue;
    }
    auto n = static_cast<Eigen::Index>(g.n);
    Eigen::MatrixXd a(n, n);
    double li = l[static_cast<std::size_t>(i)];
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) {
        double d = static_cast<double>(r - c) * g.pitch;
        a(r, c) = g.pitch * std::exp(-0.5 * d * d / (li * li));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success) {
      throw InternalError("fermion kernel eigendecomposition failed");
    }
    ax.values.assign(solver.eigenvalues().data(),
                     solver.eigenvalues().data() + n);
    ax.vectors.assign(solver.eigenvectors().data(),
                      solver.eigenvectors().data() + n * n);
    ax.cdf.resize(ax.vectors.size());
    for (std::size_t k = 0; k < g.n; ++k) {
      double acc = 0.0;
      for (std::size_t c = 0; c < g.n; ++c) {
        double u = ax.vectors[k * g.n + c];
        acc += u * u;
        ax.cdf[k * g.n + c] = acc;
      }
      for (std::size_t c = 0; c < g.n; ++c) ax.cdf[k * g.n + c] /= acc;
    }
  }

  trace_ = density * volume;  // diagonal entries are ρ h^d
  double worst_negative = 0.0;
  double worst_excess = 0.0;
  const Axis& ax = axes_[0];
  const Axis& ay = axes_[1];
  const Axis& az = axes_[2];
  for (std::size_t i = 0; i < ax.values.size(); ++i) {
    for (std::size_t j = 0; j < ay.values.size(); ++j) {
      for (std::size_t k = 0; k < az.values.size(); ++k) {
        double lambda = density * ax.values[i] * ay.values[j] * az.values[k];
        worst_negative = std::min(worst_negative, lambda);
        worst_excess = std::max(worst_excess, lambda);
        if (lambda > kEigenFloor) {
          eig_.push_back({std::min(lambda, 1.0),
                          {static_cast<std::uint32_t>(i),
                           static_cast<std::uint32_t>(j),
                           static_cast<std::uint32_t>(k)}});
        }
      }
    }
  }
  max_eigenvalue_ = worst_excess;
  if (worst_negative < -kEigenTolerance) {
    std::ostringstream os;
    os << "fermion kernel not positive semidefinite after discretization "
          "(max negative eigenvalue "
       << worst_negative << ")";
    throw ValidationError(os.str());
  }
  if (worst_excess > 1.0 + kEigenTolerance) {
    std::ostringstream os;
    os << "fermion kernel eigenvalue " << worst_excess
       << " exceeds 1: density too high for the correlation length";
    throw ValidationError(os.str());
  }
}

double FermionKernel::expected_count() const {
  double s = 0.0;
  for (const auto& e : eig_) s += e.lambda;
  return s;
}

Shot FermionKernel::sample(Rng& gen) const {
  std::vector<const Eigen3*> chosen;
  for (const auto& e : eig_) {
    if (gen.uniform() < e.lambda) chosen.push_back(&e);
  }
  Shot shot;
  const std::size_t k = chosen.size();
  if (k == 0) return shot;

  auto draw_cell = [&](int axis, std::size_t vec_index) {
    const Axis& a = axes_[static_cast<std::size_t>(axis)];
    if (a.n == 1) return std::size_t{0};
    auto first = a.cdf.begin() + static_cast<std::ptrdiff_t>(vec_index * a.n);
    auto last = first + static_cast<std::ptrdiff_t>(a.n);
    double u = gen.uniform();
    auto it = std::upper_bound(first, last, u);
    if (it == last) --it;
    return static_cast<std::size_t>(it - first);
  };

  std::vector<double> basis;  // orthonormal rows of length k
  basis.reserve(k * k);
  std::vector<double> phi(k), resid(k);
  const std::size_t max_proposals = 1000000 + 10000 * k;
  std::size_t proposals = 0;
  while (shot.events.size() < k) {
    if (++proposals > max_proposals) {
      throw InternalError("fermion sampler: rejection loop did not converge");
    }
    const Eigen3* pick = chosen[gen.below(k)];
    std::array<std::size_t, 3> cell{};
    for (int a = 0; a < 3; ++a) {
      cell[static_cast<std::size_t>(a)] =
          draw_cell(a, pick->index[static_cast<std::size_t>(a)]);
    }
    double norm2 = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const auto& idx = chosen[j]->index;
      phi[j] = vec(0, idx[0], cell[0]) * vec(1, idx[1], cell[1]) *
               vec(2, idx[2], cell[2]);
      norm2 += phi[j] * phi[j];
    }
    resid = phi;
    std::size_t m = shot.events.size();
    for (std::size_t r = 0; r < m; ++r) {
      const double* e = &basis[r * k];
      double dot = 0.0;
      for (std::size_t j = 0; j < k; ++j) dot += e[j] * phi[j];
      for (std::size_t j = 0; j < k; ++j) resid[j] -= dot * e[j];
    }
    double rn2 = 0.0;
    for (double v : resid) rn2 += v * v;
    if (!(gen.uniform() * norm2 < rn2)) continue;
    double rn = std::sqrt(rn2);
    for (double v : resid) basis.push_back(v / rn);

    std::array<double, 3> pos{};
    for (std::size_t a = 0; a < 3; ++a) {
      const Axis& ax = axes_[a];
      pos[a] = ax.origin + (static_cast<double>(cell[a]) + gen.uniform()) *
                               ax.pitch;
    }
    shot.events.push_back(to_event(spec_, pos[0], pos[1], pos[2]));
  }
  shot.canonicalize();
  return shot;
}

namespace {

struct FermionShotSampler {
  const FermionKernel& kernel;
  Shot sample(std::size_t shot_id, Rng& gen) const {
    Shot s = kernel.sample(gen);
    s.shot_id = shot_id;
    return s;
  }
};

}  // namespace

ShotList sample_fermion_cloud(const CloudSpec& spec, std::size_t n_shots,
                              const RngSpec& rng, unsigned threads) {
  FermionKernel kernel(spec);
  return sample_shots(FermionShotSampler{kernel}, n_shots, rng,
                      StreamTag::fermion_cloud, threads);
}

}  // namespace qcorr::two_particle
