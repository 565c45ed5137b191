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
#include <numbers>

#include "qcorr/two_particle.hpp"

namespace qcorr::two_particle {

namespace {

constexpr double kCut = 9.0;  // Gaussian tails beyond 9σ are dropped

double simpson(const std::function<double(double)>& f, double a, double b,
               std::size_t intervals) {
  if (!(b > a)) return 0.0;
  if (intervals < 2) intervals = 2;
  if (intervals % 2) ++intervals;
  double h = (b - a) / static_cast<double>(intervals);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < intervals; ++i) {
    s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  }
  return s * h / 3.0;
}

/**
 * Per-axis measured pair-separation densities on a table over [0, umax]:
 * bump(u) = ∫ w(Δ) exp(-Δ²/l²) N(u − Δ) dΔ and ref(u) = ∫ w(Δ) N(u − Δ) dΔ,
 * with w(Δ) = max(0, L − |Δ|) and N the pair-difference PSF.  Both are even.
 */
class AxisProfile {
 public:
  AxisProfile(double l, double extent, double sigma_pair, double umax,
              double step)
    : step_(step) {
    std::size_t n = static_cast<std::size_t>(std::ceil(umax / step)) + 2;
    bump_.resize(n);
    ref_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double u = step * static_cast<double>(i);
      bump_[i] = density(u, l, extent, sigma_pair, true);
      ref_[i] = density(u, l, extent, sigma_pair, false);
    }
  }

  double bump(double u) const { return interp(bump_, u); }
  double ref(double u) const { return interp(ref_, u); }

 private:
  static double density(double u, double l, double L, double sp, bool with_bump) {
    auto w = [L](double d) { return std::max(0.0, L - std::fabs(d)); };
    if (sp == 0.0) {
      return w(u) * (with_bump ? std::exp(-u * u / (l * l)) : 1.0);
    }
    double a = std::max(-L, u - kCut * sp);
    double b = std::min(L, u + kCut * sp);
    if (with_bump) {
      a = std::max(a, -kCut * l);
      b = std::min(b, kCut * l);
    }
    double h = std::min(l, sp) / 24.0;
    auto n = static_cast<std::size_t>(std::ceil((b - a) / h));
    const double norm = 1.0 / (sp * std::sqrt(2.0 * std::numbers::pi));
    return simpson(
        [&](double d) {
          double e = (u - d) / sp;
          double g = norm * std::exp(-0.5 * e * e);
          return w(d) * g * (with_bump ? std::exp(-d * d / (l * l)) : 1.0);
        },
        a, b, n);
  }

  double interp(const std::vector<double>& t, double u) const {
    double x = std::fabs(u) / step_;
    auto i = static_cast<std::size_t>(x);
    if (i + 1 >= t.size()) return t.back();
    double f = x - static_cast<double>(i);
    return t[i] * (1.0 - f) + t[i + 1] * f;
  }

  double step_;
  std::vector<double> bump_;
  std::vector<double> ref_;
};

}  // namespace

double psf_washout_g2(const CloudSpec& spec, const Detector& detector,
                      const correlator::BinningSpec& binning, std::size_t bin) {
  using correlator::Axis;
  spec.validate();
  detector.validate();
  binning.validate();
  if (spec.statistics != CloudStatistics::boson || !spec.planar()) {
    throw InvalidArgument("washout model needs a planar boson cloud");
  }
  if (detector.radius_mm != 0.0 || detector.dead_radius_mm != 0.0) {
    throw InvalidArgument(
        "washout model needs an unbounded detector without dead radius");
  }
  if (binning.axis == Axis::dt) {
    throw InvalidArgument("washout model bins dx, dy or radial separations");
  }
  if (bin >= binning.n_bins()) throw InvalidArgument("bin index out of range");

  auto l = spec.effective_lengths();
  const double sp[2] = {std::sqrt(2.0) * detector.psf_sigma_x_mm,
                        std::sqrt(2.0) * detector.psf_sigma_y_mm};
  const double L[2] = {spec.extent_mm[0], spec.extent_mm[1]};
  const double lo = binning.edges[bin];
  const double hi = binning.edges[bin + 1];

  // Table range and resolution per axis.
  double umax[2];
  double gate[2] = {binning.gate_x_mm, binning.gate_y_mm};
  if (binning.axis == Axis::radial) {
    umax[0] = umax[1] = hi;
  } else {
    int binned = binning.axis == Axis::dx ? 0 : 1;
    umax[binned] = hi;
    int other = 1 - binned;
    umax[other] = std::isinf(gate[other]) ? L[other] + kCut * sp[other]
                                          : gate[other];
  }
  std::vector<AxisProfile> axis;
  for (int a = 0; a < 2; ++a) {
    double h = l[static_cast<std::size_t>(a)];
    if (sp[a] > 0.0) h = std::min(h, sp[a]);
    h = std::min(h, hi - lo) / 32.0;
    axis.emplace_back(l[static_cast<std::size_t>(a)], L[a], sp[a], umax[a], h);
  }

  const std::size_t n_outer = 400;
  if (binning.axis == Axis::radial) {
    // Quarter-plane polar integral; both profiles are even.
    auto ring = [&](bool bump) {
      return simpson(
          [&](double s) {
            return s * simpson(
                           [&](double th) {
                             double u = s * std::cos(th), v = s * std::sin(th);
                             return bump ? axis[0].bump(u) * axis[1].bump(v)
                                         : axis[0].ref(u) * axis[1].ref(v);
                           },
                           0.0, 0.5 * std::numbers::pi, 200);
          },
          lo, hi, n_outer);
    };
    double den = ring(false);
    if (!(den > 0.0)) throw ValidationError("bin has no pair density");
    return 1.0 + ring(true) / den;
  }

  int b = binning.axis == Axis::dx ? 0 : 1;
  int o = 1 - b;
  auto over = [&](int a, double from, double to, bool bump) {
    return simpson(
        [&](double u) { return bump ? axis[static_cast<std::size_t>(a)].bump(u)
                                    : axis[static_cast<std::size_t>(a)].ref(u); },
        from, to, n_outer);
  };
  double num = over(b, lo, hi, true) * over(o, 0.0, umax[o], true);
  double den = over(b, lo, hi, false) * over(o, 0.0, umax[o], false);
  if (!(den > 0.0)) throw ValidationError("bin has no pair density");
  return 1.0 + num / den;
}

}  // namespace qcorr::two_particle
