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
#include <limits>
#include <numbers>

#include "qcorr/correlator.hpp"

namespace qcorr::correlator {

namespace {

struct Point {
  double lo, hi, y, w;
};

std::vector<Point> usable_bins(const CorrelationCurve& c) {
  std::vector<Point> pts;
  for (std::size_t b = 0; b < c.n_bins(); ++b) {
    if (!c.defined[b] || !(c.stderr_[b] > 0.0)) continue;
    double se = c.stderr_[b];
    pts.push_back({c.edges[b], c.edges[b + 1], c.g2[b], 1.0 / (se * se)});
  }
  return pts;
}

/// Bin average of exp(-s²/l²) under the pair measure of `dims` dimensions.
double bump_average(double lo, double hi, double l, int dims) {
  if (dims == 2) {
    double a = lo * lo / (l * l);
    double b = hi * hi / (l * l);
    // l² (e^-a - e^-b) / (hi² - lo²), written to stay accurate for b - a small
    return std::exp(-a) * (-std::expm1(-(b - a))) / (b - a);
  }
  double sp = std::sqrt(std::numbers::pi);
  return 0.5 * sp * l * (std::erf(hi / l) - std::erf(lo / l)) / (hi - lo);
}

struct LinearFit {
  double baseline = 0.0, amplitude = 0.0, chi2 = 0.0;
  bool ok = false;
};

/// Weighted linear least squares y = B + A f for fixed basis values f.
LinearFit fit_linear(const std::vector<Point>& pts,
                     const std::vector<double>& f) {
  double sw = 0, sf = 0, sff = 0, sy = 0, sfy = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double w = pts[i].w;
    sw += w;
    sf += w * f[i];
    sff += w * f[i] * f[i];
    sy += w * pts[i].y;
    sfy += w * f[i] * pts[i].y;
  }
  double det = sw * sff - sf * sf;
  LinearFit r;
  if (!(std::fabs(det) > 0.0)) return r;
  r.amplitude = (sw * sfy - sf * sy) / det;
  r.baseline = (sy - r.amplitude * sf) / sw;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double d = pts[i].y - r.baseline - r.amplitude * f[i];
    r.chi2 += pts[i].w * d * d;
  }
  r.ok = true;
  return r;
}

}  // namespace

ValueWithError fit_zero_separation(const CorrelationCurve& curve,
                                   double max_separation, int dims) {
  std::vector<Point> pts;
  for (const auto& p : usable_bins(curve)) {
    if (p.hi <= max_separation * (1.0 + 1e-12)) pts.push_back(p);
  }
  if (pts.size() < 2) {
    throw ValidationError(
        "fit_zero_separation: need >= 2 populated bins below the cutoff");
  }
  std::vector<double> s2(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double lo = pts[i].lo, hi = pts[i].hi;
    s2[i] = dims == 2 ? 0.5 * (lo * lo + hi * hi)
                      : (lo * lo + lo * hi + hi * hi) / 3.0;
  }
  double sw = 0, sx = 0, sxx = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    sw += pts[i].w;
    sx += pts[i].w * s2[i];
    sxx += pts[i].w * s2[i] * s2[i];
  }
  LinearFit lf = fit_linear(pts, s2);
  if (!lf.ok) throw ValidationError("fit_zero_separation: degenerate bins");
  double det = sw * sxx - sx * sx;
  return ValueWithError{lf.baseline, std::sqrt(sxx / det)};
}

ValueWithError far_value(const CorrelationCurve& curve,
                         double min_separation) {
  double sw = 0.0, swy = 0.0;
  for (const auto& p : usable_bins(curve)) {
    if (p.lo < min_separation) continue;
    sw += p.w;
    swy += p.w * p.y;
  }
  if (!(sw > 0.0)) {
    throw ValidationError("far_value: no populated bins beyond the cutoff");
  }
  return ValueWithError{swy / sw, 1.0 / std::sqrt(sw)};
}

GaussianBumpFit fit_gaussian_bump(const CorrelationCurve& curve, int dims,
                                  double initial_width) {
  if (!(initial_width > 0.0)) {
    throw InvalidArgument("fit_gaussian_bump: initial width must be > 0");
  }
  std::vector<Point> pts = usable_bins(curve);
  if (pts.size() < 4) {
    throw ValidationError("fit_gaussian_bump: need >= 4 populated bins");
  }
  std::vector<double> f(pts.size());
  auto chi2_at = [&](double l, LinearFit* out) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      f[i] = bump_average(pts[i].lo, pts[i].hi, l, dims);
    }
    LinearFit lf = fit_linear(pts, f);
    if (out) *out = lf;
    return lf.ok ? lf.chi2 : std::numeric_limits<double>::infinity();
  };

  // Profile chi² over log(l): coarse scan, then golden-section refinement.
  const int n_scan = 241;
  double best_u = 0.0, best = std::numeric_limits<double>::infinity();
  int best_i = 0;
  const double u_lo = std::log(initial_width) - std::log(20.0);
  const double u_hi = std::log(initial_width) + std::log(20.0);
  const double du = (u_hi - u_lo) / (n_scan - 1);
  for (int i = 0; i < n_scan; ++i) {
    double u = u_lo + du * i;
    double c = chi2_at(std::exp(u), nullptr);
    if (c < best) {
      best = c;
      best_u = u;
      best_i = i;
    }
  }
  double a = best_u - du, b = best_u + du;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = chi2_at(std::exp(x1), nullptr), f2 = chi2_at(std::exp(x2), nullptr);
  for (int it = 0; it < 100 && (b - a) > 1e-12; ++it) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a);
      f1 = chi2_at(std::exp(x1), nullptr);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a);
      f2 = chi2_at(std::exp(x2), nullptr);
    }
  }
  double l = std::exp(0.5 * (a + b));
  GaussianBumpFit fit;
  LinearFit lf;
  double c0 = chi2_at(l, &lf);
  fit.baseline = lf.baseline;
  fit.amplitude = lf.amplitude;
  fit.width = l;
  std::size_t dof = pts.size() > 3 ? pts.size() - 3 : 1;
  fit.chi2_per_dof = c0 / static_cast<double>(dof);
  fit.converged = best_i > 0 && best_i < n_scan - 1;

  // Profile curvature: Δχ² = 1 at one standard error.
  double h = 1e-3 * l;
  double cp = chi2_at(l + h, nullptr), cm = chi2_at(l - h, nullptr);
  double curv = (cp - 2.0 * c0 + cm) / (h * h);
  fit.width_stderr = curv > 0.0 ? std::sqrt(2.0 / curv)
                                : std::numeric_limits<double>::infinity();
  return fit;
}

}  // namespace qcorr::correlator
