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

#include "pairs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qcorr::correlator {

Axis parse_axis(const std::string& name) {
  if (name == "dx") return Axis::dx;
  if (name == "dy") return Axis::dy;
  if (name == "dt") return Axis::dt;
  if (name == "r" || name == "radial") return Axis::radial;
  throw InvalidArgument("unknown axis '" + name +
                        "' (expected dx, dy, dt or r)");
}

std::string axis_name(Axis axis) {
  switch (axis) {
    case Axis::dx: return "dx";
    case Axis::dy: return "dy";
    case Axis::dt: return "dt";
    case Axis::radial: return "r";
  }
  return "r";
}

Normalization parse_normalization(const std::string& name) {
  if (name == "mixed" || name == "shot-mixed") return Normalization::shot_mixed;
  if (name == "singles" || name == "product-of-singles") {
    return Normalization::product_of_singles;
  }
  throw InvalidArgument("unknown normalization '" + name +
                        "' (expected mixed or singles)");
}

std::string normalization_name(Normalization norm) {
  return norm == Normalization::shot_mixed ? "shot-mixed"
                                           : "product-of-singles";
}

BinningSpec BinningSpec::uniform(Axis axis, double lo, double hi,
                                 std::size_t n) {
  if (n == 0 || !(hi > lo)) {
    throw InvalidArgument("uniform binning needs n > 0 and hi > lo");
  }
  BinningSpec b;
  b.axis = axis;
  b.edges.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    b.edges[i] = lo + (hi - lo) * static_cast<double>(i) /
                          static_cast<double>(n);
  }
  return b;
}

void BinningSpec::validate() const {
  if (edges.size() < 2) throw ValidationError("binning needs >= 2 edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!std::isfinite(edges[i])) {
      throw ValidationError("bin edges must be finite");
    }
    if (i > 0 && !(edges[i] > edges[i - 1])) {
      throw ValidationError("bin edges must be strictly increasing");
    }
  }
  if (edges.front() < 0.0) {
    throw ValidationError("bin edges are absolute separations (>= 0)");
  }
  const double gates[] = {gate_x_mm, gate_y_mm, gate_t_ns};
  for (double g : gates) {
    if (std::isnan(g) || g < 0.0) {
      throw ValidationError("gate widths must be non-negative");
    }
  }
}

std::vector<double> parse_bin_edges(const std::string& spec) {
  auto fail = [&]() {
    return InvalidArgument("malformed bin spec '" + spec +
                           "' (expected lo:hi:n or e0,e1,...)");
  };
  std::vector<double> edges;
  if (spec.find(':') != std::string::npos) {
    std::istringstream in(spec);
    std::string a, b, c;
    if (!std::getline(in, a, ':') || !std::getline(in, b, ':') ||
        !std::getline(in, c)) {
      throw fail();
    }
    try {
      std::size_t used = 0;
      double lo = std::stod(a, &used);
      if (used != a.size()) throw fail();
      double hi = std::stod(b, &used);
      if (used != b.size()) throw fail();
      long n = std::stol(c, &used);
      if (used != c.size() || n <= 0) throw fail();
      return BinningSpec::uniform(Axis::radial, lo, hi,
                                  static_cast<std::size_t>(n))
          .edges;
    } catch (const std::logic_error&) {
      throw fail();
    }
  }
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      edges.push_back(std::stod(item, &used));
      if (used != item.size()) throw fail();
    } catch (const std::logic_error&) {
      throw fail();
    }
  }
  if (edges.size() < 2) throw fail();
  return edges;
}

// ---------------------------------------------------------------------------

int classify_pair(const BinningSpec& b, const DetectionEvent& e1,
                  const DetectionEvent& e2) {
  return BinClassifier(b)(e1, e2);
}

BinClassifier::BinClassifier(const BinningSpec& b)
  : axis_(b.axis), edges_(b.edges), gate_x_(b.gate_x_mm),
    gate_y_(b.gate_y_mm), gate_t_(b.gate_t_ns) {
  lo_ = edges_.front();
  hi_ = edges_.back();
  prune_ = hi_ * (1.0 + 1e-12);
}

double BinClassifier::key(const DetectionEvent& e) const {
  switch (axis_) {
    case Axis::dy: return e.y_mm;
    case Axis::dt: return e.t_ns;
    case Axis::dx:
    case Axis::radial: return e.x_mm;
  }
  return e.x_mm;
}

int BinClassifier::operator()(const DetectionEvent& a,
                              const DetectionEvent& b) const {
  double dx = std::fabs(a.x_mm - b.x_mm);
  double dy = std::fabs(a.y_mm - b.y_mm);
  double dt = std::fabs(a.t_ns - b.t_ns);
  double s = 0.0;
  switch (axis_) {
    case Axis::dx:
      if (dy >= gate_y_ || dt >= gate_t_) return -1;
      s = dx;
      break;
    case Axis::dy:
      if (dx >= gate_x_ || dt >= gate_t_) return -1;
      s = dy;
      break;
    case Axis::dt:
      if (dx >= gate_x_ || dy >= gate_y_) return -1;
      s = dt;
      break;
    case Axis::radial:
      if (dt >= gate_t_) return -1;
      s = std::sqrt(dx * dx + dy * dy);
      break;
  }
  if (s < lo_ || s >= hi_) return -1;
  auto it = std::upper_bound(edges_.begin(), edges_.end(), s);
  return static_cast<int>(it - edges_.begin()) - 1;
}

std::vector<DetectionEvent> sort_by_key(std::span<const DetectionEvent> ev,
                                        const BinClassifier& c) {
  std::vector<DetectionEvent> out(ev.begin(), ev.end());
  std::stable_sort(out.begin(), out.end(),
                   [&](const DetectionEvent& a, const DetectionEvent& b) {
                     return c.key(a) < c.key(b);
                   });
  return out;
}

void count_within_brute(std::span<const DetectionEvent> ev,
                        const BinClassifier& c,
                        std::span<std::uint64_t> hist) {
  for (std::size_t i = 0; i < ev.size(); ++i) {
    for (std::size_t j = i + 1; j < ev.size(); ++j) {
      int bin = c(ev[i], ev[j]);
      if (bin >= 0) ++hist[static_cast<std::size_t>(bin)];
    }
  }
}

void count_between_brute(std::span<const DetectionEvent> a,
                         std::span<const DetectionEvent> b,
                         const BinClassifier& c,
                         std::span<std::uint64_t> hist) {
  for (const auto& ea : a) {
    for (const auto& eb : b) {
      int bin = c(ea, eb);
      if (bin >= 0) ++hist[static_cast<std::size_t>(bin)];
    }
  }
}

void count_within_sorted(std::span<const DetectionEvent> ev,
                         const BinClassifier& c,
                         std::span<std::uint64_t> hist) {
  const double prune = c.prune();
  for (std::size_t i = 0; i < ev.size(); ++i) {
    double ki = c.key(ev[i]);
    for (std::size_t j = i + 1; j < ev.size(); ++j) {
      if (c.key(ev[j]) - ki > prune) break;
      int bin = c(ev[i], ev[j]);
      if (bin >= 0) ++hist[static_cast<std::size_t>(bin)];
    }
  }
}

void count_between_sorted(std::span<const DetectionEvent> a,
                          std::span<const DetectionEvent> b,
                          const BinClassifier& c,
                          std::span<std::uint64_t> hist) {
  const double prune = c.prune();
  std::size_t lo = 0;
  for (const auto& ea : a) {
    double ka = c.key(ea);
    while (lo < b.size() && ka - c.key(b[lo]) > prune) ++lo;
    for (std::size_t j = lo; j < b.size(); ++j) {
      if (c.key(b[j]) - ka > prune) break;
      int bin = c(ea, b[j]);
      if (bin >= 0) ++hist[static_cast<std::size_t>(bin)];
    }
  }
}

void count_pairs_within(std::span<const DetectionEvent> events,
                        const BinningSpec& binning, PairEngine engine,
                        std::span<std::uint64_t> hist) {
  binning.validate();
  if (hist.size() != binning.n_bins()) {
    throw InvalidArgument("histogram size does not match binning");
  }
  BinClassifier c(binning);
  if (engine == PairEngine::brute_force) {
    count_within_brute(events, c, hist);
  } else {
    auto sorted = sort_by_key(events, c);
    count_within_sorted(sorted, c, hist);
  }
}

void count_pairs_between(std::span<const DetectionEvent> a,
                         std::span<const DetectionEvent> b,
                         const BinningSpec& binning, PairEngine engine,
                         std::span<std::uint64_t> hist) {
  binning.validate();
  if (hist.size() != binning.n_bins()) {
    throw InvalidArgument("histogram size does not match binning");
  }
  BinClassifier c(binning);
  if (engine == PairEngine::brute_force) {
    count_between_brute(a, b, c, hist);
  } else {
    auto sa = sort_by_key(a, c);
    auto sb = sort_by_key(b, c);
    count_between_sorted(sa, sb, c, hist);
  }
}

}  // namespace qcorr::correlator
