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

#include <doctest.h>

#include "qcorr/speckle.hpp"

using namespace qcorr;
using namespace qcorr::speckle;

namespace {

/// Direct emitter sum in long double: Σ a exp(i(φ + k d − ω t)).
std::complex<long double> direct_field(const SpeckleSource& src,
                                       const std::vector<double>& phases,
                                       const Vec3& p, double t) {
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  std::complex<long double> sum = 0;
  for (std::size_t j = 0; j < src.n_emitters(); ++j) {
    long double dx = p.x - src.positions_m[j].x;
    long double dy = p.y - src.positions_m[j].y;
    long double dz = p.z - src.positions_m[j].z;
    long double d = std::sqrt(dx * dx + dy * dy + dz * dz);
    long double k = static_cast<long double>(src.angular_frequencies[j]) /
                    static_cast<long double>(kSpeedOfLight);
    long double ph = phases[j] + k * d -
                     static_cast<long double>(src.angular_frequencies[j]) * t;
    ph = std::fmod(ph, two_pi);
    sum += std::polar(static_cast<long double>(src.amplitudes[j]), ph);
  }
  return sum;
}

DiskSourceParams small_disk() {
  DiskSourceParams p;
  p.n_emitters = 100;
  p.source_diameter_m = 2e-3;
  p.distance_m = 20.0;
  p.wavelength_m = 5e-7;
  return p;
}

}  // namespace

TEST_SUITE("speckle") {

TEST_CASE("coherence length is wavelength over angular diameter") {
  CHECK(coherence_length(5e-7, 1e-4) == doctest::Approx(5e-3));
  CHECK_THROWS_AS(coherence_length(5e-7, 0.0), InvalidArgument);
}

TEST_CASE("disk source geometry") {
  auto src = make_disk_source(small_disk(), RngSpec{3, 0});
  REQUIRE(src.n_emitters() == 100);
  CHECK(src.angular_diameter_rad == doctest::Approx(1e-4));
  CHECK(src.detector_plane_z_m == 20.0);
  CHECK(src.mean_intensity() == doctest::Approx(1.0));
  for (const auto& p : src.positions_m) {
    CHECK(std::hypot(p.x, p.y) <= 1e-3 + 1e-15);
    CHECK(p.z == 0.0);
  }
  auto again = make_disk_source(small_disk(), RngSpec{3, 0});
  CHECK(again.positions_m[17].x == src.positions_m[17].x);

  auto few = small_disk();
  few.n_emitters = 99;
  CHECK_THROWS_AS(make_disk_source(few, RngSpec{}), ValidationError);
  CHECK_NOTHROW(make_coherent_source(5e-7, 20.0).validate());
}

TEST_CASE("field equals the direct emitter sum") {
  auto params = small_disk();
  params.bandwidth_rad_s = 2e9;
  auto src = make_disk_source(params, RngSpec{11, 0});
  RngSpec rng{11, 4};
  for (std::uint64_t r = 0; r < 5; ++r) {
    FieldRealization fr(src, rng, r);
    for (double t : {0.0, 3.3e-10, 1.7e-9}) {
      for (Vec3 p : {Vec3{0, 0, 20}, Vec3{4e-3, -2e-3, 20}, Vec3{-3e-2, 1e-2, 20}}) {
        auto lib = fr.at(p, t);
        auto ref = direct_field(src, fr.phases(), p, t);
        CHECK(std::abs(lib.real() - static_cast<double>(ref.real())) < 1e-7);
        CHECK(std::abs(lib.imag() - static_cast<double>(ref.imag())) < 1e-7);
        CHECK(sample_field(src, p, t, rng, r) == lib);
      }
    }
  }
}

TEST_CASE("ensemble-mean intensity equals the sum of squared amplitudes") {
  auto src = make_disk_source(small_disk(), RngSpec{5, 0});
  std::vector<SpaceTimePoint> pts{{{0, 0, 20}, 0}, {{1e-2, 0, 20}, 0}};
  auto rec = record_field(src, pts, 20000, RngSpec{5, 1}, 1);
  for (std::size_t p = 0; p < 2; ++p) {
    double s = 0;
    for (std::size_t r = 0; r < rec.n_realizations; ++r) s += std::norm(rec.at(r, p));
    // Exponential intensity: relative stderr 1/sqrt(n).
    CHECK(s / 20000.0 == doctest::Approx(1.0).epsilon(4.0 / std::sqrt(20000.0)));
  }
}

TEST_CASE("intensity map pixels are |E|^2 and the pitch flag follows L_c") {
  auto src = make_disk_source(small_disk(), RngSpec{2, 0});
  GridSpec g;
  g.nx = 5;
  g.ny = 4;
  g.pitch_m = 5e-4;
  auto map = generate_intensity_map(src, g, 0.0, RngSpec{2, 0}, 7);
  REQUIRE(map.values.size() == 20);
  CHECK_FALSE(map.pitch_too_coarse);
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      Vec3 p{map.x_m(ix), map.y_m(iy), src.detector_plane_z_m};
      CHECK(map.at(ix, iy) ==
            doctest::Approx(std::norm(sample_field(src, p, 0.0, RngSpec{2, 0}, 7))));
    }
  }
  g.pitch_m = 2e-3;  // > L_c / 4 with L_c = 5 mm
  CHECK(generate_intensity_map(src, g, 0.0, RngSpec{2, 0}, 7).pitch_too_coarse);
  CHECK(map.to_csv().rfind("x_m,y_m,intensity\n", 0) == 0);
}

TEST_CASE("detection events: rate, aperture and determinism") {
  auto src = make_disk_source(small_disk(), RngSpec{9, 0});
  Detector det;
  det.radius_mm = 35.0;
  ExposureModel exp{2.0};
  EventSamplingOptions opt;
  opt.prescan_fraction = 0.25;
  opt.threads = 1;
  auto shots = sample_detection_events(src, det, 400, 20.0, exp, RngSpec{9, 0}, opt);
  REQUIRE(shots.size() == 400);
  CHECK_NOTHROW(validate_shots(shots));
  double n = static_cast<double>(total_events(shots));
  // Poisson count per shot on top of speckle fluctuations of the mean.
  CHECK(n / 400.0 == doctest::Approx(20.0).epsilon(0.05));
  for (const auto& s : shots) {
    for (const auto& e : s.events) {
      CHECK(det.contains(e.x_mm, e.y_mm));
      CHECK(e.t_ns >= 0.0);
      CHECK(e.t_ns < 2.0);
      CHECK(quantize_coordinate(e.x_mm) == e.x_mm);
    }
  }
  opt.threads = 3;
  auto threaded = sample_detection_events(src, det, 400, 20.0, exp, RngSpec{9, 0}, opt);
  CHECK(encode_shots(threaded) == encode_shots(shots));
  CHECK_THROWS_AS(sample_detection_events(src, det, 10, 0.0, exp, RngSpec{}, opt),
                  ValidationError);
}

}  // TEST_SUITE
