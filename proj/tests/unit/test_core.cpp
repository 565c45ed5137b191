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
#include <cstdio>
#include <set>

#include <doctest.h>

#include "qcorr/core.hpp"
#include "qcorr/parallel.hpp"

using namespace qcorr;

TEST_SUITE("core") {

TEST_CASE("quantized coordinates survive the CSV text form") {
  Rng gen(RngSpec{7, 3}, StreamTag::user);
  for (int i = 0; i < 2000; ++i) {
    double v = gen.uniform(-50.0, 50.0) * std::pow(10.0, gen.uniform(-6, 3));
    double q = quantize_coordinate(v);
    CHECK(quantize_coordinate(q) == q);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    CHECK(q == std::strtod(buf, nullptr));
    CHECK(std::strtod(format_g9(q).c_str(), nullptr) == q);
  }
}

TEST_CASE("encode/decode round trip keeps empty shots and order") {
  ShotList shots;
  shots.push_back(Shot{5, {make_event(1.25, -2.5, 3.0), make_event(0.1, 0.2, 0.3)}});
  shots.push_back(Shot{-2, {}});
  shots.push_back(Shot{9, {make_event(1e-7, 123456.789, 0.0)}});
  for (auto& s : shots) s.canonicalize();

  std::string text = encode_shots(shots);
  CHECK(text.rfind("shot_id,x_mm,y_mm,t_ns\n", 0) == 0);
  CHECK(text.find("-2,,,\n") != std::string::npos);

  ShotList back = decode_shots(text);
  REQUIRE(back.size() == 3);
  CHECK(back[0].shot_id == -2);
  CHECK(back[0].events.empty());
  CHECK(back[1] == shots[0]);
  CHECK(back[2] == shots[2]);
  CHECK(encode_shots(back) == text);
  CHECK_NOTHROW(validate_shots(back));
}

TEST_CASE("decode errors carry line numbers") {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      decode_shots(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("") == 1);
  CHECK(line_of("id,x,y,t\n") == 1);
  CHECK(line_of("shot_id,x_mm,y_mm,t_ns\n1,0,0,0\n1,abc,0,0\n") == 3);
  CHECK(line_of("shot_id,x_mm,y_mm,t_ns\n1,0,0\n") == 2);
  CHECK(line_of("shot_id,x_mm,y_mm,t_ns\n1,0,0,0,0\n") == 2);
  CHECK(line_of("shot_id,x_mm,y_mm,t_ns\nx,0,0,0\n") == 2);
  CHECK(line_of("shot_id,x_mm,y_mm,t_ns\n1,0,0,inf\n") == 2);
  CHECK(line_of("shot_id,x_mm,y_mm,t_ns\n1,0,0,0\n\n2,0,0,0\n") == 3);
  CHECK_THROWS_AS(decode_shots("shot_id,x_mm,y_mm,t_ns\n1,0,0,-1\n"),
                  ValidationError);
  // CRLF line endings and a UTF-8 BOM are accepted.
  CHECK(decode_shots("\xEF\xBB\xBFshot_id,x_mm,y_mm,t_ns\r\n3,1,2,3\r\n")
            .at(0)
            .events.size() == 1);
}

TEST_CASE("validate_shots rejects broken invariants") {
  ShotList dup{Shot{1, {}}, Shot{1, {}}};
  CHECK_THROWS_AS(validate_shots(dup), ValidationError);
  ShotList unordered{Shot{1, {DetectionEvent{0, 0, 2}, DetectionEvent{0, 0, 1}}}};
  CHECK_THROWS_AS(validate_shots(unordered), ValidationError);
  ShotList nan{Shot{1, {DetectionEvent{NAN, 0, 1}}}};
  CHECK_THROWS_AS(validate_shots(nan), ValidationError);
}

TEST_CASE("canonical order is (t, x, y)") {
  Shot s{0, {DetectionEvent{1, 0, 1}, DetectionEvent{0, 5, 1}, DetectionEvent{9, 9, 0},
             DetectionEvent{0, 4, 1}}};
  s.canonicalize();
  CHECK(s.events[0] == DetectionEvent{9, 9, 0});
  CHECK(s.events[1] == DetectionEvent{0, 4, 1});
  CHECK(s.events[2] == DetectionEvent{0, 5, 1});
  CHECK(s.events[3] == DetectionEvent{1, 0, 1});
}

TEST_CASE("detector geometry") {
  Detector d;
  d.radius_mm = 35.0;
  CHECK(d.contains(35.0, 0.0));
  CHECK_FALSE(d.contains(30.0, 20.0));
  d.radius_mm = 0.0;
  CHECK(d.contains(1e6, -1e6));
  d.psf_sigma_x_mm = -1.0;
  CHECK_THROWS_AS(d.validate(), ValidationError);
}

TEST_CASE("rng streams are reproducible and separated") {
  RngSpec spec{42, 1};
  Rng a(spec, StreamTag::speckle_phases, 3), b(spec, StreamTag::speckle_phases, 3);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());

  std::set<std::uint64_t> firsts;
  for (std::uint64_t idx = 0; idx < 50; ++idx) {
    firsts.insert(Rng(spec, StreamTag::psf, idx)());
    firsts.insert(Rng(RngSpec{42, 2}, StreamTag::psf, idx)());
    firsts.insert(Rng(spec, StreamTag::boson_field, idx)());
  }
  CHECK(firsts.size() == 150);
}

TEST_CASE("rng distributions have the right moments") {
  Rng gen(RngSpec{1, 0}, StreamTag::user);
  const int n = 200000;
  double su = 0, sp = 0, sp2 = 0, sn = 0, sn2 = 0;
  std::vector<int> hist(7, 0);
  for (int i = 0; i < n; ++i) {
    double u = gen.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    double p = static_cast<double>(gen.poisson(3.5));
    sp += p;
    sp2 += p * p;
    double z = gen.normal();
    sn += z;
    sn2 += z * z;
    ++hist[gen.below(7)];
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sp / n == doctest::Approx(3.5).epsilon(0.01));
  CHECK(sp2 / n - (sp / n) * (sp / n) == doctest::Approx(3.5).epsilon(0.02));
  CHECK(std::fabs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
  for (int h : hist) CHECK(h == doctest::Approx(n / 7.0).epsilon(0.03));
  CHECK(gen.poisson(0.0) == 0);
  CHECK_THROWS_AS(gen.below(0), InvalidArgument);
}

TEST_CASE("parallel_chunks covers the range and propagates failures") {
  std::vector<int> seen(1001, 0);
  parallel_chunks(seen.size(), 4, [&](unsigned, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) ++seen[i];
  });
  for (int s : seen) CHECK(s == 1);
  CHECK_THROWS_AS(parallel_chunks(10, 3,
                                  [](unsigned, std::size_t, std::size_t e) {
                                    if (e == 10) throw ValidationError("boom");
                                  }),
                  ValidationError);
}

TEST_CASE("file helpers report IO errors") {
  CHECK_THROWS_AS(read_file("/nonexistent/dir/file.csv"), IoError);
  CHECK_THROWS_AS(write_file("/nonexistent/dir/file.csv", "x"), IoError);
}

}  // TEST_SUITE
