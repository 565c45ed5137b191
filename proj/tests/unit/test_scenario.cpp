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

#include <filesystem>
#include <fstream>

#include <doctest.h>
#include <json.hpp>

#include "qcorr/scenario.hpp"

using namespace qcorr;
using namespace qcorr::scenario;
namespace fs = std::filesystem;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("qcorr_unit_" + name);
  fs::remove_all(p);
  return p;
}

const char* kSmallChsh = R"({
  "schema_version": 1, "scenario": "bell-chsh", "seed": 4,
  "bell": {"n_shots": 2000, "grid_points": 4}
})";

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("scenario names round trip") {
  CHECK(all_scenarios().size() == 9);
  for (auto k : all_scenarios()) CHECK(parse_scenario(scenario_name(k)) == k);
  CHECK_THROWS(parse_scenario("hbt-laser"));
}

TEST_CASE("minimal configs take scenario defaults") {
  auto c = parse_config(R"({"schema_version": 1, "scenario": "hom-photon"})");
  CHECK(c.scenario == ScenarioKind::hom_photon);
  CHECK(c.rng == RngSpec{1, 0});
  CHECK(c.hom.n_shots == 20000);
  CHECK_FALSE(c.hom.delays_ns.empty());
  auto s = parse_config(R"({"schema_version": 1, "scenario": "hbt-speckle"})");
  CHECK(s.speckle.n_shots == 10000);
  CHECK(s.speckle.mean_events == 50.0);
}

TEST_CASE("config errors name the offending field") {
  CHECK(config_error("{").find("JSON") != std::string::npos);
  CHECK(config_error(R"({"scenario": "bell-chsh"})").find("schema_version") !=
        std::string::npos);
  CHECK(config_error(R"({"schema_version": 2, "scenario": "bell-chsh"})")
            .find("schema_version") != std::string::npos);
  CHECK(config_error(R"({"schema_version": 1})").find("scenario") != std::string::npos);
  CHECK_THROWS(parse_config(R"({"schema_version": 1, "scenario": "nope"})"));

  auto unknown = config_error(R"({"schema_version": 1, "scenario": "bell-chsh", "sed": 3})");
  CHECK(unknown.find("sed") != std::string::npos);
  auto nested = config_error(
      R"({"schema_version": 1, "scenario": "bell-chsh", "bell": {"n_shot": 5}})");
  CHECK(nested.find("bell.n_shot") != std::string::npos);
  auto deep = config_error(
      R"({"schema_version": 1, "scenario": "bell-chsh", "bell": {"settings": {"c": 1}}})");
  CHECK(deep.find("bell.settings.c") != std::string::npos);

  auto unused = config_error(
      R"({"schema_version": 1, "scenario": "bell-chsh", "hom": {}})");
  CHECK(unused.find("hom") != std::string::npos);
  auto type = config_error(
      R"({"schema_version": 1, "scenario": "bell-chsh", "seed": "one"})");
  CHECK(type.find("seed") != std::string::npos);
  auto range = config_error(
      R"({"schema_version": 1, "scenario": "hbt-speckle", "speckle": {"n_emitters": 10}})");
  CHECK(range.find("speckle") != std::string::npos);
  auto delays = config_error(
      R"({"schema_version": 1, "scenario": "hom-photon", "hom": {"delays_ns": [1, 2, 9]}})");
  CHECK(delays.find("hom.delays_ns") != std::string::npos);
  auto edges = config_error(
      R"({"schema_version": 1, "scenario": "hbt-bec-flat", "binning": {"edges": "0:1"}})");
  CHECK(edges.find("binning.edges") != std::string::npos);
  auto chirp = config_error(
      R"({"schema_version": 1, "scenario": "hom-atom", "atom": {"chirped": false}})");
  CHECK(chirp.find("atom") != std::string::npos);
}

TEST_CASE("number lists accept ranges") {
  auto c = parse_config(R"({"schema_version": 1, "scenario": "hom-photon",
      "hom": {"delays_ns": {"lo": -6, "hi": 6, "n": 5}}})");
  CHECK(c.hom.delays_ns == std::vector<double>{-6, -3, 0, 3, 6});
  CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "scenario": "hom-photon",
      "hom": {"delays_ns": {"lo": -2, "hi": 2}}})"),
                  ConfigError);
}

TEST_CASE("canonical form is stable and excludes run plumbing") {
  auto a = parse_config(R"({"schema_version": 1, "scenario": "bell-chsh",
      "threads": 3, "output_dir": "x"})");
  auto b = parse_config(R"({"scenario": "bell-chsh", "schema_version": 1})");
  CHECK(a.canonical_json() == b.canonical_json());
  auto round = parse_config(a.canonical_json());
  CHECK(round.canonical_json() == a.canonical_json());
  auto seeded = parse_config(R"({"schema_version": 1, "scenario": "bell-chsh", "seed": 2})");
  CHECK(seeded.canonical_json() != a.canonical_json());
}

TEST_CASE("sha256 known answer") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("runs are deterministic and manifests verify") {
  auto c = parse_config(kSmallChsh);
  std::vector<CheckResult> checks;
  auto first = build_outputs(c, &checks);
  CHECK(build_outputs(c) == first);
  CHECK_FALSE(checks.empty());
  CHECK(first.count("verdict.json") == 1);
  CHECK(first.count("config.json") == 1);

  auto dir = scratch("run");
  RunOptions opt;
  opt.output_dir = dir.string();
  auto res = run_scenario(c, opt);
  CHECK(res.files.size() == first.size() + 1);
  auto manifest = nlohmann::json::parse(read_file((dir / "manifest.json").string()));
  CHECK(manifest["config_sha256"] == sha256_hex(c.canonical_json() + "\n"));
  CHECK(manifest["files"].size() == first.size());
  CHECK(manifest["seed"] == 4);
  CHECK(read_file((dir / "config.json").string()) == c.canonical_json() + "\n");

  auto v = verify_manifest(dir.string());
  CHECK(v.ok);
  CHECK(v.checked == first.size());

  { std::ofstream(dir / "chsh_scan.csv", std::ios::app) << "tamper\n"; }
  fs::remove(dir / "chsh_samples.csv");
  v = verify_manifest(dir.string());
  CHECK_FALSE(v.ok);
  CHECK(v.mismatched == std::vector<std::string>{"chsh_scan.csv"});
  CHECK(v.missing == std::vector<std::string>{"chsh_samples.csv"});

  opt.seed = 5;
  auto other = run_scenario(c, opt);
  auto m2 = nlohmann::json::parse(read_file((dir / "manifest.json").string()));
  CHECK(m2["seed"] == 5);
  fs::remove_all(dir);
}

TEST_CASE("failed writes leave nothing behind") {
  auto dir = scratch("blocked");
  fs::create_directories(dir / "verdict.json");  // a directory where a file goes
  auto c = parse_config(kSmallChsh);
  RunOptions opt;
  opt.output_dir = dir.string();
  CHECK_THROWS_AS(run_scenario(c, opt), IoError);
  std::size_t left = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    left += e.path().filename() != "verdict.json";
  }
  CHECK(left == 0);
  fs::remove_all(dir);
}

TEST_CASE("analyze writes a curve and a verdict") {
  auto dir = scratch("analyze");
  fs::create_directories(dir);
  ShotList shots;
  Rng gen(RngSpec{1, 0}, StreamTag::user);
  for (int s = 0; s < 400; ++s) {
    Shot sh{s, {}};
    // Poisson counts: a fixed count per shot would itself anticorrelate.
    auto n = gen.poisson(10.0);
    for (std::uint64_t i = 0; i < n; ++i) {
      sh.events.push_back(make_event(gen.uniform(-3, 3), gen.uniform(-3, 3), 0.0));
    }
    sh.canonicalize();
    shots.push_back(sh);
  }
  write_shots_csv((dir / "events.csv").string(), shots);
  AnalyzeOptions opt;
  opt.binning = correlator::BinningSpec::uniform(correlator::Axis::radial, 0, 2, 4);
  opt.output_dir = dir.string();
  auto r = analyze_file((dir / "events.csv").string(), opt);
  CHECK(r.files.size() == 2);
  REQUIRE(r.verdict.has_value());
  CHECK(r.verdict->verdict == correlator::Classicality::classical_compatible);
  auto v = nlohmann::json::parse(read_file((dir / "verdict.json").string()));
  CHECK(v["n_shots"] == 400);
  CHECK(v["classicality"]["verdict"] == "CLASSICAL-COMPATIBLE");
  fs::remove_all(dir);
}

}  // TEST_SUITE
