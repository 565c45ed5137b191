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

#include <array>
#include <filesystem>
#include <system_error>

#include <Eigen/Core>
#include <json.hpp>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include "qcorr/scenario.hpp"

#ifndef QCORR_VERSION_STRING
#define QCORR_VERSION_STRING "0.0.0"
#endif

namespace qcorr::scenario {

namespace fs = std::filesystem;
using nlohmann::json;

const char* library_version() { return QCORR_VERSION_STRING; }

std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw InternalError("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

namespace {

std::string manifest_json(const Bundle& bundle, const ScenarioConfig& config) {
  json files = json::array();
  for (const auto& [name, data] : bundle) {
    files.push_back({{"path", name}, {"sha256", sha256_hex(data)},
                     {"bytes", data.size()}});
  }
  json m;
  m["schema_version"] = kSchemaVersion;
  m["scenario"] = scenario_name(config.scenario);
  m["seed"] = config.rng.seed;
  m["stream"] = config.rng.stream_id;
  m["config_sha256"] = sha256_hex(config.canonical_json() + "\n");
  m["versions"] = {
      {"qcorr", library_version()},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"openssl", OPENSSL_VERSION_TEXT},
      {"compiler", __VERSION__}};
  m["files"] = files;
  return m.dump(2) + "\n";
}

}  // namespace

std::vector<std::string> write_bundle(const std::string& dir,
                                      const Bundle& bundle,
                                      const ScenarioConfig& config) {
  if (bundle.count("manifest.json")) {
    throw InternalError("bundle must not contain manifest.json");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());

  std::vector<std::string> written;
  try {
    for (const auto& [name, data] : bundle) {
      std::string path = (fs::path(dir) / name).string();
      write_file(path, data);
      written.push_back(path);
    }
    std::string path = (fs::path(dir) / "manifest.json").string();
    write_file(path, manifest_json(bundle, config));
    written.push_back(path);
  } catch (...) {
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
  return written;
}

VerifyResult verify_manifest(const std::string& dir) {
  std::string text = read_file((fs::path(dir) / "manifest.json").string());
  json m;
  try {
    m = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("manifest.json: ") + e.what());
  }
  if (!m.contains("files") || !m["files"].is_array()) {
    throw ParseError(0, "manifest.json: missing files list");
  }
  VerifyResult r;
  for (const auto& entry : m["files"]) {
    if (!entry.contains("path") || !entry.contains("sha256")) {
      throw ParseError(0, "manifest.json: file entry needs path and sha256");
    }
    std::string name = entry["path"].get<std::string>();
    fs::path p = fs::path(dir) / name;
    ++r.checked;
    if (!fs::exists(p)) {
      r.missing.push_back(name);
      r.ok = false;
      continue;
    }
    if (sha256_hex(read_file(p.string())) != entry["sha256"].get<std::string>()) {
      r.mismatched.push_back(name);
      r.ok = false;
    }
  }
  return r;
}

AnalyzeResult analyze_file(const std::string& events_path,
                           const AnalyzeOptions& options) {
  ShotList shots = read_shots_csv(events_path);
  AnalyzeResult r;
  r.curve = correlator::g2_from_events(shots, options.binning, options.g2);
  json v;
  v["input"] = fs::path(events_path).filename().string();
  v["n_shots"] = r.curve.n_shots;
  v["n_events"] = r.curve.n_events;
  v["axis"] = correlator::axis_name(options.binning.axis);
  v["normalization"] = correlator::normalization_name(r.curve.normalization);
  if (r.curve.edges.front() == 0.0 && r.curve.defined[0]) {
    r.verdict = correlator::classicality_check(r.curve);
    v["classicality"] = {
        {"verdict", correlator::classicality_name(r.verdict->verdict)},
        {"g2_zero_bin", r.verdict->g2_zero},
        {"stderr", r.verdict->stderr_},
        {"bin_lo", r.verdict->bin_lo},
        {"bin_hi", r.verdict->bin_hi}};
  } else {
    v["classicality"] = nullptr;
  }

  std::error_code ec;
  fs::create_directories(options.output_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + options.output_dir +
                  ": " + ec.message());
  }
  std::string csv = (fs::path(options.output_dir) / "correlation.csv").string();
  std::string js = (fs::path(options.output_dir) / "verdict.json").string();
  write_file(csv, r.curve.to_csv());
  try {
    write_file(js, v.dump(2) + "\n");
  } catch (...) {
    fs::remove(csv, ec);
    throw;
  }
  r.files = {csv, js};
  return r;
}

}  // namespace qcorr::scenario
