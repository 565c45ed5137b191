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
#include <set>

#include <json.hpp>

#include "qcorr/scenario.hpp"

namespace qcorr::scenario {

using nlohmann::json;

namespace {

const std::vector<std::pair<ScenarioKind, const char*>> kNames{
    {ScenarioKind::hbt_speckle, "hbt-speckle"},
    {ScenarioKind::hbt_boson_cloud, "hbt-boson-cloud"},
    {ScenarioKind::hbt_fermion_cloud, "hbt-fermion-cloud"},
    {ScenarioKind::hbt_bec_flat, "hbt-bec-flat"},
    {ScenarioKind::hom_photon, "hom-photon"},
    {ScenarioKind::hom_atom, "hom-atom"},
    {ScenarioKind::hom_classical_baseline, "hom-classical-baseline"},
    {ScenarioKind::bell_chsh, "bell-chsh"},
    {ScenarioKind::bell_lhv, "bell-lhv"},
};

/// Blocks each scenario reads.  Any other block is rejected.
std::set<std::string> blocks_for(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::hbt_speckle:
      return {"speckle", "detector", "binning", "estimator", "siegert", "map"};
    case ScenarioKind::hbt_bec_flat:
      return {"speckle", "detector", "binning", "estimator"};
    case ScenarioKind::hbt_boson_cloud:
    case ScenarioKind::hbt_fermion_cloud:
      return {"cloud", "detector", "binning", "estimator"};
    case ScenarioKind::hom_photon:
    case ScenarioKind::hom_classical_baseline:
      return {"hom"};
    case ScenarioKind::hom_atom: return {"atom"};
    case ScenarioKind::bell_chsh: return {"bell"};
    case ScenarioKind::bell_lhv: return {"lhv"};
  }
  return {};
}

/// Reads typed members of one JSON object and remembers which keys were
/// consumed; finish() rejects the rest.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "must be an object");
  }

  [[noreturn]] static void fail(const std::string& path,
                                const std::string& msg) {
    throw ConfigError(path + ": " + msg);
  }

  std::string at(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  double number(const std::string& key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) fail(at(key), "must be a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(at(key), "must be finite");
    }
    return out;
  }

  void positive(const std::string& key, double& out) {
    number(key, out);
    if (!(out > 0.0)) fail(at(key), "must be > 0");
  }

  void nonnegative(const std::string& key, double& out) {
    number(key, out);
    if (!(out >= 0.0)) fail(at(key), "must be >= 0");
  }

  template <typename Int>
  void integer(const std::string& key, Int& out, std::uint64_t min_value = 0) {
    if (const json* v = get(key)) {
      if (!v->is_number_integer() && !v->is_number_unsigned()) {
        fail(at(key), "must be an integer");
      }
      if (v->is_number_integer() && v->get<std::int64_t>() < 0) {
        fail(at(key), "must be >= 0");
      }
      auto u = v->get<std::uint64_t>();
      if (u < min_value) fail(at(key), "must be >= " + std::to_string(min_value));
      if (u > std::numeric_limits<Int>::max()) fail(at(key), "out of range");
      out = static_cast<Int>(u);
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) fail(at(key), "must be true or false");
      out = v->get<bool>();
    }
  }

  bool string(const std::string& key, std::string& out) {
    if (const json* v = get(key)) {
      if (!v->is_string()) fail(at(key), "must be a string");
      out = v->get<std::string>();
      return true;
    }
    return false;
  }

  /// Number list: an array, or {"lo", "hi", "n"} for n evenly spaced values
  /// including both ends.
  void number_list(const std::string& key, std::vector<double>& out) {
    const json* v = get(key);
    if (!v) return;
    std::string p = at(key);
    if (v->is_array()) {
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const json& e = (*v)[i];
        if (!e.is_number() || !std::isfinite(e.get<double>())) {
          fail(p + "[" + std::to_string(i) + "]", "must be a finite number");
        }
        out.push_back(e.get<double>());
      }
      return;
    }
    if (v->is_object()) {
      Fields r(*v, p);
      double lo = 0.0, hi = 0.0;
      std::size_t n = 0;
      if (!r.get("lo") || !r.get("hi") || !r.get("n")) {
        fail(p, "range needs lo, hi and n");
      }
      r.number("lo", lo);
      r.number("hi", hi);
      r.integer("n", n, 1);
      r.finish();
      if (n > 1 && !(hi > lo)) fail(p, "range needs hi > lo");
      out.clear();
      for (std::size_t i = 0; i < n; ++i) {
        out.push_back(n == 1 ? lo
                             : lo + (hi - lo) * static_cast<double>(i) /
                                        static_cast<double>(n - 1));
      }
      return;
    }
    fail(p, "must be an array of numbers or a {lo, hi, n} range");
  }

  void triple(const std::string& key, std::array<double, 3>& out) {
    const json* v = get(key);
    if (!v) return;
    if (!v->is_array() || v->size() != 3) fail(at(key), "must be [x, y, z]");
    for (std::size_t i = 0; i < 3; ++i) {
      const json& e = (*v)[i];
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        fail(at(key) + "[" + std::to_string(i) + "]", "must be a finite number");
      }
      out[i] = e.get<double>();
    }
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) fail(at(item.key()), "unknown key");
    }
  }

  /// Runs fn(Fields&) over a nested block when present.
  template <typename Fn>
  void block(const std::string& key, Fn&& fn) {
    if (const json* v = get(key)) {
      Fields sub(*v, at(key));
      fn(sub);
      sub.finish();
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

/// Runs a module validator, rethrowing its message under a field path.
template <typename Fn>
void checked(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void read_speckle(Fields& f, SpeckleBlock& s) {
  f.integer("n_emitters", s.n_emitters, 1);
  f.positive("source_diameter_m", s.source_diameter_m);
  f.positive("distance_m", s.distance_m);
  f.positive("wavelength_m", s.wavelength_m);
  f.nonnegative("bandwidth_rad_s", s.bandwidth_rad_s);
  f.boolean("coherent", s.coherent);
  f.positive("mean_events", s.mean_events);
  f.integer("n_shots", s.n_shots, 1);
  f.positive("exposure_ns", s.exposure_ns);
  f.positive("prescan_fraction", s.prescan_fraction);
  f.positive("envelope_factor", s.envelope_factor);
  if (!s.coherent && s.n_emitters < speckle::kMinThermalEmitters) {
    Fields::fail(f.at("n_emitters"),
                 "thermal speckle needs >= " +
                     std::to_string(speckle::kMinThermalEmitters) + " emitters");
  }
  if (s.prescan_fraction > 1.0) {
    Fields::fail(f.at("prescan_fraction"), "must be <= 1");
  }
  if (s.envelope_factor < 1.0) {
    Fields::fail(f.at("envelope_factor"), "must be >= 1");
  }
}

void read_detector(Fields& f, Detector& d) {
  f.nonnegative("radius_mm", d.radius_mm);
  f.nonnegative("psf_sigma_x_mm", d.psf_sigma_x_mm);
  f.nonnegative("psf_sigma_y_mm", d.psf_sigma_y_mm);
  f.nonnegative("psf_sigma_t_ns", d.psf_sigma_t_ns);
  f.nonnegative("dead_radius_mm", d.dead_radius_mm);
}

void read_binning(Fields& f, correlator::BinningSpec& b) {
  std::string axis;
  if (f.string("axis", axis)) {
    checked(f.at("axis"), [&] { b.axis = correlator::parse_axis(axis); });
  }
  if (const json* v = f.get("edges"); v && v->is_string()) {
    checked(f.at("edges"), [&] {
      b.edges = correlator::parse_bin_edges(v->get<std::string>());
    });
  } else {
    f.number_list("edges", b.edges);
  }
  if (f.get("gate_x_mm")) f.positive("gate_x_mm", b.gate_x_mm);
  if (f.get("gate_y_mm")) f.positive("gate_y_mm", b.gate_y_mm);
  if (f.get("gate_t_ns")) f.positive("gate_t_ns", b.gate_t_ns);
}

void read_estimator(Fields& f, EstimatorBlock& e) {
  std::string norm;
  if (f.string("normalization", norm)) {
    checked(f.at("normalization"),
            [&] { e.normalization = correlator::parse_normalization(norm); });
  }
  f.integer("mix_depth", e.mix_depth, 1);
  f.integer("singles_draws", e.singles_draws, 1);
  f.positive("zero_fit_max", e.zero_fit_max);
  f.nonnegative("far_min", e.far_min);
}

void read_cloud(Fields& f, CloudBlock& c) {
  f.triple("correlation_length_mm", c.spec.correlation_length_mm);
  f.triple("extent_mm", c.spec.extent_mm);
  f.positive("mean_atoms", c.spec.mean_atoms);
  f.positive("fall_velocity_mm_per_ns", c.spec.fall_velocity_mm_per_ns);
  f.nonnegative("pitch_fraction", c.spec.pitch_fraction);
  f.integer("n_shots", c.n_shots, 1);
  f.number_list("mass_ratios", c.mass_ratios);
  if (c.mass_ratios.empty()) Fields::fail(f.at("mass_ratios"), "must not be empty");
  for (double m : c.mass_ratios) {
    if (!(m > 0.0)) Fields::fail(f.at("mass_ratios"), "entries must be > 0");
  }
}

void read_source(Fields& f, fock::HomSource& s) {
  std::string name;
  if (f.string("source", name)) {
    checked(f.at("source"), [&] { s.kind = fock::parse_source(name); });
  }
  f.nonnegative("nbar", s.nbar);
  f.integer("max_pairs", s.max_pairs, 1);
}

void read_hom(Fields& f, HomBlock& h) {
  read_source(f, h.source);
  f.positive("packet_sigma_ns", h.packet_sigma_ns);
  f.number_list("delays_ns", h.delays_ns);
  f.integer("n_shots", h.n_shots, 1);
  f.integer("n_phase_samples", h.n_phase_samples, 1);
}

void read_atom(Fields& f, AtomBlock& a) {
  auto& t = a.trajectory;
  f.number("t0_ms", t.t0_ms);
  f.number("t1_ms", t.t1_ms);
  f.number("v_mm_per_ms", t.v_mm_per_ms);
  f.number("v_prime_mm_per_ms", t.v_prime_mm_per_ms);
  f.nonnegative("gravity_mm_per_ms2", t.gravity);
  f.boolean("chirped", t.chirped);
  f.number_list("t2_values_ms", a.t2_values_ms);
  f.positive("packet_sigma_ns", a.packet_sigma_ns);
  read_source(f, a.source);
  f.integer("n_shots", a.n_shots, 1);
  f.number_list("contamination_nbar", a.contamination_nbar);
  f.integer("contamination_shots", a.contamination_shots, 1);
}

void read_bell(Fields& f, BellBlock& b) {
  f.block("settings", [&](Fields& s) {
    s.number("a", b.settings.a);
    s.number("a_prime", b.settings.a_prime);
    s.number("b", b.settings.b);
    s.number("b_prime", b.settings.b_prime);
  });
  f.integer("n_shots", b.n_shots, 4);
  f.integer("grid_points", b.grid_points, 2);
}

void read_lhv(Fields& f, LhvBlock& l) {
  if (const json* v = f.get("strategies")) {
    if (!v->is_array() || v->empty()) {
      Fields::fail(f.at("strategies"), "must be a non-empty array of names");
    }
    l.strategies.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      std::string p = f.at("strategies") + "[" + std::to_string(i) + "]";
      if (!(*v)[i].is_string()) Fields::fail(p, "must be a string");
      std::string name = (*v)[i].get<std::string>();
      checked(p, [&] { fock::parse_lhv(name); });
      l.strategies.push_back(name);
    }
  }
  f.integer("n_shots", l.n_shots, 4);
}

/// A dip scan needs the zero delay and at least one far delay.
void check_delays(const std::string& path, const std::vector<double>& delays,
                  double sigma) {
  if (delays.empty()) throw ConfigError(path + ": must not be empty");
  bool zero = false, far = false;
  for (double d : delays) {
    zero = zero || d == 0.0;
    far = far || std::fabs(d) >= fock::kFarDelaySigmas * sigma;
  }
  if (!zero) throw ConfigError(path + ": must include zero delay");
  if (!far) {
    throw ConfigError(path + ": needs a delay at >= " +
                      format_g9(fock::kFarDelaySigmas) + " packet widths");
  }
}

/// Cross-field checks run after all blocks are read.
void validate_config(const ScenarioConfig& c) {
  std::set<std::string> used = blocks_for(c.scenario);
  if (used.count("detector")) checked("detector", [&] { c.detector.validate(); });
  if (used.count("binning")) checked("binning", [&] { c.binning.validate(); });
  switch (c.scenario) {
    case ScenarioKind::hbt_boson_cloud:
    case ScenarioKind::hbt_fermion_cloud:
      for (double m : c.cloud.mass_ratios) {
        two_particle::CloudSpec s = c.cloud.spec;
        s.mass_ratio = m;
        checked("cloud", [&] { s.validate(); });
      }
      if (c.scenario == ScenarioKind::hbt_fermion_cloud) {
        checked("cloud", [&] {
          two_particle::CloudSpec s = c.cloud.spec;
          s.mass_ratio = c.cloud.mass_ratios.front();
          two_particle::FermionKernel kernel(s);
        });
      }
      break;
    case ScenarioKind::hom_photon:
    case ScenarioKind::hom_classical_baseline:
      checked("hom", [&] { c.hom.source.validate(); });
      check_delays("hom.delays_ns", c.hom.delays_ns, c.hom.packet_sigma_ns);
      if (c.scenario == ScenarioKind::hom_classical_baseline &&
          c.hom.source.kind != fock::SourceKind::classical) {
        throw ConfigError("hom.source: hom-classical-baseline needs 'classical'");
      }
      if (c.hom.n_phase_samples < 10000) {
        throw ConfigError("hom.n_phase_samples: must be >= 10000");
      }
      break;
    case ScenarioKind::hom_atom:
      checked("atom", [&] { c.atom.source.validate(); });
      if (c.atom.t2_values_ms.empty()) {
        throw ConfigError("atom.t2_values_ms: must not be empty");
      }
      {
        std::vector<double> delays;
        for (double t2 : c.atom.t2_values_ms) {
          atom::TrajectorySpec t = c.atom.trajectory;
          t.t2_ms = t2;
          checked("atom.t2_values_ms", [&] {
            delays.push_back(atom::overlap_from_timing(t));
          });
        }
        check_delays("atom.t2_values_ms", delays, c.atom.packet_sigma_ns);
      }
      for (double nbar : c.atom.contamination_nbar) {
        fock::PairSourceSpec p{nbar, c.atom.contamination_shots};
        checked("atom.contamination_nbar", [&] { p.validate(); });
      }
      break;
    default: break;
  }
}

}  // namespace

std::string scenario_name(ScenarioKind kind) {
  for (const auto& [k, n] : kNames) {
    if (k == kind) return n;
  }
  return "hbt-speckle";
}

ScenarioKind parse_scenario(const std::string& name) {
  for (const auto& [k, n] : kNames) {
    if (name == n) return k;
  }
  std::string known;
  for (const auto& [k, n] : kNames) known += (known.empty() ? "" : ", ") + std::string(n);
  throw ConfigError("scenario: unknown name '" + name + "' (one of " + known + ")");
}

const std::vector<ScenarioKind>& all_scenarios() {
  static const std::vector<ScenarioKind> all = [] {
    std::vector<ScenarioKind> v;
    for (const auto& [k, n] : kNames) v.push_back(k);
    return v;
  }();
  return all;
}

ScenarioConfig default_config(ScenarioKind kind) {
  using correlator::Axis;
  using correlator::BinningSpec;
  ScenarioConfig c;
  c.scenario = kind;
  switch (kind) {
    case ScenarioKind::hbt_speckle:
      // Far field at 20 m from a 2 mm disk: L_c = λ/α = 5 mm.
      c.binning = BinningSpec::uniform(Axis::radial, 0.0, 15.0, 30);
      c.estimator.zero_fit_max = 1.5;
      c.estimator.far_min = 10.0;
      break;
    case ScenarioKind::hbt_bec_flat:
      c.speckle.coherent = true;
      c.speckle.n_emitters = 1;
      c.speckle.mean_events = 100.0;
      c.binning = BinningSpec::uniform(Axis::radial, 0.0, 20.0, 10);
      c.estimator.zero_fit_max = 4.0;
      c.estimator.far_min = 10.0;
      break;
    case ScenarioKind::hbt_boson_cloud:
      c.cloud.spec.extent_mm = {4.0, 4.0, 0.0};
      c.cloud.spec.mean_atoms = 40.0;
      c.cloud.n_shots = 4000;
      c.detector.radius_mm = 0.0;
      c.binning = BinningSpec::uniform(Axis::radial, 0.0, 1.5, 30);
      c.estimator.zero_fit_max = 0.15;
      c.estimator.far_min = 1.0;
      break;
    case ScenarioKind::hbt_fermion_cloud:
      c.cloud.spec.statistics = two_particle::CloudStatistics::fermion;
      c.cloud.spec.extent_mm = {10.0, 10.0, 0.0};
      c.cloud.spec.mean_atoms = 30.0;
      c.cloud.n_shots = 10000;
      c.detector.radius_mm = 0.0;
      c.binning = BinningSpec::uniform(Axis::radial, 0.0, 1.5, 30);
      c.estimator.zero_fit_max = 0.15;
      c.estimator.far_min = 1.0;
      break;
    case ScenarioKind::hom_photon:
      c.hom.source = fock::HomSource::ideal();
      c.hom.delays_ns = {-6, -5, -4, -3, -2, -1.5, -1, -0.5, 0,
                         0.5, 1, 1.5, 2, 3, 4, 5, 6};
      break;
    case ScenarioKind::hom_classical_baseline:
      c.hom.source = fock::HomSource::classical_field();
      c.hom.delays_ns = {-6, -5, -3, -2, -1, 0, 1, 2, 3, 5, 6};
      break;
    case ScenarioKind::hom_atom:
      // Scan t2 around the crossing time 2 t1 − t0 = 2 ms.
      c.atom.source = fock::HomSource::twin(0.2);
      for (int i = -10; i <= 10; ++i) {
        c.atom.t2_values_ms.push_back(2.0 + 0.01 * i);
      }
      break;
    default: break;
  }
  return c;
}

ScenarioConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Fields top(root, "");
  int version = 0;
  if (!top.get("schema_version")) Fields::fail("schema_version", "is required");
  top.integer("schema_version", version);
  if (version != kSchemaVersion) {
    Fields::fail("schema_version", "unsupported version " +
                                       std::to_string(version) + " (expected " +
                                       std::to_string(kSchemaVersion) + ")");
  }
  std::string name;
  if (!top.string("scenario", name)) Fields::fail("scenario", "is required");
  ScenarioConfig c = default_config(parse_scenario(name));

  top.integer("seed", c.rng.seed);
  top.integer("stream", c.rng.stream_id);
  top.integer("threads", c.threads);
  if (top.string("output_dir", c.output_dir) && c.output_dir.empty()) {
    Fields::fail("output_dir", "must not be empty");
  }
  top.boolean("write_events", c.write_events);

  std::set<std::string> allowed = blocks_for(c.scenario);
  const std::vector<std::string> all_blocks{
      "speckle", "detector", "binning", "estimator", "siegert", "map",
      "cloud",   "hom",      "atom",    "bell",      "lhv"};
  for (const auto& b : all_blocks) {
    if (root.contains(b) && !allowed.count(b)) {
      Fields::fail(b, "block is not used by scenario '" + name + "'");
    }
  }

  top.block("speckle", [&](Fields& f) { read_speckle(f, c.speckle); });
  top.block("detector", [&](Fields& f) { read_detector(f, c.detector); });
  top.block("binning", [&](Fields& f) { read_binning(f, c.binning); });
  top.block("estimator", [&](Fields& f) { read_estimator(f, c.estimator); });
  top.block("siegert", [&](Fields& f) {
    f.boolean("enabled", c.siegert.enabled);
    f.integer("n_realizations", c.siegert.n_realizations, 10);
    f.integer("n_points", c.siegert.n_points, 2);
    f.positive("spacing_mm", c.siegert.spacing_mm);
  });
  top.block("map", [&](Fields& f) {
    f.boolean("enabled", c.map.enabled);
    f.integer("nx", c.map.nx, 1);
    f.integer("ny", c.map.ny, 1);
    f.positive("pitch_mm", c.map.pitch_mm);
    f.integer("realization_id", c.map.realization_id);
  });
  top.block("cloud", [&](Fields& f) { read_cloud(f, c.cloud); });
  top.block("hom", [&](Fields& f) { read_hom(f, c.hom); });
  top.block("atom", [&](Fields& f) { read_atom(f, c.atom); });
  top.block("bell", [&](Fields& f) { read_bell(f, c.bell); });
  top.block("lhv", [&](Fields& f) { read_lhv(f, c.lhv); });
  top.finish();

  validate_config(c);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  return parse_config(text);
}

namespace {

json range_json(const std::vector<double>& v) { return json(v); }

json source_json(const fock::HomSource& s) {
  return {{"source", fock::source_name(s.kind)},
          {"nbar", s.nbar},
          {"max_pairs", s.max_pairs}};
}

}  // namespace

std::string ScenarioConfig::canonical_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["scenario"] = scenario_name(scenario);
  j["seed"] = rng.seed;
  j["stream"] = rng.stream_id;
  // threads and output_dir do not affect results and are left out so the
  // config hash is stable across machines.
  j["write_events"] = write_events;
  auto gate = [](double g) { return std::isinf(g) ? json(nullptr) : json(g); };
  std::set<std::string> used = blocks_for(scenario);
  if (used.count("speckle")) {
    const auto& s = speckle;
    j["speckle"] = {{"n_emitters", s.n_emitters},
                    {"source_diameter_m", s.source_diameter_m},
                    {"distance_m", s.distance_m},
                    {"wavelength_m", s.wavelength_m},
                    {"bandwidth_rad_s", s.bandwidth_rad_s},
                    {"coherent", s.coherent},
                    {"mean_events", s.mean_events},
                    {"n_shots", s.n_shots},
                    {"exposure_ns", s.exposure_ns},
                    {"prescan_fraction", s.prescan_fraction},
                    {"envelope_factor", s.envelope_factor}};
  }
  if (used.count("detector")) {
    j["detector"] = {{"radius_mm", detector.radius_mm},
                     {"psf_sigma_x_mm", detector.psf_sigma_x_mm},
                     {"psf_sigma_y_mm", detector.psf_sigma_y_mm},
                     {"psf_sigma_t_ns", detector.psf_sigma_t_ns},
                     {"dead_radius_mm", detector.dead_radius_mm}};
  }
  if (used.count("binning")) {
    j["binning"] = {{"axis", correlator::axis_name(binning.axis)},
                    {"edges", binning.edges},
                    {"gate_x_mm", gate(binning.gate_x_mm)},
                    {"gate_y_mm", gate(binning.gate_y_mm)},
                    {"gate_t_ns", gate(binning.gate_t_ns)}};
  }
  if (used.count("estimator")) {
    j["estimator"] = {
        {"normalization", correlator::normalization_name(estimator.normalization)},
        {"mix_depth", estimator.mix_depth},
        {"singles_draws", estimator.singles_draws},
        {"zero_fit_max", estimator.zero_fit_max},
        {"far_min", estimator.far_min}};
  }
  if (used.count("siegert")) {
    j["siegert"] = {{"enabled", siegert.enabled},
                    {"n_realizations", siegert.n_realizations},
                    {"n_points", siegert.n_points},
                    {"spacing_mm", siegert.spacing_mm}};
  }
  if (used.count("map")) {
    j["map"] = {{"enabled", map.enabled},
                {"nx", map.nx},
                {"ny", map.ny},
                {"pitch_mm", map.pitch_mm},
                {"realization_id", map.realization_id}};
  }
  if (used.count("cloud")) {
    const auto& s = cloud.spec;
    j["cloud"] = {{"correlation_length_mm", s.correlation_length_mm},
                  {"extent_mm", s.extent_mm},
                  {"mean_atoms", s.mean_atoms},
                  {"fall_velocity_mm_per_ns", s.fall_velocity_mm_per_ns},
                  {"pitch_fraction", s.pitch_fraction},
                  {"n_shots", cloud.n_shots},
                  {"mass_ratios", range_json(cloud.mass_ratios)}};
  }
  if (used.count("hom")) {
    json h = source_json(hom.source);
    h["packet_sigma_ns"] = hom.packet_sigma_ns;
    h["delays_ns"] = range_json(hom.delays_ns);
    h["n_shots"] = hom.n_shots;
    h["n_phase_samples"] = hom.n_phase_samples;
    j["hom"] = h;
  }
  if (used.count("atom")) {
    const auto& t = atom.trajectory;
    json a = source_json(atom.source);
    a["t0_ms"] = t.t0_ms;
    a["t1_ms"] = t.t1_ms;
    a["v_mm_per_ms"] = t.v_mm_per_ms;
    a["v_prime_mm_per_ms"] = t.v_prime_mm_per_ms;
    a["gravity_mm_per_ms2"] = t.gravity;
    a["chirped"] = t.chirped;
    a["t2_values_ms"] = range_json(atom.t2_values_ms);
    a["packet_sigma_ns"] = atom.packet_sigma_ns;
    a["n_shots"] = atom.n_shots;
    a["contamination_nbar"] = range_json(atom.contamination_nbar);
    a["contamination_shots"] = atom.contamination_shots;
    j["atom"] = a;
  }
  if (used.count("bell")) {
    j["bell"] = {{"settings",
                  {{"a", bell.settings.a},
                   {"a_prime", bell.settings.a_prime},
                   {"b", bell.settings.b},
                   {"b_prime", bell.settings.b_prime}}},
                 {"n_shots", bell.n_shots},
                 {"grid_points", bell.grid_points}};
  }
  if (used.count("lhv")) {
    j["lhv"] = {{"strategies", lhv.strategies}, {"n_shots", lhv.n_shots}};
  }
  return j.dump(2);
}

}  // namespace qcorr::scenario
