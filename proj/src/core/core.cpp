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

#include "qcorr/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qcorr/parallel.hpp"

namespace qcorr {

std::string format_g9(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value,
                           std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

double quantize_coordinate(double value) {
  if (!std::isfinite(value)) return value;
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value,
                           std::chars_format::general, 9);
  double out = 0.0;
  std::from_chars(buf, res.ptr, out);
  return out;
}

DetectionEvent make_event(double x_mm, double y_mm, double t_ns) {
  return DetectionEvent{quantize_coordinate(x_mm), quantize_coordinate(y_mm),
                        quantize_coordinate(t_ns)};
}

bool canonical_less(const DetectionEvent& a, const DetectionEvent& b) {
  if (a.t_ns != b.t_ns) return a.t_ns < b.t_ns;
  if (a.x_mm != b.x_mm) return a.x_mm < b.x_mm;
  return a.y_mm < b.y_mm;
}

void Shot::canonicalize() {
  std::sort(events.begin(), events.end(), canonical_less);
}

std::size_t total_events(const ShotList& shots) {
  std::size_t n = 0;
  for (const auto& s : shots) n += s.events.size();
  return n;
}

void Detector::validate() const {
  const double fields[] = {radius_mm, psf_sigma_x_mm, psf_sigma_y_mm,
                           psf_sigma_t_ns, dead_radius_mm};
  for (double f : fields) {
    if (!std::isfinite(f) || f < 0.0) {
      throw ValidationError(
          "detector fields must be finite and non-negative");
    }
  }
}

bool Detector::contains(double x_mm, double y_mm) const {
  if (radius_mm == 0.0) return true;
  return x_mm * x_mm + y_mm * y_mm <= radius_mm * radius_mm;
}

// ---------------------------------------------------------------------------
// RNG

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

std::seed_seq::result_type low32(std::uint64_t v) {
  return static_cast<std::seed_seq::result_type>(v & 0xFFFFFFFFULL);
}

}  // namespace

Rng::Rng(const RngSpec& spec, StreamTag tag, std::uint64_t index) {
  std::uint64_t h = mix64(spec.seed);
  h = mix64(h ^ spec.stream_id);
  h = mix64(h ^ static_cast<std::uint64_t>(tag));
  h = mix64(h ^ index);
  std::uint64_t h2 = mix64(h ^ 0xD1B54A32D192ED03ULL);
  std::seed_seq seq{low32(h), low32(h >> 32), low32(h2), low32(h2 >> 32)};
  engine_.seed(seq);
}

std::uint64_t Rng::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(engine_);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("Rng::below requires n > 0");
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(engine_);
}

// ---------------------------------------------------------------------------
// Thread cap

unsigned default_thread_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("QCORR_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0 && static_cast<unsigned long>(cap) < hw) {
      hw = static_cast<unsigned>(cap);
    }
  }
  return hw;
}

unsigned resolve_threads(unsigned requested) {
  unsigned cap = default_thread_count();
  if (requested == 0) return cap;
  return std::min(requested, cap);
}

// ---------------------------------------------------------------------------
// CSV codec

namespace {

constexpr std::string_view kHeader = "shot_id,x_mm,y_mm,t_ns";

void append_value(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 9);
  out.append(buf, res.ptr);
}

void append_int(std::string& out, std::int64_t v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

double parse_double(std::string_view field, std::size_t line,
                    const char* name) {
  if (field.empty()) throw ParseError(line, std::string("empty ") + name);
  const char* begin = field.data();
  const char* end = field.data() + field.size();
  if (*begin == '+') ++begin;
  double v = 0.0;
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError(line, std::string("malformed ") + name + " '" +
                               std::string(field) + "'");
  }
  if (!std::isfinite(v)) {
    throw ParseError(line, std::string("non-finite ") + name);
  }
  return v;
}

}  // namespace

void validate_shots(const ShotList& shots) {
  std::vector<std::int64_t> ids;
  ids.reserve(shots.size());
  for (const auto& shot : shots) {
    ids.push_back(shot.shot_id);
    for (std::size_t i = 0; i < shot.events.size(); ++i) {
      const auto& e = shot.events[i];
      if (!std::isfinite(e.x_mm) || !std::isfinite(e.y_mm) ||
          !std::isfinite(e.t_ns)) {
        throw ValidationError("shot " + std::to_string(shot.shot_id) +
                              ": non-finite event coordinate");
      }
      if (e.t_ns < 0.0) {
        throw ValidationError("shot " + std::to_string(shot.shot_id) +
                              ": negative event time");
      }
      if (i > 0 && canonical_less(e, shot.events[i - 1])) {
        throw ValidationError("shot " + std::to_string(shot.shot_id) +
                              ": events not in canonical (t, x, y) order");
      }
    }
  }
  std::sort(ids.begin(), ids.end());
  auto dup = std::adjacent_find(ids.begin(), ids.end());
  if (dup != ids.end()) {
    throw ValidationError("duplicate shot_id " + std::to_string(*dup));
  }
}

std::string encode_shots(const ShotList& shots) {
  validate_shots(shots);
  std::vector<const Shot*> order;
  order.reserve(shots.size());
  for (const auto& s : shots) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const Shot* a, const Shot* b) {
    return a->shot_id < b->shot_id;
  });

  std::string out;
  out.reserve(32 + total_events(shots) * 40);
  out.append(kHeader);
  out.push_back('\n');
  for (const Shot* s : order) {
    if (s->events.empty()) {
      append_int(out, s->shot_id);
      out.append(",,,\n");
      continue;
    }
    for (const auto& e : s->events) {
      append_int(out, s->shot_id);
      out.push_back(',');
      append_value(out, e.x_mm);
      out.push_back(',');
      append_value(out, e.y_mm);
      out.push_back(',');
      append_value(out, e.t_ns);
      out.push_back('\n');
    }
  }
  return out;
}

ShotList decode_shots(std::string_view text) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) throw ParseError(1, "missing header");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB &&
      static_cast<unsigned char>(line[2]) == 0xBF) {
    line.remove_prefix(3);
  }
  if (line != kHeader) {
    throw ParseError(line_no, "expected header '" + std::string(kHeader) +
                                  "'");
  }

  // Shots keyed by id, kept in first-appearance order then sorted by id.
  std::vector<Shot> shots;
  std::vector<std::pair<std::int64_t, std::size_t>> index;  // id -> slot
  auto slot_for = [&](std::int64_t id) -> Shot& {
    auto it = std::lower_bound(
        index.begin(), index.end(), id,
        [](const auto& p, std::int64_t v) { return p.first < v; });
    if (it != index.end() && it->first == id) return shots[it->second];
    index.insert(it, {id, shots.size()});
    shots.push_back(Shot{id, {}});
    return shots.back();
  };

  while (next_line(line)) {
    if (line.empty()) {
      if (pos >= text.size()) break;  // trailing newline
      throw ParseError(line_no, "empty row");
    }
    std::string_view fields[4];
    std::size_t start = 0;
    int count = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        if (count >= 4) throw ParseError(line_no, "too many fields");
        fields[count++] = line.substr(start, i - start);
        start = i + 1;
      }
    }
    if (count != 4) throw ParseError(line_no, "expected 4 fields");

    std::int64_t id = 0;
    {
      const char* b = fields[0].data();
      const char* e = b + fields[0].size();
      auto res = std::from_chars(b, e, id);
      if (fields[0].empty() || res.ec != std::errc() || res.ptr != e) {
        throw ParseError(line_no, "malformed shot_id '" +
                                      std::string(fields[0]) + "'");
      }
    }
    Shot& shot = slot_for(id);
    if (fields[1].empty() && fields[2].empty() && fields[3].empty()) {
      continue;  // empty-shot marker
    }
    double x = parse_double(fields[1], line_no, "x_mm");
    double y = parse_double(fields[2], line_no, "y_mm");
    double t = parse_double(fields[3], line_no, "t_ns");
    if (t < 0.0) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": t_ns out of range (negative)");
    }
    shot.events.push_back(DetectionEvent{x, y, t});
  }

  std::sort(shots.begin(), shots.end(),
            [](const Shot& a, const Shot& b) { return a.shot_id < b.shot_id; });
  for (auto& s : shots) s.canonicalize();
  return shots;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

void write_shots_csv(const std::string& path, const ShotList& shots) {
  write_file(path, encode_shots(shots));
}

ShotList read_shots_csv(const std::string& path) {
  return decode_shots(read_file(path));
}

}  // namespace qcorr
