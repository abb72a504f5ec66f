// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#include "dggen/event_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace dggen {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_real(std::string_view field, std::size_t line_no, const char* what) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    fail("parse error: line " + std::to_string(line_no) + ": bad " + what +
         " '" + std::string(field) + "'");
  return value;
}

std::int64_t parse_id(std::string_view field, std::size_t line_no, const char* what) {
  std::int64_t value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    fail("parse error: line " + std::to_string(line_no) + ": bad " + what +
         " '" + std::string(field) + "'");
  return value;
}

void append_real(std::string& out, double v) {
  char buf[40];
  // 17 significant digits round-trips any double exactly.
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

void FeatureSchema::validate() const {
  for (const auto& f : features) {
    if (f.name.empty()) fail("schema error: feature with empty name");
    if (f.kind == FeatureKind::categorical && f.cardinality < 1)
      fail("schema error: categorical feature '" + f.name +
           "' needs cardinality >= 1");
  }
}

FeatureSchema FeatureSchema::parse(std::string_view spec) {
  FeatureSchema schema;
  if (spec.empty()) return schema;
  std::size_t start = 0;
  int index = 0;
  while (start <= spec.size()) {
    std::size_t comma = spec.find(',', start);
    std::string_view item = spec.substr(
        start, comma == std::string_view::npos ? spec.size() - start : comma - start);
    FeatureDescriptor d;
    d.name = "f" + std::to_string(index++);
    if (item == "num") {
      d.kind = FeatureKind::numerical;
    } else if (item.substr(0, 4) == "cat:") {
      d.kind = FeatureKind::categorical;
      std::string_view card = item.substr(4);
      int value = 0;
      auto [ptr, ec] = std::from_chars(card.data(), card.data() + card.size(), value);
      if (ec != std::errc{} || ptr != card.data() + card.size() || value < 1)
        fail("schema error: bad cardinality in '" + std::string(item) + "'");
      d.cardinality = value;
    } else {
      fail("schema error: unknown feature spec '" + std::string(item) +
           "' (expected 'num' or 'cat:<k>')");
    }
    schema.features.push_back(std::move(d));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  schema.validate();
  return schema;
}

std::string FeatureSchema::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (i) out += ',';
    if (features[i].kind == FeatureKind::numerical)
      out += "num";
    else
      out += "cat:" + std::to_string(features[i].cardinality);
  }
  return out;
}

EventStream::EventStream(FeatureSchema schema, int num_nodes, double origin_time,
                         std::vector<Interaction> interactions,
                         std::vector<std::int64_t> original_ids)
    : schema_(std::move(schema)),
      num_nodes_(num_nodes),
      origin_time_(origin_time),
      interactions_(std::move(interactions)),
      original_ids_(std::move(original_ids)) {
  schema_.validate();
  if (num_nodes_ < 1) fail("stream error: num_nodes must be positive");
  if (!original_ids_.empty() &&
      original_ids_.size() != static_cast<std::size_t>(num_nodes_))
    fail("stream error: id mapping size != num_nodes");
  if (!std::isfinite(origin_time_)) fail("stream error: non-finite origin_time");
  if (!interactions_.empty() && interactions_.front().t < origin_time_)
    fail("stream error: first timestamp precedes origin_time");
  const int n_feat = schema_.size();
  double prev_t = interactions_.empty() ? 0.0 : interactions_.front().t;
  for (std::size_t i = 0; i < interactions_.size(); ++i) {
    const Interaction& ev = interactions_[i];
    const std::string at = " at interaction " + std::to_string(i);
    if (ev.src < 0 || ev.src >= num_nodes_ || ev.dst < 0 || ev.dst >= num_nodes_)
      fail("stream error: node id out of range" + at);
    if (!std::isfinite(ev.t)) fail("stream error: non-finite timestamp" + at);
    if (ev.t < prev_t) fail("stream error: decreasing timestamp" + at);
    prev_t = ev.t;
    if (static_cast<int>(ev.features.size()) != n_feat)
      fail("stream error: feature count mismatch" + at);
    for (int j = 0; j < n_feat; ++j) {
      const double v = ev.features[j];
      if (!std::isfinite(v)) fail("stream error: non-finite feature" + at);
      if (schema_.features[j].kind == FeatureKind::categorical) {
        const double k = schema_.features[j].cardinality;
        if (v != std::floor(v) || v < 0 || v >= k)
          fail("stream error: categorical value out of range" + at);
      }
    }
  }
}

EventStream load_events(const std::string& path, const FeatureSchema& schema) {
  schema.validate();
  std::ifstream in(path);
  if (!in) fail("io error: cannot open '" + path + "'");

  const int n_feat = schema.size();
  std::vector<Interaction> interactions;
  std::vector<std::int64_t> original_ids;
  std::unordered_map<std::int64_t, int> dense;
  auto remap = [&](std::int64_t id) {
    auto [it, inserted] = dense.try_emplace(id, static_cast<int>(original_ids.size()));
    if (inserted) original_ids.push_back(id);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  double prev_t = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != static_cast<std::size_t>(4 + n_feat))
      fail("schema error: line " + std::to_string(line_no) + ": expected " +
           std::to_string(4 + n_feat) + " fields, got " +
           std::to_string(fields.size()));
    Interaction ev;
    const std::int64_t raw_src = parse_id(fields[0], line_no, "src");
    const std::int64_t raw_dst = parse_id(fields[1], line_no, "dst");
    ev.t = parse_real(fields[2], line_no, "timestamp");
    parse_real(fields[3], line_no, "state_label");  // read and discarded
    if (!interactions.empty() && ev.t < prev_t)
      fail("ordering error: line " + std::to_string(line_no) +
           ": timestamp decreases");
    prev_t = ev.t;
    ev.features.reserve(n_feat);
    for (int j = 0; j < n_feat; ++j)
      ev.features.push_back(parse_real(fields[4 + j], line_no, "feature"));
    ev.src = remap(raw_src);
    ev.dst = remap(raw_dst);
    interactions.push_back(std::move(ev));
  }
  if (interactions.empty()) fail("io error: '" + path + "' holds no events");
  const double origin = interactions.front().t;
  const int num_nodes = static_cast<int>(original_ids.size());
  return EventStream(schema, num_nodes, origin, std::move(interactions),
                     std::move(original_ids));
}

void write_events(const EventStream& stream, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("io error: cannot write '" + path + "'");
  std::string buf;
  for (const Interaction& ev : stream.interactions()) {
    buf.clear();
    buf += std::to_string(ev.src);
    buf += ',';
    buf += std::to_string(ev.dst);
    buf += ',';
    append_real(buf, ev.t);
    buf += ",0";
    for (double v : ev.features) {
      buf += ',';
      append_real(buf, v);
    }
    buf += '\n';
    out << buf;
  }
  if (!out) fail("io error: write to '" + path + "' failed");
}

std::tuple<EventStream, EventStream, EventStream> chronological_split(
    const EventStream& stream, double f_train, double f_val) {
  if (stream.empty()) throw std::invalid_argument("split: empty stream");
  if (!(f_train > 0.0) || f_val < 0.0 || !(f_train + f_val < 1.0))
    throw std::invalid_argument("split: need 0 < f_train, 0 <= f_val, f_train + f_val < 1");
  const auto n = static_cast<double>(stream.size());
  const auto n_train = static_cast<std::size_t>(std::floor(f_train * n));
  const auto n_train_val = static_cast<std::size_t>(std::floor((f_train + f_val) * n));
  const auto& all = stream.interactions();

  auto make = [&](std::size_t begin, std::size_t end, double origin) {
    return EventStream(stream.schema(), stream.num_nodes(), origin,
                       std::vector<Interaction>(all.begin() + begin, all.begin() + end),
                       stream.original_ids());
  };
  auto origin_before = [&](std::size_t begin) {
    return begin == 0 ? stream.origin_time() : all[begin - 1].t;
  };
  return {make(0, n_train, stream.origin_time()),
          make(n_train, n_train_val, origin_before(n_train)),
          make(n_train_val, all.size(), origin_before(n_train_val))};
}

std::vector<double> inter_event_deltas(const EventStream& stream) {
  if (stream.empty()) throw std::invalid_argument("deltas: empty stream");
  std::vector<double> deltas;
  deltas.reserve(stream.size());
  double prev = stream.origin_time();
  for (const Interaction& ev : stream.interactions()) {
    deltas.push_back(ev.t - prev);
    prev = ev.t;
  }
  return deltas;
}

namespace {

std::int64_t literal_id(const EventStream& s, int dense) {
  return s.original_ids().empty() ? dense : s.original_ids()[dense];
}

}  // namespace

EventStream align_to_universe(const EventStream& reference,
                              const EventStream& other) {
  if (!(reference.schema() == other.schema()))
    throw std::invalid_argument("align: schema mismatch");
  std::unordered_map<std::int64_t, int> to_ref;
  to_ref.reserve(static_cast<std::size_t>(reference.num_nodes()));
  for (int i = 0; i < reference.num_nodes(); ++i)
    to_ref.emplace(literal_id(reference, i), i);
  auto map_id = [&](int dense) {
    const std::int64_t lit = literal_id(other, dense);
    auto it = to_ref.find(lit);
    if (it == to_ref.end())
      throw std::invalid_argument("align: node " + std::to_string(lit) +
                                  " is absent from the reference stream");
    return it->second;
  };
  std::vector<Interaction> events = other.interactions();
  for (Interaction& ev : events) {
    ev.src = map_id(ev.src);
    ev.dst = map_id(ev.dst);
  }
  return EventStream(other.schema(), reference.num_nodes(),
                     other.origin_time(), std::move(events),
                     reference.original_ids());
}

EventStream with_literal_ids(const EventStream& stream) {
  if (stream.original_ids().empty()) return stream;
  std::int64_t max_id = 0;
  for (std::int64_t id : stream.original_ids()) {
    if (id < 0)
      throw std::invalid_argument("literal ids: negative id " +
                                  std::to_string(id));
    max_id = std::max(max_id, id);
  }
  if (max_id >= std::numeric_limits<int>::max())
    throw std::invalid_argument("literal ids: id range exceeds int");
  std::vector<Interaction> events = stream.interactions();
  for (Interaction& ev : events) {
    ev.src = static_cast<int>(stream.original_ids()[ev.src]);
    ev.dst = static_cast<int>(stream.original_ids()[ev.dst]);
  }
  return EventStream(stream.schema(), static_cast<int>(max_id) + 1,
                     stream.origin_time(), std::move(events));
}

}  // namespace dggen
