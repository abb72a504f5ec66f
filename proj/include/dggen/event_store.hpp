// Copyright (c) 2026, the dggen authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace dggen {

enum class FeatureKind { categorical, numerical };

struct FeatureDescriptor {
  std::string name;
  FeatureKind kind = FeatureKind::numerical;
  int cardinality = 0;  // categorical only; >= 1

  bool operator==(const FeatureDescriptor&) const = default;
};

// Ordered edge-feature layout shared by a stream and the model heads.
// A zero-feature schema is legal (interaction-only graphs).
struct FeatureSchema {
  std::vector<FeatureDescriptor> features;

  int size() const { return static_cast<int>(features.size()); }
  void validate() const;

  // Parses a compact spec such as "cat:2,num" or "cat:5,num,num".
  // Names default to f0, f1, ...
  static FeatureSchema parse(std::string_view spec);
  std::string to_string() const;

  bool operator==(const FeatureSchema&) const = default;
};

struct Interaction {
  int src = 0;
  int dst = 0;
  double t = 0.0;
  std::vector<double> features;

  bool operator==(const Interaction&) const = default;
};

// Chronologically ordered interaction sequence over a dense node universe
// [0, num_nodes).  Immutable after construction; the constructor verifies
// every invariant (ordering, id ranges, feature domains).
class EventStream {
 public:
  EventStream(FeatureSchema schema, int num_nodes, double origin_time,
              std::vector<Interaction> interactions,
              std::vector<std::int64_t> original_ids = {});

  const FeatureSchema& schema() const { return schema_; }
  int num_nodes() const { return num_nodes_; }
  double origin_time() const { return origin_time_; }
  const std::vector<Interaction>& interactions() const { return interactions_; }
  std::size_t size() const { return interactions_.size(); }
  bool empty() const { return interactions_.empty(); }

  // Dense id -> id as it appeared in the source file.  Empty when the
  // stream was not loaded from a file (ids are then their own names).
  const std::vector<std::int64_t>& original_ids() const { return original_ids_; }

 private:
  FeatureSchema schema_;
  int num_nodes_;
  double origin_time_;
  std::vector<Interaction> interactions_;
  std::vector<std::int64_t> original_ids_;
};

// Reads a header-less CSV `src,dst,timestamp,state_label,feat_1,...,feat_n`.
// Node ids are remapped to dense 0-based ids in order of first appearance;
// the mapping is recorded in the result.  origin_time is the first row's
// timestamp (so the first inter-event delta is zero).  Errors carry the
// offending 1-based line number.
EventStream load_events(const std::string& path, const FeatureSchema& schema);

// Writes the same CSV format; the state_label column is emitted as 0 and
// reals carry full round-trip precision.
void write_events(const EventStream& stream, const std::string& path);

// Temporal partition: train = first floor(f_train * n) interactions,
// val = next floor((f_train + f_val) * n) - floor(f_train * n), test = rest.
// Each partition inherits schema and node universe; a partition's origin is
// the timestamp directly preceding it, so deltas stay physical.
// Requires 0 < f_train, 0 <= f_val, f_train + f_val < 1, nonempty stream.
std::tuple<EventStream, EventStream, EventStream> chronological_split(
    const EventStream& stream, double f_train, double f_val);

// delta_0 = t_0 - origin_time; delta_i = t_i - t_{i-1}.  Cumulative sum
// plus origin reconstructs the timestamps.  Requires a nonempty stream.
std::vector<double> inter_event_deltas(const EventStream& stream);

// Re-expresses `other` in `reference`'s dense id space by matching literal
// file ids (a stream built in memory uses its dense ids as literals).  Needed
// when two files are loaded independently: each load assigns dense ids by
// first appearance, so equal literal ids can land on different dense ids.
// Throws if `other` mentions a literal id absent from `reference`.
EventStream align_to_universe(const EventStream& reference,
                              const EventStream& other);

// Replaces dense ids with the literal ids recorded at load time; the universe
// becomes [0, max literal id + 1).  Identity for in-memory streams.  Used
// where exact id agreement across independently loaded files matters.
EventStream with_literal_ids(const EventStream& stream);

}  // namespace dggen
