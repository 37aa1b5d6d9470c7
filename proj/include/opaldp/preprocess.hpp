// Copyright 2026 The opaldp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPALDP_PREPROCESS_HPP_
#define OPALDP_PREPROCESS_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "opaldp/csv.hpp"
#include "opaldp/dataset.hpp"
#include "opaldp/error.hpp"
#include "opaldp/schema.hpp"

namespace opaldp {

// --- Time binning ----------------------------------------------------------

// Floors every time attribute to a multiple of `bin_width_minutes`. The width
// must divide 1440.
inline Dataset BinTimes(const Dataset& ds, int bin_width_minutes) {
  if (bin_width_minutes <= 0 || kMinutesPerDay % bin_width_minutes != 0) {
    throw InvalidArgumentError("bin width must be a positive divisor of 1440, got " +
                               std::to_string(bin_width_minutes));
  }
  Dataset out = ds;
  std::vector<std::size_t> time_columns;
  for (std::size_t a = 0; a < ds.schema.size(); ++a) {
    if (ds.schema.attribute(a).kind() == AttributeKind::kTime) {
      time_columns.push_back(a);
      out.schema = out.schema.WithAttribute(
          a, ds.schema.attribute(a).WithBinWidth(bin_width_minutes));
    }
  }
  for (auto& row : out.rows) {
    for (std::size_t a : time_columns) {
      const auto minutes = ParseInt(row[a]);
      if (!minutes) throw InvalidArgumentError("non-numeric time '" + row[a] + "'");
      row[a] = std::to_string(*minutes / bin_width_minutes * bin_width_minutes);
    }
  }
  return out;
}

// --- Stop aggregation ------------------------------------------------------

// Total, deterministic map from fine stop ids to coarse stop ids.
class AggregationMap {
 public:
  AggregationMap() = default;
  explicit AggregationMap(std::map<std::string, std::string> mapping)
      : mapping_(std::move(mapping)) {}

  static AggregationMap Identity(const std::vector<std::string>& stops) {
    std::map<std::string, std::string> m;
    for (const auto& s : stops) m.emplace(s, s);
    return AggregationMap(std::move(m));
  }

  // Two-column delimited text with a header row: fine id, coarse id. A stop
  // listed twice with different images is rejected.
  static AggregationMap Load(const std::string& path) {
    const csv::Table table = csv::ReadFile(path);
    if (table.header.size() != 2) {
      throw ValidationError("aggregation map must have exactly two columns", 1);
    }
    std::map<std::string, std::string> m;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      const auto [it, inserted] = m.emplace(row[0], row[1]);
      if (!inserted && it->second != row[1]) {
        throw ValidationError("stop '" + row[0] + "' mapped twice", table.lines[r]);
      }
    }
    return AggregationMap(std::move(m));
  }

  void Save(std::ostream& out) const {
    csv::WriteRow(out, {"stop", "aggregate"});
    for (const auto& [from, to] : mapping_) csv::WriteRow(out, {from, to});
  }

  const std::string* Lookup(const std::string& stop) const {
    const auto it = mapping_.find(stop);
    return it == mapping_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, std::string>& mapping() const { return mapping_; }

 private:
  std::map<std::string, std::string> mapping_;
};

// Replaces every stop value by its image. The schema's stop ranges become the
// image of their old ranges, in order of first appearance.
inline Dataset AggregateStops(const Dataset& ds, const AggregationMap& map) {
  Dataset out = ds;
  std::vector<std::size_t> stop_columns;
  for (std::size_t a = 0; a < ds.schema.size(); ++a) {
    const Attribute& attr = ds.schema.attribute(a);
    if (attr.kind() != AttributeKind::kStop) continue;
    stop_columns.push_back(a);
    std::vector<std::string> image;
    std::set<std::string> seen;
    for (const auto& v : attr.values()) {
      if (const std::string* to = map.Lookup(v); to && seen.insert(*to).second) {
        image.push_back(*to);
      }
    }
    if (image.empty()) {
      throw InvalidArgumentError("aggregation map covers no stop of '" + attr.name() +
                                 "'");
    }
    out.schema = out.schema.WithAttribute(a, attr.WithValues(std::move(image)));
  }
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    for (std::size_t a : stop_columns) {
      const std::string* to = map.Lookup(out.rows[r][a]);
      if (to == nullptr) {
        throw ValidationError("stop '" + out.rows[r][a] + "' is not in the aggregation map",
                              ds.LineOf(r), ds.schema.attribute(a).name());
      }
      out.rows[r][a] = *to;
    }
  }
  return out;
}

// --- Decoupling ------------------------------------------------------------

inline std::vector<std::string> GroupColumns(const DomainSchema& schema,
                                             AttributeGroup group) {
  std::vector<std::string> names;
  for (const auto& a : schema.attributes()) {
    if (a.group() == group) names.push_back(a.name());
  }
  return names;
}

// Splits each trip into a tap-on row and a tap-off row held in two separate
// datasets of the same cardinality. The pairing between them is dropped.
inline std::pair<Dataset, Dataset> Decouple(const Dataset& ds) {
  const auto on = GroupColumns(ds.schema, AttributeGroup::kTapOn);
  const auto off = GroupColumns(ds.schema, AttributeGroup::kTapOff);
  if (on.empty() || off.empty()) {
    throw InvalidArgumentError("decoupling needs both tap-on and tap-off attributes");
  }
  return {Project(ds, on), Project(ds, off)};
}

// --- Partitioning ----------------------------------------------------------

enum class View { kJoined, kTapOn, kTapOff };

inline const char* ViewName(View view) {
  switch (view) {
    case View::kJoined:
      return "joined";
    case View::kTapOn:
      return "tap_on";
    case View::kTapOff:
      return "tap_off";
  }
  return "?";
}

inline constexpr const char* kAnyValue = "*";

struct PartitionKey {
  std::string date = kAnyValue;
  std::string mode = kAnyValue;
  View view = View::kJoined;

  std::string Label() const {
    return "date=" + date + "/mode=" + mode + "/view=" + ViewName(view);
  }

  PartitionKey WithView(View v) const { return {date, mode, v}; }

  auto operator<=>(const PartitionKey&) const = default;
};

struct PartitionBy {
  bool date = true;
  bool mode = true;
};

// Splits records by (date, mode). Keys enumerate the full cross product of
// the schema's configured dates and modes, so partitions with no records are
// present (and empty). Every record lands in exactly one partition.
inline std::map<PartitionKey, Dataset> Partition(const Dataset& ds, PartitionBy by) {
  const auto date_col = ds.schema.FindKind(AttributeKind::kDate);
  const auto mode_col = ds.schema.FindKind(AttributeKind::kMode);
  if (by.date && !date_col) throw InvalidArgumentError("schema has no date attribute");
  if (by.mode && !mode_col) throw InvalidArgumentError("schema has no mode attribute");
  const std::vector<std::string> any = {kAnyValue};
  const auto& dates = by.date ? ds.schema.attribute(*date_col).values() : any;
  const auto& modes = by.mode ? ds.schema.attribute(*mode_col).values() : any;
  std::map<PartitionKey, Dataset> parts;
  for (const auto& d : dates) {
    for (const auto& m : modes) {
      Dataset empty;
      empty.schema = ds.schema;
      parts.emplace(PartitionKey{d, m, View::kJoined}, std::move(empty));
    }
  }
  for (std::size_t r = 0; r < ds.rows.size(); ++r) {
    const auto& row = ds.rows[r];
    PartitionKey key{by.date ? row[*date_col] : kAnyValue,
                     by.mode ? row[*mode_col] : kAnyValue, View::kJoined};
    Dataset& part = parts.at(key);
    part.rows.push_back(row);
    if (!ds.lines.empty()) part.lines.push_back(ds.LineOf(r));
  }
  return parts;
}

// --- Density ---------------------------------------------------------------

// rho is records per domain cell, occupancy the fraction of cells holding at
// least one record.
struct DensityReport {
  std::int64_t n = 0;
  std::int64_t distinct_points = 0;
  std::uint64_t domain_size = 0;
  double rho = 0.0;
  double occupancy = 0.0;
};

inline constexpr double kDefaultOccupancyWarning = 1e-3;

inline DensityReport Density(const Dataset& ds, const DomainSchema& schema) {
  const std::uint64_t size = schema.DomainSize();
  if (size == 0) throw InvalidArgumentError("domain size is zero");
  std::set<Point> distinct(ds.rows.begin(), ds.rows.end());
  DensityReport report;
  report.n = static_cast<std::int64_t>(ds.rows.size());
  report.distinct_points = static_cast<std::int64_t>(distinct.size());
  report.domain_size = size;
  const double cells = size == kSaturatedSize ? std::exp2(schema.Log2DomainSize())
                                              : static_cast<double>(size);
  report.rho = static_cast<double>(report.n) / cells;
  report.occupancy = static_cast<double>(report.distinct_points) / cells;
  return report;
}

inline DensityReport Density(const Dataset& ds) { return Density(ds, ds.schema); }

}  // namespace opaldp

#endif  // OPALDP_PREPROCESS_HPP_
