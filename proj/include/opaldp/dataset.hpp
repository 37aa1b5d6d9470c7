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

#ifndef OPALDP_DATASET_HPP_
#define OPALDP_DATASET_HPP_

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "opaldp/csv.hpp"
#include "opaldp/error.hpp"
#include "opaldp/histogram.hpp"
#include "opaldp/schema.hpp"

namespace opaldp {

// A multiset of records conforming to a schema; one record is one trip.
// `lines` carries the source line of each record when it came from a file
// (empty otherwise) so later stages can point at the offending input.
struct Dataset {
  DomainSchema schema;
  std::vector<Point> rows;
  std::vector<std::int64_t> lines;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }

  std::int64_t LineOf(std::size_t i) const {
    return i < lines.size() ? lines[i] : 0;
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.schema.Names() == b.schema.Names() && a.rows == b.rows;
  }
};

inline Histogram BuildHistogram(const Dataset& ds) {
  Histogram hist;
  for (const auto& row : ds.rows) hist.Add(row);
  return hist;
}

inline std::string DescribeViolation(const Attribute& attr) {
  switch (attr.kind()) {
    case AttributeKind::kTime:
      return "time must be an integer minute in [0, 1440) on a " +
             std::to_string(attr.bin_width_minutes()) + "-minute grid";
    case AttributeKind::kMode:
      return "unknown transport mode";
    case AttributeKind::kStop:
      return "unknown stop";
    case AttributeKind::kDate:
      return "date not in schema";
    case AttributeKind::kCategorical:
      return "value not in schema";
  }
  return "invalid value";
}

inline Dataset FromTable(const csv::Table& table, const DomainSchema& schema) {
  std::vector<std::size_t> column_of(schema.size());
  for (std::size_t a = 0; a < schema.size(); ++a) {
    const auto& name = schema.attribute(a).name();
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) {
      throw ValidationError("header lacks attribute '" + name + "'", 1);
    }
    column_of[a] = static_cast<std::size_t>(it - table.header.begin());
  }
  if (table.header.size() != schema.size()) {
    throw ValidationError("header has " + std::to_string(table.header.size()) +
                              " columns, schema has " + std::to_string(schema.size()),
                          1);
  }
  Dataset ds;
  ds.schema = schema;
  ds.rows.reserve(table.rows.size());
  ds.lines = table.lines;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    Point point(schema.size());
    for (std::size_t a = 0; a < schema.size(); ++a) {
      const Attribute& attr = schema.attribute(a);
      std::string& value = point[a];
      value = table.rows[r][column_of[a]];
      if (!attr.Contains(value)) {
        throw ValidationError(DescribeViolation(attr) + " '" + value + "'",
                              table.lines[r], attr.name());
      }
    }
    ds.rows.push_back(std::move(point));
  }
  return ds;
}

// Reads comma-separated text with a header row naming every schema
// attribute (in any order) and validates each field against the schema.
inline Dataset Ingest(const std::string& path, const DomainSchema& schema) {
  return FromTable(csv::ReadFile(path), schema);
}

inline void WriteDataset(const Dataset& ds, std::ostream& out) {
  csv::WriteRow(out, ds.schema.Names());
  for (const auto& row : ds.rows) csv::WriteRow(out, row);
}

inline void WriteDataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  WriteDataset(ds, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

// Keeps only the named columns, in the given order. Cardinality is kept.
inline Dataset Project(const Dataset& ds, std::span<const std::string> names) {
  Dataset out;
  out.schema = ds.schema.Project(names);
  std::vector<std::size_t> idx;
  for (const auto& n : names) idx.push_back(*ds.schema.Find(n));
  out.rows.reserve(ds.rows.size());
  for (const auto& row : ds.rows) {
    Point p;
    p.reserve(idx.size());
    for (std::size_t i : idx) p.push_back(row[i]);
    out.rows.push_back(std::move(p));
  }
  out.lines = ds.lines;
  return out;
}

// --- Transit trips -------------------------------------------------------

struct TripRecord {
  std::string date;
  std::string mode;
  std::string tap_on_stop;
  int tap_on_time = 0;  // minutes since midnight
  std::string tap_off_stop;
  int tap_off_time = 0;

  friend bool operator==(const TripRecord&, const TripRecord&) = default;
};

inline const std::vector<std::string>& TripColumns() {
  static const std::vector<std::string> kColumns = {
      "date", "mode", "tap_on_stop", "tap_on_time", "tap_off_stop", "tap_off_time"};
  return kColumns;
}

inline DomainSchema TripSchema(std::vector<std::string> dates,
                               std::vector<std::string> modes,
                               std::vector<std::string> stops,
                               int bin_width_minutes = 1) {
  return DomainSchema({
      Attribute::Date("date", std::move(dates)),
      Attribute::Mode("mode", std::move(modes)),
      Attribute::Stop("tap_on_stop", stops, AttributeGroup::kTapOn),
      Attribute::Time("tap_on_time", bin_width_minutes, AttributeGroup::kTapOn),
      Attribute::Stop("tap_off_stop", std::move(stops), AttributeGroup::kTapOff),
      Attribute::Time("tap_off_time", bin_width_minutes, AttributeGroup::kTapOff),
  });
}

inline Point ToPoint(const TripRecord& trip) {
  return {trip.date,         trip.mode,
          trip.tap_on_stop,  std::to_string(trip.tap_on_time),
          trip.tap_off_stop, std::to_string(trip.tap_off_time)};
}

inline TripRecord ToTrip(const Point& point) {
  if (point.size() != 6) throw InvalidArgumentError("trip rows have six columns");
  const auto on = ParseInt(point[3]);
  const auto off = ParseInt(point[5]);
  if (!on || !off) throw InvalidArgumentError("trip times must be integers");
  return {point[0], point[1], point[2], static_cast<int>(*on),
          point[4], static_cast<int>(*off)};
}

}  // namespace opaldp

#endif  // OPALDP_DATASET_HPP_
