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

#ifndef OPALDP_DATAGEN_HPP_
#define OPALDP_DATAGEN_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "opaldp/dataset.hpp"
#include "opaldp/error.hpp"
#include "opaldp/preprocess.hpp"
#include "opaldp/random.hpp"
#include "opaldp/release.hpp"

namespace opaldp::datagen {

struct Peak {
  double center_minute = 480.0;
  double spread_minutes = 60.0;
};

// Parameters of the synthetic tap-on/tap-off generator.
struct GeneratorSpec {
  std::int64_t n = 100'000;
  std::vector<std::string> dates = {"2016-07-25"};
  std::vector<std::pair<std::string, double>> modes = {
      {"ferry", 0.2}, {"lightrail", 0.2}, {"train", 0.6}};
  int stops_per_mode = 200;
  // Stop k (0-based) is chosen with weight (k + 1)^-skew.
  double stop_popularity = 1.0;
  std::vector<Peak> peak_hours = {{480.0, 60.0}, {1050.0, 75.0}};
  double mean_trip_minutes = 25.0;
  std::uint64_t seed = 1;
};

inline void Validate(const GeneratorSpec& spec) {
  if (spec.n < 0) throw InvalidArgumentError("record count must be nonnegative");
  if (spec.dates.empty()) throw InvalidArgumentError("at least one date is required");
  if (spec.modes.empty()) throw InvalidArgumentError("at least one mode is required");
  double total = 0.0;
  for (const auto& [mode, w] : spec.modes) {
    if (!(w >= 0.0)) throw InvalidArgumentError("mode weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgumentError("mode weights must sum to 1");
  }
  if (spec.stops_per_mode < 1) throw InvalidArgumentError("stops_per_mode must be >= 1");
  if (!(spec.stop_popularity >= 0.0)) {
    throw InvalidArgumentError("stop popularity exponent must be >= 0");
  }
  if (spec.peak_hours.empty()) throw InvalidArgumentError("at least one peak is required");
  for (const auto& p : spec.peak_hours) {
    if (!(p.spread_minutes > 0.0)) throw InvalidArgumentError("peak spread must be > 0");
  }
  if (!(spec.mean_trip_minutes > 0.0)) {
    throw InvalidArgumentError("mean trip duration must be > 0");
  }
}

inline std::string StopPrefix(const std::string& mode) {
  if (mode == "bus") return "B";
  if (mode == "train") return "T";
  if (mode == "ferry") return "F";
  if (mode == "lightrail") return "L";
  throw InvalidArgumentError("unknown transport mode '" + mode + "'");
}

inline std::string StopId(const std::string& mode, int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", index);
  return StopPrefix(mode) + buf;
}

inline std::vector<std::string> StopsFor(const std::string& mode, int count) {
  std::vector<std::string> stops;
  for (int i = 0; i < count; ++i) stops.push_back(StopId(mode, i));
  return stops;
}

inline std::vector<std::string> ModeNames(const GeneratorSpec& spec) {
  std::vector<std::string> names;
  for (const auto& [m, w] : spec.modes) names.push_back(m);
  return names;
}

inline DomainSchema SchemaFor(const GeneratorSpec& spec) {
  std::vector<std::string> stops;
  for (const auto& [mode, w] : spec.modes) {
    const auto s = StopsFor(mode, spec.stops_per_mode);
    stops.insert(stops.end(), s.begin(), s.end());
  }
  return TripSchema(spec.dates, ModeNames(spec), std::move(stops));
}

// Samples index i from an unnormalized cumulative weight table.
inline std::size_t SampleIndex(RandomSource& source, const std::vector<double>& cumulative) {
  const double u = source.Uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                               cumulative.size() - 1);
}

inline constexpr std::int64_t kChunkSize = 4096;

// n trip records. Records are produced in chunks of kChunkSize, chunk c
// drawing from substream c of the seed, so any record range can be
// regenerated on its own.
inline Dataset Generate(const GeneratorSpec& spec) {
  Validate(spec);
  Dataset ds;
  ds.schema = SchemaFor(spec);
  ds.rows.reserve(static_cast<std::size_t>(spec.n));

  std::vector<double> mode_cdf;
  double acc = 0.0;
  for (const auto& [m, w] : spec.modes) mode_cdf.push_back(acc += w);
  std::vector<double> stop_cdf;
  acc = 0.0;
  for (int k = 0; k < spec.stops_per_mode; ++k) {
    stop_cdf.push_back(acc += std::pow(static_cast<double>(k + 1), -spec.stop_popularity));
  }
  std::vector<std::vector<std::string>> stops;
  for (const auto& [m, w] : spec.modes) stops.push_back(StopsFor(m, spec.stops_per_mode));

  const RandomSource root(spec.seed, StreamIdFor("datagen"));
  for (std::int64_t start = 0; start < spec.n; start += kChunkSize) {
    RandomSource source = root.Substream(static_cast<std::uint64_t>(start / kChunkSize));
    const std::int64_t end = std::min(spec.n, start + kChunkSize);
    for (std::int64_t i = start; i < end; ++i) {
      TripRecord trip;
      trip.date = spec.dates[source.UniformInt(spec.dates.size())];
      const std::size_t mode = SampleIndex(source, mode_cdf);
      trip.mode = spec.modes[mode].first;
      const std::size_t on = SampleIndex(source, stop_cdf);
      std::size_t off = SampleIndex(source, stop_cdf);
      while (off == on && spec.stops_per_mode > 1) off = SampleIndex(source, stop_cdf);
      trip.tap_on_stop = stops[mode][on];
      trip.tap_off_stop = stops[mode][off];
      const Peak& peak = spec.peak_hours[source.UniformInt(spec.peak_hours.size())];
      double t;
      do {
        t = peak.center_minute + peak.spread_minutes * source.Normal();
      } while (t < 0.0 || t >= kMinutesPerDay);
      trip.tap_on_time = static_cast<int>(t);
      const int duration =
          1 + static_cast<int>(spec.mean_trip_minutes * source.Exponential());
      trip.tap_off_time = std::min(kMinutesPerDay - 1, trip.tap_on_time + duration);
      ds.rows.push_back(ToPoint(trip));
    }
  }
  return ds;
}

// Merges every `factor` consecutive stops of a mode into one coarse stop.
inline AggregationMap GroupedStops(const GeneratorSpec& spec, int factor) {
  if (factor < 1) throw InvalidArgumentError("aggregation factor must be >= 1");
  std::map<std::string, std::string> m;
  for (const auto& [mode, w] : spec.modes) {
    for (int i = 0; i < spec.stops_per_mode; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "G%03d", i / factor);
      m.emplace(StopId(mode, i), StopPrefix(mode) + buf);
    }
  }
  return AggregationMap(std::move(m));
}

// Single-column dataset: 100 rows "Male", then 10 rows "Female".
inline Dataset GenderFixture() {
  Dataset ds;
  ds.schema = DomainSchema({Attribute::Categorical("gender", {"Male", "Female"})});
  for (int i = 0; i < 100; ++i) ds.rows.push_back({"Male"});
  for (int i = 0; i < 10; ++i) ds.rows.push_back({"Female"});
  return ds;
}

inline constexpr double kTwoPowMinus23 = 0x1.0p-23;
inline constexpr double kTwoPowMinus24 = 0x1.0p-24;

// Two SBH queries on the gender column, the per-value histogram and the
// total count, each at (1, 2^-24).
inline ReleaseConfig GenderReleaseConfig(std::uint64_t seed) {
  ReleaseConfig config;
  config.schema = GenderFixture().schema;
  config.queries = {Query::kHistogram, Query::kTotal};
  config.budget.per_release = PrivacyParams(1.0, kTwoPowMinus24);
  config.seed = seed;
  return config;
}

// One date, three modes, tap-on and tap-off decoupled: six partitions, each
// released at (2, 2^-23).
inline ReleaseConfig OpalReleaseConfig(const GeneratorSpec& spec, std::uint64_t seed) {
  ReleaseConfig config;
  config.schema = SchemaFor(spec);
  config.bin_width_minutes = kDefaultBinWidthMinutes;
  config.partition_by = {true, true};
  config.decouple = true;
  config.queries = {Query::kHistogram};
  config.budget.per_release = PrivacyParams(2.0, kTwoPowMinus23);
  config.seed = seed;
  return config;
}

}  // namespace opaldp::datagen

#endif  // OPALDP_DATAGEN_HPP_
