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

#ifndef OPALDP_RELEASE_HPP_
#define OPALDP_RELEASE_HPP_

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "opaldp/accountant.hpp"
#include "opaldp/csv.hpp"
#include "opaldp/dataset.hpp"
#include "opaldp/digest.hpp"
#include "opaldp/error.hpp"
#include "opaldp/histogram.hpp"
#include "opaldp/mechanisms.hpp"
#include "opaldp/params.hpp"
#include "opaldp/preprocess.hpp"
#include "opaldp/random.hpp"
#include "opaldp/schema.hpp"

namespace opaldp {

inline constexpr const char* kToolName = "opaldp";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kManifestFormat = "opaldp-release-manifest/1";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr int kDefaultBinWidthMinutes = 15;

// What is released for each partition view: the histogram of its points, or
// its record count as a one-cell histogram.
enum class Query { kHistogram, kTotal };

inline const char* QueryName(Query q) {
  return q == Query::kHistogram ? "histogram" : "total";
}

// Exactly one of the two is set. `per_release` charges the same budget to
// every release; `total` is split evenly over all of them.
struct BudgetPolicy {
  std::optional<PrivacyParams> per_release;
  std::optional<PrivacyParams> total;
};

struct ReleaseConfig {
  DomainSchema schema;
  int bin_width_minutes = kDefaultBinWidthMinutes;
  std::string aggregation_map_path;  // as written in the config; may be empty
  std::optional<AggregationMap> aggregation_map;
  PartitionBy partition_by{false, false};
  bool decouple = false;
  std::vector<Query> queries = {Query::kHistogram};
  BudgetPolicy budget;
  std::optional<PrivacyParams> cap;
  std::optional<std::uint64_t> seed;
  RoundingPolicy rounding = RoundingPolicy::kNearest;
  double occupancy_warning = kDefaultOccupancyWarning;
};

inline nlohmann::json ParamsToJson(const PrivacyParams& p) {
  return {{"epsilon", p.epsilon()}, {"delta", p.delta()}};
}

inline PrivacyParams ParamsFromJson(const nlohmann::json& j) {
  return PrivacyParams(j.at("epsilon").get<double>(), j.at("delta").get<double>());
}

inline nlohmann::json ConfigToJson(const ReleaseConfig& config) {
  nlohmann::json j;
  j["schema"] = SchemaToJson(config.schema);
  j["bin_width_minutes"] = config.bin_width_minutes;
  if (!config.aggregation_map_path.empty()) {
    j["aggregation_map"] = config.aggregation_map_path;
  }
  nlohmann::json by = nlohmann::json::array();
  if (config.partition_by.date) by.push_back("date");
  if (config.partition_by.mode) by.push_back("mode");
  j["partition_by"] = by;
  j["decouple"] = config.decouple;
  nlohmann::json queries = nlohmann::json::array();
  for (Query q : config.queries) queries.push_back(QueryName(q));
  j["queries"] = queries;
  if (config.budget.per_release) {
    j["budget"]["per_release"] = ParamsToJson(*config.budget.per_release);
  }
  if (config.budget.total) j["budget"]["total"] = ParamsToJson(*config.budget.total);
  if (config.cap) j["cap"] = ParamsToJson(*config.cap);
  if (config.seed) j["seed"] = *config.seed;
  j["rounding"] = config.rounding == RoundingPolicy::kNearest ? "nearest" : "raw";
  j["occupancy_warning"] = config.occupancy_warning;
  return j;
}

// `base_dir` resolves a relative aggregation map path.
inline ReleaseConfig ConfigFromJson(const nlohmann::json& j,
                                    const std::filesystem::path& base_dir = {}) {
  try {
    ReleaseConfig config;
    config.schema = SchemaFromJson(j.at("schema"));
    config.bin_width_minutes = j.value("bin_width_minutes", kDefaultBinWidthMinutes);
    if (j.contains("aggregation_map")) {
      config.aggregation_map_path = j.at("aggregation_map").get<std::string>();
      std::filesystem::path p(config.aggregation_map_path);
      if (p.is_relative()) p = base_dir / p;
      config.aggregation_map = AggregationMap::Load(p.string());
    }
    if (j.contains("partition_by")) {
      for (const auto& v : j.at("partition_by")) {
        const std::string s = v.get<std::string>();
        if (s == "date") {
          config.partition_by.date = true;
        } else if (s == "mode") {
          config.partition_by.mode = true;
        } else {
          throw InvalidArgumentError("cannot partition by '" + s + "'");
        }
      }
    }
    config.decouple = j.value("decouple", false);
    if (j.contains("queries")) {
      config.queries.clear();
      for (const auto& v : j.at("queries")) {
        const std::string s = v.get<std::string>();
        if (s == "histogram") {
          config.queries.push_back(Query::kHistogram);
        } else if (s == "total") {
          config.queries.push_back(Query::kTotal);
        } else {
          throw InvalidArgumentError("unknown query '" + s + "'");
        }
      }
      if (config.queries.empty()) throw InvalidArgumentError("no queries configured");
    }
    const auto& budget = j.at("budget");
    if (budget.contains("per_release")) {
      config.budget.per_release = ParamsFromJson(budget.at("per_release"));
    }
    if (budget.contains("total")) config.budget.total = ParamsFromJson(budget.at("total"));
    if (config.budget.per_release.has_value() == config.budget.total.has_value()) {
      throw InvalidArgumentError(
          "budget must give exactly one of 'per_release' or 'total'");
    }
    if (j.contains("cap")) config.cap = ParamsFromJson(j.at("cap"));
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    const std::string rounding = j.value("rounding", std::string("nearest"));
    if (rounding == "nearest") {
      config.rounding = RoundingPolicy::kNearest;
    } else if (rounding == "raw") {
      config.rounding = RoundingPolicy::kRaw;
    } else {
      throw InvalidArgumentError("unknown rounding policy '" + rounding + "'");
    }
    config.occupancy_warning = j.value("occupancy_warning", kDefaultOccupancyWarning);
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgumentError(std::string("malformed release config: ") + e.what());
  }
}

inline ReleaseConfig LoadConfig(const std::string& path) {
  const std::string text = ReadFileBytes(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgumentError("cannot parse '" + path + "': " + e.what());
  }
  return ConfigFromJson(j, std::filesystem::path(path).parent_path());
}

struct ReleasedPartition {
  PartitionKey key;
  Query query = Query::kHistogram;
  std::vector<std::string> attributes;  // histogram columns
  double epsilon = 0.0;
  double delta = 0.0;
  NoisyHistogram release;
  std::string file;  // bundle-relative path once written

  std::string Label() const { return key.Label() + "/query=" + QueryName(query); }
  double threshold() const { return release.threshold_used; }
};

// Everything a release publishes: per-partition noisy histograms plus the
// parameters needed to interpret them. Never holds raw counts.
struct ReleaseBundle {
  std::vector<ReleasedPartition> partitions;
  BudgetLedger ledger;
  BudgetTotals composed;
  std::optional<PrivacyParams> cap;
  std::uint64_t master_seed = 0;
  RoundingPolicy rounding = RoundingPolicy::kNearest;
  nlohmann::json schema;  // schema after coarsening
  int bin_width_minutes = 0;
  std::string config_digest;
  std::string input_digest;
  std::string created;  // optional timestamp; empty keeps output reproducible

  const ReleasedPartition* Find(const PartitionKey& key, Query query) const {
    for (const auto& p : partitions) {
      if (p.key == key && p.query == query) return &p;
    }
    return nullptr;
  }

  std::size_t ReleasedPointCount() const {
    std::size_t n = 0;
    for (const auto& p : partitions) n += p.release.size();
    return n;
  }
};

// Not part of the published bundle: density figures reveal exact record
// counts and are for the data custodian only.
struct ReleaseDiagnostics {
  std::vector<std::pair<std::string, DensityReport>> density;
  std::vector<std::string> warnings;
};

inline std::string CanonicalDatasetDigest(const Dataset& ds) {
  std::ostringstream out;
  WriteDataset(ds, out);
  return Sha256Hex(out.str());
}

// Coarsen, partition, decouple, then release every (partition, view, query)
// with SBH. All budget charges are made before any noise is drawn, so an
// over-cap configuration fails without producing output.
inline ReleaseBundle ReleasePipeline(const Dataset& input, const ReleaseConfig& config,
                                     ReleaseDiagnostics* diagnostics = nullptr) {
  if (!config.seed) throw InvalidArgumentError("release config carries no seed");
  Dataset ds = input;
  const bool has_time = ds.schema.FindKind(AttributeKind::kTime).has_value();
  if (has_time) ds = BinTimes(ds, config.bin_width_minutes);
  if (config.aggregation_map) ds = AggregateStops(ds, *config.aggregation_map);

  std::vector<std::string> partition_columns;
  if (config.partition_by.date) {
    if (const auto i = ds.schema.FindKind(AttributeKind::kDate)) {
      partition_columns.push_back(ds.schema.attribute(*i).name());
    }
  }
  if (config.partition_by.mode) {
    if (const auto i = ds.schema.FindKind(AttributeKind::kMode)) {
      partition_columns.push_back(ds.schema.attribute(*i).name());
    }
  }
  std::vector<std::string> joined_columns;
  for (const auto& name : ds.schema.Names()) {
    if (std::find(partition_columns.begin(), partition_columns.end(), name) ==
        partition_columns.end()) {
      joined_columns.push_back(name);
    }
  }

  struct Job {
    PartitionKey key;
    Query query;
    Dataset view;
  };
  std::vector<Job> jobs;
  for (auto& [key, part] : Partition(ds, config.partition_by)) {
    std::vector<std::pair<View, Dataset>> views;
    if (config.decouple) {
      auto [on, off] = Decouple(part);
      views.emplace_back(View::kTapOn, std::move(on));
      views.emplace_back(View::kTapOff, std::move(off));
    } else {
      views.emplace_back(View::kJoined, Project(part, joined_columns));
    }
    for (auto& [view, data] : views) {
      if (diagnostics) {
        const DensityReport d = Density(data);
        const std::string label = key.WithView(view).Label();
        diagnostics->density.emplace_back(label, d);
        if (d.occupancy < config.occupancy_warning) {
          char buf[64];
          std::snprintf(buf, sizeof(buf), "%.3g", d.occupancy);
          diagnostics->warnings.push_back(label + ": occupancy " + buf +
                                          " is below the warning level");
        }
      }
      for (Query q : config.queries) jobs.push_back({key.WithView(view), q, data});
    }
  }

  std::vector<PrivacyParams> budgets;
  if (config.budget.per_release) {
    budgets.assign(jobs.size(), *config.budget.per_release);
  } else if (config.budget.total) {
    if (!jobs.empty()) {
      budgets = SplitEvenly(*config.budget.total, static_cast<std::int64_t>(jobs.size()));
    }
  } else {
    throw InvalidArgumentError("release config carries no budget");
  }

  ReleaseBundle bundle;
  bundle.ledger = BudgetLedger(config.cap);
  bundle.cap = config.cap;
  bundle.master_seed = *config.seed;
  bundle.rounding = config.rounding;
  bundle.schema = SchemaToJson(ds.schema);
  bundle.bin_width_minutes = has_time ? config.bin_width_minutes : 0;
  bundle.config_digest = Sha256Hex(ConfigToJson(config).dump());
  bundle.input_digest = CanonicalDatasetDigest(input);

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    ReleasedPartition part;
    part.key = jobs[i].key;
    part.query = jobs[i].query;
    bundle.ledger = bundle.ledger.Charge(part.Label(), budgets[i]);
    bundle.partitions.push_back(std::move(part));
  }
  bundle.composed = bundle.ledger.Compose();

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    ReleasedPartition& part = bundle.partitions[i];
    const Dataset& view = jobs[i].view;
    Histogram hist;
    if (part.query == Query::kHistogram) {
      part.attributes = view.schema.Names();
      hist = BuildHistogram(view);
    } else {
      hist.Add(Point{}, static_cast<std::int64_t>(view.size()));
    }
    part.epsilon = budgets[i].epsilon();
    part.delta = budgets[i].delta();
    RandomSource source(*config.seed, StreamIdFor(part.Label()));
    part.release = SbhRelease(hist, budgets[i], source, config.rounding);
  }
  return bundle;
}

// --- Bundle files ----------------------------------------------------------

inline std::string FormatValue(double value, RoundingPolicy rounding) {
  char buf[40];
  if (rounding == RoundingPolicy::kNearest) {
    std::snprintf(buf, sizeof(buf), "%.0f", value);
  } else {
    std::snprintf(buf, sizeof(buf), "%.17g", value);
  }
  return buf;
}

inline std::string PartitionFileName(const ReleasedPartition& part) {
  auto clean = [](const std::string& s) { return s == kAnyValue ? std::string("all") : s; };
  std::string name = clean(part.key.date) + "_" + clean(part.key.mode) + "_" +
                     ViewName(part.key.view) + "_" + QueryName(part.query) + ".csv";
  for (char& c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
          c == '.')) {
      c = '-';
    }
  }
  return "partitions/" + name;
}

inline std::string PartitionCsv(const ReleasedPartition& part, RoundingPolicy rounding) {
  std::ostringstream out;
  std::vector<std::string> header = part.attributes;
  header.push_back("count");
  csv::WriteRow(out, header);
  for (const auto& e : part.release.entries) {
    std::vector<std::string> row = e.point;
    row.push_back(FormatValue(e.value, rounding));
    csv::WriteRow(out, row);
  }
  return out.str();
}

inline View ViewFromName(const std::string& s) {
  if (s == "joined") return View::kJoined;
  if (s == "tap_on") return View::kTapOn;
  if (s == "tap_off") return View::kTapOff;
  throw DataLossError("unknown view '" + s + "' in manifest");
}

inline void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline nlohmann::json ManifestJson(const ReleaseBundle& bundle,
                                   const std::map<std::string, std::string>& digests) {
  nlohmann::json j;
  j["format"] = kManifestFormat;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["mechanism"] = {
      {"name", "stability-based histogram"},
      {"noise", "laplace, scale 2/epsilon, support points only"},
      {"threshold", "1 + (2/epsilon) * ln(2/delta), strict comparison"},
      {"neighbouring", "datasets differing in one trip record"},
      {"composition", "basic"}};
  j["rounding"] = bundle.rounding == RoundingPolicy::kNearest ? "nearest" : "raw";
  j["master_seed"] = bundle.master_seed;
  j["config_digest"] = bundle.config_digest;
  j["input_digest"] = bundle.input_digest;
  j["schema"] = bundle.schema;
  j["bin_width_minutes"] = bundle.bin_width_minutes;
  if (!bundle.created.empty()) j["created"] = bundle.created;
  nlohmann::json releases = nlohmann::json::array();
  for (const auto& p : bundle.partitions) {
    nlohmann::json r;
    r["label"] = p.Label();
    r["date"] = p.key.date;
    r["mode"] = p.key.mode;
    r["view"] = ViewName(p.key.view);
    r["query"] = QueryName(p.query);
    r["attributes"] = p.attributes;
    r["epsilon"] = p.epsilon;
    r["delta"] = p.delta;
    r["threshold"] = p.threshold();
    r["stream_id"] = p.release.stream_id;
    r["released_points"] = p.release.size();
    const std::string file = PartitionFileName(p);
    r["file"] = file;
    r["sha256"] = digests.at(file);
    releases.push_back(std::move(r));
  }
  j["releases"] = std::move(releases);
  nlohmann::json ledger = nlohmann::json::array();
  for (const auto& e : bundle.ledger.entries()) {
    ledger.push_back({{"label", e.label},
                      {"epsilon", e.params.epsilon()},
                      {"delta", e.params.delta()}});
  }
  j["ledger"] = std::move(ledger);
  j["composed"] = {{"epsilon", bundle.composed.epsilon}, {"delta", bundle.composed.delta}};
  if (bundle.cap) j["cap"] = ParamsToJson(*bundle.cap);
  return j;
}

// Writes partitions/<name>.csv for every release and manifest.json. The
// output is a pure function of the bundle.
inline void WriteBundle(const ReleaseBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "partitions");
  std::map<std::string, std::string> digests;
  for (const auto& p : bundle.partitions) {
    const std::string file = PartitionFileName(p);
    const std::string text = PartitionCsv(p, bundle.rounding);
    WriteTextFile(dir / file, text);
    digests[file] = Sha256Hex(text);
  }
  WriteTextFile(dir / kManifestFile, ManifestJson(bundle, digests).dump(2) + "\n");
}

// Loads a bundle written by WriteBundle. Every partition file is checked
// against the digest in the manifest; a mismatch raises DataLossError.
// Released entries carry the published value in both `raw` and `value`.
inline ReleaseBundle ReadBundle(const std::filesystem::path& dir) {
  const std::filesystem::path manifest_path = dir / kManifestFile;
  if (!std::filesystem::exists(manifest_path)) {
    throw DataLossError("no manifest at '" + manifest_path.string() + "'");
  }
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(ReadFileBytes(manifest_path.string()));
  } catch (const nlohmann::json::exception& e) {
    throw DataLossError("cannot parse manifest: " + std::string(e.what()));
  }
  try {
    if (m.at("format").get<std::string>() != kManifestFormat) {
      throw DataLossError("unsupported manifest format");
    }
    ReleaseBundle bundle;
    bundle.master_seed = m.at("master_seed").get<std::uint64_t>();
    bundle.rounding = m.at("rounding").get<std::string>() == "raw"
                          ? RoundingPolicy::kRaw
                          : RoundingPolicy::kNearest;
    bundle.config_digest = m.at("config_digest").get<std::string>();
    bundle.input_digest = m.at("input_digest").get<std::string>();
    bundle.schema = m.at("schema");
    bundle.bin_width_minutes = m.at("bin_width_minutes").get<int>();
    bundle.created = m.value("created", std::string());
    if (m.contains("cap")) bundle.cap = ParamsFromJson(m.at("cap"));
    bundle.ledger = BudgetLedger(bundle.cap);
    for (const auto& e : m.at("ledger")) {
      bundle.ledger = bundle.ledger.Charge(e.at("label").get<std::string>(),
                                           ParamsFromJson(e));
    }
    bundle.composed = bundle.ledger.Compose();
    for (const auto& r : m.at("releases")) {
      ReleasedPartition p;
      p.key = {r.at("date").get<std::string>(), r.at("mode").get<std::string>(),
               ViewFromName(r.at("view").get<std::string>())};
      const std::string query = r.at("query").get<std::string>();
      if (query != "histogram" && query != "total") {
        throw DataLossError("unknown query '" + query + "' in manifest");
      }
      p.query = query == "histogram" ? Query::kHistogram : Query::kTotal;
      p.attributes = r.at("attributes").get<std::vector<std::string>>();
      p.epsilon = r.at("epsilon").get<double>();
      p.delta = r.at("delta").get<double>();
      p.file = r.at("file").get<std::string>();
      const std::string text = ReadFileBytes((dir / p.file).string());
      if (Sha256Hex(text) != r.at("sha256").get<std::string>()) {
        throw DataLossError("'" + p.file + "' does not match its manifest digest");
      }
      p.release.mechanism = Mechanism::kStabilityHistogram;
      p.release.threshold_used = r.at("threshold").get<double>();
      p.release.epsilon = p.epsilon;
      p.release.delta = p.delta;
      p.release.seed = bundle.master_seed;
      p.release.stream_id = r.at("stream_id").get<std::uint64_t>();
      p.release.rounding = bundle.rounding;
      std::istringstream in(text);
      const csv::Table table = csv::Read(in);
      std::vector<std::string> expected = p.attributes;
      expected.push_back("count");
      if (table.header != expected) {
        throw DataLossError("'" + p.file + "' header does not match manifest");
      }
      for (const auto& row : table.rows) {
        Point point(row.begin(), row.end() - 1);
        char* end = nullptr;
        const double v = std::strtod(row.back().c_str(), &end);
        if (end == row.back().c_str() || *end != '\0') {
          throw DataLossError("non-numeric count in '" + p.file + "'");
        }
        p.release.entries.push_back({std::move(point), v, v});
      }
      if (p.release.size() != r.at("released_points").get<std::size_t>()) {
        throw DataLossError("'" + p.file + "' row count does not match manifest");
      }
      bundle.partitions.push_back(std::move(p));
    }
    const BudgetTotals claimed{m.at("composed").at("epsilon").get<double>(),
                               m.at("composed").at("delta").get<double>()};
    if (!(claimed == bundle.composed)) {
      throw DataLossError("manifest composed totals disagree with its ledger");
    }
    return bundle;
  } catch (const nlohmann::json::exception& e) {
    throw DataLossError("malformed manifest: " + std::string(e.what()));
  } catch (const ValidationError& e) {
    throw DataLossError(std::string("malformed partition file: ") + e.what());
  } catch (const IoError& e) {
    throw DataLossError(e.what());
  }
}

}  // namespace opaldp

#endif  // OPALDP_RELEASE_HPP_
