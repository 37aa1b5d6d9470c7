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

#ifndef OPALDP_AUDITOR_HPP_
#define OPALDP_AUDITOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "opaldp/csv.hpp"
#include "opaldp/error.hpp"
#include "opaldp/histogram.hpp"
#include "opaldp/mechanisms.hpp"
#include "opaldp/release.hpp"

// Inference attacks against a published bundle. Everything here reads only
// released artifacts plus declared side information (feasibility listings,
// an assumed delta); raw data is never consulted.
namespace opaldp::audit {

// Variance of one Laplace(scale) draw.
inline double LaplaceVariance(double scale) { return 2.0 * scale * scale; }

struct SuppressedEstimate {
  std::string cell;
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t detail_cells = 0;
};

// Mass missing from a detail view, recovered from an independently noised
// total: estimate = total - sum(released detail values). Each released value
// carries one Laplace draw, so the standard error is
// sqrt(Var_total + k * Var_detail) for k released detail cells.
inline SuppressedEstimate InferSuppressed(double noisy_total, double total_scale,
                                          const NoisyHistogram& detail,
                                          double detail_scale) {
  if (!(total_scale > 0.0) || !(detail_scale > 0.0)) {
    throw InvalidArgumentError("noise scales must be positive");
  }
  SuppressedEstimate out;
  double released = 0.0;
  for (const auto& e : detail.entries) released += e.value;
  out.detail_cells = detail.size();
  out.estimate = noisy_total - released;
  out.standard_error = std::sqrt(LaplaceVariance(total_scale) +
                                 static_cast<double>(out.detail_cells) *
                                     LaplaceVariance(detail_scale));
  return out;
}

// Both views are SBH releases; scales follow from their epsilons.
inline SuppressedEstimate InferSuppressed(const NoisyHistogram& total_view,
                                          const NoisyHistogram& detail_view) {
  if (total_view.size() != 1) {
    throw NoDataError("total view must hold exactly one released value");
  }
  return InferSuppressed(total_view.entries.front().value,
                         SbhNoiseScale(total_view.epsilon), detail_view,
                         SbhNoiseScale(detail_view.epsilon));
}

// Pairs every partition that published both a histogram and a total.
inline std::vector<SuppressedEstimate> InferSuppressed(const ReleaseBundle& bundle) {
  std::vector<SuppressedEstimate> out;
  for (const auto& p : bundle.partitions) {
    if (p.query != Query::kHistogram) continue;
    const ReleasedPartition* total = bundle.Find(p.key, Query::kTotal);
    if (total == nullptr || total->release.size() != 1) continue;
    SuppressedEstimate est = InferSuppressed(total->release, p.release);
    est.cell = p.key.Label() + " (total minus released cells)";
    out.push_back(std::move(est));
  }
  return out;
}

// --- Domain exhaustion -----------------------------------------------------

// One feasible domain point of a partition, grouped into slices (for
// example an hour of a timetable).
struct ListingEntry {
  std::string partition;  // PartitionKey::Label()
  std::string slice;
  Point point;
};

inline constexpr char kPointSeparator = '|';

inline Point SplitPoint(const std::string& text) {
  Point p;
  if (text.empty()) return p;
  std::string cur;
  for (char c : text) {
    if (c == kPointSeparator) {
      p.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  p.push_back(std::move(cur));
  return p;
}

inline std::string JoinPoint(const Point& p) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i > 0) out.push_back(kPointSeparator);
    out += p[i];
  }
  return out;
}

// Delimited text, header `partition,slice,point`; point values joined by '|'.
inline std::vector<ListingEntry> LoadListing(const std::string& path) {
  const csv::Table table = csv::ReadFile(path);
  if (table.header != std::vector<std::string>{"partition", "slice", "point"}) {
    throw ValidationError("listing header must be partition,slice,point", 1);
  }
  std::vector<ListingEntry> out;
  for (const auto& row : table.rows) out.push_back({row[0], row[1], SplitPoint(row[2])});
  return out;
}

struct ExhaustionFlag {
  std::string partition;
  std::string slice;
  Point point;
  bool released = false;
  double released_value = 0.0;
  double threshold = 0.0;
  std::string constraint;
};

// Flags each (partition, slice) whose listing admits exactly one feasible
// point. There the partition's released histogram speaks about that single
// point directly: a released value pins its count up to noise, and
// suppression says its count is likely below the threshold.
inline std::vector<ExhaustionFlag> DetectExhaustion(const ReleaseBundle& bundle,
                                                    std::span<const ListingEntry> listing) {
  if (listing.empty()) throw InvalidArgumentError("domain listing is empty");
  std::map<std::pair<std::string, std::string>, std::set<Point>> slices;
  for (const auto& e : listing) slices[{e.partition, e.slice}].insert(e.point);

  std::vector<ExhaustionFlag> flags;
  for (const auto& [where, points] : slices) {
    if (points.size() != 1) continue;
    const ReleasedPartition* part = nullptr;
    for (const auto& p : bundle.partitions) {
      if (p.query == Query::kHistogram && p.key.Label() == where.first) part = &p;
    }
    if (part == nullptr) {
      throw InvalidArgumentError("listing names partition '" + where.first +
                                 "' which the bundle does not contain");
    }
    ExhaustionFlag flag;
    flag.partition = where.first;
    flag.slice = where.second;
    flag.point = *points.begin();
    flag.threshold = part->threshold();
    char buf[160];
    if (const NoisyEntry* e = part->release.Find(flag.point)) {
      flag.released = true;
      flag.released_value = e->value;
      std::snprintf(buf, sizeof(buf),
                    "sole feasible point; released value %.6g estimates its count "
                    "(Laplace scale %.6g)",
                    e->value, SbhNoiseScale(part->epsilon));
    } else {
      std::snprintf(buf, sizeof(buf),
                    "sole feasible point; suppressed, so its count is most likely "
                    "below threshold %.6g",
                    flag.threshold);
    }
    flag.constraint = buf;
    flags.push_back(std::move(flag));
  }
  return flags;
}

// --- Parameter inference ---------------------------------------------------

// Inverts a threshold formula: epsilon as a function of (threshold, delta).
struct ThresholdModel {
  std::string name;
  std::function<double(double threshold, double delta)> epsilon_for;
};

// T = 1 + (2/eps) ln(2/delta), the calibration used by this library.
inline ThresholdModel StabilityHistogramModel() {
  return {"1 + (2/epsilon) ln(2/delta)", [](double t, double delta) {
            return 2.0 * std::log(2.0 / delta) / (t - 1.0);
          }};
}

// T = 1 + (1/eps) ln(1/delta), for sensitivity analysis against a variant
// that noises with scale 1/epsilon.
inline ThresholdModel UnitScaleModel() {
  return {"1 + (1/epsilon) ln(1/delta)", [](double t, double delta) {
            return std::log(1.0 / delta) / (t - 1.0);
          }};
}

// Below this many released values in the band just above the minimum, the
// minimum is unlikely to sit near the true threshold.
inline constexpr std::size_t kMinNearThreshold = 10;

struct ParameterInference {
  double inferred_threshold = 0.0;
  std::optional<double> inferred_epsilon;
  std::size_t near_threshold_values = 0;
  bool low_confidence = true;
  std::string model;
};

// The smallest released value is an upper bound on the threshold, since
// every released value exceeded it; it is tight when many cells sit just
// above T. Epsilon follows by inverting the threshold model at the assumed
// delta. A uniform per-release budget is assumed.
inline ParameterInference InferParameters(const ReleaseBundle& bundle, double assumed_delta,
                                          const ThresholdModel& model =
                                              StabilityHistogramModel()) {
  if (!(assumed_delta > 0.0) || !(assumed_delta < 1.0)) {
    throw InvalidArgumentError("assumed delta must lie in (0, 1)");
  }
  std::vector<double> values;
  for (const auto& p : bundle.partitions) {
    for (const auto& e : p.release.entries) values.push_back(e.value);
  }
  if (values.empty()) throw NoDataError("bundle has no released values");
  ParameterInference out;
  out.model = model.name;
  out.inferred_threshold = *std::min_element(values.begin(), values.end());
  const double band = out.inferred_threshold + std::max(1.0, 0.25 * out.inferred_threshold);
  out.near_threshold_values = static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [&](double v) { return v <= band; }));
  out.low_confidence = out.near_threshold_values < kMinNearThreshold;
  if (out.inferred_threshold > 1.0) {
    const double eps = model.epsilon_for(out.inferred_threshold, assumed_delta);
    if (std::isfinite(eps) && eps > 0.0) out.inferred_epsilon = eps;
  }
  return out;
}

// --- Zero exclusion --------------------------------------------------------

// SBH only ever releases points present in its input, so any candidate input
// with a zero count at a released point is ruled out. Returns the indices of
// excluded candidates.
inline std::vector<std::size_t> ZeroExclusionCheck(const NoisyHistogram& released,
                                                   std::span<const Histogram> candidates) {
  std::vector<std::size_t> excluded;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (const auto& e : released.entries) {
      if (candidates[i].Count(e.point) == 0) {
        excluded.push_back(i);
        break;
      }
    }
  }
  return excluded;
}

// Bundle form: a candidate assigns a histogram to each partition label
// (ReleasedPartition::Label()); a label it omits is treated as empty.
inline std::vector<std::size_t> ZeroExclusionCheck(
    const ReleaseBundle& bundle,
    std::span<const std::map<std::string, Histogram>> candidates) {
  std::vector<std::size_t> excluded;
  const Histogram empty;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    bool out = false;
    for (const auto& p : bundle.partitions) {
      const auto it = candidates[i].find(p.Label());
      const Histogram& h = it == candidates[i].end() ? empty : it->second;
      const Histogram one[] = {h};
      if (!ZeroExclusionCheck(p.release, one).empty()) {
        out = true;
        break;
      }
    }
    if (out) excluded.push_back(i);
  }
  return excluded;
}

// --- Report ----------------------------------------------------------------

struct AuditReport {
  std::vector<SuppressedEstimate> suppressed_estimates;
  std::vector<ExhaustionFlag> exhaustion_flags;
  std::optional<double> inferred_threshold;
  std::optional<double> inferred_epsilon;
  double assumed_delta = 0.0;
  bool threshold_low_confidence = true;
  std::size_t near_threshold_values = 0;
  std::string threshold_model;
};

// Runs every attack the inputs allow. Parameter inference raises NoDataError
// on a bundle with nothing released.
inline AuditReport RunAudit(const ReleaseBundle& bundle, double assumed_delta,
                            std::span<const ListingEntry> listing = {},
                            const ThresholdModel& model = StabilityHistogramModel()) {
  AuditReport report;
  report.assumed_delta = assumed_delta;
  const ParameterInference inf = InferParameters(bundle, assumed_delta, model);
  report.inferred_threshold = inf.inferred_threshold;
  report.inferred_epsilon = inf.inferred_epsilon;
  report.threshold_low_confidence = inf.low_confidence;
  report.near_threshold_values = inf.near_threshold_values;
  report.threshold_model = inf.model;
  report.suppressed_estimates = InferSuppressed(bundle);
  if (!listing.empty()) report.exhaustion_flags = DetectExhaustion(bundle, listing);
  return report;
}

inline nlohmann::json ReportToJson(const AuditReport& r) {
  nlohmann::json j;
  j["format"] = "opaldp-audit-report/1";
  j["suppressed_estimates"] = nlohmann::json::array();
  for (const auto& s : r.suppressed_estimates) {
    j["suppressed_estimates"].push_back({{"cell", s.cell},
                                         {"estimate", s.estimate},
                                         {"standard_error", s.standard_error},
                                         {"detail_cells", s.detail_cells}});
  }
  j["exhaustion_flags"] = nlohmann::json::array();
  for (const auto& f : r.exhaustion_flags) {
    nlohmann::json fj = {{"partition", f.partition},
                         {"slice", f.slice},
                         {"point", f.point},
                         {"released", f.released},
                         {"constraint", f.constraint}};
    if (f.released) fj["released_value"] = f.released_value;
    j["exhaustion_flags"].push_back(std::move(fj));
  }
  j["parameter_inference"] = {
      {"estimator", "minimum released value (upper bound on the threshold)"},
      {"threshold_model", r.threshold_model},
      {"assumed_delta", r.assumed_delta},
      {"low_confidence", r.threshold_low_confidence},
      {"near_threshold_values", r.near_threshold_values}};
  auto& pi = j["parameter_inference"];
  pi["inferred_threshold"] = r.inferred_threshold ? nlohmann::json(*r.inferred_threshold)
                                                  : nlohmann::json(nullptr);
  pi["inferred_epsilon"] = r.inferred_epsilon ? nlohmann::json(*r.inferred_epsilon)
                                              : nlohmann::json(nullptr);
  return j;
}

inline void PrintReport(const AuditReport& r, std::ostream& out) {
  char buf[256];
  out << "Parameter inference (assumed delta " << r.assumed_delta << ")\n";
  if (r.inferred_threshold) {
    std::snprintf(buf, sizeof(buf), "  threshold <= %.4f%s\n", *r.inferred_threshold,
                  r.threshold_low_confidence ? "  [low confidence]" : "");
    out << buf;
  }
  if (r.inferred_epsilon) {
    std::snprintf(buf, sizeof(buf), "  epsilon   ~  %.4f  (model T = %s)\n",
                  *r.inferred_epsilon, r.threshold_model.c_str());
    out << buf;
  } else {
    out << "  epsilon   unavailable\n";
  }
  out << "Suppressed-count estimates: " << r.suppressed_estimates.size() << "\n";
  for (const auto& s : r.suppressed_estimates) {
    std::snprintf(buf, sizeof(buf), "  %-60s %10.2f +/- %.2f\n", s.cell.c_str(),
                  s.estimate, s.standard_error);
    out << buf;
  }
  out << "Exhaustion flags: " << r.exhaustion_flags.size() << "\n";
  for (const auto& f : r.exhaustion_flags) {
    out << "  " << f.partition << " [" << f.slice << "] " << JoinPoint(f.point) << ": "
        << f.constraint << "\n";
  }
}

}  // namespace opaldp::audit

#endif  // OPALDP_AUDITOR_HPP_
