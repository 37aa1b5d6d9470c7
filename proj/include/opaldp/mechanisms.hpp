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

#ifndef OPALDP_MECHANISMS_HPP_
#define OPALDP_MECHANISMS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "opaldp/error.hpp"
#include "opaldp/histogram.hpp"
#include "opaldp/params.hpp"
#include "opaldp/random.hpp"
#include "opaldp/schema.hpp"

namespace opaldp {

inline constexpr std::uint64_t kDefaultFeasibilityCap = 10'000'000;

namespace internal {

inline void CheckCalibration(double epsilon, double delta) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgumentError("epsilon must be positive and finite");
  }
  // delta up to 2 is accepted here so that the degenerate calibration
  // ln(2 / delta) = 0 can be evaluated; releases still require delta < 1.
  if (!(delta > 0.0) || !(delta <= 2.0)) {
    throw InvalidArgumentError("delta must lie in (0, 2] for calibration");
  }
}

}  // namespace internal

// Scale of the Laplace noise added to each SBH count.
inline double SbhNoiseScale(double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgumentError("epsilon must be positive");
  return 2.0 / epsilon;
}

// Suppression threshold T = 1 + (2 / epsilon) ln(2 / delta). A point whose
// noisy count does not strictly exceed T is withheld.
inline double SbhThreshold(double epsilon, double delta) {
  internal::CheckCalibration(epsilon, delta);
  return 1.0 + (2.0 / epsilon) * std::log(2.0 / delta);
}

inline double SbhThreshold(const PrivacyParams& params) {
  return SbhThreshold(params.epsilon(), params.delta());
}

// Exact probability that a point of true count `count` survives SBH, i.e.
// P[count + Laplace(2/epsilon) > T]. Absent points (count 0) are never
// released.
inline double ReleaseProbability(std::int64_t count, double epsilon, double delta) {
  const double threshold = SbhThreshold(epsilon, delta);
  if (count <= 0) return 0.0;
  const double scale = SbhNoiseScale(epsilon);
  const double c = static_cast<double>(count);
  // Below T, 0.5 exp(-(T - c)/b) = (delta/4) exp((c - 1)/b); the second form
  // avoids the round trip through log(2/delta).
  if (c <= threshold) return 0.25 * delta * std::exp((c - 1.0) / scale);
  return 1.0 - 0.5 * std::exp(-(c - threshold) / scale);
}

inline double GroupReleaseProbability(std::int64_t group_size, double epsilon,
                                      double delta) {
  if (group_size < 1) throw InvalidArgumentError("group size must be at least 1");
  return ReleaseProbability(group_size, epsilon, delta);
}

inline double GroupReleaseProbability(std::int64_t group_size,
                                      const PrivacyParams& params) {
  return GroupReleaseProbability(group_size, params.epsilon(), params.delta());
}

// Probability that a point contributed by a single record is released.
// Equal to delta / 4 under the threshold above.
inline double SingletonReleaseProbability(double epsilon, double delta) {
  return GroupReleaseProbability(1, epsilon, delta);
}

inline double SingletonReleaseProbability(const PrivacyParams& params) {
  return SingletonReleaseProbability(params.epsilon(), params.delta());
}

inline double PresentValue(double raw, RoundingPolicy rounding) {
  if (rounding == RoundingPolicy::kRaw) return raw;
  return std::max(1.0, std::nearbyint(raw));
}

// Stability-based histogram release. Only points in the support of `hist`
// receive noise; each is kept iff count + Laplace(2/epsilon) > T. Noise is
// drawn in point order, so the output is a function of (hist, params,
// source state).
inline NoisyHistogram SbhRelease(const Histogram& hist, const PrivacyParams& params,
                                 RandomSource& source,
                                 RoundingPolicy rounding = RoundingPolicy::kNearest) {
  NoisyHistogram out;
  out.mechanism = Mechanism::kStabilityHistogram;
  out.threshold_used = SbhThreshold(params);
  out.epsilon = params.epsilon();
  out.delta = params.delta();
  out.seed = source.seed();
  out.stream_id = source.stream_id();
  out.rounding = rounding;
  const double scale = SbhNoiseScale(params.epsilon());
  for (const auto& [point, count] : hist) {
    const double noisy = static_cast<double>(count) + LaplaceSample(source, scale);
    if (noisy > out.threshold_used) {
      out.entries.push_back({point, noisy, PresentValue(noisy, rounding)});
    }
  }
  return out;
}

// Laplace mechanism over every cell of the schema's domain, zero cells
// included. Refuses domains larger than `cap` cells.
inline NoisyHistogram FullDomainLaplace(const Histogram& hist,
                                        const DomainSchema& schema, double epsilon,
                                        RandomSource& source,
                                        std::uint64_t cap = kDefaultFeasibilityCap) {
  if (!(epsilon > 0.0)) throw InvalidArgumentError("epsilon must be positive");
  const std::uint64_t cells = schema.DomainSize();
  if (cells > cap) {
    const std::string size_text = cells == kSaturatedSize
                                      ? std::string("more than 2^64")
                                      : std::to_string(cells);
    char log_text[32];
    std::snprintf(log_text, sizeof(log_text), "%.1f", schema.Log2DomainSize());
    throw InfeasibleError("full-domain release needs " + size_text +
                              " cells (about 2^" + log_text +
                              "), above the feasibility cap of " +
                              std::to_string(cap),
                          cells, cap);
  }
  std::vector<std::int64_t> counts(cells, 0);
  for (const auto& [point, count] : hist) {
    const auto index = schema.LinearIndex(point);
    if (!index) throw InvalidArgumentError("histogram point outside schema domain");
    counts[*index] = count;
  }
  NoisyHistogram out;
  out.mechanism = Mechanism::kLaplace;
  out.epsilon = epsilon;
  out.seed = source.seed();
  out.stream_id = source.stream_id();
  out.rounding = RoundingPolicy::kRaw;
  out.entries.reserve(cells);
  const double scale = 1.0 / epsilon;
  for (std::uint64_t i = 0; i < cells; ++i) {
    const double noisy = static_cast<double>(counts[i]) + LaplaceSample(source, scale);
    out.entries.push_back({schema.PointAt(i), noisy, noisy});
  }
  return out;
}

// Laplace mechanism restricted to a whitelist of valid points (for example
// every trip a timetable admits). Points outside the dictionary never
// appear; dictionary points absent from the data get pure noise. Duplicate
// dictionary entries are released once, at their first position.
inline NoisyHistogram RestrictedDictionaryLaplace(const Histogram& hist,
                                                  std::span<const Point> dictionary,
                                                  double epsilon,
                                                  RandomSource& source) {
  if (dictionary.empty()) throw InvalidArgumentError("dictionary is empty");
  if (!(epsilon > 0.0)) throw InvalidArgumentError("epsilon must be positive");
  NoisyHistogram out;
  out.mechanism = Mechanism::kLaplace;
  out.epsilon = epsilon;
  out.seed = source.seed();
  out.stream_id = source.stream_id();
  out.rounding = RoundingPolicy::kRaw;
  const double scale = 1.0 / epsilon;
  std::set<Point> seen;
  for (const auto& point : dictionary) {
    if (!seen.insert(point).second) continue;
    const double noisy =
        static_cast<double>(hist.Count(point)) + LaplaceSample(source, scale);
    out.entries.push_back({point, noisy, noisy});
  }
  return out;
}

inline NoisyHistogram RestrictedDictionaryLaplace(const Histogram& hist,
                                                  std::span<const Point> dictionary,
                                                  const DomainSchema& schema,
                                                  double epsilon,
                                                  RandomSource& source) {
  for (const auto& point : dictionary) {
    if (!schema.Conforms(point)) {
      throw InvalidArgumentError("dictionary point outside schema domain");
    }
  }
  return RestrictedDictionaryLaplace(hist, dictionary, epsilon, source);
}

}  // namespace opaldp

#endif  // OPALDP_MECHANISMS_HPP_
