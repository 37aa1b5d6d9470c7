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

#ifndef OPALDP_SIMULATION_HPP_
#define OPALDP_SIMULATION_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

#include "opaldp/auditor.hpp"
#include "opaldp/datagen.hpp"
#include "opaldp/histogram.hpp"
#include "opaldp/mechanisms.hpp"
#include "opaldp/random.hpp"

// Seeded Monte Carlo drivers over the real release path, shared by the
// command-line checks and the acceptance suite.
namespace opaldp::simulation {

struct ReleaseFrequency {
  std::uint64_t trials = 0;
  std::uint64_t released = 0;

  double frequency() const {
    return trials == 0 ? 0.0 : static_cast<double>(released) / static_cast<double>(trials);
  }
  // Binomial standard error of the frequency at true probability p.
  double StandardError(double p) const {
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  }
};

// Runs SbhRelease on a one-point histogram of the given count `trials` times
// from a single stream and counts how often the point survives.
inline ReleaseFrequency SimulateReleaseFrequency(std::int64_t count,
                                                 const PrivacyParams& params,
                                                 std::uint64_t trials, std::uint64_t seed) {
  Histogram hist;
  hist.Add({"x"}, count);
  RandomSource source(seed, StreamIdFor("release-frequency"));
  ReleaseFrequency out;
  out.trials = trials;
  for (std::uint64_t t = 0; t < trials; ++t) {
    if (!SbhRelease(hist, params, source, RoundingPolicy::kRaw).empty()) ++out.released;
  }
  return out;
}

// Repeated two-query releases of the 110-row gender fixture, followed by the
// total-minus-detail inference of the suppressed count.
struct GenderExperiment {
  std::uint64_t repetitions = 0;
  std::uint64_t female_released = 0;
  std::uint64_t male_released = 0;
  std::uint64_t male_within_20 = 0;
  std::uint64_t total_within_20 = 0;
  std::uint64_t total_released = 0;
  double estimate_mean = 0.0;
  double estimate_std = 0.0;
  double closed_form_se = 0.0;
  double first_estimate = 0.0;
  double first_male = 0.0;
  double first_total = 0.0;
};

inline GenderExperiment RunGenderExperiment(std::uint64_t repetitions, std::uint64_t seed,
                                            RoundingPolicy rounding = RoundingPolicy::kNearest) {
  const PrivacyParams params(1.0, datagen::kTwoPowMinus24);
  const Dataset fixture = datagen::GenderFixture();
  const Histogram detail = BuildHistogram(fixture);
  Histogram total;
  total.Add(Point{}, static_cast<std::int64_t>(fixture.size()));

  GenderExperiment out;
  out.repetitions = repetitions;
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t estimates = 0;
  for (std::uint64_t rep = 0; rep < repetitions; ++rep) {
    const std::uint64_t rep_seed = SplitMix64(seed ^ SplitMix64(rep));
    RandomSource detail_source(rep_seed, StreamIdFor("gender/histogram"));
    RandomSource total_source(rep_seed, StreamIdFor("gender/total"));
    const NoisyHistogram detail_view = SbhRelease(detail, params, detail_source, rounding);
    const NoisyHistogram total_view = SbhRelease(total, params, total_source, rounding);
    const NoisyEntry* male = detail_view.Find({"Male"});
    if (detail_view.Contains({"Female"})) ++out.female_released;
    if (male) {
      ++out.male_released;
      if (std::abs(male->value - 100.0) <= 20.0) ++out.male_within_20;
    }
    if (total_view.size() == 1) {
      ++out.total_released;
      const double t = total_view.entries.front().value;
      if (std::abs(t - 110.0) <= 20.0) ++out.total_within_20;
      const audit::SuppressedEstimate est = audit::InferSuppressed(total_view, detail_view);
      sum += est.estimate;
      sum_sq += est.estimate * est.estimate;
      ++estimates;
      if (rep == 0) {
        out.first_estimate = est.estimate;
        out.first_total = t;
        out.first_male = male ? male->value : 0.0;
        out.closed_form_se = est.standard_error;
      }
    }
  }
  if (estimates > 0) {
    out.estimate_mean = sum / static_cast<double>(estimates);
    const double var = sum_sq / static_cast<double>(estimates) -
                       out.estimate_mean * out.estimate_mean;
    out.estimate_std =
        std::sqrt(std::max(0.0, var) * static_cast<double>(estimates) /
                  static_cast<double>(std::max<std::uint64_t>(1, estimates - 1)));
  }
  return out;
}

}  // namespace opaldp::simulation

#endif  // OPALDP_SIMULATION_HPP_
