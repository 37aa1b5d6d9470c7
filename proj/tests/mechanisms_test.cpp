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

#include "opaldp/mechanisms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "opaldp/simulation.hpp"

namespace opaldp {
namespace {

constexpr double kTwo23 = 0x1.0p-23;
constexpr double kTwo24 = 0x1.0p-24;
constexpr double kLn2 = std::numbers::ln2;

// --- Threshold calibration -------------------------------------------------

TEST(SbhThresholdTest, AnchorEighteen) {
  const double t = SbhThreshold(PrivacyParams(2.0, kTwo23));
  // ln(2 / 2^-23) = 24 ln 2.
  EXPECT_DOUBLE_EQ(t, 1.0 + 24.0 * kLn2);
  EXPECT_NEAR(t, 17.6355, 1e-4);
  EXPECT_EQ(std::lround(t), 18);
}

TEST(SbhThresholdTest, AnchorApproximatelyThirtyFive) {
  const double t = SbhThreshold(PrivacyParams(1.0, kTwo24));
  EXPECT_DOUBLE_EQ(t, 1.0 + 50.0 * kLn2);
  EXPECT_NEAR(t, 35.6574, 1e-4);
  EXPECT_LE(std::abs(t - 35.0), 1.0);
}

TEST(SbhThresholdTest, DoubledBudgetFootnoteIsAroundEighteen) {
  const double t = SbhThreshold(PrivacyParams(2.0, kTwo24));
  EXPECT_DOUBLE_EQ(t, 1.0 + 25.0 * kLn2);
  EXPECT_NEAR(t, 18.3287, 1e-4);
}

TEST(SbhThresholdTest, OneOverEightMillionDelta) {
  EXPECT_NEAR(SbhThreshold(2.0, 1.25e-7), 17.5881, 1e-4);
}

TEST(SbhThresholdTest, DegenerateDeltaTwoGivesOne) {
  EXPECT_DOUBLE_EQ(SbhThreshold(1.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(SbhThreshold(0.3, 2.0), 1.0);
}

TEST(SbhThresholdTest, RejectsInvalidCalibration) {
  EXPECT_THROW(SbhThreshold(0.0, 0.1), InvalidArgumentError);
  EXPECT_THROW(SbhThreshold(1.0, 0.0), InvalidArgumentError);
  EXPECT_THROW(SbhThreshold(1.0, 2.5), InvalidArgumentError);
  EXPECT_THROW(PrivacyParams(1.0, 1.0), InvalidArgumentError);
  EXPECT_THROW(PrivacyParams(-1.0, 0.5), InvalidArgumentError);
}

// --- Closed-form release probabilities -------------------------------------

TEST(ReleaseProbabilityTest, SingletonIsQuarterDelta) {
  EXPECT_DOUBLE_EQ(SingletonReleaseProbability(PrivacyParams(2.0, kTwo23)), 0x1.0p-25);
  EXPECT_LE(SingletonReleaseProbability(PrivacyParams(2.0, kTwo23)), kTwo23 / 2.0);
  EXPECT_DOUBLE_EQ(SingletonReleaseProbability(1.0, 2.0), 0.5);
  EXPECT_NEAR(SingletonReleaseProbability(PrivacyParams(1.0, 0.1)), 0.025, 1e-15);
  for (double eps : {0.1, 0.5, 1.0, 3.0}) {
    for (double delta : {1e-9, 1e-4, 0.3}) {
      EXPECT_NEAR(SingletonReleaseProbability(eps, delta), delta / 4.0, 1e-12 * delta);
    }
  }
}

TEST(ReleaseProbabilityTest, SingletonMonteCarlo) {
  const auto freq =
      simulation::SimulateReleaseFrequency(1, PrivacyParams(1.0, 0.1), 10'000'000, 99);
  EXPECT_NEAR(freq.frequency(), 0.025, 0.0005);
}

TEST(ReleaseProbabilityTest, GroupOfFive) {
  const double p = GroupReleaseProbability(5, PrivacyParams(2.0, kTwo23));
  EXPECT_NEAR(p, 1.6271516690595246e-06, 1e-15);
  EXPECT_NEAR(p, 0.5 * std::exp(-(1.0 + 24.0 * kLn2 - 5.0)), 1e-18);
}

TEST(ReleaseProbabilityTest, GroupEdgeCases) {
  const PrivacyParams p(2.0, kTwo23);
  EXPECT_DOUBLE_EQ(GroupReleaseProbability(1, p), SingletonReleaseProbability(p));
  EXPECT_THROW(GroupReleaseProbability(0, p), InvalidArgumentError);
  EXPECT_DOUBLE_EQ(GroupReleaseProbability(1'000'000, p), 1.0);
  double prev = 0.0;
  for (int g = 1; g <= 100; ++g) {
    const double cur = GroupReleaseProbability(g, p);
    // Strictly increasing until it rounds to 1.
    if (prev < 1.0) {
      EXPECT_GT(cur, prev) << g;
    } else {
      EXPECT_EQ(cur, 1.0) << g;
    }
    prev = cur;
  }
  EXPECT_EQ(ReleaseProbability(0, 2.0, kTwo23), 0.0);
}

TEST(ReleaseProbabilityTest, FemaleSuppressionFailure) {
  EXPECT_NEAR(GroupReleaseProbability(10, PrivacyParams(1.0, kTwo24)),
              1.3413597837168244e-06, 1e-15);
}

// Release frequency of a count-c point, simulated through SbhRelease, agrees
// with the closed form. The standard error uses max(p(1-p), 1/n) so that
// probabilities far below 1/n do not yield a zero-width band.
TEST(ReleaseProbabilityTest, TailOracleEquivalence) {
  const PrivacyParams params(2.0, kTwo23);
  constexpr std::uint64_t kTrials = 1'000'000;
  for (std::int64_t c = 1; c <= 50; ++c) {
    const double p = GroupReleaseProbability(c, params);
    const auto freq = simulation::SimulateReleaseFrequency(c, params, kTrials,
                                                           1000 + static_cast<std::uint64_t>(c));
    const double var = std::max(p * (1.0 - p), 1.0 / kTrials);
    EXPECT_NEAR(freq.frequency(), p, 4.0 * std::sqrt(var / kTrials)) << "count " << c;
  }
}

// Exact approximate-DP check on a two-point domain. Neighbouring inputs differ
// by one record at one point. Outcomes are the four possible release sets;
// the hockey-stick divergence sum_S max(0, P(S) - e^eps P'(S)) must not exceed
// delta, which bounds every event, and in particular each per-point event.
TEST(SbhPrivacyTest, ReleaseSetsSatisfyApproximateDp) {
  for (const auto& params : {PrivacyParams(1.0, kTwo24), PrivacyParams(2.0, kTwo23)}) {
    const double e = std::exp(params.epsilon());
    auto rel = [&](std::int64_t c) {
      return ReleaseProbability(c, params.epsilon(), params.delta());
    };
    for (std::int64_t a = 0; a <= 40; ++a) {
      for (std::int64_t b = 0; b <= 40; ++b) {
        const std::int64_t a2 = a + 1;
        for (int dir = 0; dir < 2; ++dir) {
          const double px = dir == 0 ? rel(a) : rel(a2);
          const double qx = dir == 0 ? rel(a2) : rel(a);
          const double py = rel(b);
          // Per-point events.
          ASSERT_LE(px, e * qx + params.delta());
          ASSERT_LE(1.0 - px, e * (1.0 - qx) + params.delta());
          const double p_sets[4] = {(1 - px) * (1 - py), px * (1 - py), (1 - px) * py, px * py};
          const double q_sets[4] = {(1 - qx) * (1 - py), qx * (1 - py), (1 - qx) * py, qx * py};
          double divergence = 0.0;
          for (int s = 0; s < 4; ++s) divergence += std::max(0.0, p_sets[s] - e * q_sets[s]);
          ASSERT_LE(divergence, params.delta()) << "a=" << a << " b=" << b << " dir=" << dir;
        }
      }
    }
  }
}

// --- SbhRelease --------------------------------------------------------------

TEST(SbhReleaseTest, EmptyHistogramReleasesNothing) {
  RandomSource src(1, 1);
  const NoisyHistogram out = SbhRelease(Histogram{}, PrivacyParams(1.0, kTwo24), src);
  EXPECT_TRUE(out.empty());
  EXPECT_DOUBLE_EQ(out.threshold_used, SbhThreshold(1.0, kTwo24));
}

TEST(SbhReleaseTest, GenderExampleSuppressesFemale) {
  const Histogram hist{{{"Male"}, 100}, {{"Female"}, 10}};
  const PrivacyParams params(1.0, kTwo24);
  int female = 0;
  int male = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    RandomSource src(seed, StreamIdFor("gender"));
    const NoisyHistogram out = SbhRelease(hist, params, src);
    female += out.Contains({"Female"});
    male += out.Contains({"Male"});
  }
  EXPECT_EQ(female, 0);
  EXPECT_EQ(male, 1000);
}

TEST(SbhReleaseTest, LargeCountAlwaysReleased) {
  const Histogram hist{{{"x"}, 1000}};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    RandomSource src(seed, 0);
    const NoisyHistogram out = SbhRelease(hist, PrivacyParams(2.0, kTwo23), src);
    ASSERT_EQ(out.size(), 1U);
    EXPECT_NEAR(out.entries[0].value, 1000.0, 40.0);
  }
}

Histogram RandomSmallHistogram(RandomSource& rng) {
  Histogram h;
  const int points = static_cast<int>(rng.UniformInt(6));
  for (int i = 0; i < points; ++i) {
    const std::int64_t count =
        rng.UniformInt(2) ? 1 + static_cast<std::int64_t>(rng.UniformInt(40))
                          : 1 + static_cast<std::int64_t>(rng.UniformInt(4));
    h.Add({"p" + std::to_string(rng.UniformInt(8))}, count);
  }
  return h;
}

TEST(SbhReleaseTest, SupportContainmentAndThresholdFloor) {
  RandomSource gen(11, 11);
  const PrivacyParams params(0.5, 0.2);  // low threshold, so releases happen often
  std::size_t released = 0;
  for (int d = 0; d < 20; ++d) {
    const Histogram hist = RandomSmallHistogram(gen);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      RandomSource src(seed, 3);
      const NoisyHistogram out = SbhRelease(hist, params, src);
      for (const auto& e : out.entries) {
        ASSERT_GE(hist.Count(e.point), 1);
        ASSERT_GT(e.raw, out.threshold_used);
        ASSERT_GE(e.value, 1.0);
        ASSERT_EQ(e.value, std::nearbyint(e.value));
        ++released;
      }
    }
  }
  EXPECT_GT(released, 1000U);
}

TEST(SbhReleaseTest, RawRoundingPublishesNoisyReal) {
  const Histogram hist{{{"x"}, 50}};
  RandomSource src(4, 4);
  const NoisyHistogram out =
      SbhRelease(hist, PrivacyParams(1.0, 0.01), src, RoundingPolicy::kRaw);
  ASSERT_EQ(out.size(), 1U);
  EXPECT_EQ(out.entries[0].value, out.entries[0].raw);
}

TEST(SbhReleaseTest, PresentValueRoundsAndClamps) {
  EXPECT_EQ(PresentValue(17.5, RoundingPolicy::kNearest), 18.0);
  EXPECT_EQ(PresentValue(18.49, RoundingPolicy::kNearest), 18.0);
  EXPECT_EQ(PresentValue(0.2, RoundingPolicy::kNearest), 1.0);
  EXPECT_EQ(PresentValue(0.2, RoundingPolicy::kRaw), 0.2);
}

TEST(SbhReleaseTest, DeterministicGivenSeedAndStream) {
  RandomSource gen(5, 5);
  const Histogram hist = RandomSmallHistogram(gen);
  RandomSource a(123, 456);
  RandomSource b(123, 456);
  const PrivacyParams params(0.5, 0.2);
  EXPECT_EQ(SbhRelease(hist, params, a), SbhRelease(hist, params, b));
}

// --- Full-domain Laplace -----------------------------------------------------

DomainSchema WideSchema(int attributes, int range) {
  std::vector<Attribute> attrs;
  for (int a = 0; a < attributes; ++a) {
    std::vector<std::string> values;
    for (int v = 0; v < range; ++v) values.push_back(std::to_string(v));
    attrs.push_back(Attribute::Categorical("a" + std::to_string(a), values));
  }
  return DomainSchema(std::move(attrs));
}

TEST(FullDomainLaplaceTest, FourAttributesOfThousandIsInfeasible) {
  const DomainSchema schema = WideSchema(4, 1000);
  RandomSource src(1, 1);
  try {
    FullDomainLaplace(Histogram{}, schema, 1.0, src);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.cell_count(), 1'000'000'000'000ULL);
    EXPECT_EQ(e.cap(), kDefaultFeasibilityCap);
    EXPECT_NE(std::string(e.what()).find("2^39.9"), std::string::npos) << e.what();
  }
}

TEST(FullDomainLaplaceTest, CapIsOverridable) {
  const DomainSchema schema = WideSchema(2, 10);
  RandomSource src(1, 1);
  EXPECT_THROW(FullDomainLaplace(Histogram{}, schema, 1.0, src, 99), InfeasibleError);
  EXPECT_EQ(FullDomainLaplace(Histogram{}, schema, 1.0, src, 100).size(), 100U);
}

TEST(FullDomainLaplaceTest, SingleCellIsOneLaplaceDraw) {
  const DomainSchema schema({Attribute::Categorical("only", {"v"})});
  RandomSource src(9, 9);
  RandomSource mirror(9, 9);
  const NoisyHistogram out = FullDomainLaplace(Histogram{}, schema, 0.5, src);
  ASSERT_EQ(out.size(), 1U);
  EXPECT_EQ(out.entries[0].point, Point{"v"});
  EXPECT_EQ(out.entries[0].value, LaplaceSample(mirror, 2.0));
}

TEST(FullDomainLaplaceTest, PerturbsZeroCellsAndRejectsForeignPoints) {
  const DomainSchema schema = WideSchema(1, 5);
  RandomSource src(2, 2);
  const NoisyHistogram out = FullDomainLaplace(Histogram{{{"3"}, 7}}, schema, 1.0, src);
  ASSERT_EQ(out.size(), 5U);
  for (const auto& e : out.entries) EXPECT_NE(e.value, 0.0);
  EXPECT_THROW(FullDomainLaplace(Histogram{{{"9"}, 1}}, schema, 1.0, src),
               InvalidArgumentError);
}

TEST(FullDomainLaplaceTest, UnbiasedPerCell) {
  const DomainSchema schema = WideSchema(1, 100);
  Histogram hist;
  for (int v = 0; v < 100; v += 3) hist.Add({std::to_string(v)}, v);
  const double eps = 1.0;
  constexpr int kReps = 10'000;
  std::vector<double> sums(100, 0.0);
  RandomSource src(31, 31);
  for (int r = 0; r < kReps; ++r) {
    const NoisyHistogram out = FullDomainLaplace(hist, schema, eps, src);
    for (std::size_t i = 0; i < out.size(); ++i) sums[i] += out.entries[i].value;
  }
  const double sigma = std::sqrt(2.0) / eps;
  double max_z = 0.0;
  for (int v = 0; v < 100; ++v) {
    const double mean = sums[static_cast<std::size_t>(v)] / kReps;
    max_z = std::max(max_z, std::abs(mean - hist.Count({std::to_string(v)})) /
                                (sigma / std::sqrt(kReps)));
  }
  EXPECT_LT(max_z, 4.0);
}

// --- Restricted dictionary ---------------------------------------------------

TEST(RestrictedDictionaryTest, DictionaryEqualToSupport) {
  const Histogram hist{{{"a"}, 5}, {{"b"}, 9}};
  const std::vector<Point> dict = {{"a"}, {"b"}};
  RandomSource src(1, 2);
  const NoisyHistogram out = RestrictedDictionaryLaplace(hist, dict, 1.0, src);
  ASSERT_EQ(out.size(), 2U);
  EXPECT_EQ(out.entries[0].point, Point{"a"});
  EXPECT_EQ(out.entries[1].point, Point{"b"});
}

TEST(RestrictedDictionaryTest, OnlyDictionaryPointsAppearOnce) {
  const Histogram hist{{{"a"}, 5}, {{"z"}, 9}};
  const std::vector<Point> dict = {{"a"}, {"b"}, {"a"}};
  RandomSource src(1, 2);
  const NoisyHistogram out = RestrictedDictionaryLaplace(hist, dict, 1.0, src);
  ASSERT_EQ(out.size(), 2U);
  EXPECT_FALSE(out.Contains({"z"}));
  EXPECT_TRUE(out.Contains({"b"}));
}

TEST(RestrictedDictionaryTest, AbsentTripGetsPureLaplaceNoise) {
  const Histogram hist{{{"a"}, 5}};
  const std::vector<Point> dict = {{"ghost"}};
  const double eps = 0.7;
  constexpr int kRuns = 1'000'000;
  std::vector<double> draws;
  draws.reserve(kRuns);
  RandomSource src(17, 17);
  for (int r = 0; r < kRuns; ++r) {
    draws.push_back(RestrictedDictionaryLaplace(hist, dict, eps, src).entries[0].value);
  }
  std::sort(draws.begin(), draws.end());
  const double b = 1.0 / eps;
  auto cdf = [b](double x) {
    return x < 0 ? 0.5 * std::exp(x / b) : 1.0 - 0.5 * std::exp(-x / b);
  };
  double ks = 0.0;
  for (int i = 0; i < kRuns; ++i) {
    const double f = cdf(draws[static_cast<std::size_t>(i)]);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / kRuns),
                   std::abs(f - static_cast<double>(i + 1) / kRuns)});
  }
  // Kolmogorov-Smirnov critical value at alpha = 0.001 is 1.95 / sqrt(n).
  EXPECT_LT(ks, 1.95 / std::sqrt(static_cast<double>(kRuns)));
}

TEST(RestrictedDictionaryTest, SmallDictionaryOverHugeDomainIsFast) {
  const DomainSchema schema = WideSchema(4, 1000);
  std::vector<Point> dict;
  for (int i = 0; i < 1000; ++i) {
    const auto s = std::to_string(i);
    dict.push_back({s, s, std::to_string((i * 7) % 1000), "0"});
  }
  RandomSource src(3, 3);
  const auto start = std::chrono::steady_clock::now();
  const NoisyHistogram out = RestrictedDictionaryLaplace(Histogram{}, dict, schema, 1.0, src);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_EQ(out.size(), 1000U);
  EXPECT_LT(std::chrono::duration<double>(elapsed).count(), 0.5);
}

TEST(RestrictedDictionaryTest, RejectsEmptyAndForeignDictionaries) {
  RandomSource src(1, 1);
  EXPECT_THROW(RestrictedDictionaryLaplace(Histogram{}, {}, 1.0, src), InvalidArgumentError);
  const DomainSchema schema = WideSchema(1, 3);
  const std::vector<Point> bad = {{"7"}};
  EXPECT_THROW(RestrictedDictionaryLaplace(Histogram{}, bad, schema, 1.0, src),
               InvalidArgumentError);
}

}  // namespace
}  // namespace opaldp
