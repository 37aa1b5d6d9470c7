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

#include "opaldp/release.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "nlohmann/json.hpp"
#include "opaldp/accountant.hpp"
#include "opaldp/datagen.hpp"
#include "opaldp/mechanisms.hpp"

namespace opaldp {
namespace {

namespace fs = std::filesystem;
using datagen::GeneratorSpec;

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / name;
  fs::remove_all(dir);
  return dir;
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

GeneratorSpec SmallSpec(std::int64_t n) {
  GeneratorSpec spec;
  spec.n = n;
  spec.stops_per_mode = 50;
  spec.seed = 21;
  return spec;
}

TEST(ReleasePipelineTest, OpalConfigGivesSixPartitions) {
  const GeneratorSpec spec = SmallSpec(20000);
  const ReleaseBundle bundle =
      ReleasePipeline(datagen::Generate(spec), datagen::OpalReleaseConfig(spec, 7));
  ASSERT_EQ(bundle.partitions.size(), 6u);
  EXPECT_EQ(bundle.composed.epsilon, 12.0);
  EXPECT_EQ(bundle.composed.delta, 6 * 0x1.0p-23);
  EXPECT_LT(bundle.composed.delta, 0x1.0p-20);
  std::set<std::string> labels;
  for (const auto& p : bundle.partitions) {
    labels.insert(p.Label());
    EXPECT_EQ(p.epsilon, 2.0);
    EXPECT_EQ(p.delta, 0x1.0p-23);
    EXPECT_NE(p.key.view, View::kJoined);
    EXPECT_EQ(p.attributes.size(), 2u);
  }
  EXPECT_EQ(labels.size(), 6u);
  EXPECT_GT(bundle.ReleasedPointCount(), 0u);
}

TEST(ReleasePipelineTest, GenderConfigComposesTwoQueries) {
  const ReleaseBundle bundle =
      ReleasePipeline(datagen::GenderFixture(), datagen::GenderReleaseConfig(3));
  ASSERT_EQ(bundle.partitions.size(), 2u);
  EXPECT_EQ(bundle.composed.epsilon, 2.0);
  EXPECT_EQ(bundle.composed.delta, 0x1.0p-23);
  const ReleasedPartition* total = bundle.Find(PartitionKey{}, Query::kTotal);
  ASSERT_NE(total, nullptr);
  ASSERT_EQ(total->release.size(), 1u);  // 110 is far above the threshold
  EXPECT_NEAR(total->release.entries[0].raw, 110.0, 40.0);
  EXPECT_TRUE(total->attributes.empty());
}

TEST(ReleasePipelineTest, TotalBudgetIsSplitExactly) {
  const GeneratorSpec spec = SmallSpec(1000);
  ReleaseConfig config = datagen::OpalReleaseConfig(spec, 1);
  config.budget.per_release.reset();
  config.budget.total = PrivacyParams(1.0, 1e-6);
  const ReleaseBundle bundle = ReleasePipeline(datagen::Generate(spec), config);
  EXPECT_EQ(bundle.composed.epsilon, 1.0);
  EXPECT_EQ(bundle.composed.delta, 1e-6);
}

TEST(ReleasePipelineTest, EmptyInputStillYieldsFullManifest) {
  const GeneratorSpec spec = SmallSpec(0);
  const ReleaseBundle bundle =
      ReleasePipeline(datagen::Generate(spec), datagen::OpalReleaseConfig(spec, 2));
  ASSERT_EQ(bundle.partitions.size(), 6u);
  EXPECT_EQ(bundle.ReleasedPointCount(), 0u);
  EXPECT_EQ(bundle.composed.epsilon, 12.0);
  const fs::path dir = FreshDir("empty_bundle");
  WriteBundle(bundle, dir);
  const auto m = nlohmann::json::parse(Slurp(dir / kManifestFile));
  EXPECT_EQ(m["releases"].size(), 6u);
  EXPECT_EQ(m["ledger"].size(), 6u);
  const ReleaseBundle back = ReadBundle(dir);
  EXPECT_EQ(back.partitions.size(), 6u);
}

TEST(ReleasePipelineTest, RequiresSeedAndBudget) {
  ReleaseConfig config = datagen::GenderReleaseConfig(1);
  config.seed.reset();
  EXPECT_THROW(ReleasePipeline(datagen::GenderFixture(), config), InvalidArgumentError);
  config = datagen::GenderReleaseConfig(1);
  config.budget = {};
  EXPECT_THROW(ReleasePipeline(datagen::GenderFixture(), config), InvalidArgumentError);
}

TEST(ReleasePipelineTest, CapAbortsBeforeNoise) {
  const GeneratorSpec spec = SmallSpec(1000);
  ReleaseConfig config = datagen::OpalReleaseConfig(spec, 1);
  config.cap = PrivacyParams(11.5, 1e-3);
  try {
    ReleasePipeline(datagen::Generate(spec), config);
    FAIL() << "expected BudgetExceededError";
  } catch (const BudgetExceededError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBudgetExceeded);
  }
  config.cap = PrivacyParams(12.0, 6 * 0x1.0p-23);  // exactly at the cap
  EXPECT_NO_THROW(ReleasePipeline(datagen::Generate(spec), config));
}

TEST(ReleasePipelineTest, ManifestTotalsMatchLedger) {
  const GeneratorSpec spec = SmallSpec(5000);
  const ReleaseBundle bundle =
      ReleasePipeline(datagen::Generate(spec), datagen::OpalReleaseConfig(spec, 4));
  const fs::path dir = FreshDir("totals_bundle");
  WriteBundle(bundle, dir);
  const auto m = nlohmann::json::parse(Slurp(dir / kManifestFile));
  BudgetLedger ledger;
  for (const auto& r : m["releases"]) {
    ledger = ledger.Charge(r["label"].get<std::string>(),
                           PrivacyParams(r["epsilon"].get<double>(), r["delta"].get<double>()));
  }
  EXPECT_EQ(m["composed"]["epsilon"].get<double>(), ledger.Compose().epsilon);
  EXPECT_EQ(m["composed"]["delta"].get<double>(), ledger.Compose().delta);
}

TEST(ReleasePipelineTest, ReleasedPointsComeFromSupportAndClearThreshold) {
  const GeneratorSpec spec = SmallSpec(20000);
  const Dataset input = datagen::Generate(spec);
  ReleaseConfig config = datagen::OpalReleaseConfig(spec, 5);
  config.rounding = RoundingPolicy::kRaw;
  const ReleaseBundle bundle = ReleasePipeline(input, config);
  const Dataset binned = BinTimes(input, config.bin_width_minutes);
  const auto parts = Partition(binned, config.partition_by);
  for (const auto& p : bundle.partitions) {
    const Dataset& part = parts.at(p.key.WithView(View::kJoined));
    const auto [on, off] = Decouple(part);
    const Histogram truth = BuildHistogram(p.key.view == View::kTapOn ? on : off);
    const double t = SbhThreshold(p.epsilon, p.delta);
    EXPECT_EQ(p.threshold(), t);
    for (const auto& e : p.release.entries) {
      EXPECT_GT(truth.Count(e.point), 0) << p.Label();
      EXPECT_GT(e.raw, t) << p.Label();
    }
  }
}

TEST(ReleasePipelineTest, SameSeedGivesByteIdenticalBundles) {
  const GeneratorSpec spec = SmallSpec(5000);
  const Dataset input = datagen::Generate(spec);
  const fs::path a = FreshDir("det_a");
  const fs::path b = FreshDir("det_b");
  WriteBundle(ReleasePipeline(input, datagen::OpalReleaseConfig(spec, 99)), a);
  WriteBundle(ReleasePipeline(input, datagen::OpalReleaseConfig(spec, 99)), b);
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const fs::path rel = fs::relative(entry.path(), a);
    EXPECT_EQ(Slurp(entry.path()), Slurp(b / rel)) << rel;
  }
  EXPECT_EQ(files, 7u);
  const fs::path c = FreshDir("det_c");
  WriteBundle(ReleasePipeline(input, datagen::OpalReleaseConfig(spec, 100)), c);
  EXPECT_NE(Slurp(a / kManifestFile), Slurp(c / kManifestFile));
}

TEST(ReleasePipelineTest, ManifestOmitsRawCounts) {
  const fs::path dir = FreshDir("gender_bundle");
  WriteBundle(ReleasePipeline(datagen::GenderFixture(), datagen::GenderReleaseConfig(8)),
              dir);
  const std::string text = Slurp(dir / kManifestFile);
  EXPECT_EQ(text.find("\"count\""), std::string::npos);
  EXPECT_EQ(text.find("110"), std::string::npos);
}

TEST(BundleIoTest, RoundTripPreservesPublishedValues) {
  const GeneratorSpec spec = SmallSpec(5000);
  const ReleaseBundle bundle =
      ReleasePipeline(datagen::Generate(spec), datagen::OpalReleaseConfig(spec, 6));
  const fs::path dir = FreshDir("rt_bundle");
  WriteBundle(bundle, dir);
  const ReleaseBundle back = ReadBundle(dir);
  ASSERT_EQ(back.partitions.size(), bundle.partitions.size());
  EXPECT_EQ(back.composed.epsilon, bundle.composed.epsilon);
  EXPECT_EQ(back.composed.delta, bundle.composed.delta);
  EXPECT_EQ(back.master_seed, bundle.master_seed);
  for (std::size_t i = 0; i < back.partitions.size(); ++i) {
    const auto& x = bundle.partitions[i];
    const auto& y = back.partitions[i];
    EXPECT_EQ(y.Label(), x.Label());
    ASSERT_EQ(y.release.size(), x.release.size());
    for (std::size_t k = 0; k < x.release.size(); ++k) {
      EXPECT_EQ(y.release.entries[k].point, x.release.entries[k].point);
      EXPECT_EQ(y.release.entries[k].value, x.release.entries[k].value);
    }
  }
}

TEST(BundleIoTest, TamperingIsDetected) {
  const GeneratorSpec spec = SmallSpec(5000);
  const fs::path dir = FreshDir("tamper_bundle");
  WriteBundle(ReleasePipeline(datagen::Generate(spec), datagen::OpalReleaseConfig(spec, 6)),
              dir);
  fs::path victim;
  for (const auto& e : fs::directory_iterator(dir / "partitions")) {
    if (fs::file_size(e.path()) > 30) victim = e.path();
  }
  ASSERT_FALSE(victim.empty());
  std::string text = Slurp(victim);
  text.back() = text.back() == '\n' ? ' ' : '\n';
  std::ofstream(victim, std::ios::binary) << text;
  EXPECT_THROW(ReadBundle(dir), DataLossError);
}

TEST(BundleIoTest, MissingOrCorruptManifest) {
  const fs::path dir = FreshDir("no_manifest");
  fs::create_directories(dir);
  EXPECT_THROW(ReadBundle(dir), Error);
  std::ofstream(dir / kManifestFile) << "{ not json";
  EXPECT_THROW(ReadBundle(dir), DataLossError);
}

TEST(ReleaseConfigTest, JsonRoundTrip) {
  const GeneratorSpec spec = SmallSpec(10);
  const ReleaseConfig config = datagen::OpalReleaseConfig(spec, 77);
  const ReleaseConfig back = ConfigFromJson(ConfigToJson(config), ".");
  EXPECT_EQ(ConfigToJson(back), ConfigToJson(config));
  EXPECT_EQ(back.seed, config.seed);
  nlohmann::json bad = ConfigToJson(config);
  bad["budget"]["total"] = ParamsToJson(PrivacyParams(1, 1e-6));
  EXPECT_THROW(ConfigFromJson(bad, "."), InvalidArgumentError);
}

}  // namespace
}  // namespace opaldp
