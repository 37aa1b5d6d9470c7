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

// Drives the opaldp binary end to end and checks exit codes and outputs.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "nlohmann/json.hpp"

namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ("cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  // Runs the tool with `args`; stdout and stderr land in out_ and err_.
  int Run(const std::string& args) {
    const std::string cmd = std::string("\"") + OPALDP_CLI_PATH + "\" " + args + " >" +
                            Path("stdout.txt") + " 2>" + Path("stderr.txt");
    const int status = std::system(cmd.c_str());
    out_ = Slurp(dir_ / "stdout.txt");
    err_ = Slurp(dir_ / "stderr.txt");
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string Path(const std::string& name) const { return "\"" + (dir_ / name).string() + "\""; }

  static std::string Slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  void GenderSetup() {
    ASSERT_EQ(Run("generate --preset gender --out " + Path("gender.csv") + " --config-out " +
                  Path("gender.json")),
              0)
        << err_;
  }

  void OpalSetup() {
    ASSERT_EQ(Run("generate --preset opal --n 5000 --stops-per-mode 30 --seed 5 --out " +
                  Path("trips.csv") + " --config-out " + Path("opal.json") + " --map-out " +
                  Path("map.csv")),
              0)
        << err_;
  }

  fs::path dir_;
  std::string out_;
  std::string err_;
};

TEST_F(CliTest, ThresholdCommand) {
  EXPECT_EQ(Run("threshold --epsilon 2 --delta 1.1920928955078125e-07"), 0);
  EXPECT_NE(out_.find("17.6355"), std::string::npos) << out_;
  EXPECT_EQ(Run("threshold --epsilon 1 --delta 2"), 0);
  EXPECT_NE(out_.find("1.0000"), std::string::npos) << out_;
  EXPECT_EQ(Run("threshold --epsilon 0 --delta 0.1"), 2);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Run(""), 2);
  EXPECT_EQ(Run("nonsense"), 2);
  EXPECT_EQ(Run("release --config x.json"), 2);
}

TEST_F(CliTest, MissingInputIsExitTwo) {
  GenderSetup();
  EXPECT_EQ(Run("release --seed 1 --config " + Path("gender.json") + " --input " +
                Path("absent.csv") + " --out " + Path("bundle")),
            2);
  EXPECT_FALSE(err_.empty());
  EXPECT_FALSE(fs::exists(dir_ / "bundle"));
}

TEST_F(CliTest, InvalidRowIsExitTwo) {
  GenderSetup();
  std::ofstream(dir_ / "bad.csv") << "gender\nMale\nOther\n";
  EXPECT_EQ(Run("release --seed 1 --config " + Path("gender.json") + " --input " +
                Path("bad.csv") + " --out " + Path("bundle")),
            2);
  EXPECT_NE(err_.find("Other"), std::string::npos) << err_;
  EXPECT_NE(err_.find("3"), std::string::npos) << err_;
}

TEST_F(CliTest, BudgetCapIsExitThreeAndWritesNothing) {
  GenderSetup();
  auto config = nlohmann::json::parse(Slurp(dir_ / "gender.json"));
  config["cap"] = {{"epsilon", 1.5}, {"delta", 1e-6}};
  std::ofstream(dir_ / "capped.json") << config.dump();
  EXPECT_EQ(Run("release --seed 1 --config " + Path("capped.json") + " --input " +
                Path("gender.csv") + " --out " + Path("bundle")),
            3);
  EXPECT_FALSE(fs::exists(dir_ / "bundle"));
}

TEST_F(CliTest, SameSeedGivesIdenticalBundles) {
  OpalSetup();
  for (const char* b : {"a", "b"}) {
    ASSERT_EQ(Run("release --seed 42 --config " + Path("opal.json") + " --input " +
                  Path("trips.csv") + " --out " + Path(b)),
              0)
        << err_;
  }
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir_ / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    EXPECT_EQ(Slurp(e.path()), Slurp(dir_ / "b" / fs::relative(e.path(), dir_ / "a")));
  }
  EXPECT_EQ(files, 7u);
  const auto m = nlohmann::json::parse(Slurp(dir_ / "a" / "manifest.json"));
  EXPECT_EQ(m["releases"].size(), 6u);
  EXPECT_EQ(m["composed"]["epsilon"].get<double>(), 12.0);
  EXPECT_EQ(m["master_seed"].get<std::uint64_t>(), 42u);
  EXPECT_FALSE(m.contains("created"));
}

TEST_F(CliTest, MissingSeedIsDrawnAndReported) {
  GenderSetup();
  EXPECT_EQ(Run("release --config " + Path("gender.json") + " --input " + Path("gender.csv") +
                " --out " + Path("bundle")),
            0);
  EXPECT_NE(err_.find("seed"), std::string::npos);
}

TEST_F(CliTest, GenderAuditEstimatesSuppressedCount) {
  GenderSetup();
  ASSERT_EQ(Run("release --seed 7 --config " + Path("gender.json") + " --input " +
                Path("gender.csv") + " --out " + Path("bundle")),
            0);
  ASSERT_EQ(Run("audit --bundle " + Path("bundle") + " --assume-delta 5.9604644775390625e-08"),
            0)
      << err_;
  const auto report = nlohmann::json::parse(Slurp(dir_ / "bundle" / "audit.json"));
  ASSERT_EQ(report["suppressed_estimates"].size(), 1u);
  const double est = report["suppressed_estimates"][0]["estimate"].get<double>();
  const double se = report["suppressed_estimates"][0]["standard_error"].get<double>();
  EXPECT_DOUBLE_EQ(se, 4.0);
  EXPECT_NEAR(est, 10.0, 4 * se);
  EXPECT_FALSE(out_.empty());
}

TEST_F(CliTest, ExhaustionListingRaisesFlag) {
  OpalSetup();
  ASSERT_EQ(Run("release --seed 3 --config " + Path("opal.json") + " --input " +
                Path("trips.csv") + " --out " + Path("bundle")),
            0)
      << err_;
  std::ofstream(dir_ / "listing.csv")
      << "partition,slice,point\n"
      << "date=2016-07-25/mode=ferry/view=tap_on,04:00,FG001|240\n"
      << "date=2016-07-25/mode=ferry/view=tap_on,08:00,FG001|480\n"
      << "date=2016-07-25/mode=ferry/view=tap_on,08:00,FG002|480\n";
  ASSERT_EQ(Run("audit --bundle " + Path("bundle") + " --assume-delta 1.1920928955078125e-07" +
                " --domain-listing " + Path("listing.csv") + " --report " + Path("r.json")),
            0)
      << err_;
  const auto report = nlohmann::json::parse(Slurp(dir_ / "r.json"));
  ASSERT_EQ(report["exhaustion_flags"].size(), 1u);
  EXPECT_EQ(report["exhaustion_flags"][0]["slice"], "04:00");
}

TEST_F(CliTest, AuditOfEmptyReleaseIsExitFour) {
  GenderSetup();
  std::ofstream(dir_ / "empty.csv") << "gender\n";
  ASSERT_EQ(Run("release --seed 1 --config " + Path("gender.json") + " --input " +
                Path("empty.csv") + " --out " + Path("bundle")),
            0)
      << err_;
  EXPECT_EQ(Run("audit --bundle " + Path("bundle") + " --assume-delta 1e-7"), 4);
}

TEST_F(CliTest, TamperedBundleIsExitTwo) {
  GenderSetup();
  ASSERT_EQ(Run("release --seed 1 --config " + Path("gender.json") + " --input " +
                Path("gender.csv") + " --out " + Path("bundle")),
            0);
  const fs::path victim = dir_ / "bundle" / "partitions" / "all_all_joined_histogram.csv";
  ASSERT_TRUE(fs::exists(victim));
  std::string text = Slurp(victim);
  text += "Female,12\n";
  std::ofstream(victim, std::ios::binary) << text;
  EXPECT_EQ(Run("audit --bundle " + Path("bundle") + " --assume-delta 1e-7"), 2);
  EXPECT_NE(err_.find("digest"), std::string::npos) << err_;
}

TEST_F(CliTest, DensityCommand) {
  OpalSetup();
  EXPECT_EQ(Run("density --config " + Path("opal.json") + " --input " + Path("trips.csv")), 0)
      << err_;
  EXPECT_NE(out_.find("occupancy"), std::string::npos) << out_;
}

TEST_F(CliTest, WorkedExamplesPass) {
  EXPECT_EQ(Run("paper-examples --trials 2000 --singleton-trials 1048576 --seed 9"), 0)
      << out_ << err_;
  EXPECT_EQ(out_.find("[FAIL]"), std::string::npos) << out_;
  EXPECT_NE(out_.find("[PASS]"), std::string::npos);
}

}  // namespace
