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

// opaldp: command-line front end for SBH releases, budget accounting and
// release audits.
//
// Exit codes: 0 success, 1 anchor check failed, 2 usage or validation
// error, 3 budget exceeded, 4 nothing released to analyse.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "opaldp/opaldp.hpp"

namespace {

using namespace opaldp;

constexpr int kExitOk = 0;
constexpr int kExitAnchorFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;
constexpr int kExitNoData = 4;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBudgetExceeded:
      return kExitBudget;
    case ErrorCode::kNoData:
      return kExitNoData;
    default:
      return kExitUsage;
  }
}

std::uint64_t ResolveSeed(const std::optional<std::uint64_t>& flag,
                          const std::optional<std::uint64_t>& fallback = std::nullopt) {
  if (flag) return *flag;
  if (fallback) return *fallback;
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "no --seed given; using seed " << seed << "\n";
  return seed;
}

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

// --- generate --------------------------------------------------------------

struct GenerateOptions {
  std::string preset = "opal";
  std::int64_t n = 100'000;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string config_out;
  std::string map_out;
  int aggregate_factor = 4;
  int stops_per_mode = 200;
  double skew = 1.0;
  std::vector<std::string> dates;
};

int RunGenerate(const GenerateOptions& opt) {
  if (opt.preset == "gender") {
    WriteDataset(datagen::GenderFixture(), opt.out);
    if (!opt.config_out.empty()) {
      ReleaseConfig config = datagen::GenderReleaseConfig(0);
      config.seed.reset();
      std::ofstream(opt.config_out) << ConfigToJson(config).dump(2) << "\n";
    }
    std::cout << "wrote 110 rows to " << opt.out << "\n";
    return kExitOk;
  }
  if (opt.preset != "opal") throw InvalidArgumentError("unknown preset '" + opt.preset + "'");
  datagen::GeneratorSpec spec;
  spec.n = opt.n;
  spec.seed = ResolveSeed(opt.seed);
  spec.stops_per_mode = opt.stops_per_mode;
  spec.stop_popularity = opt.skew;
  if (!opt.dates.empty()) spec.dates = opt.dates;
  const Dataset ds = datagen::Generate(spec);
  WriteDataset(ds, opt.out);
  std::cout << "wrote " << ds.size() << " trips to " << opt.out << "\n";
  if (!opt.map_out.empty()) {
    std::ofstream out(opt.map_out, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + opt.map_out + "' for writing");
    datagen::GroupedStops(spec, opt.aggregate_factor).Save(out);
  }
  if (!opt.config_out.empty()) {
    ReleaseConfig config = datagen::OpalReleaseConfig(spec, 0);
    config.seed.reset();
    if (!opt.map_out.empty()) {
      const auto cfg_dir = std::filesystem::absolute(opt.config_out).parent_path();
      config.aggregation_map_path =
          std::filesystem::relative(std::filesystem::absolute(opt.map_out), cfg_dir)
              .string();
    }
    std::ofstream out(opt.config_out, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + opt.config_out + "' for writing");
    out << ConfigToJson(config).dump(2) << "\n";
  }
  return kExitOk;
}

// --- release ---------------------------------------------------------------

struct ReleaseOptions {
  std::string config;
  std::string input;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool raw = false;
  std::string timestamp;
};

int RunRelease(const ReleaseOptions& opt) {
  ReleaseConfig config = LoadConfig(opt.config);
  config.seed = ResolveSeed(opt.seed, config.seed);
  if (opt.raw) config.rounding = RoundingPolicy::kRaw;
  const Dataset ds = Ingest(opt.input, config.schema);
  ReleaseDiagnostics diag;
  ReleaseBundle bundle = ReleasePipeline(ds, config, &diag);
  bundle.config_digest = Sha256File(opt.config);
  bundle.input_digest = Sha256File(opt.input);
  bundle.created = opt.timestamp;
  if (bundle.created.empty()) {
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) bundle.created = epoch;
  }
  WriteBundle(bundle, opt.out);

  for (const auto& [label, d] : diag.density) {
    std::cerr << "density " << label << ": n=" << d.n << " distinct=" << d.distinct_points
              << " cells=" << d.domain_size << " occupancy=" << Fmt("%.4g", d.occupancy)
              << "\n";
  }
  for (const auto& w : diag.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "release written to " << opt.out << "\n";
  for (const auto& p : bundle.partitions) {
    std::cout << "  " << p.Label() << ": " << p.release.size() << " points, eps "
              << p.epsilon << ", delta " << p.delta << ", T " << Fmt("%.4f", p.threshold())
              << "\n";
  }
  std::cout << "composed budget: epsilon " << bundle.composed.epsilon << ", delta "
            << Fmt("%.6g", bundle.composed.delta) << " (seed " << bundle.master_seed
            << ")\n";
  return kExitOk;
}

// --- audit -----------------------------------------------------------------

struct AuditOptions {
  std::string bundle;
  double assume_delta = 0.0;
  std::string listing;
  std::string report;
  std::string model = "sbh";
};

int RunAudit(const AuditOptions& opt) {
  const ReleaseBundle bundle = ReadBundle(opt.bundle);
  std::vector<audit::ListingEntry> listing;
  if (!opt.listing.empty()) listing = audit::LoadListing(opt.listing);
  audit::ThresholdModel model;
  if (opt.model == "sbh") {
    model = audit::StabilityHistogramModel();
  } else if (opt.model == "unit-scale") {
    model = audit::UnitScaleModel();
  } else {
    throw InvalidArgumentError("unknown threshold model '" + opt.model + "'");
  }
  const audit::AuditReport report = audit::RunAudit(bundle, opt.assume_delta, listing, model);
  const std::string path = opt.report.empty()
                               ? (std::filesystem::path(opt.bundle) / "audit.json").string()
                               : opt.report;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << audit::ReportToJson(report).dump(2) << "\n";
  audit::PrintReport(report, std::cout);
  std::cout << "report written to " << path << "\n";
  return kExitOk;
}

// --- threshold -------------------------------------------------------------

int RunThreshold(double epsilon, double delta) {
  const double t = SbhThreshold(epsilon, delta);
  std::cout << "epsilon            " << epsilon << "\n"
            << "delta              " << Fmt("%.6g", delta) << "\n"
            << "threshold T        " << Fmt("%.4f", t) << "\n"
            << "noise scale        " << Fmt("%.4f", SbhNoiseScale(epsilon)) << "\n"
            << "singleton release  " << Fmt("%.6g", SingletonReleaseProbability(epsilon, delta))
            << "  (2^" << Fmt("%.2f", std::log2(SingletonReleaseProbability(epsilon, delta)))
            << ")\n"
            << "group release probabilities:\n";
  for (int g = 1; g <= 10; ++g) {
    std::cout << "  g=" << g << (g < 10 ? " " : "") << "  "
              << Fmt("%.6g", GroupReleaseProbability(g, epsilon, delta)) << "\n";
  }
  return kExitOk;
}

// --- worked examples -------------------------------------------------------

struct AnchorRun {
  int failures = 0;
  void Check(bool ok, const std::string& name, const std::string& detail) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
    if (!ok) ++failures;
  }
};

int RunWorkedExamples(std::uint64_t trials, std::uint64_t singleton_trials,
                     std::optional<std::uint64_t> seed_flag) {
  const std::uint64_t seed = ResolveSeed(seed_flag);
  AnchorRun run;
  const double two23 = datagen::kTwoPowMinus23;
  const double two24 = datagen::kTwoPowMinus24;

  const double t18 = SbhThreshold(2.0, two23);
  run.Check(std::abs(t18 - 17.64) <= 0.01 && std::lround(t18) == 18,
            "threshold at (2, 2^-23)", Fmt("T = %.4f, expected 18", t18));
  const double t35 = SbhThreshold(1.0, two24);
  run.Check(std::abs(t35 - 35.0) <= 1.0, "threshold at (1, 2^-24)",
            Fmt("T = %.4f, expected approximately 35", t35));
  const double t_doubled = SbhThreshold(2.0, two24);
  run.Check(std::abs(t_doubled - 18.0) <= 1.0, "threshold at doubled budget (2, 2^-24)",
            Fmt("T = %.4f, expected around 18", t_doubled));

  const double singleton = SingletonReleaseProbability(2.0, two23);
  run.Check(singleton <= two24 && singleton == 0x1.0p-25, "singleton closed form",
            Fmt("P = 2^%.3f, bound 2^-24", std::log2(singleton)));
  if (singleton_trials > 0) {
    const auto freq =
        simulation::SimulateReleaseFrequency(1, PrivacyParams(2.0, two23), singleton_trials, seed);
    const double se = freq.StandardError(singleton);
    run.Check(freq.frequency() <= two24 && std::abs(freq.frequency() - singleton) <= 4.0 * se,
              "singleton Monte Carlo",
              std::to_string(freq.released) + " of " + std::to_string(freq.trials) +
                  " released" + Fmt(", frequency %.3g", freq.frequency()));
  }

  const double group5 = GroupReleaseProbability(5, 2.0, two23);
  run.Check(group5 < 1e-5, "group of five", Fmt("P = %.3g", group5));

  const auto g = simulation::RunGenderExperiment(trials, seed);
  run.Check(g.female_released < 10, "gender: Female suppressed",
            "released in " + std::to_string(g.female_released) + " of " +
                std::to_string(g.repetitions) + " runs");
  run.Check(g.male_released == g.repetitions, "gender: Male released",
            std::to_string(g.male_released) + " of " + std::to_string(g.repetitions));
  run.Check(g.male_within_20 >= 0.999 * g.repetitions && g.total_within_20 >= 0.999 * g.repetitions,
            "gender: released values near 100 and 110",
            std::to_string(g.male_within_20) + " / " + std::to_string(g.total_within_20) +
                " of " + std::to_string(g.repetitions));
  const double mean_tol =
      4.0 * 4.0 / std::sqrt(static_cast<double>(std::max<std::uint64_t>(1, trials)));
  run.Check(std::abs(g.estimate_mean - 10.0) <= mean_tol &&
                std::abs(g.estimate_std - 4.0) <= 0.4,
            "gender: inferred Female count",
            Fmt("mean %.3f", g.estimate_mean) + Fmt(" (tolerance %.3f)", mean_tol) +
                Fmt(", std %.3f", g.estimate_std) + Fmt(", first run %.0f", g.first_estimate) +
                Fmt(" = %.0f", g.first_total) + Fmt(" - %.0f", g.first_male));

  BudgetLedger six;
  for (int j = 0; j < 6; ++j) {
    six = six.Charge("partition " + std::to_string(j), PrivacyParams(1.0 / 3.0, two23));
  }
  const BudgetTotals six_total = six.Compose();
  run.Check(six_total.delta == 6 * two23 && six_total.delta < 0x1.0p-20 && six_total.delta < 1e-6,
            "six-partition composition", Fmt("delta = %.4g", six_total.delta));
  BudgetLedger two;
  two = two.Charge("counts", PrivacyParams(1.0, two24)).Charge("total", PrivacyParams(1.0, two24));
  const BudgetTotals two_total = two.Compose();
  run.Check(two_total.epsilon == 2.0 && two_total.delta == two23, "two-query composition",
            Fmt("(%.17g, ", two_total.epsilon) + Fmt("%.17g)", two_total.delta));

  const ReleaseBundle gender = ReleasePipeline(datagen::GenderFixture(),
                                               datagen::GenderReleaseConfig(seed));
  run.Check(gender.composed.epsilon == 2.0 && gender.composed.delta == two23,
            "gender pipeline manifest", Fmt("composed (%.17g, ", gender.composed.epsilon) +
                                            Fmt("%.17g)", gender.composed.delta));
  datagen::GeneratorSpec spec;
  spec.n = 20'000;
  spec.seed = seed;
  const ReleaseBundle opal = ReleasePipeline(datagen::Generate(spec),
                                             datagen::OpalReleaseConfig(spec, seed));
  run.Check(opal.partitions.size() == 6 && opal.composed.delta < 0x1.0p-20,
            "six-partition pipeline manifest",
            std::to_string(opal.partitions.size()) + " partitions" +
                Fmt(", composed delta %.4g", opal.composed.delta));

  std::cout << (run.failures == 0 ? "all anchors pass"
                                  : std::to_string(run.failures) + " anchor(s) failed")
            << " (seed " << seed << ")\n";
  return run.failures == 0 ? kExitOk : kExitAnchorFailed;
}

// --- density ---------------------------------------------------------------

int RunDensity(const std::string& config_path, const std::string& input) {
  const ReleaseConfig config = LoadConfig(config_path);
  Dataset ds = Ingest(input, config.schema);
  auto print = [](const std::string& stage, const Dataset& d) {
    const DensityReport r = Density(d);
    std::cout << stage;
    std::cout << std::string(stage.size() < 28 ? 28 - stage.size() : 1, ' ')
              << "n=" << r.n << " distinct=" << r.distinct_points
              << " cells=" << r.domain_size << Fmt(" rho=%.4g", r.rho)
              << Fmt(" occupancy=%.4g", r.occupancy) << "\n";
  };
  print("raw", ds);
  if (ds.schema.FindKind(AttributeKind::kTime)) {
    ds = BinTimes(ds, config.bin_width_minutes);
    print("binned " + std::to_string(config.bin_width_minutes) + " min", ds);
  }
  if (config.aggregation_map) {
    ds = AggregateStops(ds, *config.aggregation_map);
    print("stops aggregated", ds);
  }
  if (config.decouple) {
    const auto [on, off] = Decouple(ds);
    print("tap-on view", on);
    print("tap-off view", off);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private histogram releases and release audits"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic trip dataset");
  generate->add_option("--preset", gen.preset, "opal or gender")->capture_default_str();
  generate->add_option("--n", gen.n, "Number of trips")->capture_default_str();
  generate->add_option("--seed", gen.seed, "Generator seed");
  generate->add_option("--out", gen.out, "Output CSV path")->required();
  generate->add_option("--config-out", gen.config_out, "Also write a matching release config");
  generate->add_option("--map-out", gen.map_out, "Also write a stop aggregation map");
  generate->add_option("--aggregate-factor", gen.aggregate_factor, "Stops merged per coarse stop")
      ->capture_default_str();
  generate->add_option("--stops-per-mode", gen.stops_per_mode)->capture_default_str();
  generate->add_option("--skew", gen.skew, "Stop popularity exponent")->capture_default_str();
  generate->add_option("--dates", gen.dates, "Dates (YYYY-MM-DD)");

  ReleaseOptions rel;
  auto* release = app.add_subcommand("release", "Run an SBH release and write a bundle");
  release->add_option("--config", rel.config, "Release config (JSON)")->required();
  release->add_option("--input", rel.input, "Input trips (CSV)")->required();
  release->add_option("--out", rel.out, "Output bundle directory")->required();
  release->add_option("--seed", rel.seed, "Master seed");
  release->add_flag("--raw", rel.raw, "Publish unrounded noisy counts");
  release->add_option("--timestamp", rel.timestamp, "Creation time recorded in the manifest");

  AuditOptions aud;
  auto* audit_cmd = app.add_subcommand("audit", "Run inference attacks against a bundle");
  audit_cmd->add_option("--bundle", aud.bundle, "Bundle directory")->required();
  audit_cmd->add_option("--assume-delta", aud.assume_delta, "Delta assumed by the attacker")
      ->required();
  audit_cmd->add_option("--domain-listing", aud.listing, "Feasible points per partition slice");
  audit_cmd->add_option("--report", aud.report, "Report path (default <bundle>/audit.json)");
  audit_cmd->add_option("--model", aud.model, "Threshold model: sbh or unit-scale")
      ->capture_default_str();

  double epsilon = 0.0;
  double delta = 0.0;
  auto* threshold = app.add_subcommand("threshold", "Print the SBH threshold and release odds");
  threshold->add_option("--epsilon", epsilon)->required();
  threshold->add_option("--delta", delta)->required();

  std::uint64_t trials = 20'000;
  std::uint64_t singleton_trials = std::uint64_t{1} << 28;
  std::optional<std::uint64_t> anchor_seed;
  auto* examples = app.add_subcommand("paper-examples", "Check the worked examples end to end");
  examples->add_option("--trials", trials, "Repetitions of the gender example")
      ->capture_default_str();
  examples->add_option("--singleton-trials", singleton_trials,
                       "Monte Carlo trials for a count-1 point")
      ->capture_default_str();
  examples->add_option("--seed", anchor_seed);

  std::string density_config;
  std::string density_input;
  auto* density = app.add_subcommand("density", "Report density after each coarsening step");
  density->add_option("--config", density_config)->required();
  density->add_option("--input", density_input)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*generate) return RunGenerate(gen);
    if (*release) return RunRelease(rel);
    if (*audit_cmd) return RunAudit(aud);
    if (*threshold) return RunThreshold(epsilon, delta);
    if (*examples) return RunWorkedExamples(trials, singleton_trials, anchor_seed);
    if (*density) return RunDensity(density_config, density_input);
  } catch (const opaldp::Error& e) {
    std::cerr << "error (" << ErrorCodeName(e.code()) << "): " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
