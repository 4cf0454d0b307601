// Copyright 2026 The tubargain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "support/fixtures.hpp"
#include "tubargain/error.hpp"
#include "tubargain/harness.hpp"

namespace tubargain {
namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("tubargain_test_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorCode CodeOf(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kNumeric;
}

const char* kTwoPlayerConfig = R"({
  "name": "pair",
  "mode": "average",
  "steps": 20,
  "runs": 4,
  "seed": 11,
  "values": {"kind": "uniform", "lo": [0, 0, 1], "hi": [0.5, 0.25, 1]},
  "schedule": {"window": 1, "frames": [{"weights": [[0.5, 0.5], [0.5, 0.5]]}]}
})";

TEST_CASE("preset configurations") {
  const auto cfg = PresetConfig(Preset::kScenarioI, Mode::kRobust);
  CHECK(cfg.steps == 100);
  CHECK(cfg.runs == 50);
  CHECK(cfg.window == 2);
  CHECK(cfg.num_players() == 3);
  CHECK(cfg.initial[1] == fixtures::Vec({0, 10, 0}));
  REQUIRE(std::holds_alternative<RobustCoinflipProcess>(cfg.values));
  CHECK(std::get<RobustCoinflipProcess>(cfg.values).robust_probability == 0.5);
  const auto avg = PresetConfig(Preset::kScenarioII, Mode::kAverage);
  REQUIRE(std::holds_alternative<UniformProcess>(avg.values));
  CHECK(*RobustEnvelope(avg.values) ==
        fixtures::Game3({9, 5, 0, 0, 0, 0, 10}));
  CHECK(ParsePreset("ii") == Preset::kScenarioII);
  CHECK_FALSE(ParsePreset("III"));
  CHECK_THROWS_AS(PresetConfig(Preset::kCustom, Mode::kRobust), Error);
}

TEST_CASE("validation reports and rejects") {
  const auto rep = ValidateConfig(PresetConfig(Preset::kScenarioI, Mode::kRobust));
  CHECK(rep.alpha == 0.5);
  CHECK(rep.connected);
  CHECK(rep.minimal_window == 2);
  CHECK(rep.robust_core_nonempty == true);
  CHECK(rep.mean_core_nonempty);

  CHECK(CodeOf([] {
          ValidateConfig(PresetConfig(Preset::kScenarioII, Mode::kRobust));
        }) == ErrorCode::kAssumptionViolation);
  const auto ii = ValidateConfig(PresetConfig(Preset::kScenarioII, Mode::kAverage));
  CHECK(ii.robust_core_nonempty == false);
  CHECK(ii.mean_core_nonempty);

  auto broken = PresetConfig(Preset::kScenarioI, Mode::kRobust);
  broken.schedule = GraphSchedule::FromWeights({Matrix::Identity(3, 3)});
  CHECK(CodeOf([&] { ValidateConfig(broken); }) ==
        ErrorCode::kAssumptionViolation);
  CHECK(CodeOf([&] { RunExperiment(broken); }) ==
        ErrorCode::kAssumptionViolation);

  auto short_window = PresetConfig(Preset::kScenarioI, Mode::kRobust);
  short_window.window = 1;
  CHECK(CodeOf([&] { ValidateConfig(short_window); }) ==
        ErrorCode::kAssumptionViolation);

  auto zero = PresetConfig(Preset::kScenarioI, Mode::kRobust);
  zero.steps = 0;
  CHECK(CodeOf([&] { ValidateConfig(zero); }) == ErrorCode::kConfig);
  zero.steps = 5;
  zero.runs = 0;
  CHECK(CodeOf([&] { ValidateConfig(zero); }) == ErrorCode::kConfig);

  auto mismatch = PresetConfig(Preset::kScenarioI, Mode::kRobust);
  mismatch.initial.pop_back();
  CHECK(CodeOf([&] { ValidateConfig(mismatch); }) == ErrorCode::kConfig);
}

TEST_CASE("config JSON parsing") {
  const auto cfg = ConfigFromJson(kTwoPlayerConfig);
  CHECK(cfg.name == "pair");
  CHECK(cfg.preset == Preset::kCustom);
  CHECK(cfg.mode == Mode::kAverage);
  CHECK(cfg.steps == 20);
  CHECK(cfg.runs == 4);
  CHECK(cfg.seed == 11);
  CHECK(cfg.num_players() == 2);
  CHECK(cfg.initial[0] == fixtures::Vec({1, 0}));
  CHECK_NOTHROW(ValidateConfig(cfg));

  const auto preset = ConfigFromJson(R"({"preset": "II", "mode": "average", "runs": 3})");
  CHECK(preset.preset == Preset::kScenarioII);
  CHECK(preset.runs == 3);
  CHECK(preset.steps == 100);

  const auto card = ConfigFromJson(R"({
    "values": {"kind": "constant", "order": "cardinality",
               "value": [7, 3, 0, 0, 0, 0, 10]},
    "schedule": {"preset": "three-player-cycle", "window": 2}})");
  CHECK(std::get<ConstantProcess>(card.values).value == fixtures::VMaxI());

  CHECK(CodeOf([] { ConfigFromJson("{"); }) == ErrorCode::kConfig);
  CHECK(CodeOf([] { ConfigFromJson(R"({"preset": "IV"})"); }) == ErrorCode::kConfig);
  CHECK(CodeOf([] { ConfigFromJson(R"({"mode": "robust"})"); }) == ErrorCode::kConfig);
  CHECK(CodeOf([] {
          ConfigFromJson(R"({"preset": "I", "mode": "sometimes"})");
        }) == ErrorCode::kConfig);
  CHECK(CodeOf([] {
          ConfigFromJson(R"({"preset": "I", "values": {"kind": "poisson"}})");
        }) == ErrorCode::kConfig);
  CHECK(CodeOf([] {
          ConfigFromJson(R"({"preset": "I",
            "values": {"kind": "uniform", "lo": [1, 2], "hi": [1, 2]}})");
        }) == ErrorCode::kConfig);
  CHECK(CodeOf([] {
          ConfigFromJson(R"({"preset": "I", "values": {"kind":
            "robust-coinflip", "lo": [4,0,0,0,0,0,10], "hi": [7,3,0,0,0,0,10],
            "robust_probability": 0}})");
          ValidateConfig(ConfigFromJson(R"({"preset": "I", "values": {"kind":
            "robust-coinflip", "lo": [4,0,0,0,0,0,10], "hi": [7,3,0,0,0,0,10],
            "robust_probability": 0}})"));
        }) == ErrorCode::kConfig);
}

TEST_CASE("config JSON round trip") {
  for (const auto& cfg :
       {PresetConfig(Preset::kScenarioI, Mode::kRobust),
        PresetConfig(Preset::kScenarioII, Mode::kAverage),
        ConfigFromJson(kTwoPlayerConfig)}) {
    const std::string text = ConfigToJson(cfg);
    const auto back = ConfigFromJson(text);
    CHECK(ConfigToJson(back) == text);
    CHECK(back.num_players() == cfg.num_players());
    CHECK(back.window == cfg.window);
  }
}

TEST_CASE("supply chain experiments need a fixed grand value") {
  const std::string base = R"({
    "mode": "average", "steps": 30, "runs": 3,
    "schedule": {"preset": "three-player-cycle", "window": 2},
    "initial": [[2, 0, 0], [0, 2, 0], [0, 0, 2]],
    "values": {"kind": "supply-chain", "cost": 1, )";
  const auto varying = ConfigFromJson(
      base + R"("demand_min": [0.2, 0.2, 0.2], "demand_max": [2, 2, 2]}})");
  CHECK(CodeOf([&] { ValidateConfig(varying); }) ==
        ErrorCode::kAssumptionViolation);

  // Every demand saturates K: v_S = (|S| - 1) K whatever the draw.
  const auto saturated = ConfigFromJson(
      base + R"("demand_min": [1, 1.5, 1], "demand_max": [2, 2, 3]}})");
  CHECK(saturated.num_players() == 3);
  const auto r = RunExperiment(saturated);
  CHECK(r.tables.size() == 3);
  CHECK_FALSE(r.v_max);
  CHECK(r.v_mean.grand_value() == doctest::Approx(2.0));
  CHECK(r.reports[0].limit.sum() == doctest::Approx(2.0));
  auto robust = saturated;
  robust.mode = Mode::kRobust;
  CHECK(CodeOf([&] { ValidateConfig(robust); }) ==
        ErrorCode::kAssumptionViolation);
}

TEST_CASE("single run, single step aggregates") {
  auto cfg = PresetConfig(Preset::kScenarioI, Mode::kRobust);
  cfg.runs = 1;
  cfg.steps = 1;
  const auto r = RunExperiment(cfg);
  REQUIRE(r.traces.size() == 1);
  CHECK(r.traces[0].steps.size() == 1);
  CHECK(r.series.rows.size() == 2 * (3 * 4 + 1));
  for (const AggregateRow& row : r.series.rows) {
    CHECK(row.variance == 0.0);
    double sample;
    if (row.quantity == "D") {
      sample = r.tables[0].disagreement[row.t];
    } else if (row.quantity == "err") {
      sample = r.tables[0].err[row.t][row.player - 1];
    } else {
      sample = r.tables[0].x[row.t][row.player - 1][row.quantity[1] - '1'];
    }
    CHECK(row.mean == sample);
  }
  CHECK(r.series.rows.front().quantity == "x1");
  CHECK(r.series.rows[3].quantity == "err");
  CHECK(r.series.rows[12].quantity == "D");
  CHECK(r.series.rows[12].player == 0);
}

TEST_CASE("aggregates use population variance") {
  RunTable a, b;
  for (RunTable* r : {&a, &b}) {
    r->x = {{fixtures::Vec({0, 0}), fixtures::Vec({0, 0})}};
    r->err = {{0.0, 0.0}};
    r->disagreement = {0.0};
  }
  b.x[0][0] = fixtures::Vec({2, 4});
  const auto s = Aggregate({a, b});
  CHECK(s.rows[0].mean == 1.0);
  CHECK(s.rows[0].variance == 1.0);
  CHECK(s.rows[1].variance == 4.0);
}

TEST_CASE("results do not depend on the thread count") {
  auto cfg = PresetConfig(Preset::kScenarioI, Mode::kAverage);
  cfg.runs = 7;
  cfg.steps = 40;
  cfg.threads = 1;
  const auto one = RunExperiment(cfg);
  cfg.threads = 3;
  const auto three = RunExperiment(cfg);
  for (std::size_t k = 0; k < 7; ++k) {
    CHECK(one.reports[k].limit == three.reports[k].limit);
  }
  TempDir d1("threads1"), d3("threads3");
  ExportCsv(one, d1.path);
  ExportCsv(three, d3.path);
  CHECK(Slurp(d1.path / "aggregate.csv") == Slurp(d3.path / "aggregate.csv"));
  CHECK(Slurp(d1.path / "run_6.csv") == Slurp(d3.path / "run_6.csv"));

  cfg.seed = 2;
  const auto other = RunExperiment(cfg);
  CHECK_FALSE(other.reports[0].limit == one.reports[0].limit);
}

TEST_CASE("CSV export round trip") {
  auto cfg = PresetConfig(Preset::kScenarioI, Mode::kRobust);
  cfg.runs = 5;
  cfg.steps = 30;
  const auto r = RunExperiment(cfg);
  TempDir dir("roundtrip");
  ExportCsv(r, dir.path);

  const std::string agg = Slurp(dir.path / "aggregate.csv");
  CHECK(agg.rfind("t,quantity,player,mean,variance\n", 0) == 0);
  const std::string run0 = Slurp(dir.path / "run_0.csv");
  CHECK(run0.rfind("t,player,x1,x2,x3,err,D\n", 0) == 0);
  CHECK(run0.find("\n0,1,10,0,0,0,") != std::string::npos);

  const auto series = ReadAggregateCsv(dir.path / "aggregate.csv");
  REQUIRE(series.rows.size() == r.series.rows.size());
  for (std::size_t k = 0; k < series.rows.size(); ++k) {
    const auto& a = series.rows[k];
    const auto& b = r.series.rows[k];
    CHECK(a.t == b.t);
    CHECK(a.quantity == b.quantity);
    CHECK(a.player == b.player);
    CHECK(std::abs(a.mean - b.mean) <= 1e-10 * std::max(1.0, std::abs(b.mean)));
    CHECK(std::abs(a.variance - b.variance) <= 1e-10);
  }
  const auto table = ReadRunCsv(dir.path / "run_4.csv", 3);
  REQUIRE(table.steps() == 30);
  for (std::size_t t = 0; t <= 30; ++t) {
    for (int i = 0; i < 3; ++i) {
      CHECK((table.x[t][i] - r.tables[4].x[t][i]).lpNorm<Eigen::Infinity>() <=
            1e-10);
      CHECK(std::abs(table.err[t][i] - r.tables[4].err[t][i]) <= 1e-10);
    }
    CHECK(std::abs(table.disagreement[t] - r.tables[4].disagreement[t]) <= 1e-10);
  }

  const auto report = nlohmann::json::parse(Slurp(dir.path / "report.json"));
  CHECK(report["v_max"] == nlohmann::json({7, 3, 0, 0, 0, 0, 10}));
  CHECK(report["runs"].size() == 5);
  CHECK(report["validation"]["alpha"] == 0.5);
  CHECK(report["config"]["mode"] == "robust");

  const auto stored = LoadExperiment(dir.path);
  CHECK(stored.tables.size() == 5);
  CHECK(ConfigToJson(stored.config) == ConfigToJson(cfg));
  const auto verdicts = CheckAcceptance(stored.series, stored.tables, stored.config);
  bool consistent = false;
  for (const auto& v : verdicts) {
    if (v.id == "aggregate.consistency") consistent = v.passed;
  }
  CHECK(consistent);
}

TEST_CASE("malformed CSV files are rejected") {
  TempDir dir("malformed");
  fs::create_directories(dir.path);
  {
    std::ofstream(dir.path / "aggregate.csv") << "t,quantity,player,mean\n";
    std::ofstream(dir.path / "bad_row.csv")
        << "t,quantity,player,mean,variance\n0,x1,1,abc,0\n";
    std::ofstream(dir.path / "run.csv") << "t,player,x1,x2,err,D\n0,1,1,0\n";
  }
  CHECK(CodeOf([&] { ReadAggregateCsv(dir.path / "aggregate.csv"); }) ==
        ErrorCode::kIo);
  CHECK(CodeOf([&] { ReadAggregateCsv(dir.path / "bad_row.csv"); }) ==
        ErrorCode::kIo);
  CHECK(CodeOf([&] { ReadRunCsv(dir.path / "run.csv", 2); }) == ErrorCode::kIo);
  CHECK(CodeOf([&] { ReadAggregateCsv(dir.path / "missing.csv"); }) ==
        ErrorCode::kIo);
  CHECK(CodeOf([&] { LoadExperiment(dir.path / "nowhere"); }) == ErrorCode::kIo);
}

TEST_CASE("exporting an empty result writes headers only") {
  auto cfg = PresetConfig(Preset::kScenarioI, Mode::kRobust);
  const ExperimentResult empty{.config = cfg,
                               .validation = ValidateConfig(cfg),
                               .v_max = fixtures::VMaxI(),
                               .v_mean = fixtures::VMeanI()};
  TempDir dir("empty");
  ExportCsv(empty, dir.path);
  CHECK(Slurp(dir.path / "aggregate.csv") == "t,quantity,player,mean,variance\n");
  CHECK(ReadAggregateCsv(dir.path / "aggregate.csv").rows.empty());
  CHECK_FALSE(fs::exists(dir.path / "run_0.csv"));
  CHECK(Aggregate({}).rows.empty());
}

TEST_CASE("acceptance verdicts on the presets") {
  auto check = [](Preset p, Mode m) {
    const auto r = RunExperiment(PresetConfig(p, m));
    return CheckAcceptance(r.series, r.tables, r.config);
  };
  for (const auto& v : check(Preset::kScenarioI, Mode::kRobust)) {
    CAPTURE(v.id);
    CAPTURE(v.detail);
    CHECK(v.passed);
  }
  bool saw_empty = false;
  for (const auto& v : check(Preset::kScenarioII, Mode::kAverage)) {
    if (v.id == "scenario_ii.robust_core_empty") saw_empty = v.passed;
    if (v.id == "aggregate.consistency") CHECK(v.passed);
    if (v.id == "average.terminal_variance_positive") CHECK(v.passed);
  }
  CHECK(saw_empty);
}

TEST_CASE("aggregate tampering is detected") {
  auto cfg = PresetConfig(Preset::kScenarioI, Mode::kRobust);
  cfg.runs = 3;
  cfg.steps = 10;
  const auto r = RunExperiment(cfg);
  auto series = r.series;
  series.rows[5].mean += 1e-6;
  bool consistent = true;
  for (const auto& v : CheckAcceptance(series, r.tables, cfg)) {
    if (v.id == "aggregate.consistency") consistent = v.passed;
  }
  CHECK_FALSE(consistent);
}

TEST_CASE("number formatting") {
  CHECK(FormatNumber(0.1) == "0.1");
  CHECK(FormatNumber(-0.0) == "0");
  CHECK(FormatNumber(1.0 / 3) == "0.333333333333");
  CHECK(FormatNumber(10) == "10");
}

}  // namespace
}  // namespace tubargain
