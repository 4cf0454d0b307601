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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tubargain/game.hpp"
#include "tubargain/graphs.hpp"
#include "tubargain/protocol.hpp"
#include "tubargain/stochastic.hpp"

namespace tubargain {

inline constexpr std::uint64_t kDefaultSeed = 1;

enum class Preset { kScenarioI, kScenarioII, kCustom };

struct ExperimentConfig {
  std::string name;
  Preset preset = Preset::kCustom;
  Mode mode = Mode::kRobust;
  std::size_t steps = 100;
  std::size_t runs = 50;
  std::uint64_t seed = kDefaultSeed;
  ValueProcessSpec values;
  GraphSchedule schedule;
  int window = 2;  // Q for the connectivity check
  std::vector<Vector> initial;
  unsigned threads = 0;  // 0: one worker per hardware thread
  std::string output_dir;

  int num_players() const { return schedule.num_players(); }
};

// Scenario I: v_{1} ~ U[4,7], v_{2} ~ U[0,3], v_N = 10, other values 0.
// Scenario II: v_{1} ~ U[4,9], v_{2} ~ U[0,5]. Both use the three-player
// cycle schedule with Q = 2, corner initial allocations, 50 runs of 100
// steps. Robust mode draws v^max with probability 1/2 each step.
ExperimentConfig PresetConfig(Preset preset, Mode mode);

// "I" / "II" (case-insensitive); nullopt for anything else.
std::optional<Preset> ParsePreset(const std::string& name);

// JSON config file; see README for the schema. Throws ErrorCode::kConfig or
// ErrorCode::kIo.
ExperimentConfig LoadConfig(const std::filesystem::path& path);
ExperimentConfig ConfigFromJson(const std::string& text);
std::string ConfigToJson(const ExperimentConfig& config);

struct ValidationReport {
  double alpha = 0.0;
  bool connected = false;
  std::optional<int> minimal_window;
  std::optional<bool> robust_core_nonempty;  // nullopt: no fixed envelope
  bool mean_core_nonempty = false;
};

// Structural checks throw ErrorCode::kConfig; failed assumptions (weights,
// Q-connectivity, empty robust core in robust mode) throw
// ErrorCode::kAssumptionViolation.
ValidationReport ValidateConfig(const ExperimentConfig& config);

struct AggregateRow {
  std::size_t t = 0;
  std::string quantity;  // "x1".."xn", "err", or "D"
  int player = 0;        // 1-based; 0 for the global disagreement D
  double mean = 0.0;
  double variance = 0.0;  // population variance over runs
};

struct AggregateSeries {
  std::vector<AggregateRow> rows;
};

// Per-run data as written to run_<k>.csv. Indexed [t][player], t = 0..T.
// err[t][i] = ||e^i(t-1)||, the correction that produced x^i(t); 0 at t = 0.
struct RunTable {
  std::vector<std::vector<Vector>> x;
  std::vector<std::vector<double>> err;
  std::vector<double> disagreement;

  std::size_t steps() const { return x.empty() ? 0 : x.size() - 1; }
};

struct RunReport {
  std::size_t run = 0;
  StreamKey key;
  Vector limit;                  // y(T)
  bool in_core = false;          // y(T) in the target core within 1e-2
  double core_distance = 0.0;    // dist(y(T), target core); NaN if empty
  double disagreement = 0.0;     // D(T)
  std::optional<std::size_t> converged_at;
};

struct ExperimentResult {
  ExperimentConfig config;
  ValidationReport validation;
  std::optional<CharacteristicFunction> v_max;
  CharacteristicFunction v_mean;
  std::vector<RunTrace> traces;
  std::vector<RunTable> tables;
  std::vector<RunReport> reports;
  AggregateSeries series;
};

RunTable TableFromTrace(const RunTrace& trace);
AggregateSeries Aggregate(const std::vector<RunTable>& tables);

// Runs are independent and fan out over config.threads workers; outputs do
// not depend on the worker count.
ExperimentResult RunExperiment(const ExperimentConfig& config);

// Writes aggregate.csv, run_<k>.csv and report.json into `dir`.
void ExportCsv(const ExperimentResult& result,
               const std::filesystem::path& dir);

AggregateSeries ReadAggregateCsv(const std::filesystem::path& path);
RunTable ReadRunCsv(const std::filesystem::path& path, int num_players);

struct StoredExperiment {
  ExperimentConfig config;
  AggregateSeries series;
  std::vector<RunTable> tables;
};

StoredExperiment LoadExperiment(const std::filesystem::path& dir);

struct CriterionVerdict {
  std::string id;
  bool passed = false;
  std::string detail;
};

// Convergence properties applicable to the configuration's mode.
std::vector<CriterionVerdict> CheckAcceptance(
    const AggregateSeries& series, const std::vector<RunTable>& tables,
    const ExperimentConfig& config);

// Formats a number with 12 significant digits, as written to every output.
std::string FormatNumber(double value);

}  // namespace tubargain
