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

#include "tubargain/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tubargain/error.hpp"
#include "tubargain/geometry.hpp"

namespace tubargain {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kRobustCoreTol = 1e-2;
constexpr double kRobustLimitTol = 1e-2;
constexpr double kRobustVarianceTol = 1e-4;
constexpr double kDescentSlack = 1e-8;
constexpr double kAverageCoreTol = 5e-2;
constexpr double kAverageConsensusTol = 1e-2;
constexpr double kAggregateTol = 1e-10;

// ---------------------------------------------------------------------------
// Config (de)serialization

std::vector<double> Doubles(const json& j, const std::string& what) {
  if (!j.is_array()) Fail(ErrorCode::kConfig, what + " must be an array");
  std::vector<double> out;
  for (const json& e : j) {
    if (!e.is_number()) Fail(ErrorCode::kConfig, what + " must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

template <typename T>
T Get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) {
    Fail(ErrorCode::kConfig, where + ": missing '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    Fail(ErrorCode::kConfig, where + ": bad '" + key + "': " + e.what());
  }
}

int PlayersForValueCount(std::size_t count) {
  for (int n = 1; n <= kMaxPlayers; ++n) {
    if (NumCoalitions(n) == count) return n;
  }
  Fail(ErrorCode::kConfig,
       "value list of length " + std::to_string(count) +
           " is not 2^n - 1 for a supported player count");
}

ValueProcessSpec ValuesFromJson(const json& j) {
  const std::string where = "values";
  const auto kind = Get<std::string>(j, "kind", where);
  const std::string order = j.value("order", "mask");
  if (order != "mask" && order != "cardinality") {
    Fail(ErrorCode::kConfig, "values.order must be 'mask' or 'cardinality'");
  }
  const bool by_cardinality = order == "cardinality";
  auto bounds = [&]() {
    const auto lo = Doubles(Get<json>(j, "lo", where), "values.lo");
    const auto hi = Doubles(Get<json>(j, "hi", where), "values.hi");
    const int n = PlayersForValueCount(lo.size());
    try {
      return by_cardinality ? ValueBounds::FromCardinalityOrder(n, lo, hi)
                            : ValueBounds(n, lo, hi);
    } catch (const Error& e) {
      Fail(ErrorCode::kConfig, std::string("values: ") + e.what());
    }
  };
  if (kind == "uniform") return UniformProcess{bounds()};
  if (kind == "robust-coinflip") {
    return RobustCoinflipProcess{bounds(),
                                 j.value("robust_probability", 0.5)};
  }
  if (kind == "supply-chain") {
    return SupplyChainProcess{
        Get<double>(j, "cost", where),
        Doubles(Get<json>(j, "demand_min", where), "values.demand_min"),
        Doubles(Get<json>(j, "demand_max", where), "values.demand_max")};
  }
  if (kind == "constant") {
    const auto v = Doubles(Get<json>(j, "value", where), "values.value");
    const int n = PlayersForValueCount(v.size());
    return ConstantProcess{by_cardinality
                               ? CharacteristicFunction::FromCardinalityOrder(n, v)
                               : CharacteristicFunction(n, v)};
  }
  Fail(ErrorCode::kConfig, "unknown values.kind '" + kind + "'");
}

json ValuesToJson(const ValueProcessSpec& spec) {
  auto span_json = [](std::span<const double> s) {
    return json(std::vector<double>(s.begin(), s.end()));
  };
  return std::visit(
      [&](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, UniformProcess>) {
          return {{"kind", "uniform"},
                  {"order", "mask"},
                  {"lo", span_json(p.bounds.lo())},
                  {"hi", span_json(p.bounds.hi())}};
        } else if constexpr (std::is_same_v<T, RobustCoinflipProcess>) {
          return {{"kind", "robust-coinflip"},
                  {"order", "mask"},
                  {"lo", span_json(p.bounds.lo())},
                  {"hi", span_json(p.bounds.hi())},
                  {"robust_probability", p.robust_probability}};
        } else if constexpr (std::is_same_v<T, SupplyChainProcess>) {
          return {{"kind", "supply-chain"},
                  {"cost", p.cost},
                  {"demand_min", p.demand_min},
                  {"demand_max", p.demand_max}};
        } else {
          return {{"kind", "constant"},
                  {"order", "mask"},
                  {"value", span_json(p.value.values())}};
        }
      },
      spec);
}

GraphSchedule ScheduleFromJson(const json& j) {
  if (j.contains("preset")) {
    const auto name = Get<std::string>(j, "preset", "schedule");
    if (name != "three-player-cycle") {
      Fail(ErrorCode::kConfig, "unknown schedule preset '" + name + "'");
    }
    return ThreePlayerCycleSchedule();
  }
  const json& frames = Get<json>(j, "frames", "schedule");
  if (!frames.is_array() || frames.empty()) {
    Fail(ErrorCode::kConfig, "schedule.frames must be a nonempty array");
  }
  std::vector<GraphFrame> out;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const std::string where = "schedule.frames[" + std::to_string(f) + "]";
    const json& rows = Get<json>(frames[f], "weights", where);
    const auto n = static_cast<Eigen::Index>(rows.size());
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto row = Doubles(rows[i], where + ".weights");
      if (static_cast<Eigen::Index>(row.size()) != n) {
        Fail(ErrorCode::kConfig, where + ": weight matrix is not square");
      }
      for (Eigen::Index k = 0; k < n; ++k) a(i, k) = row[k];
    }
    GraphFrame frame{{}, a};
    if (frames[f].contains("edges")) {
      for (const json& e : frames[f]["edges"]) {
        if (!e.is_array() || e.size() != 2) {
          Fail(ErrorCode::kConfig, where + ": edges are [i, j] pairs");
        }
        frame.edges.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1);
      }
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
          if (a(i, k) != 0.0) {
            frame.edges.emplace_back(static_cast<int>(i), static_cast<int>(k));
          }
        }
      }
    }
    out.push_back(std::move(frame));
  }
  try {
    return GraphSchedule(std::move(out));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kAssumptionViolation) throw;
    Fail(ErrorCode::kConfig, std::string("schedule: ") + e.what());
  }
}

json ScheduleToJson(const GraphSchedule& s, int window) {
  json frames = json::array();
  for (const GraphFrame& f : s.frames()) {
    json edges = json::array();
    for (const auto& [i, k] : f.edges) edges.push_back({i + 1, k + 1});
    json rows = json::array();
    for (Eigen::Index i = 0; i < f.weights.rows(); ++i) {
      std::vector<double> row(f.weights.cols());
      for (Eigen::Index k = 0; k < f.weights.cols(); ++k) {
        row[k] = f.weights(i, k);
      }
      rows.push_back(row);
    }
    frames.push_back({{"edges", edges}, {"weights", rows}});
  }
  return {{"window", window}, {"frames", frames}};
}

std::string PresetName(Preset p) {
  switch (p) {
    case Preset::kScenarioI:
      return "I";
    case Preset::kScenarioII:
      return "II";
    case Preset::kCustom:
      break;
  }
  return "custom";
}

// ---------------------------------------------------------------------------
// Statistics and I/O helpers

std::pair<double, double> MeanAndVariance(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, var / static_cast<double>(xs.size())};
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double ParseDouble(const std::string& s, const fs::path& path,
                   std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    Fail(ErrorCode::kIo, path.string() + ":" + std::to_string(line) +
                             ": bad number '" + s + "'");
  }
}

std::ofstream OpenForWrite(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

std::ifstream OpenForRead(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot read " + path.string());
  return in;
}

double RoundForOutput(double v) { return std::stod(FormatNumber(v)); }

json VectorJson(const Vector& v) {
  std::vector<double> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = RoundForOutput(v[i]);
  return out;
}

json GameJson(const std::optional<CharacteristicFunction>& v) {
  if (!v) return nullptr;
  std::vector<double> out;
  for (double x : v->values()) out.push_back(RoundForOutput(x));
  return out;
}

json NumberOrNull(double v) {
  return std::isfinite(v) ? json(RoundForOutput(v)) : json(nullptr);
}

// z in C(v): the mean of the core's vertices, exact for a singleton core.
std::optional<Vector> CoreCenter(const CharacteristicFunction& v,
                                 bool* singleton) {
  const PolyhedronSpec core = CoreConstraints(v);
  if (v.num_players() <= 4) {
    const auto vertices = EnumerateVertices(core);
    if (vertices.empty()) return std::nullopt;
    Vector c = Vector::Zero(v.num_players());
    for (const Vector& p : vertices) c += p;
    if (singleton) *singleton = vertices.size() == 1;
    return c / static_cast<double>(vertices.size());
  }
  if (singleton) *singleton = false;
  return CoreIsNonempty(v);
}

bool IsRandomProcess(const ValueProcessSpec& spec) {
  return std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantProcess>) {
          return false;
        } else if constexpr (std::is_same_v<T, SupplyChainProcess>) {
          return p.demand_min != p.demand_max;
        } else if constexpr (std::is_same_v<T, RobustCoinflipProcess>) {
          return !p.bounds.IsDegenerate() && p.robust_probability < 1.0;
        } else {
          return !p.bounds.IsDegenerate();
        }
      },
      spec);
}

std::string Fmt(double v) { return FormatNumber(v); }

}  // namespace

// ---------------------------------------------------------------------------

std::string FormatNumber(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

ExperimentConfig PresetConfig(Preset preset, Mode mode) {
  if (preset == Preset::kCustom) {
    Fail(ErrorCode::kConfig, "custom experiments come from a config file");
  }
  const double lo[] = {4, 0, 0, 0, 0, 0, 10};
  const double hi_i[] = {7, 3, 0, 0, 0, 0, 10};
  const double hi_ii[] = {9, 5, 0, 0, 0, 0, 10};
  ValueBounds bounds = ValueBounds::FromCardinalityOrder(
      3, lo, preset == Preset::kScenarioI ? hi_i : hi_ii);
  ValueProcessSpec values =
      mode == Mode::kRobust
          ? ValueProcessSpec(RobustCoinflipProcess{bounds, 0.5})
          : ValueProcessSpec(UniformProcess{bounds});
  return ExperimentConfig{
      .name = PresetName(preset),
      .preset = preset,
      .mode = mode,
      .steps = 100,
      .runs = 50,
      .seed = kDefaultSeed,
      .values = std::move(values),
      .schedule = ThreePlayerCycleSchedule(),
      .window = 2,
      .initial = CornerAllocations(3, 10.0),
  };
}

std::optional<Preset> ParsePreset(const std::string& name) {
  std::string upper;
  for (char c : name) upper.push_back(static_cast<char>(std::toupper(c)));
  if (upper == "I") return Preset::kScenarioI;
  if (upper == "II") return Preset::kScenarioII;
  return std::nullopt;
}

ExperimentConfig ConfigFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kConfig, std::string("config is not valid JSON: ") +
                                 e.what());
  }
  if (!j.is_object()) Fail(ErrorCode::kConfig, "config must be a JSON object");

  const Mode mode = ParseMode(j.value("mode", "robust"));
  std::optional<ExperimentConfig> cfg;
  if (j.contains("preset") && j["preset"] != "custom") {
    const auto preset = ParsePreset(Get<std::string>(j, "preset", "config"));
    if (!preset) Fail(ErrorCode::kConfig, "preset must be I, II or custom");
    cfg = PresetConfig(*preset, mode);
  } else {
    if (!j.contains("values") || !j.contains("schedule")) {
      Fail(ErrorCode::kConfig,
           "custom config needs 'values' and 'schedule' sections");
    }
    cfg = ExperimentConfig{.name = "custom",
                           .preset = Preset::kCustom,
                           .mode = mode,
                           .values = ValuesFromJson(j["values"]),
                           .schedule = ScheduleFromJson(j["schedule"])};
  }
  if (j.contains("values")) cfg->values = ValuesFromJson(j["values"]);
  if (j.contains("schedule")) {
    cfg->schedule = ScheduleFromJson(j["schedule"]);
    cfg->window = j["schedule"].value("window", cfg->window);
  }
  cfg->name = j.value("name", cfg->name);
  cfg->steps = j.value("steps", cfg->steps);
  cfg->runs = j.value("runs", cfg->runs);
  cfg->seed = j.value("seed", cfg->seed);
  cfg->threads = j.value("threads", cfg->threads);
  cfg->output_dir = j.value("output", cfg->output_dir);

  const int n = cfg->num_players();
  if (j.contains("initial")) {
    cfg->initial.clear();
    for (const json& row : j["initial"]) {
      const auto x = Doubles(row, "initial");
      cfg->initial.push_back(Eigen::Map<const Vector>(
          x.data(), static_cast<Eigen::Index>(x.size())));
    }
  } else if (cfg->preset == Preset::kCustom) {
    const auto envelope = RobustEnvelope(cfg->values);
    const double total = envelope ? envelope->grand_value()
                                  : MeanCharacteristic(cfg->values).grand_value();
    cfg->initial = CornerAllocations(n, total);
  }
  return *cfg;
}

ExperimentConfig LoadConfig(const fs::path& path) {
  std::ifstream in = OpenForRead(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ConfigFromJson(ss.str());
}

std::string ConfigToJson(const ExperimentConfig& config) {
  json initial = json::array();
  for (const Vector& x : config.initial) {
    initial.push_back(std::vector<double>(x.data(), x.data() + x.size()));
  }
  const json j = {
      {"name", config.name},
      {"preset", PresetName(config.preset)},
      {"mode", std::string(ModeName(config.mode))},
      {"steps", config.steps},
      {"runs", config.runs},
      {"seed", config.seed},
      {"threads", config.threads},
      {"values", ValuesToJson(config.values)},
      {"schedule", ScheduleToJson(config.schedule, config.window)},
      {"initial", initial},
      {"output", config.output_dir},
  };
  return j.dump(2);
}

ValidationReport ValidateConfig(const ExperimentConfig& config) {
  if (config.steps < 1) Fail(ErrorCode::kConfig, "steps must be >= 1");
  if (config.runs < 1) Fail(ErrorCode::kConfig, "runs must be >= 1");
  if (config.window < 1) Fail(ErrorCode::kConfig, "window Q must be >= 1");
  ValidateProcess(config.values);
  const int n = config.num_players();
  if (NumPlayers(config.values) != n) {
    Fail(ErrorCode::kConfig, "value process has " +
                                 std::to_string(NumPlayers(config.values)) +
                                 " players, schedule has " +
                                 std::to_string(n));
  }
  if (static_cast<int>(config.initial.size()) != n) {
    Fail(ErrorCode::kConfig, "need one initial proposal per player");
  }
  for (const Vector& x : config.initial) {
    if (x.size() != n || !x.allFinite()) {
      Fail(ErrorCode::kConfig, "initial proposals must be finite n-vectors");
    }
  }

  if (const auto* sc = std::get_if<SupplyChainProcess>(&config.values)) {
    // v_N = sum_i min{K, d_i} - min{K, sum_i d_i} stays fixed only when
    // every demand saturates K or the demands are deterministic.
    const bool saturated =
        std::all_of(sc->demand_min.begin(), sc->demand_min.end(),
                    [&](double d) { return d >= sc->cost; });
    if (!saturated && sc->demand_min != sc->demand_max) {
      Fail(ErrorCode::kAssumptionViolation,
           "supply-chain grand-coalition value varies with the demands; the "
           "protocol needs a fixed v_N");
    }
  }

  ValidationReport report;
  report.alpha = ValidateWeights(config.schedule);
  report.connected = ValidateConnectivity(config.schedule, config.window);
  report.minimal_window = MinimalConnectivityWindow(
      config.schedule,
      static_cast<int>(std::max<std::size_t>(config.schedule.period(), 1)) *
          n);
  if (!report.connected) {
    std::string msg = "schedule is not strongly connected over windows of Q=" +
                      std::to_string(config.window);
    msg += report.minimal_window
               ? " (smallest passing Q is " +
                     std::to_string(*report.minimal_window) + ")"
               : " (no window up to period*n connects it)";
    Fail(ErrorCode::kAssumptionViolation, msg);
  }

  const auto envelope = RobustEnvelope(config.values);
  if (envelope) report.robust_core_nonempty = CoreIsNonempty(*envelope).has_value();
  report.mean_core_nonempty =
      CoreIsNonempty(MeanCharacteristic(config.values)).has_value();
  if (config.mode == Mode::kRobust) {
    if (!envelope) {
      Fail(ErrorCode::kAssumptionViolation,
           "robust mode needs a fixed grand-coalition value and per-coalition "
           "upper bounds");
    }
    if (!*report.robust_core_nonempty) {
      Fail(ErrorCode::kAssumptionViolation,
           "core of the robust game C(v^max) is empty");
    }
  }
  return report;
}

RunTable TableFromTrace(const RunTrace& trace) {
  RunTable table;
  const std::size_t n = trace.initial.proposals.size();
  table.x.push_back(trace.initial.proposals);
  table.err.emplace_back(n, 0.0);
  table.disagreement.push_back(Disagreement(trace.initial.proposals));
  for (const StepRecord& rec : trace.steps) {
    table.x.push_back(rec.proposals);
    std::vector<double> err(n);
    for (std::size_t i = 0; i < n; ++i) err[i] = rec.errors[i].norm();
    table.err.push_back(std::move(err));
    table.disagreement.push_back(rec.disagreement);
  }
  return table;
}

AggregateSeries Aggregate(const std::vector<RunTable>& tables) {
  AggregateSeries series;
  if (tables.empty()) return series;
  const std::size_t steps = tables.front().steps();
  const std::size_t n = tables.front().x.front().size();
  std::vector<double> samples(tables.size());
  auto push = [&](std::size_t t, std::string q, int player, auto&& get) {
    for (std::size_t k = 0; k < tables.size(); ++k) samples[k] = get(tables[k]);
    const auto [mean, var] = MeanAndVariance(samples);
    series.rows.push_back({t, std::move(q), player, mean, var});
  };
  for (std::size_t t = 0; t <= steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        push(t, "x" + std::to_string(j + 1), static_cast<int>(i + 1),
             [&](const RunTable& r) { return r.x[t][i][j]; });
      }
      push(t, "err", static_cast<int>(i + 1),
           [&](const RunTable& r) { return r.err[t][i]; });
    }
    push(t, "D", 0, [&](const RunTable& r) { return r.disagreement[t]; });
  }
  return series;
}

ExperimentResult RunExperiment(const ExperimentConfig& config) {
  ExperimentResult result{
      .config = config,
      .validation = ValidateConfig(config),
      .v_max = RobustEnvelope(config.values),
      .v_mean = MeanCharacteristic(config.values),
  };
  const int n = config.num_players();
  const std::size_t runs = config.runs;
  const RunOptions options{.core_distances = n <= 4};

  std::vector<std::optional<RunTrace>> traces(runs);
  std::vector<std::exception_ptr> failures(runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < runs; k = next++) {
      try {
        const SeededStream stream(
            config.values,
            StreamKey{config.seed, static_cast<std::uint32_t>(k)});
        traces[k] = Run(
            config.mode, [&](std::uint64_t t) { return stream.Draw(t); },
            config.schedule, config.initial, config.steps, options);
      } catch (...) {
        failures[k] = std::current_exception();
      }
    }
  };
  unsigned threads = config.threads ? config.threads
                                    : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, runs));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
  }
  for (std::size_t k = 0; k < runs; ++k) {
    if (failures[k]) {
      try {
        std::rethrow_exception(failures[k]);
      } catch (const Error& e) {
        throw Error(e.code(), "run " + std::to_string(k) + ": " + e.what());
      }
    }
  }

  const CharacteristicFunction& target =
      config.mode == Mode::kRobust ? *result.v_max : result.v_mean;
  const PolyhedronSpec target_core = CoreConstraints(target);
  const bool target_nonempty = CoreIsNonempty(target).has_value();
  for (std::size_t k = 0; k < runs; ++k) {
    RunTrace& trace = *traces[k];
    RunReport rep;
    rep.run = k;
    rep.key = StreamKey{config.seed, static_cast<std::uint32_t>(k)};
    rep.limit = trace.steps.back().mean;
    rep.in_core = IsInCore(rep.limit, target, kRobustCoreTol);
    rep.core_distance = target_nonempty
                            ? DistanceTo(rep.limit, target_core)
                            : std::numeric_limits<double>::quiet_NaN();
    rep.disagreement = trace.steps.back().disagreement;
    rep.converged_at = trace.converged_at;
    result.reports.push_back(std::move(rep));
    result.tables.push_back(TableFromTrace(trace));
    result.traces.push_back(std::move(trace));
  }
  result.series = Aggregate(result.tables);
  return result;
}

void ExportCsv(const ExperimentResult& result, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    Fail(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  }
  const int n = result.config.num_players();

  {
    std::ofstream out = OpenForWrite(dir / "aggregate.csv");
    out << "t,quantity,player,mean,variance\n";
    for (const AggregateRow& r : result.series.rows) {
      out << r.t << ',' << r.quantity << ',' << r.player << ','
          << Fmt(r.mean) << ',' << Fmt(r.variance) << '\n';
    }
    if (!out) Fail(ErrorCode::kIo, "write failed: " + (dir / "aggregate.csv").string());
  }

  for (std::size_t k = 0; k < result.tables.size(); ++k) {
    const fs::path path = dir / ("run_" + std::to_string(k) + ".csv");
    std::ofstream out = OpenForWrite(path);
    out << "t,player";
    for (int j = 1; j <= n; ++j) out << ",x" << j;
    out << ",err,D\n";
    const RunTable& table = result.tables[k];
    for (std::size_t t = 0; t < table.x.size(); ++t) {
      for (int i = 0; i < n; ++i) {
        out << t << ',' << (i + 1);
        for (int j = 0; j < n; ++j) out << ',' << Fmt(table.x[t][i][j]);
        out << ',' << Fmt(table.err[t][i]) << ',' << Fmt(table.disagreement[t])
            << '\n';
      }
    }
    if (!out) Fail(ErrorCode::kIo, "write failed: " + path.string());
  }

  json runs = json::array();
  for (const RunReport& r : result.reports) {
    runs.push_back({
        {"run", r.run},
        {"seed", {r.key.master_seed, r.key.run}},
        {"limit", VectorJson(r.limit)},
        {"in_core", r.in_core},
        {"core_distance", NumberOrNull(r.core_distance)},
        {"disagreement", NumberOrNull(r.disagreement)},
        {"converged_at",
         r.converged_at ? json(*r.converged_at) : json(nullptr)},
    });
  }
  const ValidationReport& v = result.validation;
  const json report = {
      {"format", "tubargain-report/1"},
      {"config", json::parse(ConfigToJson(result.config))},
      {"players", n},
      {"v_max", GameJson(result.v_max)},
      {"v_mean", GameJson(result.v_mean)},
      {"validation",
       {{"alpha", RoundForOutput(v.alpha)},
        {"window", result.config.window},
        {"minimal_window",
         v.minimal_window ? json(*v.minimal_window) : json(nullptr)},
        {"robust_core_nonempty", v.robust_core_nonempty
                                     ? json(*v.robust_core_nonempty)
                                     : json(nullptr)},
        {"mean_core_nonempty", v.mean_core_nonempty}}},
      {"runs", runs},
  };
  std::ofstream out = OpenForWrite(dir / "report.json");
  out << report.dump(2) << '\n';
  if (!out) Fail(ErrorCode::kIo, "write failed: " + (dir / "report.json").string());
}

AggregateSeries ReadAggregateCsv(const fs::path& path) {
  std::ifstream in = OpenForRead(path);
  std::string line;
  if (!std::getline(in, line) || line != "t,quantity,player,mean,variance") {
    Fail(ErrorCode::kIo, path.string() + ": unexpected header");
  }
  AggregateSeries series;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = SplitCsv(line);
    if (cells.size() != 5) {
      Fail(ErrorCode::kIo, path.string() + ":" + std::to_string(lineno) +
                               ": expected 5 columns");
    }
    series.rows.push_back(
        {static_cast<std::size_t>(ParseDouble(cells[0], path, lineno)),
         cells[1], static_cast<int>(ParseDouble(cells[2], path, lineno)),
         ParseDouble(cells[3], path, lineno),
         ParseDouble(cells[4], path, lineno)});
  }
  return series;
}

RunTable ReadRunCsv(const fs::path& path, int num_players) {
  std::ifstream in = OpenForRead(path);
  std::string line;
  std::string header = "t,player";
  for (int j = 1; j <= num_players; ++j) header += ",x" + std::to_string(j);
  header += ",err,D";
  if (!std::getline(in, line) || line != header) {
    Fail(ErrorCode::kIo, path.string() + ": unexpected header");
  }
  RunTable table;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = SplitCsv(line);
    if (cells.size() != static_cast<std::size_t>(num_players) + 4) {
      Fail(ErrorCode::kIo, path.string() + ":" + std::to_string(lineno) +
                               ": wrong column count");
    }
    const auto t = static_cast<std::size_t>(ParseDouble(cells[0], path, lineno));
    const int player = static_cast<int>(ParseDouble(cells[1], path, lineno));
    const bool in_order =
        player == 1 ? t == table.x.size()
                    : !table.x.empty() && t + 1 == table.x.size() &&
                          player == static_cast<int>(table.x.back().size()) + 1;
    if (!in_order) {
      Fail(ErrorCode::kIo, path.string() + ":" + std::to_string(lineno) +
                               ": rows out of order");
    }
    if (player == 1) {
      table.x.emplace_back();
      table.err.emplace_back();
      table.disagreement.push_back(
          ParseDouble(cells.back(), path, lineno));
    }
    Vector x(num_players);
    for (int j = 0; j < num_players; ++j) {
      x[j] = ParseDouble(cells[2 + j], path, lineno);
    }
    table.x.back().push_back(std::move(x));
    table.err.back().push_back(
        ParseDouble(cells[2 + num_players], path, lineno));
  }
  for (const auto& row : table.x) {
    if (static_cast<int>(row.size()) != num_players) {
      Fail(ErrorCode::kIo, path.string() + ": incomplete time step");
    }
  }
  return table;
}

StoredExperiment LoadExperiment(const fs::path& dir) {
  std::ifstream in = OpenForRead(dir / "report.json");
  json report;
  try {
    report = json::parse(in);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kIo, (dir / "report.json").string() + ": " + e.what());
  }
  if (!report.contains("config")) {
    Fail(ErrorCode::kIo, (dir / "report.json").string() + ": no config");
  }
  StoredExperiment stored{
      .config = ConfigFromJson(report["config"].dump()),
      .series = ReadAggregateCsv(dir / "aggregate.csv"),
      .tables = {},
  };
  const int n = stored.config.num_players();
  for (std::size_t k = 0; k < stored.config.runs; ++k) {
    stored.tables.push_back(
        ReadRunCsv(dir / ("run_" + std::to_string(k) + ".csv"), n));
  }
  return stored;
}

std::vector<CriterionVerdict> CheckAcceptance(
    const AggregateSeries& series, const std::vector<RunTable>& tables,
    const ExperimentConfig& config) {
  std::vector<CriterionVerdict> out;
  if (tables.empty()) {
    out.push_back({"runs.present", false, "no runs to check"});
    return out;
  }
  const std::size_t steps = tables.front().steps();
  const int n = config.num_players();
  std::vector<Vector> limits;
  for (const RunTable& r : tables) limits.push_back(MeanProposal(r.x.back()));

  // Largest variance of any allocation coordinate at the final step.
  double terminal_var_max = 0.0;
  for (const AggregateRow& row : series.rows) {
    if (row.t == steps && row.quantity[0] == 'x') {
      terminal_var_max = std::max(terminal_var_max, row.variance);
    }
  }

  const auto v_max = RobustEnvelope(config.values);
  if (config.mode == Mode::kRobust) {
    bool singleton = false;
    const auto z = v_max ? CoreCenter(*v_max, &singleton) : std::nullopt;
    out.push_back({"robust.core_nonempty", z.has_value(),
                   z ? "z = [" + [&] {
                     std::string s;
                     for (int i = 0; i < n; ++i) s += (i ? " " : "") + Fmt((*z)[i]);
                     return s;
                   }() + "]"
                     : "C(v^max) is empty or undefined"});
    if (z) {
      std::size_t bad = 0;
      for (const Vector& y : limits) bad += !IsInCore(y, *v_max, kRobustCoreTol);
      out.push_back({"robust.terminal_in_core", bad == 0,
                     std::to_string(tables.size() - bad) + "/" +
                         std::to_string(tables.size()) +
                         " runs have y(T) in C(v^max) within 1e-2"});
      if (singleton) {
        double worst = 0.0;
        for (const Vector& y : limits) {
          worst = std::max(worst, (y - *z).lpNorm<Eigen::Infinity>());
        }
        out.push_back({"robust.terminal_limit", worst <= kRobustLimitTol,
                       "max_k ||y(T) - z||_inf = " + Fmt(worst)});
        out.push_back({"robust.terminal_variance",
                       terminal_var_max <= kRobustVarianceTol,
                       "max terminal variance = " + Fmt(terminal_var_max)});
      }
      double worst_descent = -std::numeric_limits<double>::infinity();
      double worst_sum_slack = std::numeric_limits<double>::infinity();
      for (const RunTable& r : tables) {
        auto lyap = [&](std::size_t t) {
          double v = 0.0;
          for (const Vector& x : r.x[t]) v += (x - *z).squaredNorm();
          return v;
        };
        double prev = lyap(0);
        const double v0 = prev;
        double err_total = 0.0;
        for (std::size_t t = 1; t <= r.steps(); ++t) {
          double e2 = 0.0;
          for (double e : r.err[t]) e2 += e * e;
          const double cur = lyap(t);
          worst_descent = std::max(worst_descent, cur - (prev - e2));
          err_total += e2;
          prev = cur;
        }
        worst_sum_slack = std::min(worst_sum_slack, v0 - err_total);
      }
      out.push_back({"robust.lyapunov_descent", worst_descent <= kDescentSlack,
                     "max_t V(t+1) - V(t) + sum_i ||e^i(t)||^2 = " +
                         Fmt(worst_descent)});
      out.push_back({"robust.error_summability",
                     worst_sum_slack >= -kDescentSlack,
                     "min_k V(0) - sum_t sum_i ||e^i(t)||^2 = " +
                         Fmt(worst_sum_slack)});
    }
  } else {
    const CharacteristicFunction v_mean = MeanCharacteristic(config.values);
    const bool mean_core = CoreIsNonempty(v_mean).has_value();
    double worst_dist = std::numeric_limits<double>::infinity();
    if (mean_core) {
      const PolyhedronSpec core = CoreConstraints(v_mean);
      worst_dist = 0.0;
      for (const Vector& y : limits) {
        worst_dist = std::max(worst_dist, DistanceTo(y, core));
      }
    }
    out.push_back({"average.terminal_core_distance",
                   mean_core && worst_dist <= kAverageCoreTol,
                   mean_core ? "max_k dist(y(T), C(v^mean)) = " + Fmt(worst_dist)
                             : "C(v^mean) is empty"});
    double worst_d = 0.0;
    for (const RunTable& r : tables) {
      worst_d = std::max(worst_d, r.disagreement.back());
    }
    out.push_back({"average.terminal_consensus",
                   worst_d <= kAverageConsensusTol,
                   "max_k D(T) = " + Fmt(worst_d)});
    if (tables.size() > 1 && IsRandomProcess(config.values)) {
      out.push_back({"average.terminal_variance_positive",
                     terminal_var_max > 0.0,
                     "max terminal variance = " + Fmt(terminal_var_max)});
    }
    if (config.preset == Preset::kScenarioII) {
      const bool empty = !CoreIsNonempty(*v_max).has_value();
      out.push_back({"scenario_ii.robust_core_empty", empty,
                     empty ? "C(v^max) is empty" : "C(v^max) is nonempty"});
    }
  }

  const AggregateSeries recomputed = Aggregate(tables);
  bool consistent = recomputed.rows.size() == series.rows.size();
  double worst_gap = 0.0;
  for (std::size_t r = 0; consistent && r < series.rows.size(); ++r) {
    const AggregateRow& a = series.rows[r];
    const AggregateRow& b = recomputed.rows[r];
    if (a.t != b.t || a.quantity != b.quantity || a.player != b.player) {
      consistent = false;
      break;
    }
    const double scale = std::max(1.0, std::abs(b.mean));
    worst_gap = std::max({worst_gap, std::abs(a.mean - b.mean) / scale,
                          std::abs(a.variance - b.variance) / scale});
  }
  consistent = consistent && worst_gap <= kAggregateTol;
  out.push_back({"aggregate.consistency", consistent,
                 "max relative gap = " + Fmt(worst_gap)});
  return out;
}

}  // namespace tubargain
