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

#include "tubargain/tubargain.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "tubargain/error.hpp"
#include "tubargain/game.hpp"
#include "tubargain/geometry.hpp"
#include "tubargain/harness.hpp"

namespace tb = tubargain;

struct tub_config {
  tb::ExperimentConfig config;
};

struct tub_experiment {
  tb::ExperimentResult result;
};

struct tub_verdicts {
  std::vector<tb::CriterionVerdict> items;
};

namespace {

thread_local std::string last_error;

tub_status StatusFor(tb::ErrorCode code) {
  switch (code) {
    case tb::ErrorCode::kInvalidArgument:
      return TUB_ERR_INVALID_ARGUMENT;
    case tb::ErrorCode::kInvalidCoalition:
      return TUB_ERR_INVALID_COALITION;
    case tb::ErrorCode::kInfeasibleSet:
      return TUB_ERR_INFEASIBLE_SET;
    case tb::ErrorCode::kAssumptionViolation:
      return TUB_ERR_ASSUMPTION;
    case tb::ErrorCode::kConfig:
      return TUB_ERR_CONFIG;
    case tb::ErrorCode::kIo:
      return TUB_ERR_IO;
    case tb::ErrorCode::kNumeric:
      return TUB_ERR_NUMERIC;
  }
  return TUB_ERR_INTERNAL;
}

tub_status Reject(tub_status status, std::string msg) {
  last_error = std::move(msg);
  return status;
}

template <typename F>
tub_status Guard(F&& body) {
  try {
    last_error.clear();
    body();
    return TUB_OK;
  } catch (const tb::Error& e) {
    return Reject(StatusFor(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Reject(TUB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Reject(TUB_ERR_INTERNAL, e.what());
  } catch (...) {
    return Reject(TUB_ERR_INTERNAL, "unknown failure");
  }
}

#define TUB_REQUIRE(cond, what)                                      \
  do {                                                               \
    if (!(cond)) return Reject(TUB_ERR_INVALID_ARGUMENT, what);      \
  } while (0)

tb::Mode ToMode(tub_mode mode) {
  if (mode == TUB_MODE_ROBUST) return tb::Mode::kRobust;
  if (mode == TUB_MODE_AVERAGE) return tb::Mode::kAverage;
  tb::Fail(tb::ErrorCode::kInvalidArgument, "unknown mode");
}

tb::CharacteristicFunction GameFrom(int n, const double* values) {
  if (n < 1 || n > tb::kMaxPlayers) {
    tb::Fail(tb::ErrorCode::kInvalidArgument, "player count out of range");
  }
  const std::size_t m = tb::NumCoalitions(n);
  return tb::CharacteristicFunction(n, std::vector<double>(values, values + m));
}

}  // namespace

extern "C" {

const char* tub_version(void) { return "0.1.0"; }

const char* tub_last_error(void) { return last_error.c_str(); }

const char* tub_status_name(tub_status status) {
  switch (status) {
    case TUB_OK:
      return "ok";
    case TUB_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case TUB_ERR_INVALID_COALITION:
      return "invalid coalition";
    case TUB_ERR_INFEASIBLE_SET:
      return "infeasible set";
    case TUB_ERR_ASSUMPTION:
      return "assumption violation";
    case TUB_ERR_CONFIG:
      return "config error";
    case TUB_ERR_IO:
      return "i/o error";
    case TUB_ERR_NUMERIC:
      return "numeric failure";
    case TUB_ERR_INTERNAL:
      break;
  }
  return "internal error";
}

tub_status tub_config_from_preset(const char* preset, tub_mode mode,
                                  tub_config** out) {
  TUB_REQUIRE(preset && out, "null argument");
  return Guard([&] {
    const auto p = tb::ParsePreset(preset);
    if (!p) {
      tb::Fail(tb::ErrorCode::kConfig,
               std::string("unknown preset '") + preset + "'");
    }
    *out = new tub_config{tb::PresetConfig(*p, ToMode(mode))};
  });
}

tub_status tub_config_from_file(const char* path, tub_config** out) {
  TUB_REQUIRE(path && out, "null argument");
  return Guard([&] { *out = new tub_config{tb::LoadConfig(path)}; });
}

tub_status tub_config_from_json(const char* text, tub_config** out) {
  TUB_REQUIRE(text && out, "null argument");
  return Guard([&] { *out = new tub_config{tb::ConfigFromJson(text)}; });
}

void tub_config_free(tub_config* config) { delete config; }

tub_status tub_config_set_mode(tub_config* config, tub_mode mode) {
  TUB_REQUIRE(config, "null config");
  return Guard([&] { config->config.mode = ToMode(mode); });
}

tub_status tub_config_set_runs(tub_config* config, size_t runs) {
  TUB_REQUIRE(config, "null config");
  if (runs < 1) return Reject(TUB_ERR_CONFIG, "runs must be >= 1");
  config->config.runs = runs;
  return TUB_OK;
}

tub_status tub_config_set_steps(tub_config* config, size_t steps) {
  TUB_REQUIRE(config, "null config");
  if (steps < 1) return Reject(TUB_ERR_CONFIG, "steps must be >= 1");
  config->config.steps = steps;
  return TUB_OK;
}

tub_status tub_config_set_seed(tub_config* config, uint64_t seed) {
  TUB_REQUIRE(config, "null config");
  config->config.seed = seed;
  return TUB_OK;
}

tub_status tub_config_set_threads(tub_config* config, unsigned threads) {
  TUB_REQUIRE(config, "null config");
  config->config.threads = threads;
  return TUB_OK;
}

tub_status tub_config_set_output_dir(tub_config* config, const char* dir) {
  TUB_REQUIRE(config && dir, "null argument");
  return Guard([&] { config->config.output_dir = dir; });
}

tub_status tub_config_num_players(const tub_config* config, int* out) {
  TUB_REQUIRE(config && out, "null argument");
  *out = config->config.num_players();
  return TUB_OK;
}

tub_status tub_config_mode(const tub_config* config, tub_mode* out) {
  TUB_REQUIRE(config && out, "null argument");
  *out = config->config.mode == tb::Mode::kRobust ? TUB_MODE_ROBUST
                                                  : TUB_MODE_AVERAGE;
  return TUB_OK;
}

tub_status tub_config_to_json(const tub_config* config, char* buf,
                              size_t capacity, size_t* needed) {
  TUB_REQUIRE(config, "null config");
  return Guard([&] {
    const std::string text = tb::ConfigToJson(config->config);
    if (needed) *needed = text.size() + 1;
    if (buf && capacity > text.size()) {
      std::memcpy(buf, text.c_str(), text.size() + 1);
    } else if (buf) {
      tb::Fail(tb::ErrorCode::kInvalidArgument, "buffer too small");
    }
  });
}

tub_status tub_config_validate(const tub_config* config, tub_validation* out) {
  TUB_REQUIRE(config, "null config");
  return Guard([&] {
    const tb::ValidationReport r = tb::ValidateConfig(config->config);
    if (!out) return;
    out->alpha = r.alpha;
    out->connected = r.connected;
    out->minimal_window = r.minimal_window.value_or(0);
    out->robust_core_nonempty =
        r.robust_core_nonempty ? static_cast<int>(*r.robust_core_nonempty) : -1;
    out->mean_core_nonempty = r.mean_core_nonempty;
  });
}

tub_status tub_experiment_run(const tub_config* config, tub_experiment** out) {
  TUB_REQUIRE(config && out, "null argument");
  return Guard([&] {
    *out = new tub_experiment{tb::RunExperiment(config->config)};
  });
}

void tub_experiment_free(tub_experiment* experiment) { delete experiment; }

size_t tub_experiment_num_runs(const tub_experiment* experiment) {
  return experiment ? experiment->result.reports.size() : 0;
}

tub_status tub_experiment_summary(const tub_experiment* experiment, size_t run,
                                  tub_run_summary* out) {
  TUB_REQUIRE(experiment && out, "null argument");
  TUB_REQUIRE(run < experiment->result.reports.size(), "run out of range");
  const tb::RunReport& r = experiment->result.reports[run];
  out->core_distance = r.core_distance;
  out->disagreement = r.disagreement;
  out->in_core = r.in_core;
  out->converged_at =
      r.converged_at ? static_cast<long>(*r.converged_at) : -1L;
  return TUB_OK;
}

tub_status tub_experiment_limit(const tub_experiment* experiment, size_t run,
                                double* out) {
  TUB_REQUIRE(experiment && out, "null argument");
  TUB_REQUIRE(run < experiment->result.reports.size(), "run out of range");
  const tb::Vector& y = experiment->result.reports[run].limit;
  std::copy(y.data(), y.data() + y.size(), out);
  return TUB_OK;
}

tub_status tub_experiment_export(const tub_experiment* experiment,
                                 const char* dir) {
  TUB_REQUIRE(experiment, "null experiment");
  return Guard([&] {
    const std::string target =
        dir ? std::string(dir) : experiment->result.config.output_dir;
    if (target.empty()) {
      tb::Fail(tb::ErrorCode::kConfig, "no output directory given");
    }
    tb::ExportCsv(experiment->result, target);
  });
}

tub_status tub_check_experiment(const tub_experiment* experiment,
                                tub_verdicts** out) {
  TUB_REQUIRE(experiment && out, "null argument");
  return Guard([&] {
    const tb::ExperimentResult& r = experiment->result;
    *out = new tub_verdicts{tb::CheckAcceptance(r.series, r.tables, r.config)};
  });
}

tub_status tub_check_directory(const char* dir, tub_verdicts** out) {
  TUB_REQUIRE(dir && out, "null argument");
  return Guard([&] {
    const tb::StoredExperiment stored = tb::LoadExperiment(dir);
    *out = new tub_verdicts{
        tb::CheckAcceptance(stored.series, stored.tables, stored.config)};
  });
}

size_t tub_verdicts_count(const tub_verdicts* verdicts) {
  return verdicts ? verdicts->items.size() : 0;
}

int tub_verdicts_all_passed(const tub_verdicts* verdicts) {
  if (!verdicts) return 0;
  for (const auto& v : verdicts->items) {
    if (!v.passed) return 0;
  }
  return 1;
}

tub_status tub_verdict_get(const tub_verdicts* verdicts, size_t index,
                           const char** id, int* passed, const char** detail) {
  TUB_REQUIRE(verdicts, "null verdicts");
  TUB_REQUIRE(index < verdicts->items.size(), "verdict index out of range");
  const tb::CriterionVerdict& v = verdicts->items[index];
  if (id) *id = v.id.c_str();
  if (passed) *passed = v.passed;
  if (detail) *detail = v.detail.c_str();
  return TUB_OK;
}

void tub_verdicts_free(tub_verdicts* verdicts) { delete verdicts; }

tub_status tub_core_is_nonempty(int num_players, const double* values,
                                int* nonempty, double* point) {
  TUB_REQUIRE(values && nonempty, "null argument");
  return Guard([&] {
    const auto x = tb::CoreIsNonempty(GameFrom(num_players, values));
    *nonempty = x.has_value();
    if (x && point) std::copy(x->data(), x->data() + x->size(), point);
  });
}

tub_status tub_is_in_core(int num_players, const double* values,
                          const double* x, double tol, int* inside) {
  TUB_REQUIRE(values && x && inside, "null argument");
  return Guard([&] {
    const auto v = GameFrom(num_players, values);
    *inside = tb::IsInCore(
        Eigen::Map<const tb::Vector>(x, num_players), v, tol);
  });
}

tub_status tub_project_bounding_set(int num_players, const double* values,
                                    int player, const double* x, double* out) {
  TUB_REQUIRE(values && x && out, "null argument");
  return Guard([&] {
    const auto v = GameFrom(num_players, values);
    const tb::Vector p = tb::ProjectPolyhedron(
                             Eigen::Map<const tb::Vector>(x, num_players),
                             tb::BoundingSet(player, v))
                             .point;
    std::copy(p.data(), p.data() + p.size(), out);
  });
}

}  // extern "C"
