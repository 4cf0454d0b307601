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

// Command-line front end. Talks to the library only through the C API.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tubargain/tubargain.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCriterion = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFailure = 3;

struct Source {
  std::string preset;
  std::string config;
  std::string mode;
  std::size_t runs = 0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned threads = 0;
  bool threads_set = false;
};

int ReportFailure(const char* what, tub_status status) {
  std::fprintf(stderr, "error: %s: %s: %s\n", what, tub_status_name(status),
               tub_last_error());
  return status == TUB_ERR_IO || status == TUB_ERR_INTERNAL ||
                 status == TUB_ERR_NUMERIC
             ? kExitFailure
             : kExitConfig;
}

void AddSourceOptions(CLI::App* cmd, Source& src) {
  auto* preset = cmd->add_option("--preset", src.preset,
                                 "Built-in experiment: I or II");
  auto* config = cmd->add_option("--config", src.config, "JSON config file")
                     ->check(CLI::ExistingFile);
  preset->excludes(config);
  cmd->add_option("--mode", src.mode, "robust or average")
      ->check(CLI::IsMember({"robust", "average"}));
  cmd->add_option("--runs", src.runs, "Number of runs R")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--steps", src.steps, "Horizon T")
      ->check(CLI::PositiveNumber);
  cmd->add_option_function<std::uint64_t>(
      "--seed",
      [&src](std::uint64_t s) {
        src.seed = s;
        src.seed_set = true;
      },
      "Master seed");
  cmd->add_option_function<unsigned>(
      "--threads",
      [&src](unsigned n) {
        src.threads = n;
        src.threads_set = true;
      },
      "Worker threads (0 = hardware)");
}

// Builds the config; returns an exit code or -1 on success.
int BuildConfig(const Source& src, tub_config** out) {
  const tub_mode mode =
      src.mode == "average" ? TUB_MODE_AVERAGE : TUB_MODE_ROBUST;
  tub_status st;
  if (!src.config.empty()) {
    st = tub_config_from_file(src.config.c_str(), out);
    if (st == TUB_OK && !src.mode.empty()) st = tub_config_set_mode(*out, mode);
  } else {
    st = tub_config_from_preset(src.preset.empty() ? "I" : src.preset.c_str(),
                                mode, out);
  }
  if (st == TUB_OK && src.runs) st = tub_config_set_runs(*out, src.runs);
  if (st == TUB_OK && src.steps) st = tub_config_set_steps(*out, src.steps);
  if (st == TUB_OK && src.seed_set) st = tub_config_set_seed(*out, src.seed);
  if (st == TUB_OK && src.threads_set) {
    st = tub_config_set_threads(*out, src.threads);
  }
  if (st != TUB_OK) {
    tub_config_free(*out);
    *out = nullptr;
    return ReportFailure("config", st);
  }
  return -1;
}

int PrintVerdicts(tub_verdicts* verdicts) {
  for (std::size_t i = 0; i < tub_verdicts_count(verdicts); ++i) {
    const char* id = nullptr;
    const char* detail = nullptr;
    int passed = 0;
    tub_verdict_get(verdicts, i, &id, &passed, &detail);
    std::printf("%s %s: %s\n", passed ? "PASS" : "FAIL", id, detail);
  }
  const int code = tub_verdicts_all_passed(verdicts) ? kExitOk : kExitCriterion;
  tub_verdicts_free(verdicts);
  return code;
}

void PrintValidation(const tub_validation& v) {
  std::printf("alpha = %.6g\n", v.alpha);
  std::printf("connected = %s\n", v.connected ? "yes" : "no");
  if (v.minimal_window > 0) {
    std::printf("minimal window Q = %d\n", v.minimal_window);
  } else {
    std::printf("minimal window Q = none\n");
  }
  if (v.robust_core_nonempty >= 0) {
    std::printf("robust core = %s\n",
                v.robust_core_nonempty ? "nonempty" : "empty");
  }
  std::printf("mean core = %s\n", v.mean_core_nonempty ? "nonempty" : "empty");
}

int CmdValidate(const Source& src) {
  tub_config* cfg = nullptr;
  if (int rc = BuildConfig(src, &cfg); rc >= 0) return rc;
  tub_validation v{};
  const tub_status st = tub_config_validate(cfg, &v);
  tub_config_free(cfg);
  if (st != TUB_OK) return ReportFailure("validate", st);
  PrintValidation(v);
  return kExitOk;
}

int CmdConfig(const Source& src) {
  tub_config* cfg = nullptr;
  if (int rc = BuildConfig(src, &cfg); rc >= 0) return rc;
  std::size_t needed = 0;
  tub_config_to_json(cfg, nullptr, 0, &needed);
  std::string text(needed, '\0');
  const tub_status st = tub_config_to_json(cfg, text.data(), needed, &needed);
  tub_config_free(cfg);
  if (st != TUB_OK) return ReportFailure("config", st);
  std::printf("%s\n", text.c_str());
  return kExitOk;
}

int CmdRun(const Source& src, const std::string& out_dir, bool quiet) {
  tub_config* cfg = nullptr;
  if (int rc = BuildConfig(src, &cfg); rc >= 0) return rc;
  if (!out_dir.empty()) tub_config_set_output_dir(cfg, out_dir.c_str());
  int n = 0;
  tub_config_num_players(cfg, &n);

  tub_experiment* exp = nullptr;
  tub_status st = tub_experiment_run(cfg, &exp);
  tub_config_free(cfg);
  if (st != TUB_OK) return ReportFailure("run", st);

  if (!quiet) {
    std::vector<double> y(n);
    for (std::size_t k = 0; k < tub_experiment_num_runs(exp); ++k) {
      tub_run_summary s{};
      tub_experiment_summary(exp, k, &s);
      tub_experiment_limit(exp, k, y.data());
      std::printf("run %zu: y(T) = [", k);
      for (int i = 0; i < n; ++i) std::printf(i ? " %.6f" : "%.6f", y[i]);
      std::printf("] dist = %.3g D = %.3g\n", s.core_distance, s.disagreement);
    }
  }

  st = tub_experiment_export(exp, out_dir.empty() ? nullptr : out_dir.c_str());
  if (st != TUB_OK && !(st == TUB_ERR_CONFIG && out_dir.empty())) {
    tub_experiment_free(exp);
    return ReportFailure("export", st);
  }

  tub_verdicts* verdicts = nullptr;
  st = tub_check_experiment(exp, &verdicts);
  tub_experiment_free(exp);
  if (st != TUB_OK) return ReportFailure("check", st);
  return PrintVerdicts(verdicts);
}

int CmdCheck(const std::string& dir) {
  tub_verdicts* verdicts = nullptr;
  const tub_status st = tub_check_directory(dir.c_str(), &verdicts);
  if (st != TUB_OK) return ReportFailure("check", st);
  return PrintVerdicts(verdicts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bargaining over uncertain coalitional games"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tub_version()));

  Source run_src, validate_src, config_src;
  std::string out_dir;
  std::string check_dir;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run an experiment and check it");
  AddSourceOptions(run, run_src);
  run->add_option("--out", out_dir, "Directory for CSV and report output");
  run->add_flag("--quiet,-q", quiet, "Skip the per-run summary");

  auto* validate = app.add_subcommand("validate", "Check a configuration");
  AddSourceOptions(validate, validate_src);

  auto* show = app.add_subcommand("config", "Print the resolved configuration");
  AddSourceOptions(show, config_src);

  auto* check = app.add_subcommand("check", "Re-check an exported experiment");
  check->add_option("--dir", check_dir, "Output directory of a run")
      ->required()
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return CmdRun(run_src, out_dir, quiet);
  if (*validate) return CmdValidate(validate_src);
  if (*show) return CmdConfig(config_src);
  return CmdCheck(check_dir);
}
