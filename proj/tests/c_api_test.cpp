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

// Exercises the shared library through its C interface only.

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "tubargain/tubargain.h"

namespace {

namespace fs = std::filesystem;

const double kVMax[] = {7, 3, 0, 0, 0, 0, 10};  // mask order, 3 players
const double kVII[] = {9, 5, 0, 0, 0, 0, 10};

TEST_CASE("status names and errors") {
  CHECK(std::string(tub_status_name(TUB_OK)) == "ok");
  CHECK(std::string(tub_version()) == "0.1.0");
  tub_config* cfg = nullptr;
  CHECK(tub_config_from_preset("V", TUB_MODE_ROBUST, &cfg) == TUB_ERR_CONFIG);
  CHECK(cfg == nullptr);
  CHECK(std::string(tub_last_error()).find("V") != std::string::npos);
  CHECK(tub_config_from_preset(nullptr, TUB_MODE_ROBUST, &cfg) ==
        TUB_ERR_INVALID_ARGUMENT);
  CHECK(tub_config_from_file("/nonexistent/cfg.json", &cfg) == TUB_ERR_IO);
  CHECK(tub_config_from_json("{not json", &cfg) == TUB_ERR_CONFIG);
  tub_config_free(nullptr);
  tub_experiment_free(nullptr);
  tub_verdicts_free(nullptr);
}

TEST_CASE("game helpers") {
  int nonempty = -1;
  double point[3] = {0, 0, 0};
  REQUIRE(tub_core_is_nonempty(3, kVMax, &nonempty, point) == TUB_OK);
  CHECK(nonempty == 1);
  CHECK(std::abs(point[0] - 7) < 1e-12);
  CHECK(std::abs(point[1] - 3) < 1e-12);
  REQUIRE(tub_core_is_nonempty(3, kVII, &nonempty, nullptr) == TUB_OK);
  CHECK(nonempty == 0);

  const double x[] = {2.5, 3.75, 3.75};
  double out[3];
  REQUIRE(tub_project_bounding_set(3, kVMax, 0, x, out) == TUB_OK);
  CHECK(std::abs(out[0] - 7) <= 1e-10);
  CHECK(std::abs(out[1] - 1.5) <= 1e-10);
  CHECK(std::abs(out[2] - 1.5) <= 1e-10);
  CHECK(tub_project_bounding_set(3, kVMax, 5, x, out) ==
        TUB_ERR_INVALID_ARGUMENT);
  CHECK(tub_project_bounding_set(9, kVMax, 0, x, out) ==
        TUB_ERR_INVALID_ARGUMENT);

  int inside = -1;
  const double z[] = {7, 3, 0};
  REQUIRE(tub_is_in_core(3, kVMax, z, 1e-9, &inside) == TUB_OK);
  CHECK(inside == 1);
  REQUIRE(tub_is_in_core(3, kVMax, x, 1e-9, &inside) == TUB_OK);
  CHECK(inside == 0);
}

TEST_CASE("configure, run, export and check") {
  tub_config* cfg = nullptr;
  REQUIRE(tub_config_from_preset("I", TUB_MODE_ROBUST, &cfg) == TUB_OK);
  CHECK(tub_config_set_runs(cfg, 4) == TUB_OK);
  CHECK(tub_config_set_steps(cfg, 100) == TUB_OK);
  CHECK(tub_config_set_seed(cfg, 3) == TUB_OK);
  CHECK(tub_config_set_threads(cfg, 2) == TUB_OK);
  CHECK(tub_config_set_runs(cfg, 0) == TUB_ERR_CONFIG);
  int n = 0;
  CHECK(tub_config_num_players(cfg, &n) == TUB_OK);
  CHECK(n == 3);

  size_t needed = 0;
  REQUIRE(tub_config_to_json(cfg, nullptr, 0, &needed) == TUB_OK);
  std::vector<char> buf(needed);
  REQUIRE(tub_config_to_json(cfg, buf.data(), buf.size(), &needed) == TUB_OK);
  CHECK(std::string(buf.data()).find("\"runs\": 4") != std::string::npos);
  char tiny[4];
  CHECK(tub_config_to_json(cfg, tiny, sizeof tiny, &needed) ==
        TUB_ERR_INVALID_ARGUMENT);

  tub_validation val{};
  REQUIRE(tub_config_validate(cfg, &val) == TUB_OK);
  CHECK(val.alpha == 0.5);
  CHECK(val.connected == 1);
  CHECK(val.minimal_window == 2);
  CHECK(val.robust_core_nonempty == 1);

  tub_experiment* exp = nullptr;
  REQUIRE(tub_experiment_run(cfg, &exp) == TUB_OK);
  CHECK(tub_experiment_num_runs(exp) == 4);
  double y[3];
  REQUIRE(tub_experiment_limit(exp, 3, y) == TUB_OK);
  CHECK(std::abs(y[0] + y[1] + y[2] - 10) < 1e-9);
  tub_run_summary s{};
  REQUIRE(tub_experiment_summary(exp, 0, &s) == TUB_OK);
  CHECK(s.in_core == 1);
  CHECK(tub_experiment_summary(exp, 4, &s) == TUB_ERR_INVALID_ARGUMENT);

  CHECK(tub_experiment_export(exp, nullptr) == TUB_ERR_CONFIG);
  const fs::path dir = fs::temp_directory_path() / "tubargain_capi";
  fs::remove_all(dir);
  REQUIRE(tub_experiment_export(exp, dir.string().c_str()) == TUB_OK);
  CHECK(fs::exists(dir / "report.json"));

  tub_verdicts* live = nullptr;
  REQUIRE(tub_check_experiment(exp, &live) == TUB_OK);
  tub_verdicts* stored = nullptr;
  REQUIRE(tub_check_directory(dir.string().c_str(), &stored) == TUB_OK);
  CHECK(tub_verdicts_count(live) == tub_verdicts_count(stored));
  CHECK(tub_verdicts_all_passed(live) == 1);
  CHECK(tub_verdicts_all_passed(stored) == 1);
  const char* id = nullptr;
  const char* detail = nullptr;
  int passed = 0;
  REQUIRE(tub_verdict_get(stored, 0, &id, &passed, &detail) == TUB_OK);
  CHECK(std::strlen(id) > 0);
  CHECK(tub_verdict_get(stored, 99, &id, &passed, &detail) ==
        TUB_ERR_INVALID_ARGUMENT);

  tub_verdicts_free(live);
  tub_verdicts_free(stored);
  tub_experiment_free(exp);
  tub_config_free(cfg);
  fs::remove_all(dir);
}

TEST_CASE("assumption failures surface as status codes") {
  tub_config* cfg = nullptr;
  REQUIRE(tub_config_from_preset("II", TUB_MODE_ROBUST, &cfg) == TUB_OK);
  CHECK(tub_config_validate(cfg, nullptr) == TUB_ERR_ASSUMPTION);
  tub_experiment* exp = nullptr;
  CHECK(tub_experiment_run(cfg, &exp) == TUB_ERR_ASSUMPTION);
  CHECK(exp == nullptr);
  CHECK(std::string(tub_last_error()).find("empty") != std::string::npos);
  REQUIRE(tub_config_set_mode(cfg, TUB_MODE_AVERAGE) == TUB_OK);
  tub_validation val{};
  CHECK(tub_config_validate(cfg, &val) == TUB_OK);
  CHECK(val.robust_core_nonempty == 0);
  tub_config_free(cfg);

  tub_verdicts* v = nullptr;
  CHECK(tub_check_directory("/nonexistent/dir", &v) == TUB_ERR_IO);
}

}  // namespace
