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

/* C interface to the tubargain library.
 *
 * Every call returns a tub_status; on failure tub_last_error() holds a
 * message for the calling thread. Handles are opaque and owned by the caller,
 * release them with the matching *_free function (NULL is accepted).
 *
 * Players are 0-based here. Coalition values are passed in increasing
 * bitmask order: index k holds v(S) for the coalition with mask k + 1.
 */
#ifndef TUBARGAIN_TUBARGAIN_H_
#define TUBARGAIN_TUBARGAIN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(TUBARGAIN_BUILDING_LIBRARY)
#define TUBARGAIN_API __declspec(dllexport)
#else
#define TUBARGAIN_API __declspec(dllimport)
#endif
#else
#define TUBARGAIN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tub_status {
  TUB_OK = 0,
  TUB_ERR_INVALID_ARGUMENT = 1,
  TUB_ERR_INVALID_COALITION = 2,
  TUB_ERR_INFEASIBLE_SET = 3,
  TUB_ERR_ASSUMPTION = 4,
  TUB_ERR_CONFIG = 5,
  TUB_ERR_IO = 6,
  TUB_ERR_NUMERIC = 7,
  TUB_ERR_INTERNAL = 8
} tub_status;

typedef enum tub_mode { TUB_MODE_ROBUST = 0, TUB_MODE_AVERAGE = 1 } tub_mode;

typedef struct tub_config tub_config;
typedef struct tub_experiment tub_experiment;
typedef struct tub_verdicts tub_verdicts;

typedef struct tub_validation {
  double alpha;
  int connected;
  int minimal_window;        /* 0 when no window up to period * n works */
  int robust_core_nonempty;  /* -1 when the process has no fixed envelope */
  int mean_core_nonempty;
} tub_validation;

typedef struct tub_run_summary {
  double core_distance;  /* NaN when the target core is empty */
  double disagreement;
  int in_core;
  long converged_at;     /* -1 when the run never settled */
} tub_run_summary;

TUBARGAIN_API const char* tub_version(void);
TUBARGAIN_API const char* tub_last_error(void);
TUBARGAIN_API const char* tub_status_name(tub_status status);

/* Configuration. preset is "I" or "II". */
TUBARGAIN_API tub_status tub_config_from_preset(const char* preset,
                                                tub_mode mode,
                                                tub_config** out);
TUBARGAIN_API tub_status tub_config_from_file(const char* path,
                                              tub_config** out);
TUBARGAIN_API tub_status tub_config_from_json(const char* text,
                                              tub_config** out);
TUBARGAIN_API void tub_config_free(tub_config* config);

TUBARGAIN_API tub_status tub_config_set_mode(tub_config* config, tub_mode mode);
TUBARGAIN_API tub_status tub_config_set_runs(tub_config* config, size_t runs);
TUBARGAIN_API tub_status tub_config_set_steps(tub_config* config, size_t steps);
TUBARGAIN_API tub_status tub_config_set_seed(tub_config* config, uint64_t seed);
TUBARGAIN_API tub_status tub_config_set_threads(tub_config* config,
                                                unsigned threads);
TUBARGAIN_API tub_status tub_config_set_output_dir(tub_config* config,
                                                   const char* dir);
TUBARGAIN_API tub_status tub_config_num_players(const tub_config* config,
                                                int* out);
TUBARGAIN_API tub_status tub_config_mode(const tub_config* config,
                                         tub_mode* out);

/* Writes the JSON form into buf (NUL terminated) when capacity allows.
 * *needed receives the size including the terminator. */
TUBARGAIN_API tub_status tub_config_to_json(const tub_config* config,
                                            char* buf, size_t capacity,
                                            size_t* needed);
TUBARGAIN_API tub_status tub_config_validate(const tub_config* config,
                                             tub_validation* out);

/* Experiments. */
TUBARGAIN_API tub_status tub_experiment_run(const tub_config* config,
                                            tub_experiment** out);
TUBARGAIN_API void tub_experiment_free(tub_experiment* experiment);
TUBARGAIN_API size_t tub_experiment_num_runs(const tub_experiment* experiment);
TUBARGAIN_API tub_status tub_experiment_summary(
    const tub_experiment* experiment, size_t run, tub_run_summary* out);
/* Mean proposal y(T) of one run; out holds num_players doubles. */
TUBARGAIN_API tub_status tub_experiment_limit(const tub_experiment* experiment,
                                              size_t run, double* out);
/* dir may be NULL to use the configured output directory. */
TUBARGAIN_API tub_status tub_experiment_export(
    const tub_experiment* experiment, const char* dir);

/* Acceptance checks on a finished experiment or an exported directory. */
TUBARGAIN_API tub_status tub_check_experiment(const tub_experiment* experiment,
                                              tub_verdicts** out);
TUBARGAIN_API tub_status tub_check_directory(const char* dir,
                                             tub_verdicts** out);
TUBARGAIN_API size_t tub_verdicts_count(const tub_verdicts* verdicts);
TUBARGAIN_API int tub_verdicts_all_passed(const tub_verdicts* verdicts);
/* id and detail stay valid until the verdicts are freed. */
TUBARGAIN_API tub_status tub_verdict_get(const tub_verdicts* verdicts,
                                         size_t index, const char** id,
                                         int* passed, const char** detail);
TUBARGAIN_API void tub_verdicts_free(tub_verdicts* verdicts);

/* Game helpers. values has 2^n - 1 entries. */
TUBARGAIN_API tub_status tub_core_is_nonempty(int num_players,
                                              const double* values,
                                              int* nonempty, double* point);
TUBARGAIN_API tub_status tub_is_in_core(int num_players, const double* values,
                                        const double* x, double tol,
                                        int* inside);
TUBARGAIN_API tub_status tub_project_bounding_set(int num_players,
                                                  const double* values,
                                                  int player, const double* x,
                                                  double* out);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  /* TUBARGAIN_TUBARGAIN_H_ */
