/* Copyright 2026 The pairshap Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libpairshap. Every fallible call returns a ps_status; on
 * failure ps_last_error() describes the problem for the calling thread.
 * Strings returned through char** out-parameters are owned by the caller
 * and released with ps_string_free(). */

#ifndef PAIRSHAP_PAIRSHAP_H_
#define PAIRSHAP_PAIRSHAP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(PAIRSHAP_BUILDING_LIBRARY)
#define PS_API __attribute__((visibility("default")))
#else
#define PS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as CLI exit codes. */
typedef enum ps_status {
  PS_OK = 0,
  PS_ERR_CONFIG = 2,  /* malformed flags or JSON configuration */
  PS_ERR_DATA = 3,    /* unreadable data, schema or dimension mismatch */
  PS_ERR_RUNTIME = 4, /* predictor failure, I/O, anything else */
} ps_status;

typedef struct ps_dataset ps_dataset;
typedef struct ps_model ps_model;
typedef struct ps_explanations ps_explanations;

PS_API const char* ps_version(void);

/* Message of the last failed call on this thread ("" when none). */
PS_API const char* ps_last_error(void);

PS_API void ps_string_free(char* s);

/* options_json: NULL or {"target": name, "kinds": {name: "binary"|...}}. */
PS_API ps_status ps_dataset_load(const char* path, const char* options_json,
                                 ps_dataset** out);
/* spec_json may be NULL for n_features uniform features. */
PS_API ps_status ps_dataset_synthesize(const char* spec_json, size_t n_rows,
                                       size_t n_features, uint64_t seed,
                                       ps_dataset** out);
PS_API ps_status ps_dataset_write(const ps_dataset* d, const char* path);
PS_API size_t ps_dataset_rows(const ps_dataset* d);
PS_API size_t ps_dataset_cols(const ps_dataset* d);
/* Borrowed; valid while d lives. NULL when out of range. */
PS_API const char* ps_dataset_feature_name(const ps_dataset* d, size_t i);
/* Copies row i (ps_dataset_cols values) into out. */
PS_API ps_status ps_dataset_row(const ps_dataset* d, size_t i, double* out);
PS_API void ps_dataset_free(ps_dataset* d);

/* expected: when non-NULL the model must match its feature layout.
 * raw_output != 0 skips a logistic link. */
PS_API ps_status ps_model_load(const char* path, const ps_dataset* expected,
                               int raw_output, ps_model** out);
/* options_json: NULL or {"batch_size": n, "timeout_ms": n}. */
PS_API ps_status ps_model_external(const char* command, const char* options_json,
                                   ps_model** out);
PS_API size_t ps_model_n_features(const ps_model* m);
/* rows is row-major n_rows x n_cols; out receives n_rows values. */
PS_API ps_status ps_model_predict(const ps_model* m, const double* rows, size_t n_rows,
                                  size_t n_cols, double* out);
PS_API void ps_model_free(ps_model* m);

/* Explains every row of `targets` against `background`. config_json holds
 * optional "method", "strategy", "solver", "seed" and "jobs" entries in the
 * same forms the CLI accepts. When targets == background, each row is
 * excluded from its own pairing. */
PS_API ps_status ps_explain(const ps_dataset* targets, const ps_dataset* background,
                            const ps_model* model, const char* config_json,
                            ps_explanations** out);
PS_API size_t ps_explanations_count(const ps_explanations* e);
PS_API size_t ps_explanations_n_features(const ps_explanations* e);
PS_API ps_status ps_explanation_values(const ps_explanations* e, size_t i, double* phi0,
                                       double* phi, double* prediction);
/* Explanation JSON, with feature names from the background dataset. */
PS_API ps_status ps_explanation_json(const ps_explanations* e, size_t i, char** out);
PS_API void ps_explanations_free(ps_explanations* e);

/* Runs a CLI command ("synth", "pairs", "explain", "diagnose", "perturb",
 * "bench") from a JSON run config. *summary_out (may be NULL) receives a
 * one-line JSON summary. */
PS_API ps_status ps_run_command(const char* command, const char* config_json,
                                char** summary_out);

#ifdef __cplusplus
}
#endif

#endif /* PAIRSHAP_PAIRSHAP_H_ */
