/* Copyright (c) 2026, chart-tir authors */
/* SPDX-License-Identifier: Apache-2.0 */

#ifndef CHART_TIR_CHART_TIR_H
#define CHART_TIR_CHART_TIR_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define CTIR_API __attribute__((visibility("default")))
#else
#define CTIR_API
#endif

/* Status values double as process exit codes. */
typedef enum ctir_status {
  CTIR_OK = 0,
  CTIR_ERR_USAGE = 2,
  CTIR_ERR_CONFIG = 3,
  CTIR_ERR_RUNTIME = 4
} ctir_status;

typedef struct ctir_session ctir_session;

CTIR_API const char* ctir_version(void);

/* JSON {"code": "<ErrorName>", "message": "..."} describing the last failure
   on the calling thread, or NULL. Valid until the next call on that thread. */
CTIR_API const char* ctir_last_error(void);

/* Releases strings returned through char** out-parameters. */
CTIR_API void ctir_string_free(char* s);

/* Opens a session with the layered configuration: built-in defaults, then
   `config_path` (or $CHART_TIR_CONFIG when NULL; no file when both are
   absent), then CHART_TIR__SECTION__KEY variables, then `overrides`
   ("section.key=value"). */
CTIR_API ctir_status ctir_session_open(const char* config_path, const char* const* overrides, size_t n_overrides,
                                       ctir_session** out);
CTIR_API void ctir_session_close(ctir_session* session);

/* Effective configuration as JSON, and its SHA-256. */
CTIR_API ctir_status ctir_session_config(const ctir_session* session, char** out_json);
CTIR_API ctir_status ctir_session_config_hash(const ctir_session* session, char** out_hex);

/* JSON array of subcommand names accepted by ctir_session_run. */
CTIR_API const char* ctir_subcommands(void);

/* Runs a pipeline subcommand. `args_json` is an object of named arguments;
   the JSON summary is returned in *out_json. */
CTIR_API ctir_status ctir_session_run(ctir_session* session, const char* subcommand, const char* args_json,
                                      char** out_json);

/* Serves the configured sandbox over HTTP (POST /execute). Blocks. */
CTIR_API ctir_status ctir_sandbox_serve(ctir_session* session, const char* host, int port);

/* Trajectory reward; the tool term counts only when acc is 1. */
CTIR_API ctir_status ctir_reward_total(int acc, int format, int tool, double lambda1, double lambda2, double* out);

/* Group-normalized advantages (population std); `out` holds `n` values. */
CTIR_API ctir_status ctir_compute_advantages(const double* rewards, size_t n, double std_floor, double* out);

/* Clipped objective over a JSON array of
   {"old_logprobs": [...], "new_logprobs": [...], "mask": [...], "advantage": a}. */
CTIR_API ctir_status ctir_grpo_objective(const char* batch_json, double epsilon, double* out);

/* Parses one assistant turn; returns {"reasoning", "tool_call", "final_answer",
   "violations", "compliant"}. */
CTIR_API ctir_status ctir_parse_turn(const char* raw, char** out_json);

/* Average pixel entropy over image files (PNG or JPEG). */
CTIR_API ctir_status ctir_avg_pixel_entropy(const char* const* paths, size_t n, double log_base, double* out);

#ifdef __cplusplus
}
#endif

#endif
