/* Copyright (c) 2026, chart-tir authors */
/* SPDX-License-Identifier: Apache-2.0 */

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "chart_tir/chart_tir.h"

static int failures = 0;

#define EXPECT(cond)                                          \
  do {                                                        \
    if (!(cond)) {                                            \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                             \
    }                                                         \
  } while (0)

int main(void) {
  double total = 0.0;
  double adv[2];
  const double rewards[2] = {1.3, 0.0};
  char* out = NULL;
  ctir_session* s = NULL;
  const char* bad_override[1] = {"rollout.group_size=0"};

  EXPECT(strcmp(ctir_version(), "0.1.0") == 0);
  EXPECT(ctir_reward_total(1, 1, 1, 0.1, 0.2, &total) == CTIR_OK);
  EXPECT(fabs(total - 1.3) < 1e-12);
  EXPECT(ctir_reward_total(2, 1, 1, 0.1, 0.2, &total) == CTIR_ERR_RUNTIME);
  EXPECT(ctir_last_error() != NULL && strstr(ctir_last_error(), "InvalidArgument") != NULL);

  EXPECT(ctir_compute_advantages(rewards, 2, 1e-6, adv) == CTIR_OK);
  EXPECT(fabs(adv[0] - 1.0) < 1e-12 && fabs(adv[1] + 1.0) < 1e-12);
  EXPECT(ctir_compute_advantages(rewards, 1, 1e-6, adv) == CTIR_ERR_RUNTIME);
  EXPECT(strstr(ctir_last_error(), "GroupTooSmall") != NULL);

  EXPECT(ctir_grpo_objective("[{\"old_logprobs\":[0],\"new_logprobs\":[0.6931471805599453],\"mask\":[1],"
                             "\"advantage\":1}]",
                             0.2, &total) == CTIR_OK);
  EXPECT(fabs(total - 1.2) < 1e-9);

  EXPECT(ctir_parse_turn("<think>done</think><answer>42</answer>", &out) == CTIR_OK);
  EXPECT(out != NULL && strstr(out, "\"final_answer\":\"42\"") != NULL);
  ctir_string_free(out);
  out = NULL;

  EXPECT(ctir_session_open(NULL, bad_override, 1, &s) == CTIR_ERR_CONFIG);
  EXPECT(s == NULL);
  EXPECT(strstr(ctir_last_error(), "ConfigInvalid") != NULL);

  EXPECT(ctir_session_open(NULL, NULL, 0, &s) == CTIR_OK);
  EXPECT(ctir_session_config_hash(s, &out) == CTIR_OK);
  EXPECT(out != NULL && strlen(out) == 64);
  ctir_string_free(out);
  out = NULL;
  EXPECT(ctir_session_run(s, "bogus", "{}", &out) == CTIR_ERR_USAGE);
  EXPECT(strstr(ctir_last_error(), "UnknownSubcommand") != NULL);
  EXPECT(ctir_session_run(s, "eval", "{\"dataset\":\"/nonexistent/qa.jsonl\",\"report\":\"r.json\"}", &out) ==
         CTIR_ERR_RUNTIME);
  EXPECT(strstr(ctir_last_error(), "DatasetMalformed") != NULL);
  EXPECT(ctir_session_run(s, "eval", "not json", &out) == CTIR_ERR_USAGE);
  EXPECT(ctir_session_run(NULL, "eval", "{}", &out) == CTIR_ERR_USAGE);
  EXPECT(strstr(ctir_subcommands(), "\"grpo-eval\"") != NULL);
  ctir_session_close(s);

  if (failures == 0) printf("capi: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
