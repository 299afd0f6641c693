// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "clients/clients.hpp"
#include "core/model.hpp"

namespace ctir {

struct MatchPolicy {
  double numeric_rel_tol = 0.05;
  bool case_fold = true;
  bool strip_units = true;
  bool judge_fallback = false;
};

void validate(const MatchPolicy& policy);

/// Normalized form used for exact text matching.
std::string normalize_text(std::string_view s, bool case_fold);

/// Lenient real-number parse ("1,234.5", "$12", "45%", "3.2 kg" with strip_units).
std::optional<double> parse_number(std::string_view s, bool strip_units);

/// Maps yes/true/y and no/false/n, ignoring case and trailing punctuation.
std::optional<bool> parse_binary(std::string_view s);

/// 1 when `pred` matches `gold` under the answer type's rule, else 0.
/// Text and list answers that miss exact matching go to the judge when
/// judge_fallback is set; JudgeRequired is thrown if `judge` is null then.
int accuracy_reward(const std::optional<std::string>& pred, const std::string& gold, AnswerType answer_type,
                    const MatchPolicy& policy, ChatClient* judge = nullptr, const std::string& question = {});

/// 1 when at least one tool call executed without a tool error.
int tool_reward(const Trajectory& t);

struct RewardWeights {
  double lambda1 = 0.1;
  double lambda2 = 0.2;
};

RewardBreakdown make_breakdown(int acc, int format, int tool, RewardWeights w);

RewardBreakdown total_reward(const Trajectory& t, const std::vector<std::string>& raw_turns, const std::string& gold,
                             AnswerType answer_type, RewardWeights weights, const MatchPolicy& policy,
                             ChatClient* judge = nullptr);

}  // namespace ctir
