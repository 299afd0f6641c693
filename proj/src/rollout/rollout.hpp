// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stop_token>
#include <string>
#include <vector>

#include "clients/clients.hpp"
#include "core/error.hpp"
#include "core/model.hpp"
#include "sandbox/sandbox.hpp"
#include "tools/tools.hpp"

namespace ctir {

inline constexpr std::string_view kSystemPromptVersion = "tir-system-v1";
inline constexpr std::string_view kFormatErrorNotice = "format error: expected one tool_call or answer";

/// Instructions sent as the first message of every rollout.
const std::string& system_prompt();

struct RolloutConfig {
  int max_assistant_turns = 4;
  int max_parse_failures = 2;
  int group_size = 8;
  Sampling sampling{1.0, 2048, false, std::nullopt};
  ToolConfig tool_cfg;
  /// A group fails when more than this fraction of members hit a policy failure.
  double partial_group_threshold = 0.5;
  std::size_t group_concurrency = 8;
  /// Member g of a group samples with seed `seed + g`.
  std::int64_t seed = 0;
};

void validate(const RolloutConfig& cfg);

struct RolloutResult {
  Trajectory trajectory;
  std::vector<std::string> raw_turns;
};

/// Raised when the policy endpoint fails mid-rollout. Carries the partial
/// trajectory (no answer, terminated_by TurnLimit) for diagnostics.
class PolicyFailureError : public Error {
 public:
  PolicyFailureError(const std::string& message, RolloutResult partial)
      : Error(ErrorCode::PolicyFailure, message), partial_(std::move(partial)) {}
  const RolloutResult& partial() const noexcept { return partial_; }

 private:
  RolloutResult partial_;
};

/// Observation as delivered back to the policy (a user-role message).
ChatMessage observation_message(const Observation& obs);

/// Initial context: system prompt, then the chart image and question.
std::vector<ChatMessage> initial_messages(const ChartImage& image, const std::string& question);

RolloutResult run_trajectory(ChatClient& policy, Sandbox& sandbox, const ChartImage& image,
                             const std::string& question, const RolloutConfig& cfg, int member = 0,
                             std::stop_token stop = {});

/// Samples cfg.group_size trajectories for one prompt. Members that hit a
/// policy failure keep their partial trajectory and a diagnostic; PartialGroup
/// is thrown when the failure fraction exceeds the threshold.
GroupSample run_group(ChatClient& policy, Sandbox& sandbox, const ChartImage& image,
                      const std::string& question, const RolloutConfig& cfg);

}  // namespace ctir
