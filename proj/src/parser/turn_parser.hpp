// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/model.hpp"

namespace ctir {

enum class ViolationKind {
  MissingThinkBlock,
  UnclosedTag,
  MultipleActions,
  UnknownTool,
  BadToolArgs,
  NoActionOrAnswer,
  TrailingGarbage,
};

std::string_view to_string(ViolationKind v) noexcept;

/// One assistant turn split into its parts. `tool_call` and `final_answer`
/// are never both set.
struct ParsedTurn {
  std::string reasoning;
  std::optional<ToolAction> tool_call;
  std::optional<std::string> final_answer;
  std::vector<ViolationKind> violations;

  bool compliant() const noexcept { return violations.empty(); }
  friend bool operator==(const ParsedTurn&, const ParsedTurn&) = default;
};

/// Turn grammar:
///
///   <think>REASONING</think>
///   then exactly one of
///   <tool_call>{"name": "crop", "arguments": {"bbox": [x0, y0, x1, y1]}}</tool_call>
///   <tool_call>{"name": "code", "arguments": {"source": "..."}}</tool_call>
///   <answer>ANSWER</answer>
///
/// Whitespace between blocks is ignored; reasoning and answer text are
/// trimmed. The tool-call payload is a single-line JSON object. Parsing is
/// total: every problem is reported as a violation.
ParsedTurn parse_turn(std::string_view raw);

/// Canonical text for a compliant turn. Throws NonCompliantTurn otherwise.
std::string render_turn(const ParsedTurn& turn);

/// True iff every raw turn is compliant and the last one carries the final
/// answer. Throws ArityMismatch when an answered trajectory was produced by
/// compliant turns whose count is not steps + 1.
bool trajectory_format_ok(const Trajectory& t, const std::vector<std::string>& raw_turns);

}  // namespace ctir
