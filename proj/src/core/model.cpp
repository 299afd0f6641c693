// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "core/model.hpp"

#include <algorithm>

#include "core/error.hpp"

namespace ctir {

bool bbox_valid(const BBox& box) noexcept {
  return box.x0 >= 0 && box.y0 >= 0 && box.x0 < box.x1 && box.y0 < box.y1;
}

std::string_view tool_name(const ToolAction& action) noexcept {
  return std::holds_alternative<CropAction>(action) ? "crop" : "code";
}

void validate(const Trajectory& t, std::size_t max_steps) {
  if (max_steps > 0 && t.steps.size() > max_steps) {
    fail(ErrorCode::InvariantViolation, "trajectory has more steps than the tool-turn budget");
  }
  const bool answered = t.terminated_by == Termination::Answer;
  if (answered != t.answer.has_value()) {
    fail(ErrorCode::InvariantViolation,
         "answer must be present exactly when the trajectory terminated by answering");
  }
  for (const auto& step : t.steps) {
    if (const auto* crop = std::get_if<CropAction>(&step.action); crop && !bbox_valid(crop->bbox)) {
      fail(ErrorCode::InvariantViolation, "crop step carries an invalid bbox");
    }
    if (const auto* code = std::get_if<CodeAction>(&step.action); code && code->source.empty()) {
      fail(ErrorCode::InvariantViolation, "code step has empty source");
    }
  }
}

AspectPool AspectPool::defaults() {
  return AspectPool{
      .recognition = {"Axis label extraction", "Color extraction", "Title extraction",
                      "Tick extraction", "Numerical value extraction", "Counting",
                      "Pattern Recognition", "Enumeration", "General"},
      .reasoning = {"Extreme Value Analysis", "Conditional Reasoning", "Comparative Analysis",
                    "Trend Analysis", "Aggregation & Calculation", "Ranking & Ordering",
                    "Proportional & Distributional Analysis", "Pattern & Correlation", "General"},
  };
}

bool AspectPool::contains(QuestionType qtype, std::string_view aspect) const {
  const auto& pool = qtype == QuestionType::Recognition ? recognition : reasoning;
  return std::find(pool.begin(), pool.end(), aspect) != pool.end();
}

void validate(const QAItem& item, const AspectPool& pool) {
  if (item.question.empty()) fail(ErrorCode::InvariantViolation, "QA item has an empty question");
  if (item.answer.empty()) fail(ErrorCode::InvariantViolation, "QA item has an empty answer");
  if (item.difficulty < 1 || item.difficulty > 5) {
    fail(ErrorCode::InvariantViolation, "QA difficulty must be in 1..5");
  }
  if (!pool.contains(item.qtype, item.aspect)) {
    fail(ErrorCode::InvariantViolation,
         "aspect '" + item.aspect + "' is not in the " + std::string(to_string(item.qtype)) +
             " aspect pool");
  }
}

void validate(const ChartSpec& spec) {
  if (spec.num_subplots < 1) fail(ErrorCode::InvariantViolation, "num_subplots must be >= 1");
  if (spec.layout.rows < 1 || spec.layout.cols < 1 ||
      spec.layout.rows * spec.layout.cols < spec.num_subplots) {
    fail(ErrorCode::InvariantViolation, "layout cannot hold all subplots");
  }
  if (spec.chart_types.size() != static_cast<std::size_t>(spec.num_subplots)) {
    fail(ErrorCode::InvariantViolation, "one chart type is required per subplot");
  }
  if (spec.difficulty < 1 || spec.difficulty > 5) {
    fail(ErrorCode::InvariantViolation, "chart difficulty must be in 1..5");
  }
}

std::string_view to_string(ToolErrorKind kind) noexcept {
  switch (kind) {
    case ToolErrorKind::Timeout: return "timeout";
    case ToolErrorKind::ExecFailure: return "exec_failure";
    case ToolErrorKind::InvalidArgs: return "invalid_args";
    case ToolErrorKind::ResourceLimit: return "resource_limit";
  }
  return "exec_failure";
}

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::Answer: return "answer";
    case Termination::TurnLimit: return "turn_limit";
    case Termination::ParseFailureLimit: return "parse_failure_limit";
  }
  return "answer";
}

std::string_view to_string(QuestionType q) noexcept {
  return q == QuestionType::Recognition ? "recognition" : "reasoning";
}

std::string_view to_string(AnswerType a) noexcept {
  switch (a) {
    case AnswerType::Text: return "text";
    case AnswerType::Numeric: return "numeric";
    case AnswerType::Binary: return "binary";
    case AnswerType::ListRange: return "list_range";
  }
  return "text";
}

std::string_view to_string(Provenance p) noexcept {
  return p == Provenance::Synth ? "synth" : "arxiv_mined";
}

std::optional<ToolErrorKind> parse_tool_error_kind(std::string_view s) noexcept {
  if (s == "timeout") return ToolErrorKind::Timeout;
  if (s == "exec_failure") return ToolErrorKind::ExecFailure;
  if (s == "invalid_args") return ToolErrorKind::InvalidArgs;
  if (s == "resource_limit") return ToolErrorKind::ResourceLimit;
  return std::nullopt;
}

std::optional<Termination> parse_termination(std::string_view s) noexcept {
  if (s == "answer") return Termination::Answer;
  if (s == "turn_limit") return Termination::TurnLimit;
  if (s == "parse_failure_limit") return Termination::ParseFailureLimit;
  return std::nullopt;
}

std::optional<QuestionType> parse_question_type(std::string_view s) noexcept {
  if (s == "recognition") return QuestionType::Recognition;
  if (s == "reasoning") return QuestionType::Reasoning;
  return std::nullopt;
}

std::optional<AnswerType> parse_answer_type(std::string_view s) noexcept {
  if (s == "text") return AnswerType::Text;
  if (s == "numeric") return AnswerType::Numeric;
  if (s == "binary") return AnswerType::Binary;
  if (s == "list_range") return AnswerType::ListRange;
  return std::nullopt;
}

std::optional<Provenance> parse_provenance(std::string_view s) noexcept {
  if (s == "synth") return Provenance::Synth;
  if (s == "arxiv_mined") return Provenance::ArxivMined;
  return std::nullopt;
}

}  // namespace ctir
