// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "core/image.hpp"

namespace ctir {

/// Pixel box, origin top-left, x1/y1 exclusive.
struct BBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  friend bool operator==(const BBox&, const BBox&) = default;
};

bool bbox_valid(const BBox& box) noexcept;

struct CropAction {
  BBox bbox;
  friend bool operator==(const CropAction&, const CropAction&) = default;
};

struct CodeAction {
  std::string source;
  friend bool operator==(const CodeAction&, const CodeAction&) = default;
};

using ToolAction = std::variant<CropAction, CodeAction>;

/// "crop" or "code"; also the tool names of the turn grammar.
std::string_view tool_name(const ToolAction& action) noexcept;

struct TextObservation {
  std::string content;
  bool truncated = false;
  friend bool operator==(const TextObservation&, const TextObservation&) = default;
};

struct ImageObservation {
  ChartImage image;
  friend bool operator==(const ImageObservation&, const ImageObservation&) = default;
};

enum class ToolErrorKind { Timeout, ExecFailure, InvalidArgs, ResourceLimit };

struct ToolErrorObservation {
  ToolErrorKind kind = ToolErrorKind::ExecFailure;
  std::string message;
  friend bool operator==(const ToolErrorObservation&, const ToolErrorObservation&) = default;
};

using Observation = std::variant<TextObservation, ImageObservation, ToolErrorObservation>;

inline bool is_tool_error(const Observation& obs) noexcept {
  return std::holds_alternative<ToolErrorObservation>(obs);
}

/// One completed reasoning / action / observation triple.
struct Step {
  std::string reasoning;
  ToolAction action;
  Observation observation;
  friend bool operator==(const Step&, const Step&) = default;
};

enum class Termination { Answer, TurnLimit, ParseFailureLimit };

struct Trajectory {
  ChartImage image;
  std::string question;
  std::vector<Step> steps;
  std::string final_reasoning;
  std::optional<std::string> answer;
  Termination terminated_by = Termination::Answer;
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Throws InvariantViolation. `max_steps` of 0 disables the step bound.
void validate(const Trajectory& t, std::size_t max_steps = 0);

/// Components of the trajectory reward and the total they produce.
struct RewardBreakdown {
  int acc = 0;
  int format = 0;
  int tool = 0;
  double lambda1 = 0.1;
  double lambda2 = 0.2;
  double total = 0.0;
  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

/// Closed form of the trajectory reward; the tool bonus is gated on accuracy.
/// Evaluation order is fixed so that recomputation is bit-stable.
inline double reward_total(int acc, int format, int tool, double lambda1, double lambda2) noexcept {
  const double gated_tool = acc > 0 ? static_cast<double>(tool) : 0.0;
  return static_cast<double>(acc) + lambda1 * static_cast<double>(format) + lambda2 * gated_tool;
}

struct GroupSample {
  std::vector<Trajectory> trajectories;
  std::vector<std::vector<std::string>> raw_turns;
  /// Non-empty entries mark members whose rollout ended in a policy failure.
  std::vector<std::string> diagnostics;
  std::vector<double> rewards;
  std::vector<double> advantages;
};

/// Per-trajectory token data for the clipped objective.
struct MaskedTokenBatch {
  std::vector<double> old_logprobs;
  std::vector<double> new_logprobs;
  std::vector<bool> mask;
  double advantage = 0.0;
};

enum class QuestionType { Recognition, Reasoning };
enum class AnswerType { Text, Numeric, Binary, ListRange };
enum class Provenance { Synth, ArxivMined };

struct QAItem {
  std::string id;
  std::string image_ref;
  std::string question;
  std::string answer;
  QuestionType qtype = QuestionType::Recognition;
  std::string aspect;
  AnswerType answer_type = AnswerType::Text;
  int difficulty = 1;
  Provenance provenance = Provenance::Synth;
  friend bool operator==(const QAItem&, const QAItem&) = default;
};

/// Analytical aspects a question may target, per question type.
struct AspectPool {
  std::vector<std::string> recognition;
  std::vector<std::string> reasoning;

  static AspectPool defaults();
  bool contains(QuestionType qtype, std::string_view aspect) const;
};

void validate(const QAItem& item, const AspectPool& pool);

struct Layout {
  int rows = 1;
  int cols = 1;
  friend bool operator==(const Layout&, const Layout&) = default;
};

struct ChartSpec {
  std::string persona;
  int num_subplots = 1;
  Layout layout;
  std::vector<std::string> chart_types;
  int difficulty = 1;
  std::optional<std::string> reference_id;
  friend bool operator==(const ChartSpec&, const ChartSpec&) = default;
};

void validate(const ChartSpec& spec);

std::string_view to_string(ToolErrorKind kind) noexcept;
std::string_view to_string(Termination t) noexcept;
std::string_view to_string(QuestionType q) noexcept;
std::string_view to_string(AnswerType a) noexcept;
std::string_view to_string(Provenance p) noexcept;

std::optional<ToolErrorKind> parse_tool_error_kind(std::string_view s) noexcept;
std::optional<Termination> parse_termination(std::string_view s) noexcept;
std::optional<QuestionType> parse_question_type(std::string_view s) noexcept;
std::optional<AnswerType> parse_answer_type(std::string_view s) noexcept;
std::optional<Provenance> parse_provenance(std::string_view s) noexcept;

}  // namespace ctir
