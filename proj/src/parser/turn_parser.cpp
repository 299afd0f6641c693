// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "parser/turn_parser.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>

#include <nlohmann/json.hpp>

#include "core/error.hpp"

namespace ctir {
namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kToolOpen = "<tool_call>";
constexpr std::string_view kToolClose = "</tool_call>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::size_t skip_ws(std::string_view s, std::size_t pos) {
  while (pos < s.size() && is_space(s[pos])) ++pos;
  return pos;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

void add(std::vector<ViolationKind>& v, ViolationKind k) {
  if (std::find(v.begin(), v.end(), k) == v.end()) v.push_back(k);
}

bool read_int(const nlohmann::json& v, int& out) {
  if (!v.is_number_integer()) return false;
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) return false;
    out = static_cast<int>(u);
    return true;
  }
  const auto i = v.get<std::int64_t>();
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) return false;
  out = static_cast<int>(i);
  return true;
}

// Returns the decoded action or records UnknownTool / BadToolArgs.
std::optional<ToolAction> parse_tool_payload(std::string_view payload,
                                             std::vector<ViolationKind>& violations) {
  const std::string body = trim(payload);
  if (body.find('\n') != std::string::npos || body.find('\r') != std::string::npos) {
    add(violations, ViolationKind::BadToolArgs);
    return std::nullopt;
  }
  const auto j = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    add(violations, ViolationKind::BadToolArgs);
    return std::nullopt;
  }
  const auto name = j.find("name");
  const auto args = j.find("arguments");
  if (name == j.end() || !name->is_string() || args == j.end() || !args->is_object() || j.size() != 2) {
    add(violations, ViolationKind::BadToolArgs);
    return std::nullopt;
  }
  const auto& tool = name->get_ref<const std::string&>();
  if (tool == "crop") {
    const auto bbox = args->find("bbox");
    if (bbox == args->end() || args->size() != 1 || !bbox->is_array() || bbox->size() != 4) {
      add(violations, ViolationKind::BadToolArgs);
      return std::nullopt;
    }
    int c[4];
    for (std::size_t i = 0; i < 4; ++i) {
      if (!read_int((*bbox)[i], c[i])) {
        add(violations, ViolationKind::BadToolArgs);
        return std::nullopt;
      }
    }
    BBox box{c[0], c[1], c[2], c[3]};
    if (!bbox_valid(box)) {
      add(violations, ViolationKind::BadToolArgs);
      return std::nullopt;
    }
    return CropAction{box};
  }
  if (tool == "code") {
    const auto src = args->find("source");
    if (src == args->end() || args->size() != 1 || !src->is_string() ||
        src->get_ref<const std::string&>().empty()) {
      add(violations, ViolationKind::BadToolArgs);
      return std::nullopt;
    }
    return CodeAction{src->get<std::string>()};
  }
  add(violations, ViolationKind::UnknownTool);
  return std::nullopt;
}

std::size_t next_action_tag(std::string_view s, std::size_t pos) {
  return std::min(s.find(kToolOpen, pos), s.find(kAnswerOpen, pos));
}

}  // namespace

std::string_view to_string(ViolationKind v) noexcept {
  switch (v) {
    case ViolationKind::MissingThinkBlock: return "missing_think_block";
    case ViolationKind::UnclosedTag: return "unclosed_tag";
    case ViolationKind::MultipleActions: return "multiple_actions";
    case ViolationKind::UnknownTool: return "unknown_tool";
    case ViolationKind::BadToolArgs: return "bad_tool_args";
    case ViolationKind::NoActionOrAnswer: return "no_action_or_answer";
    case ViolationKind::TrailingGarbage: return "trailing_garbage";
  }
  return "trailing_garbage";
}

ParsedTurn parse_turn(std::string_view raw) {
  ParsedTurn out;
  std::size_t pos = skip_ws(raw, 0);

  if (raw.substr(pos).starts_with(kThinkOpen)) {
    const auto close = raw.find(kThinkClose, pos + kThinkOpen.size());
    if (close == std::string_view::npos) {
      add(out.violations, ViolationKind::UnclosedTag);
      out.reasoning = trim(raw.substr(pos + kThinkOpen.size()));
      return out;
    }
    out.reasoning = trim(raw.substr(pos + kThinkOpen.size(), close - pos - kThinkOpen.size()));
    pos = close + kThinkClose.size();
  } else {
    add(out.violations, ViolationKind::MissingThinkBlock);
    pos = next_action_tag(raw, pos);
  }

  int actions = 0;
  bool unclosed = false;
  while (pos != std::string_view::npos && (pos = skip_ws(raw, pos)) < raw.size()) {
    const auto rest = raw.substr(pos);
    const bool is_tool = rest.starts_with(kToolOpen);
    const bool is_answer = !is_tool && rest.starts_with(kAnswerOpen);
    if (!is_tool && !is_answer) {
      add(out.violations, ViolationKind::TrailingGarbage);
      pos = next_action_tag(raw, pos);
      continue;
    }
    const auto open = is_tool ? kToolOpen : kAnswerOpen;
    const auto close_tag = is_tool ? kToolClose : kAnswerClose;
    const auto close = raw.find(close_tag, pos + open.size());
    if (close == std::string_view::npos) {
      add(out.violations, ViolationKind::UnclosedTag);
      unclosed = true;
      break;
    }
    const auto body = raw.substr(pos + open.size(), close - pos - open.size());
    ++actions;
    if (actions == 1) {
      if (is_tool) {
        out.tool_call = parse_tool_payload(body, out.violations);
      } else {
        auto answer = trim(body);
        if (answer.empty()) {
          add(out.violations, ViolationKind::NoActionOrAnswer);
        } else {
          out.final_answer = std::move(answer);
        }
      }
    }
    pos = close + close_tag.size();
  }

  if (actions > 1) add(out.violations, ViolationKind::MultipleActions);
  if (actions == 0 && !unclosed) add(out.violations, ViolationKind::NoActionOrAnswer);
  return out;
}

std::string render_turn(const ParsedTurn& turn) {
  if (!turn.compliant()) fail(ErrorCode::NonCompliantTurn, "cannot render a turn with violations");
  if (turn.tool_call.has_value() == turn.final_answer.has_value()) {
    fail(ErrorCode::NonCompliantTurn, "a turn needs exactly one tool call or answer");
  }
  std::string out;
  out.append(kThinkOpen).append(turn.reasoning).append(kThinkClose);
  if (turn.final_answer) {
    out.append(kAnswerOpen).append(*turn.final_answer).append(kAnswerClose);
    return out;
  }
  nlohmann::ordered_json call;
  if (const auto* crop = std::get_if<CropAction>(&*turn.tool_call)) {
    const auto& b = crop->bbox;
    call["name"] = "crop";
    call["arguments"] = {{"bbox", {b.x0, b.y0, b.x1, b.y1}}};
  } else {
    call["name"] = "code";
    call["arguments"] = {{"source", std::get<CodeAction>(*turn.tool_call).source}};
  }
  out.append(kToolOpen).append(call.dump()).append(kToolClose);
  return out;
}

bool trajectory_format_ok(const Trajectory& t, const std::vector<std::string>& raw_turns) {
  if (raw_turns.empty()) return false;
  for (const auto& raw : raw_turns) {
    if (!parse_turn(raw).compliant()) return false;
  }
  if (t.answer.has_value() && raw_turns.size() != t.steps.size() + 1) {
    fail(ErrorCode::ArityMismatch, "answered trajectory has " + std::to_string(t.steps.size()) +
                                       " steps but " + std::to_string(raw_turns.size()) + " raw turns");
  }
  return parse_turn(raw_turns.back()).final_answer.has_value();
}

}  // namespace ctir
