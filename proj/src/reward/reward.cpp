// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "reward/reward.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "core/error.hpp"
#include "core/text.hpp"
#include "parser/turn_parser.hpp"

namespace ctir {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string strip_edges(std::string s) {
  constexpr std::string_view kEdge = "\"'`*.!;:";
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (kEdge.find(s[b]) != std::string_view::npos || is_space(s[b]))) ++b;
  while (e > b && (kEdge.find(s[e - 1]) != std::string_view::npos || is_space(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool strip_prefix(std::string& s, std::string_view p) {
  if (!s.starts_with(p)) return false;
  s.erase(0, p.size());
  return true;
}

bool strip_suffix(std::string& s, std::string_view p) {
  if (!s.ends_with(p)) return false;
  s.resize(s.size() - p.size());
  return true;
}

std::string normalize_list(std::string_view s, bool case_fold) {
  std::string t = text::trim(s);
  if (t.size() >= 2 && ((t.front() == '[' && t.back() == ']') || (t.front() == '(' && t.back() == ')'))) {
    t = t.substr(1, t.size() - 2);
  }
  for (auto& c : t) {
    if (c == ';') c = ',';
  }
  std::string out;
  for (const auto& part : text::split(t, ',')) {
    auto n = normalize_text(part, case_fold);
    if (n.empty()) continue;
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

void validate(const MatchPolicy& policy) {
  if (!(policy.numeric_rel_tol >= 0.0)) fail(ErrorCode::ConfigInvalid, "numeric_rel_tol must be >= 0");
}

std::string normalize_text(std::string_view s, bool case_fold) {
  auto t = strip_edges(text::collapse_ws(s));
  return case_fold ? text::to_lower(t) : t;
}

std::optional<double> parse_number(std::string_view s, bool strip_units) {
  std::string t = strip_edges(text::trim(s));
  if (strip_units) {
    for (std::string_view cur : {"$", "€", "£", "¥", "usd", "USD"}) {
      if (strip_prefix(t, cur)) break;
    }
    t = text::trim(t);
  }
  std::string digits;
  for (char c : t) {
    if (c != ',') digits += c;
  }
  if (digits.empty()) return std::nullopt;
  const char* begin = digits.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || !std::isfinite(v)) return std::nullopt;
  // strtod accepts hex and inf/nan spellings; only plain decimals are answers.
  for (const char* p = begin; p != end; ++p) {
    if (!(std::isdigit(static_cast<unsigned char>(*p)) || *p == '.' || *p == '-' || *p == '+' || *p == 'e' ||
          *p == 'E')) {
      return std::nullopt;
    }
  }
  std::string rest = text::trim(std::string_view(end));
  if (rest.empty()) return v;
  if (!strip_units) return std::nullopt;
  if (strip_suffix(rest, "%")) rest = text::trim(rest);
  for (char c : rest) {
    if (!(std::isalpha(static_cast<unsigned char>(c)) || is_space(c) || c == '/' || c == '%')) return std::nullopt;
  }
  return v;
}

std::optional<bool> parse_binary(std::string_view s) {
  const auto t = text::to_lower(strip_edges(text::trim(s)));
  if (t == "yes" || t == "true" || t == "y") return true;
  if (t == "no" || t == "false" || t == "n") return false;
  return std::nullopt;
}

int accuracy_reward(const std::optional<std::string>& pred, const std::string& gold, AnswerType answer_type,
                    const MatchPolicy& policy, ChatClient* judge, const std::string& question) {
  validate(policy);
  if (text::trim(gold).empty()) fail(ErrorCode::InvalidArgument, "gold answer is empty");
  if (!pred) return 0;

  switch (answer_type) {
    case AnswerType::Numeric: {
      const auto g = parse_number(gold, policy.strip_units);
      const auto p = parse_number(*pred, policy.strip_units);
      if (!g) return normalize_text(*pred, policy.case_fold) == normalize_text(gold, policy.case_fold) ? 1 : 0;
      if (!p) return 0;
      const double tol = *g == 0.0 ? 1e-9 : policy.numeric_rel_tol * std::fabs(*g);
      return std::fabs(*p - *g) <= tol ? 1 : 0;
    }
    case AnswerType::Binary: {
      const auto g = parse_binary(gold);
      const auto p = parse_binary(*pred);
      if (!g) return normalize_text(*pred, policy.case_fold) == normalize_text(gold, policy.case_fold) ? 1 : 0;
      return p && *p == *g ? 1 : 0;
    }
    case AnswerType::Text:
    case AnswerType::ListRange: {
      const bool match = answer_type == AnswerType::Text
                             ? normalize_text(*pred, policy.case_fold) == normalize_text(gold, policy.case_fold)
                             : normalize_list(*pred, policy.case_fold) == normalize_list(gold, policy.case_fold);
      if (match) return 1;
      if (!policy.judge_fallback) return 0;
      if (judge == nullptr) fail(ErrorCode::JudgeRequired, "judge fallback enabled but no judge endpoint configured");
      return judge_answer(*judge, question, gold, *pred).correct ? 1 : 0;
    }
  }
  return 0;
}

int tool_reward(const Trajectory& t) {
  for (const auto& step : t.steps) {
    if (!is_tool_error(step.observation)) return 1;
  }
  return 0;
}

RewardBreakdown make_breakdown(int acc, int format, int tool, RewardWeights w) {
  return RewardBreakdown{acc, format, tool, w.lambda1, w.lambda2, reward_total(acc, format, tool, w.lambda1, w.lambda2)};
}

RewardBreakdown total_reward(const Trajectory& t, const std::vector<std::string>& raw_turns, const std::string& gold,
                             AnswerType answer_type, RewardWeights weights, const MatchPolicy& policy,
                             ChatClient* judge) {
  const int acc = accuracy_reward(t.answer, gold, answer_type, policy, judge, t.question);
  const int format = trajectory_format_ok(t, raw_turns) ? 1 : 0;
  return make_breakdown(acc, format, tool_reward(t), weights);
}

}  // namespace ctir
