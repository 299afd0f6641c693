// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "core/error.hpp"
#include "parser/turn_parser.hpp"
#include "support/test_support.hpp"

using namespace ctir;
using namespace ctir::testing;

namespace {

bool has(const ParsedTurn& t, ViolationKind v) {
  return std::find(t.violations.begin(), t.violations.end(), v) != t.violations.end();
}

Trajectory two_step(const std::optional<std::string>& answer) {
  const auto img = pattern_image(8, 8, "p");
  Trajectory t{img, "q", {}, "", answer, answer ? Termination::Answer : Termination::TurnLimit};
  t.steps.push_back(Step{"a", CropAction{{0, 0, 8, 8}}, ImageObservation{img}});
  return t;
}

}  // namespace

TEST_SUITE("parser") {
  TEST_CASE("crop call") {
    const auto t = parse_turn(
        R"(<think>zoom to legend</think><tool_call>{"name":"crop","arguments":{"bbox":[10,20,110,220]}}</tool_call>)");
    CHECK(t.compliant());
    CHECK(t.reasoning == "zoom to legend");
    REQUIRE(t.tool_call.has_value());
    CHECK(*t.tool_call == ToolAction{CropAction{{10, 20, 110, 220}}});
    CHECK_FALSE(t.final_answer.has_value());
  }

  TEST_CASE("answer") {
    const auto t = parse_turn("<think>done</think><answer>42</answer>");
    CHECK(t.compliant());
    CHECK(t.final_answer == "42");
    CHECK_FALSE(t.tool_call.has_value());
  }

  TEST_CASE("code call with escaped newlines") {
    const auto t = parse_turn(code_turn("x = 3\nprint(x * 2)"));
    CHECK(t.compliant());
    REQUIRE(t.tool_call.has_value());
    CHECK(std::get<CodeAction>(*t.tool_call).source == "x = 3\nprint(x * 2)");
  }

  TEST_CASE("whitespace between blocks is ignored") {
    const auto t = parse_turn("  <think>  a  </think>\n\n<answer> 7 </answer>\n");
    CHECK(t.compliant());
    CHECK(t.reasoning == "a");
    CHECK(t.final_answer == "7");
  }

  TEST_CASE("violations") {
    CHECK(parse_turn("<think>hmm</think>").violations == std::vector{ViolationKind::NoActionOrAnswer});
    CHECK(has(parse_turn("<answer>1</answer>"), ViolationKind::MissingThinkBlock));
    CHECK(has(parse_turn("<think>a"), ViolationKind::UnclosedTag));
    CHECK(has(parse_turn("<think>a</think><answer>1"), ViolationKind::UnclosedTag));
    CHECK(has(parse_turn("<think>a</think><answer>1</answer> extra"), ViolationKind::TrailingGarbage));
    CHECK(has(parse_turn("<think>a</think><answer>1</answer><answer>2</answer>"), ViolationKind::MultipleActions));
    CHECK(has(parse_turn(crop_turn(0, 0, 5, 5) + R"(<tool_call>{"name":"crop","arguments":{"bbox":[0,0,1,1]}}</tool_call>)"),
              ViolationKind::MultipleActions));
    CHECK(has(parse_turn(R"(<think>a</think><tool_call>{"name":"zoom","arguments":{}}</tool_call>)"),
              ViolationKind::UnknownTool));
    CHECK(has(parse_turn(R"(<think>a</think><tool_call>{"name":"crop","arguments":{"bbox":[1,2,3]}}</tool_call>)"),
              ViolationKind::BadToolArgs));
    CHECK(has(parse_turn(R"(<think>a</think><tool_call>not json</tool_call>)"), ViolationKind::BadToolArgs));
    CHECK(has(parse_turn("<think>a</think><tool_call>{\"name\":\"code\",\n\"arguments\":{\"source\":\"1\"}}</tool_call>"),
              ViolationKind::BadToolArgs));
    CHECK_FALSE(parse_turn("").compliant());
  }

  TEST_CASE("render") {
    ParsedTurn ans{"x", std::nullopt, "7", {}};
    CHECK(render_turn(ans) == "<think>x</think><answer>7</answer>");
    ParsedTurn crop{"", CropAction{{0, 0, 1, 1}}, std::nullopt, {}};
    const auto back = parse_turn(render_turn(crop));
    CHECK(back.compliant());
    CHECK(back == crop);
    ParsedTurn bad{"x", std::nullopt, "7", {ViolationKind::TrailingGarbage}};
    CHECK(error_of([&] { render_turn(bad); }) == ErrorCode::NonCompliantTurn);
  }

  TEST_CASE("trajectory format") {
    const std::vector<std::string> good{crop_turn(0, 0, 8, 8), answer_turn("3")};
    CHECK(trajectory_format_ok(two_step("3"), good));
    CHECK_FALSE(trajectory_format_ok(two_step("3"), {crop_turn(0, 0, 8, 8), answer_turn("3") + " junk"}));
    CHECK_FALSE(trajectory_format_ok(two_step(std::nullopt), {crop_turn(0, 0, 8, 8), crop_turn(0, 0, 8, 8)}));
    CHECK(error_of([&] { trajectory_format_ok(two_step("3"), {answer_turn("3")}); }) == ErrorCode::ArityMismatch);
    CHECK_FALSE(trajectory_format_ok(two_step("3"), {}));
  }

  TEST_CASE("random byte strings never throw and never carry both outcomes") {
    std::mt19937_64 rng(7);
    const std::vector<std::string> pieces{"<think>", "</think>", "<tool_call>", "</tool_call>", "<answer>",
                                          "</answer>", "{\"name\":\"crop\",\"arguments\":{\"bbox\":[1,2,3,4]}}",
                                          "{", "}", "\"", " ", "\n", "x", "<", ">"};
    for (int i = 0; i < 5000; ++i) {
      std::string s;
      const int n = static_cast<int>(rng() % 12);
      for (int k = 0; k < n; ++k) {
        if (rng() % 3 == 0) {
          s.push_back(static_cast<char>(rng() % 256));
        } else {
          s += pieces[rng() % pieces.size()];
        }
      }
      ParsedTurn t;
      CHECK_NOTHROW(t = parse_turn(s));
      CHECK_FALSE((t.tool_call.has_value() && t.final_answer.has_value()));
    }
  }
}
