// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "reward/reward.hpp"
#include "support/test_support.hpp"

using namespace ctir;
using namespace ctir::testing;

namespace {

// Hand-written oracle for the numeric rule.
int numeric_oracle(double p, double g, double tol) {
  const double bound = g == 0.0 ? 1e-9 : tol * std::fabs(g);
  return std::fabs(p - g) <= bound ? 1 : 0;
}

Trajectory with_observations(std::vector<Observation> obs, std::optional<std::string> answer = "1") {
  const auto img = pattern_image(8, 8, "r");
  Trajectory t{img, "q", {}, "", answer, answer ? Termination::Answer : Termination::TurnLimit};
  for (auto& o : obs) t.steps.push_back(Step{"s", CodeAction{"print(1)"}, std::move(o)});
  return t;
}

}  // namespace

TEST_SUITE("reward") {
  TEST_CASE("numeric tolerance") {
    MatchPolicy p;
    CHECK(accuracy_reward("104", "100", AnswerType::Numeric, p) == numeric_oracle(104, 100, 0.05));
    CHECK(accuracy_reward("104", "100", AnswerType::Numeric, p) == 1);
    CHECK(accuracy_reward("106", "100", AnswerType::Numeric, p) == numeric_oracle(106, 100, 0.05));
    CHECK(accuracy_reward("106", "100", AnswerType::Numeric, p) == 0);
    CHECK(accuracy_reward("0", "0", AnswerType::Numeric, p) == 1);
    CHECK(accuracy_reward("0.001", "0", AnswerType::Numeric, p) == 0);
    CHECK(accuracy_reward("1,020", "1000", AnswerType::Numeric, p) == 1);
    CHECK(accuracy_reward("$98", "100", AnswerType::Numeric, p) == 1);
    CHECK(accuracy_reward("45%", "45", AnswerType::Numeric, p) == 1);
    CHECK(accuracy_reward("abc", "100", AnswerType::Numeric, p) == 0);
    CHECK(accuracy_reward(std::nullopt, "100", AnswerType::Numeric, p) == 0);
  }

  TEST_CASE("numeric oracle agreement on a sweep") {
    MatchPolicy p;
    for (int g : {-200, -3, 1, 7, 50, 100, 1234}) {
      for (int pct = -10; pct <= 10; ++pct) {
        const double pred = g * (1.0 + pct / 100.0) + (pct % 2 ? 0.0001 * g : 0.0);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", pred);
        const double parsed = std::strtod(buf, nullptr);
        CHECK(accuracy_reward(std::string(buf), std::to_string(g), AnswerType::Numeric, p) ==
              numeric_oracle(parsed, g, 0.05));
      }
    }
  }

  TEST_CASE("binary and text") {
    MatchPolicy p;
    CHECK(accuracy_reward("Yes.", "yes", AnswerType::Binary, p) == 1);
    CHECK(accuracy_reward("true", "Yes", AnswerType::Binary, p) == 1);
    CHECK(accuracy_reward("no", "yes", AnswerType::Binary, p) == 0);
    CHECK(accuracy_reward("  Blue  ", "blue", AnswerType::Text, p) == 1);
    CHECK(accuracy_reward("Red", "blue", AnswerType::Text, p) == 0);
    MatchPolicy strict = p;
    strict.case_fold = false;
    CHECK(accuracy_reward("Blue", "blue", AnswerType::Text, strict) == 0);
  }

  TEST_CASE("judge fallback") {
    MatchPolicy p;
    p.judge_fallback = true;
    CHECK(error_of([&] { accuracy_reward("azure", "blue", AnswerType::Text, p); }) == ErrorCode::JudgeRequired);
    CHECK(accuracy_reward("blue", "blue", AnswerType::Text, p) == 1);
    auto judge = scripted_client([](const json&) { return "yes"; });
    CHECK(accuracy_reward("azure", "blue", AnswerType::Text, p, judge.get(), "color?") == 1);
    int calls = 0;
    auto counting = scripted_client([&](const json&) {
      ++calls;
      return "yes";
    });
    CHECK(accuracy_reward("106", "100", AnswerType::Numeric, p, counting.get()) == 0);
    CHECK(calls == 0);
  }

  TEST_CASE("tool reward") {
    const auto img = pattern_image(8, 8, "r");
    CHECK(tool_reward(with_observations({ImageObservation{img}})) == 1);
    CHECK(tool_reward(with_observations({})) == 0);
    CHECK(tool_reward(with_observations({ToolErrorObservation{ToolErrorKind::Timeout, "t"}})) == 0);
    CHECK(tool_reward(with_observations({ToolErrorObservation{ToolErrorKind::Timeout, "t"},
                                         TextObservation{"5\n", false}})) == 1);
  }

  TEST_CASE("closed form over all components") {
    for (int acc = 0; acc <= 1; ++acc) {
      for (int format = 0; format <= 1; ++format) {
        for (int tool = 0; tool <= 1; ++tool) {
          const double expected = acc * 1.0 + 0.1 * format + (acc == 1 ? 0.2 * tool : 0.0);
          const auto b = make_breakdown(acc, format, tool, {0.1, 0.2});
          CHECK(b.total == doctest::Approx(expected).epsilon(1e-12));
          if (acc == 0) CHECK(make_breakdown(0, format, 1 - tool, {0.1, 0.2}).total == b.total);
          if (acc == 0) CHECK(make_breakdown(1, format, tool, {0.1, 0.2}).total >= b.total);
          if (format == 0) CHECK(make_breakdown(acc, 1, tool, {0.1, 0.2}).total >= b.total);
          if (tool == 0) CHECK(make_breakdown(acc, format, 1, {0.1, 0.2}).total >= b.total);
        }
      }
    }
    CHECK(make_breakdown(1, 1, 1, {0.1, 0.2}).total == doctest::Approx(1.3));
    CHECK(make_breakdown(0, 1, 1, {0.1, 0.2}).total == doctest::Approx(0.1));
    CHECK(make_breakdown(1, 0, 0, {0.1, 0.2}).total == doctest::Approx(1.0));
  }

  TEST_CASE("default weights") {
    RewardWeights w;
    CHECK(w.lambda1 == 0.1);
    CHECK(w.lambda2 == 0.2);
  }

  TEST_CASE("total reward of a scripted trajectory") {
    const auto img = pattern_image(8, 8, "r");
    Trajectory t{img, "q", {}, "sum", "25", Termination::Answer};
    t.steps.push_back(Step{"c", CodeAction{"print(25)"}, TextObservation{"25\n", false}});
    const std::vector<std::string> raw{code_turn("print(25)"), answer_turn("25")};
    const auto b = total_reward(t, raw, "25", AnswerType::Numeric, {}, {});
    CHECK(b.acc == 1);
    CHECK(b.format == 1);
    CHECK(b.tool == 1);
    CHECK(b.total == doctest::Approx(1.3));
    const auto wrong = total_reward(t, raw, "30", AnswerType::Numeric, {}, {});
    CHECK(wrong.total == doctest::Approx(0.1));
    const auto sloppy = total_reward(t, {code_turn("print(25)"), "25"}, "25", AnswerType::Numeric, {}, {});
    CHECK(sloppy.format == 0);
    CHECK(sloppy.total == doctest::Approx(1.2));
  }

  TEST_CASE("parsing helpers") {
    CHECK(parse_number("1,234.5", true) == 1234.5);
    CHECK(parse_number("3.2 kg", true) == 3.2);
    CHECK_FALSE(parse_number("3.2 kg", false).has_value());
    CHECK(parse_binary("N") == false);
    CHECK_FALSE(parse_binary("maybe").has_value());
    CHECK(normalize_text("  A  b ", true) == "a b");
  }

  TEST_CASE("policy validation") {
    MatchPolicy p;
    p.numeric_rel_tol = -1;
    CHECK(error_of([&] { validate(p); }).has_value());
  }
}
