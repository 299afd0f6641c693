// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "support/test_support.hpp"
#include "tools/tools.hpp"

using namespace ctir;
using namespace ctir::testing;

namespace {

ToolConfig cfg_with(double factor = 1.0, int min_side = 8) {
  ToolConfig c;
  c.crop_resize_factor = factor;
  c.min_crop_side = min_side;
  c.exec_limits = quick_limits();
  return c;
}

const ChartImage& image_of(const Observation& o) { return std::get<ImageObservation>(o).image; }

}  // namespace

TEST_SUITE("tools") {
  TEST_CASE("identity crop reproduces the image") {
    const auto img = pattern_image(100, 100, "c");
    const auto out = image_of(crop(img, {0, 0, 100, 100}, cfg_with()));
    CHECK(out.width() == 100);
    CHECK(out.height() == 100);
    CHECK(std::equal(out.bytes().begin(), out.bytes().end(), img.bytes().begin(), img.bytes().end()));
  }

  TEST_CASE("offset crop") {
    const auto img = pattern_image(100, 100, "c");
    const auto out = image_of(crop(img, {10, 20, 60, 50}, cfg_with()));
    CHECK(out.width() == 50);
    CHECK(out.height() == 30);
    CHECK(out.at(0, 0) == img.at(10, 20));
    for (int y = 0; y < 30; ++y) {
      for (int x = 0; x < 50; ++x) REQUIRE(out.at(x, y) == img.at(10 + x, 20 + y));
    }
  }

  TEST_CASE("overshooting box is clamped to the corner") {
    const auto img = pattern_image(100, 100, "c");
    const auto out = image_of(crop(img, {90, 90, 150, 150}, cfg_with()));
    CHECK(out.width() == 10);
    CHECK(out.height() == 10);
    CHECK(out.at(9, 9) == img.at(99, 99));
  }

  TEST_CASE("slivers and out-of-frame boxes are invalid") {
    const auto img = pattern_image(100, 100, "c");
    for (BBox b : {BBox{200, 200, 300, 300}, BBox{-50, -50, -1, -1}, BBox{0, 0, 7, 50}, BBox{30, 30, 10, 10}}) {
      const auto o = crop(img, b, cfg_with());
      REQUIRE(is_tool_error(o));
      CHECK(std::get<ToolErrorObservation>(o).kind == ToolErrorKind::InvalidArgs);
    }
  }

  TEST_CASE("upscaling uses nearest neighbour") {
    const auto img = pattern_image(40, 40, "c");
    const auto out = image_of(crop(img, {4, 6, 14, 16}, cfg_with(2.0)));
    CHECK(out.width() == 20);
    CHECK(out.height() == 20);
    for (int y = 0; y < 20; ++y) {
      for (int x = 0; x < 20; ++x) REQUIRE(out.at(x, y) == img.at(4 + x / 2, 6 + y / 2));
    }
  }

  TEST_CASE("crop is deterministic") {
    const auto img = pattern_image(64, 48, "c");
    CHECK(crop(img, {3, 4, 40, 30}, cfg_with(1.5)) == crop(img, {3, 4, 40, 30}, cfg_with(1.5)));
  }

  TEST_CASE("config validation") {
    CHECK(error_of([] { validate(cfg_with(0.5)); }) == ErrorCode::InvalidArgument);
    CHECK(error_of([] { validate(cfg_with(1.0, 0)); }) == ErrorCode::InvalidArgument);
    CHECK_NOTHROW(validate(cfg_with()));
  }

  TEST_CASE("code tool") {
    LocalSandbox sandbox(test_sandbox_options());
    const auto img = pattern_image(30, 20, "c");
    const auto cfg = cfg_with();
    CHECK(run_tool(img, CodeAction{"print(2+3)"}, cfg, sandbox) == Observation{TextObservation{"5\n", false}});

    const auto err = run_tool(img, CodeAction{"raise ValueError('nope')"}, cfg, sandbox);
    REQUIRE(is_tool_error(err));
    CHECK(std::get<ToolErrorObservation>(err).kind == ToolErrorKind::ExecFailure);
    CHECK(std::get<ToolErrorObservation>(err).message.find("ValueError") != std::string::npos);

    const auto seen = run_tool(img, CodeAction{"import os\nprint(os.path.getsize('chart.png') > 0)"}, cfg, sandbox);
    CHECK(seen == Observation{TextObservation{"True\n", false}});

    const auto ro = run_tool(img, CodeAction{"open('chart.png', 'ab').write(b'x')"}, cfg, sandbox);
    CHECK(is_tool_error(ro));

    const auto empty = run_tool(img, CodeAction{""}, cfg, sandbox);
    REQUIRE(is_tool_error(empty));
    CHECK(std::get<ToolErrorObservation>(empty).kind == ToolErrorKind::InvalidArgs);
  }

  TEST_CASE("code tool timeout and truncation") {
    LocalSandbox sandbox(test_sandbox_options());
    const auto img = pattern_image(10, 10, "c");
    auto cfg = cfg_with();
    cfg.exec_limits.wall_timeout_s = 1.0;
    const auto slow = run_tool(img, CodeAction{"while True: pass"}, cfg, sandbox);
    REQUIRE(is_tool_error(slow));
    CHECK(std::get<ToolErrorObservation>(slow).kind == ToolErrorKind::Timeout);

    cfg = cfg_with();
    cfg.exec_limits.stdout_cap_bytes = 16;
    const auto big = run_tool(img, CodeAction{"print('x' * 1000)"}, cfg, sandbox);
    REQUIRE(std::holds_alternative<TextObservation>(big));
    CHECK(std::get<TextObservation>(big).content == std::string(16, 'x'));
    CHECK(std::get<TextObservation>(big).truncated);
  }

  TEST_CASE("unavailable sandbox becomes a tool error") {
    LocalSandboxOptions o;
    o.interpreter_cmd = {"definitely-not-an-interpreter-xyz"};
    LocalSandbox sandbox(o);
    const auto r = run_tool(pattern_image(10, 10, "c"), CodeAction{"print(1)"}, cfg_with(), sandbox);
    REQUIRE(is_tool_error(r));
    CHECK(std::get<ToolErrorObservation>(r).kind == ToolErrorKind::ExecFailure);
  }
}
