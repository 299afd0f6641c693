// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "evalbench/evalbench.hpp"
#include "support/test_support.hpp"

using namespace ctir;
using namespace ctir::testing;

namespace {

ChartImage gray_image(const std::vector<std::uint8_t>& levels, int w, const std::string& id = "e") {
  std::vector<std::uint8_t> rgb;
  for (auto v : levels) rgb.insert(rgb.end(), {v, v, v});
  return ChartImage(w, static_cast<int>(levels.size()) / w, std::move(rgb), id);
}

// Entropy from first principles: histogram of BT.601 integer luma.
double entropy_oracle(const ChartImage& img) {
  std::vector<double> hist(256, 0.0);
  const auto b = img.bytes();
  const std::size_t n = b.size() / 3;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = (299 * b[3 * i] + 587 * b[3 * i + 1] + 114 * b[3 * i + 2] + 500) / 1000;
    hist[static_cast<std::size_t>(y)] += 1.0;
  }
  double h = 0.0;
  for (double c : hist) {
    if (c > 0) h -= (c / n) * std::log2(c / n);
  }
  return h;
}

Trajectory calls(int crops, int codes) {
  const auto img = pattern_image(8, 8, "t");
  Trajectory t{img, "q", {}, "", "1", Termination::Answer};
  for (int i = 0; i < crops; ++i) t.steps.push_back(Step{"", CropAction{{0, 0, 8, 8}}, ImageObservation{img}});
  for (int i = 0; i < codes; ++i) t.steps.push_back(Step{"", CodeAction{"print(1)"}, TextObservation{"1\n", false}});
  return t;
}

std::vector<QAItem> dataset(int n) {
  std::vector<QAItem> items;
  for (int i = 0; i < n; ++i) {
    items.push_back(QAItem{"item-" + std::to_string(i), "img-" + std::to_string(i), "What is item " + std::to_string(i) + "?",
                           std::to_string(i * 10), i % 2 ? QuestionType::Reasoning : QuestionType::Recognition,
                           i % 2 ? "Trend Analysis" : "Counting", AnswerType::Numeric, 3, Provenance::Synth});
  }
  return items;
}

}  // namespace

TEST_SUITE("evalbench") {
  TEST_CASE("entropy examples") {
    CHECK(pixel_entropy(gray_image(std::vector<std::uint8_t>(64, 77), 8)) == 0.0);
    std::vector<std::uint8_t> half(64, 0);
    std::fill(half.begin() + 32, half.end(), 255);
    CHECK(pixel_entropy(gray_image(half, 8)) == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<std::uint8_t> four;
    for (int i = 0; i < 64; ++i) four.push_back(static_cast<std::uint8_t>((i % 4) * 60));
    CHECK(pixel_entropy(gray_image(four, 8)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(avg_pixel_entropy({gray_image(half, 8), gray_image(four, 8)}) == doctest::Approx(1.5));
    CHECK(error_of([] { avg_pixel_entropy({}); }) == ErrorCode::EmptyDataset);
    CHECK(pixel_entropy(gray_image(half, 8), std::exp(1.0)) == doctest::Approx(std::log(2.0)));
  }

  TEST_CASE("entropy bounds, permutation invariance and oracle agreement") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
      const auto img = pattern_image(16 + trial, 12, "p", trial * 31);
      const double h = pixel_entropy(img);
      CHECK(h >= 0.0);
      CHECK(h <= 8.0 + 1e-12);
      CHECK(h == doctest::Approx(entropy_oracle(img)).epsilon(1e-12));
      std::vector<std::array<std::uint8_t, 3>> px;
      const auto b = img.bytes();
      for (std::size_t i = 0; i < b.size(); i += 3) px.push_back({b[i], b[i + 1], b[i + 2]});
      std::shuffle(px.begin(), px.end(), rng);
      std::vector<std::uint8_t> flat;
      for (const auto& p : px) flat.insert(flat.end(), p.begin(), p.end());
      CHECK(pixel_entropy(ChartImage(img.width(), img.height(), flat, "s")) == doctest::Approx(h).epsilon(1e-12));
    }
    CHECK(luma({255, 255, 255}) == 255);
    CHECK(luma({255, 0, 0}) == 76);
  }

  TEST_CASE("tool distribution") {
    const auto d = tool_distribution(std::vector{calls(2, 1), calls(1, 0)});
    CHECK(d.crop_calls == 3);
    CHECK(d.code_calls == 1);
    CHECK(d.crop_pct == doctest::Approx(75.0));
    CHECK(d.code_pct == doctest::Approx(25.0));
    const auto none = tool_distribution(std::vector{calls(0, 0)});
    CHECK(none.crop_pct == 0.0);
    CHECK(none.code_pct == 0.0);
    const auto code = tool_distribution(std::vector{calls(0, 3)});
    CHECK(code.crop_pct == 0.0);
    CHECK(code.code_pct == doctest::Approx(100.0));
  }

  TEST_CASE("benchmark accuracy and report") {
    TempDir dir;
    LocalSandbox sb(test_sandbox_options());
    MemoryImageStore images;
    const auto items = dataset(10);
    for (const auto& it : items) images.put(pattern_image(20, 20, it.image_ref));
    // Correct on items 0..6.
    auto policy = scripted_client([](const json& body) {
      CHECK(body["temperature"] == 0.0);
      const auto q = message_text(body["messages"][1]);
      const int i = std::stoi(q.substr(q.find("item ") + 5));
      return answer_turn(std::to_string(i < 7 ? i * 10 : i * 10 + 99));
    });
    EvalConfig cfg;
    cfg.rollout.tool_cfg.exec_limits = quick_limits();
    cfg.config_hash = "abc";
    DirectoryImageStore store_images(store_image_dir(dir / "traj.jsonl"), {});
    TrajectoryStoreWriter writer(dir / "traj.jsonl", store_images);
    const auto report = run_benchmark(*policy, sb, items, images, cfg, &writer);
    CHECK(report.n_items == 10);
    CHECK(report.accuracy == doctest::Approx(0.7));
    double sum = 0;
    for (const auto& r : report.items) sum += r.acc;
    CHECK(report.accuracy == sum / 10.0);
    CHECK(report.tools.crop_pct == 0.0);
    CHECK(report.tools.code_pct == 0.0);
    CHECK(report.mean_turns == doctest::Approx(1.0));
    const auto j = to_json(report);
    CHECK(j["schema"] == kEvalReportSchema);
    CHECK(j["config_hash"] == "abc");
    const auto csv = to_csv(report);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
    DirectoryImageStore reread(store_image_dir(dir / "traj.jsonl"), {});
    CHECK(read_trajectory_store(dir / "traj.jsonl", reread).size() == 10);
  }

  TEST_CASE("benchmark with tools and failures") {
    LocalSandbox sb(test_sandbox_options());
    MemoryImageStore images;
    const auto items = dataset(4);
    for (const auto& it : items) images.put(pattern_image(20, 20, it.image_ref));
    auto policy = scripted_client([](const json& body) -> std::string {
      const auto q = message_text(body["messages"][1]);
      const int i = std::stoi(q.substr(q.find("item ") + 5));
      if (i == 3) fail(ErrorCode::EndpointUnavailable, "down");
      const auto k = assistant_turns(body);
      if (k == 0) return crop_turn(0, 0, 10, 10);
      if (k == 1) return code_turn("print(" + std::to_string(i * 10) + ")");
      return answer_turn(std::to_string(i * 10));
    });
    EvalConfig cfg;
    cfg.rollout.tool_cfg.exec_limits = quick_limits();
    const auto report = run_benchmark(*policy, sb, items, images, cfg);
    CHECK(report.accuracy == doctest::Approx(0.75));
    CHECK(report.policy_failures == 1);
    CHECK(report.tools.crop_pct == doctest::Approx(50.0));
    CHECK(report.tools.code_pct == doctest::Approx(50.0));
  }

  TEST_CASE("empty dataset and missing images") {
    LocalSandbox sb(test_sandbox_options());
    MemoryImageStore images;
    auto policy = scripted_client([](const json&) { return answer_turn("1"); });
    CHECK(error_of([&] { run_benchmark(*policy, sb, {}, images, EvalConfig{}); }) == ErrorCode::DatasetMalformed);
    CHECK(error_of([&] { run_benchmark(*policy, sb, dataset(1), images, EvalConfig{}); }) == ErrorCode::ImageNotFound);
  }

  TEST_CASE("answer type inference") {
    CHECK(infer_answer_type("42") == AnswerType::Numeric);
    CHECK(infer_answer_type("3.5%") == AnswerType::Numeric);
    CHECK(infer_answer_type("Yes") == AnswerType::Binary);
    CHECK(infer_answer_type("Blue") == AnswerType::Text);
    CHECK(infer_answer_type("[1, 2]") == AnswerType::ListRange);
  }

  TEST_CASE("benchmark adapters") {
    TempDir dir;
    save_png(pattern_image(12, 10, "a"), dir / "png" / "a.png");
    save_png(pattern_image(12, 10, "b", 2), dir / "png" / "b.png");
    spit(dir / "test.json", R"([{"imgname":"a.png","query":"Peak value?","label":"42"},
                               {"imgname":"b.png","query":"Is it rising?","label":"Yes"}])");
    const auto adapter = builtin_adapter("chartqa");
    REQUIRE(adapter.has_value());
    const auto n = adapt_benchmark(dir / "test.json", *adapter, dir / "out" / "qa.jsonl", dir / "out" / "images");
    CHECK(n == 2);
    const auto items = read_qa_jsonl(dir / "out" / "qa.jsonl", AspectPool::defaults());
    REQUIRE(items.size() == 2);
    CHECK(items[0].question == "Peak value?");
    CHECK(items[0].answer_type == AnswerType::Numeric);
    CHECK(items[1].answer_type == AnswerType::Binary);
    DirectoryImageStore store(dir / "out" / "images", {});
    const auto img = store.find(items[0].image_ref);
    REQUIRE(img.has_value());
    CHECK(img->content_hash() == pattern_image(12, 10, "a").content_hash());
    CHECK_FALSE(builtin_adapter("nope").has_value());
  }
}
