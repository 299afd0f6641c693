// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>

#include <jpeglib.h>

#include "core/error.hpp"
#include "core/image.hpp"
#include "core/model.hpp"
#include "core/serialize.hpp"
#include "core/text.hpp"
#include "support/test_support.hpp"

using namespace ctir;
using namespace ctir::testing;

namespace {

Trajectory answered(const ChartImage& img, const std::string& answer) {
  return Trajectory{img, "What is the peak?", {}, "read it off", answer, Termination::Answer};
}

std::vector<std::uint8_t> encode_jpeg_solid(int w, int h, Rgb c) {
  jpeg_compress_struct cinfo{};
  jpeg_error_mgr jerr{};
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  unsigned char* mem = nullptr;
  unsigned long size = 0;
  jpeg_mem_dest(&cinfo, &mem, &size);
  cinfo.image_width = static_cast<JDIMENSION>(w);
  cinfo.image_height = static_cast<JDIMENSION>(h);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, 95, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 3);
  for (int x = 0; x < w; ++x) {
    row[x * 3] = c.r;
    row[x * 3 + 1] = c.g;
    row[x * 3 + 2] = c.b;
  }
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW r = row.data();
    jpeg_write_scanlines(&cinfo, &r, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> out(mem, mem + size);
  jpeg_destroy_compress(&cinfo);
  std::free(mem);
  return out;
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("image construction checks the buffer size") {
    CHECK(error_of([] { ChartImage(2, 2, std::vector<std::uint8_t>(11), "x"); }) == ErrorCode::InvariantViolation);
    CHECK(error_of([] { ChartImage(0, 2, {}, "x"); }) == ErrorCode::InvariantViolation);
    const auto img = ChartImage::filled(3, 2, {1, 2, 3}, "f");
    CHECK(img.width() == 3);
    CHECK(img.height() == 2);
    CHECK(img.at(2, 1) == Rgb{1, 2, 3});
    CHECK(img.bytes().size() == 18);
  }

  TEST_CASE("content hash depends on pixels and dimensions, not the id") {
    const auto a = pattern_image(8, 4, "a");
    const auto b = a.with_source_id("b");
    CHECK(a.content_hash() == b.content_hash());
    CHECK(a.content_hash() != pattern_image(8, 4, "a", 1).content_hash());
    const auto wide = ChartImage::filled(4, 2, {0, 0, 0}, "w");
    const auto tall = ChartImage::filled(2, 4, {0, 0, 0}, "t");
    CHECK(wide.content_hash() != tall.content_hash());
  }

  TEST_CASE("sha256 and base64 match known vectors") {
    CHECK(sha256_hex(std::string_view("abc")) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const std::string s = "chart";
    const auto enc = base64_encode(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    CHECK(enc == "Y2hhcnQ=");
    const auto dec = base64_decode(enc);
    CHECK(std::string(dec.begin(), dec.end()) == s);
  }

  TEST_CASE("PNG round trip preserves pixels") {
    TempDir dir;
    const auto img = pattern_image(37, 23, "p", 5);
    const auto bytes = encode_png(img);
    CHECK(decode_png(bytes, "p") == img);
    save_png(img, dir / "sub" / "p.png");
    CHECK(load_png(dir / "sub" / "p.png", "p") == img);
    CHECK(load_image(dir / "sub" / "p.png", "p") == img);
    CHECK(error_of([] { decode_png(std::vector<std::uint8_t>{1, 2, 3}, "bad"); }).has_value());
  }

  TEST_CASE("JPEG files decode to RGB") {
    TempDir dir;
    const auto bytes = encode_jpeg_solid(16, 8, {200, 40, 90});
    spit(dir / "a.jpg", std::string(bytes.begin(), bytes.end()));
    const auto img = load_image(dir / "a.jpg", "a");
    CHECK(img.width() == 16);
    CHECK(img.height() == 8);
    const auto px = img.at(7, 3);
    CHECK(std::abs(px.r - 200) <= 3);
    CHECK(std::abs(px.g - 40) <= 3);
    CHECK(std::abs(px.b - 90) <= 3);
    CHECK(error_of([] { decode_jpeg(std::vector<std::uint8_t>{0xFF, 0xD8, 0xFF, 0x00}, "bad"); }).has_value());
  }

  TEST_CASE("source ids are sanitized for file names") {
    CHECK(sanitize_source_id("a/b c") != "a/b c");
    CHECK(sanitize_source_id("a/b c").find('/') == std::string::npos);
    CHECK(sanitize_source_id("plain-id_1") == "plain-id_1");
  }

  TEST_CASE("bbox validity") {
    CHECK(bbox_valid({0, 0, 1, 1}));
    CHECK_FALSE(bbox_valid({5, 0, 5, 1}));
    CHECK_FALSE(bbox_valid({0, 3, 1, 2}));
  }

  TEST_CASE("empty-steps answered trajectory round-trips") {
    MemoryImageStore store;
    const auto img = pattern_image(10, 10, "chart-1");
    store.put(img);
    const auto t = answered(img, "42");
    const auto rec = serialize_trajectory(t);
    const auto j = json::parse(rec);
    CHECK(j["steps"].empty());
    CHECK(j["answer"] == "42");
    CHECK(j["schema"] == "ctir.trajectory.v1");
    CHECK(deserialize_trajectory(rec, store) == t);
  }

  TEST_CASE("crop step is recorded with action kind crop and image refs") {
    MemoryImageStore store;
    const auto img = pattern_image(20, 20, "chart-2");
    const auto crop = ChartImage::filled(8, 8, {9, 9, 9}, "chart-2__crop");
    auto t = answered(img, "7");
    t.steps.push_back(Step{"zoom", CropAction{{0, 0, 8, 8}}, ImageObservation{crop}});
    put_images(t, store);
    const auto rec = serialize_trajectory(t);
    const auto j = json::parse(rec);
    REQUIRE(j["steps"].size() == 1);
    CHECK(j["steps"][0]["action"]["kind"] == "crop");
    CHECK(j["steps"][0]["observation"]["image"]["sha256"] == crop.content_hash());
    CHECK(rec.find("base64") == std::string::npos);
    CHECK(deserialize_trajectory(rec, store) == t);
  }

  TEST_CASE("turn-limited trajectory has no answer field") {
    MemoryImageStore store;
    const auto img = pattern_image(10, 10, "c3");
    store.put(img);
    Trajectory t{img, "q", {}, "", std::nullopt, Termination::TurnLimit};
    const auto j = json::parse(serialize_trajectory(t));
    CHECK_FALSE(j.contains("answer"));
    CHECK(j["terminated_by"] == "turn_limit");
  }

  TEST_CASE("malformed and invariant-breaking records are rejected") {
    MemoryImageStore store;
    const auto img = pattern_image(10, 10, "c4");
    store.put(img);
    const auto rec = serialize_trajectory(answered(img, "1"));
    CHECK(error_of([&] { deserialize_trajectory(rec.substr(0, rec.size() / 2), store); }) ==
          ErrorCode::MalformedRecord);
    auto j = json::parse(rec);
    j["terminated_by"] = "turn_limit";
    CHECK(error_of([&] { deserialize_trajectory(j.dump(), store); }) == ErrorCode::InvariantViolation);
    auto k = json::parse(rec);
    k["image"]["sha256"] = std::string(64, '0');
    CHECK(error_of([&] { deserialize_trajectory(k.dump(), store); }).has_value());
    MemoryImageStore empty;
    CHECK(error_of([&] { deserialize_trajectory(rec, empty); }) == ErrorCode::ImageNotFound);
  }

  TEST_CASE("trajectory invariants") {
    const auto img = pattern_image(4, 4, "i");
    Trajectory no_answer{img, "q", {}, "", std::nullopt, Termination::Answer};
    CHECK(error_of([&] { validate(no_answer); }) == ErrorCode::InvariantViolation);
    Trajectory ok{img, "q", {}, "", "x", Termination::Answer};
    ok.steps.push_back(Step{"r", CodeAction{"print(1)"}, TextObservation{"1\n", false}});
    ok.steps.push_back(Step{"r", CodeAction{"print(1)"}, TextObservation{"1\n", false}});
    CHECK_NOTHROW(validate(ok));
    CHECK(error_of([&] { validate(ok, 1); }) == ErrorCode::InvariantViolation);
  }

  TEST_CASE("trajectory store preserves member order and diagnostics") {
    TempDir dir;
    const auto path = dir / "store.jsonl";
    DirectoryImageStore images(store_image_dir(path), {});
    const auto img = pattern_image(12, 12, "s-chart");
    images.put(img);
    {
      TrajectoryStoreWriter w(path, images);
      for (int m = 0; m < 3; ++m) {
        auto t = answered(img, std::to_string(m));
        t.steps.push_back(Step{"z", CropAction{{0, 0, 8, 8}},
                               ImageObservation{ChartImage::filled(8, 8, {static_cast<std::uint8_t>(m), 0, 0},
                                                                   "crop-" + std::to_string(m))}});
        w.append(StoredTrajectory{"item", m, t, {"raw"}, m == 1 ? "boom" : ""});
      }
    }
    DirectoryImageStore reader(store_image_dir(path), {});
    const auto recs = read_trajectory_store(path, reader);
    REQUIRE(recs.size() == 3);
    for (int m = 0; m < 3; ++m) {
      CHECK(recs[m].member == m);
      CHECK(recs[m].trajectory.answer == std::to_string(m));
    }
    CHECK(recs[1].diagnostic == "boom");
  }

  TEST_CASE("QA items validate aspect pools and round-trip") {
    const auto pool = AspectPool::defaults();
    QAItem item{"q1", "img", "How many bars?", "4", QuestionType::Recognition, "Counting", AnswerType::Numeric, 2,
                Provenance::Synth};
    CHECK_NOTHROW(validate(item, pool));
    CHECK(qa_item_from_json(to_json(item)) == item);
    auto bad = item;
    bad.aspect = "Astrology";
    CHECK(error_of([&] { validate(bad, pool); }) == ErrorCode::InvariantViolation);
    auto empty_answer = item;
    empty_answer.answer = "";
    CHECK(error_of([&] { validate(empty_answer, pool); }) == ErrorCode::InvariantViolation);
    auto hard = item;
    hard.difficulty = 6;
    CHECK(error_of([&] { validate(hard, pool); }) == ErrorCode::InvariantViolation);
  }

  TEST_CASE("chart spec invariants") {
    ChartSpec s{"analyst", 4, {2, 2}, {"bar", "bar", "line", "pie"}, 3, std::nullopt};
    CHECK_NOTHROW(validate(s));
    s.layout = {1, 3};
    CHECK(error_of([&] { validate(s); }) == ErrorCode::InvariantViolation);
    s.layout = {2, 2};
    s.chart_types.pop_back();
    CHECK(error_of([&] { validate(s); }) == ErrorCode::InvariantViolation);
  }

  TEST_CASE("enum names round-trip") {
    for (auto t : {Termination::Answer, Termination::TurnLimit, Termination::ParseFailureLimit}) {
      CHECK(parse_termination(to_string(t)) == t);
    }
    for (auto a : {AnswerType::Text, AnswerType::Numeric, AnswerType::Binary, AnswerType::ListRange}) {
      CHECK(parse_answer_type(to_string(a)) == a);
    }
    for (auto k : {ToolErrorKind::Timeout, ToolErrorKind::ExecFailure, ToolErrorKind::InvalidArgs,
                   ToolErrorKind::ResourceLimit}) {
      CHECK(parse_tool_error_kind(to_string(k)) == k);
    }
    CHECK_FALSE(parse_question_type("neither").has_value());
  }

  TEST_CASE("text helpers") {
    CHECK(text::trim("  a b \n") == "a b");
    CHECK(text::collapse_ws(" a \t b\n") == "a b");
    CHECK(text::split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
    CHECK(text::tail("abcdef", 2) == "ef");
    const std::string bad = "ok\xff\xfe";
    const auto fixed = text::to_valid_utf8(bad);
    CHECK(fixed.substr(0, 2) == "ok");
    CHECK(nlohmann::json(fixed).dump().size() > 0);
  }
}
