// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <atomic>

#include "support/test_support.hpp"

using namespace ctir;
using namespace ctir::testing;

namespace {

std::vector<ChatMessage> hello() { return {text_message(Role::User, "hello")}; }

}  // namespace

TEST_SUITE("clients") {
  TEST_CASE("request body and reply text") {
    json seen;
    auto t = std::make_shared<FunctionTransport>([&](const std::string& path, const json& body) {
      CHECK(path == "/chat/completions");
      seen = body;
      return chat_reply("hi there");
    });
    ChatClient c(t, fast_endpoint("m1"));
    Sampling s{0.5, 64, false, 11};
    const auto img = pattern_image(4, 4, "img");
    const auto r = c.complete({ChatMessage{Role::User, {ImagePart{img}, TextPart{"what?"}}}}, s);
    CHECK(r.text == "hi there");
    CHECK_FALSE(r.token_logprobs.has_value());
    CHECK(seen["model"] == "m1");
    CHECK(seen["temperature"] == 0.5);
    CHECK(seen["max_tokens"] == 64);
    CHECK(seen["seed"] == 11);
    const auto& parts = seen["messages"][0]["content"];
    CHECK(parts[0]["type"] == "image_url");
    const std::string url = parts[0]["image_url"]["url"];
    CHECK(url.rfind("data:image/png;base64,", 0) == 0);
    const auto png = base64_decode(url.substr(std::string("data:image/png;base64,").size()));
    CHECK(decode_png(png, "x").content_hash() == img.content_hash());
    CHECK(parts[1]["text"] == "what?");
  }

  TEST_CASE("build_request is deterministic") {
    auto c = scripted_client([](const json&) { return "x"; });
    Sampling s;
    CHECK(c->build_request(hello(), s) == c->build_request(hello(), s));
  }

  TEST_CASE("transient failures are retried") {
    std::atomic<int> calls{0};
    auto t = std::make_shared<FunctionTransport>([&](const std::string&, const json&) {
      if (calls++ < 2) fail(ErrorCode::EndpointUnavailable, "down");
      return chat_reply("ok");
    });
    ChatClient c(t, fast_endpoint());
    CHECK(c.complete(hello(), {}).text == "ok");
    CHECK(calls == 3);
  }

  TEST_CASE("retries are bounded") {
    std::atomic<int> calls{0};
    auto t = std::make_shared<FunctionTransport>([&](const std::string&, const json&) -> json {
      ++calls;
      fail(ErrorCode::EndpointUnavailable, "down");
    });
    ChatClient c(t, fast_endpoint());
    CHECK(error_of([&] { c.complete(hello(), {}); }) == ErrorCode::EndpointUnavailable);
    CHECK(calls == 3);
  }

  TEST_CASE("malformed replies are not retried") {
    std::atomic<int> calls{0};
    auto t = std::make_shared<FunctionTransport>([&](const std::string&, const json&) {
      ++calls;
      return json{{"nothing", 1}};
    });
    ChatClient c(t, fast_endpoint());
    CHECK(error_of([&] { c.complete(hello(), {}); }) == ErrorCode::MalformedReply);
    CHECK(calls == 1);
  }

  TEST_CASE("token logprobs") {
    auto t = std::make_shared<FunctionTransport>([](const std::string&, const json& body) {
      auto r = chat_reply("ab");
      if (body.value("logprobs", false)) {
        r["choices"][0]["logprobs"] = {{"content", json::array({{{"token", "a"}, {"logprob", -0.5}},
                                                                 {{"token", "b"}, {"logprob", -1.25}}})}};
      }
      return r;
    });
    ChatClient c(t, fast_endpoint());
    Sampling s;
    s.want_logprobs = true;
    const auto r = c.complete(hello(), s);
    REQUIRE(r.token_logprobs.has_value());
    REQUIRE(r.token_logprobs->size() == 2);
    CHECK((*r.token_logprobs)[1].token == "b");
    CHECK((*r.token_logprobs)[1].logprob == -1.25);

    auto plain = scripted_client([](const json&) { return "ab"; });
    CHECK(error_of([&] { plain->complete(hello(), s); }) == ErrorCode::CapabilityMissing);
  }

  TEST_CASE("yes/no parsing") {
    CHECK(parse_yes_no("yes") == true);
    CHECK(parse_yes_no("No.") == false);
    CHECK(parse_yes_no("  YES!\n") == true);
    CHECK(parse_yes_no("verdict: no") == false);
    CHECK(parse_yes_no(R"({"verdict": "yes"})") == true);
    CHECK_FALSE(parse_yes_no("perhaps").has_value());
    CHECK_FALSE(parse_yes_no("").has_value());
  }

  TEST_CASE("judge verdicts") {
    auto yes = scripted_client([](const json& body) {
      CHECK(last_text(body).find("Ground truth: 5") != std::string::npos);
      return "Yes";
    });
    CHECK(judge_answer(*yes, "q", "5", "five").correct);
    auto no = scripted_client([](const json&) { return "no"; });
    CHECK_FALSE(judge_answer(*no, "q", "5", "6").correct);
    auto garbage = scripted_client([](const json&) { return "I cannot say"; });
    CHECK(error_of([&] { judge_answer(*garbage, "q", "5", "6"); }) == ErrorCode::UnparseableVerdict);
  }

  TEST_CASE("cassette record and replay") {
    TempDir dir;
    const auto file = dir / "c.jsonl";
    std::atomic<int> calls{0};
    auto inner = std::make_shared<FunctionTransport>([&](const std::string&, const json& body) {
      ++calls;
      return chat_reply("reply to " + last_text(body));
    });
    const auto img = pattern_image(16, 16, "i");
    const std::vector<ChatMessage> with_image{ChatMessage{Role::User, {ImagePart{img}, TextPart{"a"}}}};
    {
      ChatClient rec(CassetteTransport::recorder(inner, file), fast_endpoint());
      CHECK(rec.complete(with_image, {}).text == "reply to a");
      CHECK(rec.complete({text_message(Role::User, "b")}, {}).text == "reply to b");
    }
    CHECK(calls == 2);
    const auto recorded = slurp(file);
    CHECK(recorded.find(base64_encode(encode_png(img))) == std::string::npos);

    ChatClient play(CassetteTransport::player(file), fast_endpoint());
    CHECK(play.complete({text_message(Role::User, "b")}, {}).text == "reply to b");
    CHECK(play.complete(with_image, {}).text == "reply to a");
    CHECK(play.complete(with_image, {}).text == "reply to a");
    CHECK(calls == 2);
    CHECK(error_of([&] { play.complete({text_message(Role::User, "c")}, {}); }) == ErrorCode::CassetteMiss);
    CHECK(error_of([&] { CassetteTransport::player(dir / "missing.jsonl"); }).has_value());
  }

  TEST_CASE("cassette keys depend on the full body") {
    const json a{{"model", "m"}, {"seed", 1}};
    const json b{{"model", "m"}, {"seed", 2}};
    CHECK(cassette_key("/x", a) == cassette_key("/x", a));
    CHECK(cassette_key("/x", a) != cassette_key("/x", b));
    CHECK(cassette_key("/x", a) != cassette_key("/y", a));
  }

  TEST_CASE("unreachable HTTP endpoint") {
    auto t = std::make_shared<HttpTransport>("http://127.0.0.1:1/v1", "", 1.0);
    auto ep = fast_endpoint();
    ep.max_retries = 1;
    ChatClient c(t, ep);
    CHECK(error_of([&] { c.complete(hello(), {}); }) == ErrorCode::EndpointUnavailable);
  }
}
