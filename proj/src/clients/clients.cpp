// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "clients/clients.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "core/error.hpp"
#include "core/text.hpp"

namespace ctir {

using nlohmann::json;

namespace {

json content_json(const std::vector<ContentPart>& parts) {
  json out = json::array();
  for (const auto& part : parts) {
    if (const auto* t = std::get_if<TextPart>(&part)) {
      out.push_back({{"type", "text"}, {"text", t->text}});
    } else {
      const auto& img = std::get<ImagePart>(part).image;
      out.push_back({{"type", "image_url"},
                     {"image_url", {{"url", "data:image/png;base64," + base64_encode(encode_png(img))}}}});
    }
  }
  return out;
}

std::string reply_text(const json& message) {
  const auto it = message.find("content");
  if (it == message.end()) fail(ErrorCode::MalformedReply, "reply message has no content");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_array()) {
    std::string text;
    for (const auto& part : *it) {
      if (part.is_object() && part.value("type", "") == "text" && part.contains("text") && part["text"].is_string()) {
        text += part["text"].get<std::string>();
      }
    }
    return text;
  }
  fail(ErrorCode::MalformedReply, "reply content is neither text nor parts");
}

bool transient(ErrorCode code) {
  return code == ErrorCode::EndpointUnavailable || code == ErrorCode::DeadlineExceeded;
}

}  // namespace

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

ChatMessage text_message(Role role, std::string text) {
  return ChatMessage{role, {TextPart{std::move(text)}}};
}

ChatClient::ChatClient(std::shared_ptr<Transport> transport, EndpointConfig config)
    : transport_(std::move(transport)),
      config_(std::move(config)),
      inflight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config_.max_inflight, 1, 4096))) {
  if (!transport_) fail(ErrorCode::ConfigInvalid, "chat client needs a transport");
}

json ChatClient::build_request(const std::vector<ChatMessage>& messages, const Sampling& sampling) const {
  json msgs = json::array();
  for (const auto& m : messages) {
    if (m.content.empty()) fail(ErrorCode::InvalidArgument, "chat message without content parts");
    msgs.push_back({{"role", to_string(m.role)}, {"content", content_json(m.content)}});
  }
  json body{{"model", config_.model},
            {"messages", std::move(msgs)},
            {"temperature", sampling.temperature},
            {"max_tokens", sampling.max_tokens}};
  if (sampling.want_logprobs) body["logprobs"] = true;
  if (sampling.seed) body["seed"] = *sampling.seed;
  return body;
}

PolicyReply ChatClient::complete(const std::vector<ChatMessage>& messages, const Sampling& sampling,
                                 std::stop_token stop) {
  const auto body = build_request(messages, sampling);
  inflight_.acquire();
  struct Release {
    std::counting_semaphore<4096>& s;
    ~Release() { s.release(); }
  } release{inflight_};

  json reply;
  for (int attempt = 0;; ++attempt) {
    try {
      reply = transport_->post("/chat/completions", body);
      break;
    } catch (const Error& e) {
      if (!transient(e.code()) || attempt >= config_.max_retries) {
        if (transient(e.code())) {
          throw Error(e.code(), std::string(e.what()) + " (after " + std::to_string(attempt) + " retries)");
        }
        throw;
      }
      if (stop.stop_requested()) fail(ErrorCode::EndpointUnavailable, "request cancelled");
      const auto delay = std::chrono::milliseconds(static_cast<long long>(config_.retry_backoff_ms) << std::min(attempt, 10));
      std::this_thread::sleep_for(delay);
    }
  }

  if (!reply.is_object() || !reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty()) {
    fail(ErrorCode::MalformedReply, "reply has no choices");
  }
  const auto& choice = reply["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
    fail(ErrorCode::MalformedReply, "reply choice has no message");
  }
  PolicyReply out;
  out.text = reply_text(choice["message"]);
  if (sampling.want_logprobs) {
    const auto lp = choice.find("logprobs");
    if (lp == choice.end() || !lp->is_object() || !lp->contains("content") || !(*lp)["content"].is_array()) {
      fail(ErrorCode::CapabilityMissing, identity() + " did not return token logprobs");
    }
    std::vector<TokenLogprob> tokens;
    for (const auto& t : (*lp)["content"]) {
      if (!t.is_object() || !t.contains("logprob") || !t["logprob"].is_number()) {
        fail(ErrorCode::MalformedReply, "logprob entry without a numeric logprob");
      }
      const double v = t["logprob"].get<double>();
      if (!std::isfinite(v)) fail(ErrorCode::MalformedReply, "non-finite logprob");
      tokens.push_back({t.value("token", std::string{}), v});
    }
    out.token_logprobs = std::move(tokens);
  }
  return out;
}

std::string ChatClient::identity() const {
  return transport_->identity() + (config_.model.empty() ? "" : "#" + config_.model);
}

std::vector<ChatMessage> judge_messages(const std::string& question, const std::string& gold,
                                        const std::string& pred) {
  return {
      text_message(Role::System,
                   "You grade answers to chart questions. Decide whether the prediction means the same as the "
                   "ground-truth answer. Ignore formatting, units and rounding differences that do not change "
                   "the meaning. Reply with exactly one word: yes or no."),
      text_message(Role::User, "Question: " + question + "\nGround truth: " + gold + "\nPrediction: " + pred +
                                   "\nIs the prediction correct?"),
  };
}

std::optional<bool> parse_yes_no(std::string_view reply) {
  std::string s = text::to_lower(text::trim(reply));
  if (auto j = json::parse(s, nullptr, false); !j.is_discarded() && j.is_object() && j.contains("verdict") &&
                                               j["verdict"].is_string()) {
    s = j["verdict"].get<std::string>();
  }
  if (s.starts_with("verdict:")) s = text::trim(s.substr(8));
  while (!s.empty() && std::string_view(".!\"'`*").find(s.back()) != std::string_view::npos) s.pop_back();
  while (!s.empty() && std::string_view("\"'`*").find(s.front()) != std::string_view::npos) s.erase(s.begin());
  if (s == "yes") return true;
  if (s == "no") return false;
  return std::nullopt;
}

JudgeVerdict judge_answer(ChatClient& judge, const std::string& question, const std::string& gold,
                          const std::string& pred) {
  Sampling sampling;
  sampling.temperature = 0.0;
  sampling.max_tokens = 8;
  auto reply = judge.complete(judge_messages(question, gold, pred), sampling);
  auto verdict = parse_yes_no(reply.text);
  if (!verdict) fail(ErrorCode::UnparseableVerdict, "judge reply is not yes/no: " + reply.text.substr(0, 120));
  return JudgeVerdict{*verdict, reply.text};
}

}  // namespace ctir
