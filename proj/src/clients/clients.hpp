// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <semaphore>
#include <stop_token>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "clients/transport.hpp"
#include "core/image.hpp"

namespace ctir {

enum class Role { System, User, Assistant };

std::string_view to_string(Role r) noexcept;

struct TextPart {
  std::string text;
  friend bool operator==(const TextPart&, const TextPart&) = default;
};

struct ImagePart {
  ChartImage image;
  friend bool operator==(const ImagePart&, const ImagePart&) = default;
};

using ContentPart = std::variant<TextPart, ImagePart>;

struct ChatMessage {
  Role role = Role::User;
  std::vector<ContentPart> content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

ChatMessage text_message(Role role, std::string text);

struct Sampling {
  double temperature = 1.0;
  int max_tokens = 4096;
  bool want_logprobs = false;
  /// Per-request seed; distinct group members get distinct seeds.
  std::optional<std::int64_t> seed;
};

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;
};

struct PolicyReply {
  std::string text;
  std::optional<std::vector<TokenLogprob>> token_logprobs;
};

struct JudgeVerdict {
  bool correct = false;
  std::string raw;
};

struct EndpointConfig {
  std::string url;
  std::string model;
  std::string api_key_env;
  std::size_t max_inflight = 8;
  double timeout_s = 120.0;
  int max_retries = 3;
  int retry_backoff_ms = 500;
};

/// Chat-completions client shared by the policy, judge and generator roles.
/// Concurrent calls are bounded by `max_inflight`; transient transport
/// failures are retried with exponential backoff.
class ChatClient {
 public:
  ChatClient(std::shared_ptr<Transport> transport, EndpointConfig config);

  /// Deterministic request body for the given inputs.
  nlohmann::json build_request(const std::vector<ChatMessage>& messages, const Sampling& sampling) const;

  /// Throws EndpointUnavailable / DeadlineExceeded once retries are spent,
  /// MalformedReply for replies without assistant text, CapabilityMissing
  /// when logprobs were requested but not returned. A stop request aborts
  /// pending retries with EndpointUnavailable.
  PolicyReply complete(const std::vector<ChatMessage>& messages, const Sampling& sampling,
                       std::stop_token stop = {});

  std::string identity() const;
  const EndpointConfig& config() const noexcept { return config_; }

 private:
  std::shared_ptr<Transport> transport_;
  EndpointConfig config_;
  std::counting_semaphore<4096> inflight_;
};

inline PolicyReply policy_complete(ChatClient& policy, const std::vector<ChatMessage>& messages,
                                   const Sampling& sampling, std::stop_token stop = {}) {
  return policy.complete(messages, sampling, stop);
}

inline constexpr std::string_view kJudgeTemplateVersion = "judge-v1";

/// Messages sent to the answer judge; fixed per template version.
std::vector<ChatMessage> judge_messages(const std::string& question, const std::string& gold,
                                        const std::string& pred);

/// Reads a yes/no verdict ("yes", "No.", "verdict: yes", {"verdict": "no"}).
std::optional<bool> parse_yes_no(std::string_view reply);

/// Throws UnparseableVerdict when the reply is neither yes nor no.
JudgeVerdict judge_answer(ChatClient& judge, const std::string& question, const std::string& gold,
                          const std::string& pred);

}  // namespace ctir
