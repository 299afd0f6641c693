// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

namespace ctir {

/// Carries one JSON request to a chat-completions style endpoint and returns
/// the decoded JSON reply.
///
/// Failures are reported as ctir::Error: EndpointUnavailable and
/// DeadlineExceeded are transient (callers may retry), MalformedReply and
/// CassetteMiss are not.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual nlohmann::json post(const std::string& path, const nlohmann::json& body) = 0;
  virtual std::string identity() const = 0;
};

class HttpTransport final : public Transport {
 public:
  /// `base_url` like "http://host:8000/v1"; `path` is appended per call.
  HttpTransport(std::string base_url, std::string api_key, double timeout_s);

  nlohmann::json post(const std::string& path, const nlohmann::json& body) override;
  std::string identity() const override { return base_url_; }

 private:
  std::string base_url_;
  std::string api_key_;
  double timeout_s_;
};

/// Scripted endpoint; used by tests and for offline dry runs.
class FunctionTransport final : public Transport {
 public:
  using Handler = std::function<nlohmann::json(const std::string& path, const nlohmann::json& body)>;
  explicit FunctionTransport(Handler handler, std::string name = "scripted");

  nlohmann::json post(const std::string& path, const nlohmann::json& body) override;
  std::string identity() const override { return "function:" + name_; }

 private:
  Handler handler_;
  std::string name_;
};

/// Stable key for a request: SHA-256 over the path and the canonical body.
std::string cassette_key(const std::string& path, const nlohmann::json& body);

/// Record/replay of request/response pairs as JSONL
/// ({"key", "request": {"path", "body"}, "response"}). Inline base64 images
/// in recorded requests are replaced by their hash to keep cassettes small;
/// the key is always computed over the full request.
///
/// Replay serves the recorded responses for a key in order, cycling when a
/// key is requested more often than it was recorded. A request with no
/// recording raises CassetteMiss.
class CassetteTransport final : public Transport {
 public:
  static std::shared_ptr<CassetteTransport> recorder(std::shared_ptr<Transport> inner,
                                                     std::filesystem::path file);
  static std::shared_ptr<CassetteTransport> player(std::filesystem::path file);

  nlohmann::json post(const std::string& path, const nlohmann::json& body) override;
  std::string identity() const override;

 private:
  CassetteTransport() = default;

  std::shared_ptr<Transport> inner_;
  std::filesystem::path file_;
  std::mutex mu_;
  std::map<std::string, std::vector<nlohmann::json>> recorded_;
  std::map<std::string, std::size_t> cursor_;
};

}  // namespace ctir
