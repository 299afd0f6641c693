// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clients/clients.hpp"
#include "clients/transport.hpp"
#include "core/error.hpp"
#include "core/image.hpp"
#include "sandbox/sandbox.hpp"

namespace ctir::testing {

using nlohmann::json;
namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("ctir-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

/// Chat-completions reply carrying `text`.
inline json chat_reply(const std::string& text) {
  return json{{"choices", json::array({json{{"index", 0},
                                            {"message", {{"role", "assistant"}, {"content", text}}},
                                            {"finish_reason", "stop"}}})}};
}

/// Concatenated text parts of one request message.
inline std::string message_text(const json& msg) {
  const auto& c = msg.at("content");
  if (c.is_string()) return c.get<std::string>();
  std::string out;
  for (const auto& part : c) {
    if (part.value("type", "") == "text") out += part.at("text").get<std::string>();
  }
  return out;
}

inline std::size_t assistant_turns(const json& body) {
  std::size_t n = 0;
  for (const auto& m : body.at("messages")) n += m.at("role") == "assistant";
  return n;
}

inline std::string system_text(const json& body) {
  const auto& msgs = body.at("messages");
  if (!msgs.empty() && msgs[0].at("role") == "system") return message_text(msgs[0]);
  return {};
}

inline std::string last_text(const json& body) { return message_text(body.at("messages").back()); }

inline std::string all_text(const json& body) {
  std::string out;
  for (const auto& m : body.at("messages")) out += message_text(m) + "\n";
  return out;
}

using Responder = std::function<std::string(const json& body)>;

inline std::shared_ptr<Transport> responder_transport(Responder fn, const std::string& name = "scripted") {
  return std::make_shared<FunctionTransport>(
      [fn = std::move(fn)](const std::string&, const json& body) { return chat_reply(fn(body)); }, name);
}

inline EndpointConfig fast_endpoint(const std::string& model = "stub") {
  EndpointConfig ep;
  ep.url = "stub://";
  ep.model = model;
  ep.max_inflight = 64;
  ep.max_retries = 2;
  ep.retry_backoff_ms = 1;
  return ep;
}

inline std::unique_ptr<ChatClient> scripted_client(Responder fn, const std::string& name = "scripted") {
  return std::make_unique<ChatClient>(responder_transport(std::move(fn), name), fast_endpoint(name));
}

/// Policy whose k-th assistant turn (0-based) is turns[min(k, size-1)].
inline std::unique_ptr<ChatClient> turn_script(std::vector<std::string> turns, const std::string& name = "policy") {
  return scripted_client(
      [turns = std::move(turns)](const json& body) {
        const auto k = assistant_turns(body);
        return turns[std::min(k, turns.size() - 1)];
      },
      name);
}

inline std::string crop_turn(int x0, int y0, int x1, int y1, const std::string& why = "look closer") {
  return "<think>" + why + "</think><tool_call>{\"name\":\"crop\",\"arguments\":{\"bbox\":[" + std::to_string(x0) +
         "," + std::to_string(y0) + "," + std::to_string(x1) + "," + std::to_string(y1) + "]}}</tool_call>";
}

inline std::string code_turn(const std::string& source, const std::string& why = "compute") {
  return "<think>" + why + "</think><tool_call>" +
         json{{"name", "code"}, {"arguments", {{"source", source}}}}.dump() + "</tool_call>";
}

inline std::string answer_turn(const std::string& answer, const std::string& why = "done") {
  return "<think>" + why + "</think><answer>" + answer + "</answer>";
}

/// Deterministic test pattern: each pixel's channels derive from (x, y, salt).
inline ChartImage pattern_image(int w, int h, const std::string& id, int salt = 0) {
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto i = (static_cast<std::size_t>(y) * w + x) * 3;
      rgb[i] = static_cast<std::uint8_t>((x * 7 + salt) & 0xFF);
      rgb[i + 1] = static_cast<std::uint8_t>((y * 13 + salt * 3) & 0xFF);
      rgb[i + 2] = static_cast<std::uint8_t>((x * y + salt * 5) & 0xFF);
    }
  }
  return ChartImage(w, h, std::move(rgb), id);
}

inline LocalSandboxOptions test_sandbox_options(std::size_t pool = 4) {
  LocalSandboxOptions o;
  o.pool_size = pool;
  return o;
}

/// Limits for quick test programs.
inline ExecLimits quick_limits(double wall_s = 20.0) {
  ExecLimits l;
  l.wall_timeout_s = wall_s;
  l.cpu_timeout_s = wall_s;
  return l;
}

/// Error code thrown by `f`, or nullopt if it returned normally.
template <class F>
std::optional<ErrorCode> error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace ctir::testing
