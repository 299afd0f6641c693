// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include <httplib.h>

#include <optional>
#include <thread>

#include "core/error.hpp"
#include "core/image.hpp"
#include "core/text.hpp"
#include "sandbox/sandbox.hpp"

namespace ctir {

using nlohmann::json;

namespace {

std::optional<ExitKind> parse_exit_kind(std::string_view s) {
  for (auto k : {ExitKind::Ok, ExitKind::NonZero, ExitKind::Timeout, ExitKind::Killed, ExitKind::LaunchError}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

json limits_to_json(const ExecLimits& l) {
  return json{{"wall_timeout_s", l.wall_timeout_s},
              {"cpu_timeout_s", l.cpu_timeout_s},
              {"memory_limit_bytes", l.memory_limit_bytes},
              {"stdout_cap_bytes", l.stdout_cap_bytes},
              {"network_allowed", l.network_allowed}};
}

ExecLimits limits_from_json(const json& j) {
  ExecLimits l;
  l.wall_timeout_s = j.value("wall_timeout_s", l.wall_timeout_s);
  l.cpu_timeout_s = j.value("cpu_timeout_s", l.cpu_timeout_s);
  l.memory_limit_bytes = j.value("memory_limit_bytes", l.memory_limit_bytes);
  l.stdout_cap_bytes = j.value("stdout_cap_bytes", l.stdout_cap_bytes);
  l.network_allowed = j.value("network_allowed", l.network_allowed);
  return l;
}

}  // namespace

json to_json(const ExecResult& r) {
  json captured = json::array();
  for (const auto& c : r.captured) captured.push_back({{"path", c.path}, {"data_b64", base64_encode(c.data)}});
  json j{{"stdout", text::to_valid_utf8(r.stdout_text)},
         {"stderr", text::to_valid_utf8(r.stderr_text)},
         {"exit_status", to_string(r.exit)},
         {"exit_code", r.exit_code},
         {"signal", r.signal},
         {"duration_s", r.duration_s},
         {"truncated", r.truncated},
         {"artifacts", r.artifacts},
         {"captured", std::move(captured)}};
  if (!r.launch_error.empty()) j["launch_error"] = r.launch_error;
  return j;
}

ExecResult exec_result_from_json(const json& j) {
  try {
    ExecResult r;
    r.stdout_text = j.at("stdout").get<std::string>();
    r.stderr_text = j.value("stderr", std::string{});
    auto kind = parse_exit_kind(j.at("exit_status").get<std::string>());
    if (!kind) fail(ErrorCode::MalformedRecord, "unknown exit_status");
    r.exit = *kind;
    r.exit_code = j.value("exit_code", 0);
    r.signal = j.value("signal", 0);
    r.duration_s = j.value("duration_s", 0.0);
    r.truncated = j.value("truncated", false);
    r.artifacts = j.value("artifacts", std::vector<std::string>{});
    for (const auto& c : j.value("captured", json::array())) {
      r.captured.push_back({c.at("path").get<std::string>(), base64_decode(c.at("data_b64").get<std::string>())});
    }
    r.launch_error = j.value("launch_error", std::string{});
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedRecord, std::string("bad exec result: ") + e.what());
  }
}

json to_json(const ExecRequest& r) {
  json seeds = json::array();
  for (const auto& s : r.seed_files) {
    seeds.push_back({{"name", s.name}, {"data_b64", base64_encode(s.data)}, {"read_only", s.read_only}});
  }
  return json{{"source", r.source},
              {"limits", limits_to_json(r.limits)},
              {"seed_files", std::move(seeds)},
              {"capture_extensions", r.capture_extensions}};
}

ExecRequest exec_request_from_json(const json& j) {
  try {
    ExecRequest r;
    r.source = j.at("source").get<std::string>();
    if (auto it = j.find("limits"); it != j.end()) r.limits = limits_from_json(*it);
    for (const auto& s : j.value("seed_files", json::array())) {
      r.seed_files.push_back({s.at("name").get<std::string>(), base64_decode(s.at("data_b64").get<std::string>()),
                              s.value("read_only", true)});
    }
    r.capture_extensions = j.value("capture_extensions", std::vector<std::string>{});
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedRecord, std::string("bad exec request: ") + e.what());
  }
}

RemoteSandbox::RemoteSandbox(std::string base_url, std::size_t pool_size, double timeout_s)
    : base_url_(std::move(base_url)), pool_size_(std::max<std::size_t>(1, pool_size)), timeout_s_(timeout_s) {}

ExecResult RemoteSandbox::execute(const ExecRequest& request) {
  validate(request.limits);
  httplib::Client client(base_url_);
  const auto secs = static_cast<time_t>(timeout_s_);
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs + static_cast<time_t>(request.limits.wall_timeout_s) + 2, 0);
  auto res = client.Post("/execute", to_json(request).dump(), "application/json");
  if (!res) {
    fail(ErrorCode::SandboxUnavailable,
         "sandbox service " + base_url_ + " unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    fail(ErrorCode::SpawnFailure, "sandbox service returned HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  auto body = json::parse(res->body, nullptr, false);
  if (body.is_discarded()) fail(ErrorCode::MalformedRecord, "sandbox service returned invalid JSON");
  return exec_result_from_json(body);
}

struct SandboxServer::Impl {
  std::shared_ptr<Sandbox> sandbox;
  httplib::Server server;
  std::thread thread;
};

SandboxServer::SandboxServer(std::shared_ptr<Sandbox> sandbox) : impl_(std::make_unique<Impl>()) {
  impl_->sandbox = std::move(sandbox);
  impl_->server.Post("/execute", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) {
      res.status = 400;
      res.set_content(json{{"error", "MalformedRecord"}, {"message", "invalid JSON"}}.dump(), "application/json");
      return;
    }
    try {
      auto result = impl_->sandbox->execute(exec_request_from_json(body));
      res.set_content(to_json(result).dump(), "application/json");
    } catch (const Error& e) {
      res.status = e.code() == ErrorCode::MalformedRecord || e.code() == ErrorCode::InvalidArgument ? 400 : 503;
      res.set_content(json{{"error", error_code_name(e.code())}, {"message", e.what()}}.dump(), "application/json");
    }
  });
  impl_->server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });
}

SandboxServer::~SandboxServer() { stop(); }

int SandboxServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) fail(ErrorCode::Io, "cannot bind sandbox server on " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void SandboxServer::serve_forever(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    fail(ErrorCode::Io, "cannot serve sandbox on " + host + ":" + std::to_string(port));
  }
}

void SandboxServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ctir
