// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <string>
#include <thread>

#include <httplib.h>

#include "support/test_support.hpp"

namespace ctir::testing {

/// Local HTTP chat-completions endpoint answering with a Responder.
class FakeEndpoint {
 public:
  explicit FakeEndpoint(Responder fn) : fn_(std::move(fn)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls_;
      const auto body = json::parse(req.body);
      res.set_content(chat_reply(fn_(body)).dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() { stop(); }
  FakeEndpoint(const FakeEndpoint&) = delete;
  FakeEndpoint& operator=(const FakeEndpoint&) = delete;

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  int calls() const { return calls_; }

 private:
  Responder fn_;
  httplib::Server server_;
  int port_ = 0;
  std::atomic<int> calls_{0};
  std::thread thread_;
};

}  // namespace ctir::testing
