// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clients/clients.hpp"
#include "sandbox/sandbox.hpp"

namespace ctir::app {

using nlohmann::json;

struct RunManifest {
  std::string subcommand;
  std::string config_hash;
  json config;
  json prompt_versions;
  json endpoints;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> outputs;
};

json to_json(const RunManifest& m);
/// `<primary output>.manifest.json`
std::filesystem::path manifest_path(const std::filesystem::path& primary_output);
/// ISO-8601 UTC with millisecond precision.
std::string utc_timestamp();

/// Effective configuration plus lazily created endpoint clients and sandbox.
class Session {
 public:
  explicit Session(json config);

  const json& config() const noexcept { return config_; }
  const std::string& config_hash() const noexcept { return hash_; }

  /// Client for an endpoint section ("policy", "judge", "llm", "teacher").
  /// Throws ConfigInvalid when the section has neither a URL nor a replay cassette.
  ChatClient& client(const std::string& role);
  Sandbox& sandbox();

  /// Runs one subcommand with JSON arguments and returns its JSON summary.
  /// Throws UnknownSubcommand, Usage (bad arguments), ConfigInvalid, or the
  /// runtime error of the failing stage.
  json run(const std::string& subcommand, const json& args);

  /// Serves the configured local sandbox over HTTP until the process ends.
  void sandbox_serve(const std::string& host, int port);

  static const std::vector<std::string>& subcommands();

  /// Identities of every client and sandbox created so far.
  json endpoint_identities() const;

 private:
  json config_;
  std::string hash_;
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<ChatClient>> clients_;
  std::shared_ptr<Sandbox> sandbox_;
};

}  // namespace ctir::app
