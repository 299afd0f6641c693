// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ctir {

struct ExecLimits {
  double wall_timeout_s = 10.0;
  double cpu_timeout_s = 10.0;
  /// Address-space limit; 0 leaves it unlimited.
  std::uint64_t memory_limit_bytes = 4ull << 30;
  std::size_t stdout_cap_bytes = 4096;
  bool network_allowed = false;
};

void validate(const ExecLimits& limits);

struct SeedFile {
  std::string name;
  std::vector<std::uint8_t> data;
  bool read_only = true;
};

struct ExecRequest {
  std::string source;
  ExecLimits limits;
  std::vector<SeedFile> seed_files;
  /// Produced files with these extensions (e.g. ".png") are returned in
  /// ExecResult::captured before the workdir is removed.
  std::vector<std::string> capture_extensions;
};

/// LaunchError only appears inside execute_many results, where per-job
/// failures are embedded instead of thrown.
enum class ExitKind { Ok, NonZero, Timeout, Killed, LaunchError };

std::string_view to_string(ExitKind k) noexcept;

struct CapturedFile {
  std::string path;
  std::vector<std::uint8_t> data;
};

struct ExecResult {
  std::string stdout_text;
  std::string stderr_text;
  ExitKind exit = ExitKind::Ok;
  int exit_code = 0;
  /// Terminating signal for Killed/Timeout, 0 otherwise.
  int signal = 0;
  double duration_s = 0.0;
  /// stdout exceeded the cap; only the head was kept.
  bool truncated = false;
  /// Paths relative to the workdir, sorted. Seeds and the program file are excluded.
  std::vector<std::string> artifacts;
  std::vector<CapturedFile> captured;
  /// Set only when keep_artifacts retained the workdir.
  std::string workdir;
  std::string launch_error;
};

nlohmann::json to_json(const ExecResult& r);
ExecResult exec_result_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExecRequest& r);
ExecRequest exec_request_from_json(const nlohmann::json& j);

/// Runs untrusted program text. Implementations are safe for concurrent use.
class Sandbox {
 public:
  virtual ~Sandbox() = default;

  /// Throws SandboxUnavailable or SpawnFailure; every other outcome,
  /// including the program crashing, is described by the result.
  virtual ExecResult execute(const ExecRequest& request) = 0;

  /// Results are positionally aligned with `jobs`. Never throws for per-job
  /// failures; those come back as ExitKind::LaunchError.
  virtual std::vector<ExecResult> execute_many(const std::vector<ExecRequest>& jobs);

  virtual std::size_t pool_size() const = 0;
  virtual std::string identity() const = 0;
};

struct LocalSandboxOptions {
  /// Interpreter command line; the program file path is appended.
  std::vector<std::string> interpreter_cmd = {"python3", "-I"};
  std::string program_name = "main.py";
  std::size_t pool_size = 4;
  bool keep_artifacts = false;
  /// When the host process is root, jobs run as nobody (uid/gid 65534).
  bool drop_root = true;
};

/// Child-process backend: fresh temp workdir, own process group, rlimits,
/// optional private network namespace. Not a container; a program that
/// escapes its process group (setsid) is outside its control.
class LocalSandbox final : public Sandbox {
 public:
  explicit LocalSandbox(LocalSandboxOptions options = {});

  ExecResult execute(const ExecRequest& request) override;
  std::size_t pool_size() const override { return options_.pool_size; }
  std::string identity() const override;

 private:
  ExecResult run(const ExecRequest& request);

  LocalSandboxOptions options_;
  std::counting_semaphore<1024> slots_;
};

/// Client for the HTTP execution service: POST /execute {source, limits} → ExecResult.
class RemoteSandbox final : public Sandbox {
 public:
  RemoteSandbox(std::string base_url, std::size_t pool_size, double timeout_s = 60.0);

  ExecResult execute(const ExecRequest& request) override;
  std::size_t pool_size() const override { return pool_size_; }
  std::string identity() const override { return "remote:" + base_url_; }

 private:
  std::string base_url_;
  std::size_t pool_size_;
  double timeout_s_;
};

/// Serves a sandbox over HTTP. `start` binds and returns the bound port;
/// requests are handled on a background thread until `stop`.
class SandboxServer {
 public:
  explicit SandboxServer(std::shared_ptr<Sandbox> sandbox);
  ~SandboxServer();
  SandboxServer(const SandboxServer&) = delete;
  SandboxServer& operator=(const SandboxServer&) = delete;

  int start(const std::string& host, int port);
  /// Blocks serving requests on the calling thread.
  void serve_forever(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ctir
