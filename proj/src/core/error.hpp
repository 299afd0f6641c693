// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctir {

enum class ErrorCode {
  InvalidArgument,
  MalformedRecord,
  InvariantViolation,
  ImageNotFound,
  Io,
  NonCompliantTurn,
  ArityMismatch,
  SandboxUnavailable,
  SpawnFailure,
  EndpointUnavailable,
  DeadlineExceeded,
  MalformedReply,
  UnparseableVerdict,
  CapabilityMissing,
  CassetteMiss,
  PolicyFailure,
  PartialGroup,
  JudgeRequired,
  GroupTooSmall,
  EmptyMask,
  LengthMismatch,
  KinkTooClose,
  RenderFailed,
  GenerationUnparseable,
  PreconditionFailed,
  DatasetMalformed,
  EmptyDataset,
  ConfigInvalid,
  UnknownSubcommand,
  Usage,
  Internal,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code. Every failure that crosses a
/// module boundary is one of these.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace ctir
