// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "core/error.hpp"

namespace ctir {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::ImageNotFound: return "ImageNotFound";
    case ErrorCode::Io: return "Io";
    case ErrorCode::NonCompliantTurn: return "NonCompliantTurn";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::SandboxUnavailable: return "SandboxUnavailable";
    case ErrorCode::SpawnFailure: return "SpawnFailure";
    case ErrorCode::EndpointUnavailable: return "EndpointUnavailable";
    case ErrorCode::DeadlineExceeded: return "DeadlineExceeded";
    case ErrorCode::MalformedReply: return "MalformedReply";
    case ErrorCode::UnparseableVerdict: return "UnparseableVerdict";
    case ErrorCode::CapabilityMissing: return "CapabilityMissing";
    case ErrorCode::CassetteMiss: return "CassetteMiss";
    case ErrorCode::PolicyFailure: return "PolicyFailure";
    case ErrorCode::PartialGroup: return "PartialGroup";
    case ErrorCode::JudgeRequired: return "JudgeRequired";
    case ErrorCode::GroupTooSmall: return "GroupTooSmall";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::KinkTooClose: return "KinkTooClose";
    case ErrorCode::RenderFailed: return "RenderFailed";
    case ErrorCode::GenerationUnparseable: return "GenerationUnparseable";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::DatasetMalformed: return "DatasetMalformed";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::UnknownSubcommand: return "UnknownSubcommand";
    case ErrorCode::Usage: return "Usage";
    case ErrorCode::Internal: return "Internal";
  }
  return "Internal";
}

}  // namespace ctir
