// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "core/model.hpp"

namespace ctir {

struct GrpoConfig {
  double epsilon = 0.2;
  double std_floor = 1e-6;
};

void validate(const GrpoConfig& cfg);

/// Group-normalized advantages with the population standard deviation.
/// A group whose std is below std_floor gets all-zero advantages.
std::vector<double> compute_advantages(std::span<const double> rewards, const GrpoConfig& cfg);

struct ObjectiveTerms {
  double objective = 0.0;
  /// Masked token mean of the clipped surrogate, one per trajectory.
  std::vector<double> per_trajectory;
};

/// Throws LengthMismatch, EmptyMask, InvalidArgument (empty batch,
/// non-finite inputs).
ObjectiveTerms grpo_objective_terms(const std::vector<MaskedTokenBatch>& batch, const GrpoConfig& cfg);

inline double grpo_objective(const std::vector<MaskedTokenBatch>& batch, const GrpoConfig& cfg) {
  return grpo_objective_terms(batch, cfg).objective;
}

/// dJ/d new_logprobs, shaped like the batch; zero at masked-out tokens and
/// wherever the clipped branch is the active one.
std::vector<std::vector<double>> grpo_objective_gradient(const std::vector<MaskedTokenBatch>& batch,
                                                         const GrpoConfig& cfg);

/// Max relative discrepancy between the analytic gradient and central
/// differences with step h. Throws KinkTooClose when a masked token's ratio
/// lies within 10h of a clip boundary.
double objective_gradient_check(const std::vector<MaskedTokenBatch>& batch, const GrpoConfig& cfg, double h);

/// Fixture line: {"old_logprobs": [...], "new_logprobs": [...], "mask": [0|1|bool...],
/// "advantage": a}.
nlohmann::json to_json(const MaskedTokenBatch& b);
MaskedTokenBatch masked_batch_from_json(const nlohmann::json& j);

}  // namespace ctir
