// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "grpo/grpo.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace ctir {
namespace {

void check_batch(const std::vector<MaskedTokenBatch>& batch) {
  if (batch.empty()) fail(ErrorCode::InvalidArgument, "objective needs at least one trajectory");
  for (std::size_t g = 0; g < batch.size(); ++g) {
    const auto& b = batch[g];
    if (b.old_logprobs.size() != b.new_logprobs.size() || b.mask.size() != b.new_logprobs.size()) {
      fail(ErrorCode::LengthMismatch, "trajectory " + std::to_string(g) + ": old/new logprobs and mask differ in length");
    }
    if (std::find(b.mask.begin(), b.mask.end(), true) == b.mask.end()) {
      fail(ErrorCode::EmptyMask, "trajectory " + std::to_string(g) + " has no masked-in tokens");
    }
    if (!std::isfinite(b.advantage)) fail(ErrorCode::InvalidArgument, "non-finite advantage");
    for (std::size_t j = 0; j < b.mask.size(); ++j) {
      if (b.mask[j] && !(std::isfinite(b.old_logprobs[j]) && std::isfinite(b.new_logprobs[j]))) {
        fail(ErrorCode::InvalidArgument, "non-finite logprob at masked-in token " + std::to_string(j));
      }
    }
  }
}

// min(w·A, clip(w)·A) = A·r with r = min(w, clip(w)) for A ≥ 0 and
// r = max(w, clip(w)) for A < 0. Factoring A out keeps ratio-1 batches exact.
double effective_ratio(double w, double a, double eps) {
  const double c = std::clamp(w, 1.0 - eps, 1.0 + eps);
  return a >= 0.0 ? std::min(w, c) : std::max(w, c);
}

bool clipped_branch(double w, double a, double eps) {
  return (a > 0.0 && w > 1.0 + eps) || (a < 0.0 && w < 1.0 - eps);
}

std::size_t mask_count(const MaskedTokenBatch& b) {
  return static_cast<std::size_t>(std::count(b.mask.begin(), b.mask.end(), true));
}

}  // namespace

void validate(const GrpoConfig& cfg) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) fail(ErrorCode::ConfigInvalid, "epsilon must lie in (0, 1)");
  if (!(cfg.std_floor > 0.0)) fail(ErrorCode::ConfigInvalid, "std_floor must be > 0");
}

std::vector<double> compute_advantages(std::span<const double> rewards, const GrpoConfig& cfg) {
  validate(cfg);
  if (rewards.size() < 2) fail(ErrorCode::GroupTooSmall, "a group needs at least 2 rewards");
  for (double r : rewards) {
    if (!std::isfinite(r)) fail(ErrorCode::InvalidArgument, "non-finite reward");
  }
  const auto n = static_cast<double>(rewards.size());
  double sum = 0.0;
  for (double r : rewards) sum += r;
  const double mean = sum / n;
  double sq = 0.0;
  for (double r : rewards) sq += (r - mean) * (r - mean);
  const double sd = std::sqrt(sq / n);
  std::vector<double> adv(rewards.size(), 0.0);
  if (sd < cfg.std_floor) return adv;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / sd;
  return adv;
}

ObjectiveTerms grpo_objective_terms(const std::vector<MaskedTokenBatch>& batch, const GrpoConfig& cfg) {
  validate(cfg);
  check_batch(batch);
  ObjectiveTerms out;
  double sum = 0.0;
  for (const auto& b : batch) {
    double ratio_sum = 0.0;
    for (std::size_t j = 0; j < b.mask.size(); ++j) {
      if (!b.mask[j]) continue;
      const double w = std::exp(b.new_logprobs[j] - b.old_logprobs[j]);
      ratio_sum += effective_ratio(w, b.advantage, cfg.epsilon);
    }
    const double term = b.advantage * (ratio_sum / static_cast<double>(mask_count(b)));
    out.per_trajectory.push_back(term);
    sum += term;
  }
  out.objective = sum / static_cast<double>(batch.size());
  return out;
}

std::vector<std::vector<double>> grpo_objective_gradient(const std::vector<MaskedTokenBatch>& batch,
                                                         const GrpoConfig& cfg) {
  validate(cfg);
  check_batch(batch);
  const auto g = static_cast<double>(batch.size());
  std::vector<std::vector<double>> grad;
  for (const auto& b : batch) {
    std::vector<double> row(b.mask.size(), 0.0);
    const double scale = b.advantage / (g * static_cast<double>(mask_count(b)));
    for (std::size_t j = 0; j < b.mask.size(); ++j) {
      if (!b.mask[j]) continue;
      const double w = std::exp(b.new_logprobs[j] - b.old_logprobs[j]);
      if (!clipped_branch(w, b.advantage, cfg.epsilon)) row[j] = scale * w;
    }
    grad.push_back(std::move(row));
  }
  return grad;
}

double objective_gradient_check(const std::vector<MaskedTokenBatch>& batch, const GrpoConfig& cfg, double h) {
  if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "finite-difference step must be > 0");
  const auto analytic = grpo_objective_gradient(batch, cfg);
  for (std::size_t g = 0; g < batch.size(); ++g) {
    const auto& b = batch[g];
    for (std::size_t j = 0; j < b.mask.size(); ++j) {
      if (!b.mask[j]) continue;
      const double w = std::exp(b.new_logprobs[j] - b.old_logprobs[j]);
      if (std::fabs(w - (1.0 + cfg.epsilon)) <= 10.0 * h || std::fabs(w - (1.0 - cfg.epsilon)) <= 10.0 * h) {
        fail(ErrorCode::KinkTooClose, "trajectory " + std::to_string(g) + " token " + std::to_string(j) +
                                          " has ratio within 10h of a clip boundary");
      }
    }
  }
  auto work = batch;
  double worst = 0.0;
  for (std::size_t g = 0; g < work.size(); ++g) {
    for (std::size_t j = 0; j < work[g].new_logprobs.size(); ++j) {
      const double base = work[g].new_logprobs[j];
      work[g].new_logprobs[j] = base + h;
      const double up = grpo_objective(work, cfg);
      work[g].new_logprobs[j] = base - h;
      const double down = grpo_objective(work, cfg);
      work[g].new_logprobs[j] = base;
      const double fd = (up - down) / (2.0 * h);
      const double a = analytic[g][j];
      const double denom = std::max({std::fabs(a), std::fabs(fd), 1e-6});
      worst = std::max(worst, std::fabs(a - fd) / denom);
    }
  }
  return worst;
}

nlohmann::json to_json(const MaskedTokenBatch& b) {
  std::vector<int> mask;
  mask.reserve(b.mask.size());
  for (bool m : b.mask) mask.push_back(m ? 1 : 0);
  return nlohmann::json{{"old_logprobs", b.old_logprobs},
                        {"new_logprobs", b.new_logprobs},
                        {"mask", mask},
                        {"advantage", b.advantage}};
}

MaskedTokenBatch masked_batch_from_json(const nlohmann::json& j) {
  try {
    MaskedTokenBatch b;
    b.old_logprobs = j.at("old_logprobs").get<std::vector<double>>();
    b.new_logprobs = j.at("new_logprobs").get<std::vector<double>>();
    for (const auto& m : j.at("mask")) {
      if (m.is_boolean()) {
        b.mask.push_back(m.get<bool>());
      } else if (m.is_number_integer() && (m.get<int>() == 0 || m.get<int>() == 1)) {
        b.mask.push_back(m.get<int>() == 1);
      } else {
        fail(ErrorCode::MalformedRecord, "mask entries must be 0/1 or booleans");
      }
    }
    b.advantage = j.value("advantage", 0.0);
    return b;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MalformedRecord, std::string("bad token batch: ") + e.what());
  }
}

}  // namespace ctir
