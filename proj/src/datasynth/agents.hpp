// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clients/clients.hpp"
#include "core/model.hpp"
#include "datasynth/sampling.hpp"
#include "reward/reward.hpp"
#include "rollout/rollout.hpp"
#include "sandbox/sandbox.hpp"

namespace ctir {

inline constexpr std::string_view kPlotPromptVersion = "plot-v1";
inline constexpr std::string_view kQualityPromptVersion = "quality-v1";
inline constexpr std::string_view kFigureFilterPromptVersion = "figure-filter-v1";
inline constexpr std::string_view kQaPromptVersion = "qa-gen-v1";
inline constexpr std::string_view kCheckPromptVersion = "qa-check-v1";

/// Body of the first ```python (or bare ```) fence, else the whole reply.
std::string extract_code(std::string_view reply);

/// First JSON value found in the reply: the whole text, a ```json fence, or
/// the outermost {...} / [...] span.
std::optional<nlohmann::json> extract_json(std::string_view reply);

struct ChartGenOptions {
  int max_repairs = 3;
  ExecLimits limits{60.0, 60.0, 4ull << 30, 8192, false};
  double temperature = 0.7;
  int max_tokens = 4096;
};

struct GeneratedChart {
  std::string code;
  ChartImage image;
  int repairs = 0;
  std::vector<std::string> errors;
};

/// Prompts for plotting code, renders it, and feeds render errors back for
/// repair. Throws RenderFailed after max_repairs + 1 failed executions.
GeneratedChart generate_chart(ChatClient& llm, Sandbox& sandbox, const ChartSpec& spec, const ReferenceSnippet* ref,
                              const std::string& chart_id, const ChartGenOptions& opts, std::int64_t seed = 0);

struct QualityThresholds {
  int visual = 3;
  int semantic = 3;
};

struct QualityVerdict {
  int visual_score = 0;
  int semantic_score = 0;
  bool keep = false;
};

/// Parses {"visual": v, "semantic": s} (or "visual: v" lines). Throws UnparseableVerdict.
QualityVerdict parse_quality_reply(std::string_view reply, QualityThresholds thresholds);
QualityVerdict filter_image(ChatClient& judge, const ChartImage& image, QualityThresholds thresholds);

struct ArxivFigureRecord {
  std::string id;
  ChartImage image;
  std::string caption;
  std::string context;
  std::string field_tag;
};

/// Records with neither caption nor context are rejected without a judge call.
bool filter_arxiv_record(ChatClient& judge, const ArxivFigureRecord& rec);

/// Items carry the requested qtype, aspect, image_ref and provenance; ids and
/// difficulty are filled in by the checker stage. Throws PreconditionFailed
/// for an aspect outside the pool, GenerationUnparseable for bad replies.
std::vector<QAItem> generate_qa(ChatClient& llm, const ChartImage& image, const std::string& context,
                                const std::string& aspect, QuestionType qtype, const AspectPool& pool,
                                const std::string& image_ref, Provenance provenance, std::int64_t seed = 0);

struct CheckParams {
  int votes_n = 5;
  double vote_threshold = 0.8;
  int difficulty_threshold = 3;
  double vote_temperature = 1.0;
};

void validate(const CheckParams& p);

struct CheckReport {
  bool alignment_ok = false;
  bool reasoning_ok = false;
  std::vector<std::string> votes;
  std::string modal_answer;
  double agreement = 0.0;
  int difficulty = 1;
  bool kept = false;
};

/// kept ⇔ aligned ∧ verified ∧ agreement ≥ threshold ∧ (recognition ∨ difficulty ≥ threshold).
bool check_passes(const CheckReport& r, QuestionType qtype, const CheckParams& p);

/// Fraction of votes equal to the most common one after normalization.
double vote_agreement(const std::vector<std::string>& votes, AnswerType answer_type, std::string* modal = nullptr);

/// Runs all four stages; every stage is always evaluated so reports are complete.
CheckReport check_qa(ChatClient& checker, const QAItem& item, const ChartImage& image, const CheckParams& params);

nlohmann::json to_json(const CheckReport& r);
CheckReport check_report_from_json(const nlohmann::json& j);

struct ColdStartInput {
  QAItem item;
  ChartImage image;
};

struct ColdStartOutcome {
  std::string item_id;
  RolloutResult rollout;
  bool kept = false;
  std::string reason;
};

/// Teacher rollouts per item; an outcome is kept when the trajectory answered
/// correctly, every tool call succeeded and every turn was well-formed.
std::vector<ColdStartOutcome> distill_cold_start(ChatClient& teacher, Sandbox& sandbox,
                                                 const std::vector<ColdStartInput>& inputs, const RolloutConfig& cfg,
                                                 const MatchPolicy& match, std::size_t concurrency = 4,
                                                 ChatClient* judge = nullptr);

/// SFT record: {"id", "images": [...], "messages": [...]} with assistant turns
/// as targets; images are referenced by source id.
nlohmann::json sft_record(const std::string& item_id, const RolloutResult& r);

}  // namespace ctir
