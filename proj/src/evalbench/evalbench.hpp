// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "core/serialize.hpp"
#include "reward/reward.hpp"
#include "rollout/rollout.hpp"

namespace ctir {

inline constexpr std::string_view kEvalReportSchema = "ctir.eval_report.v1";

struct ToolDistribution {
  std::size_t crop_calls = 0;
  std::size_t code_calls = 0;
  double crop_pct = 0.0;
  double code_pct = 0.0;
};

/// Shares of all executed tool calls by kind; both 0 when there are none.
ToolDistribution tool_distribution(const std::vector<Trajectory>& trajectories);
ToolDistribution tool_distribution(const std::vector<StoredTrajectory>& store);

/// Grayscale conversion used for entropy: (299 R + 587 G + 114 B + 500) / 1000.
std::uint8_t luma(Rgb p) noexcept;

/// Shannon entropy of the 256-bin luma histogram; 0·log 0 = 0.
double pixel_entropy(const ChartImage& image, double log_base = 2.0);

/// Mean per-image entropy. Throws EmptyDataset.
double avg_pixel_entropy(const std::vector<ChartImage>& images, double log_base = 2.0);

struct EvalConfig {
  RolloutConfig rollout;
  MatchPolicy match;
  std::size_t concurrency = 4;
  std::string config_hash;
};

struct EvalItemResult {
  std::string item_id;
  QuestionType qtype = QuestionType::Recognition;
  std::string aspect;
  AnswerType answer_type = AnswerType::Text;
  std::string gold;
  std::optional<std::string> pred;
  int acc = 0;
  std::size_t turns = 0;
  std::size_t crop_calls = 0;
  std::size_t code_calls = 0;
  Termination terminated_by = Termination::Answer;
  std::string diagnostic;
};

struct EvalReport {
  std::size_t n_items = 0;
  double accuracy = 0.0;
  std::map<std::string, double> per_qtype_accuracy;
  std::map<std::string, std::size_t> per_qtype_count;
  ToolDistribution tools;
  double mean_turns = 0.0;
  std::size_t policy_failures = 0;
  std::string config_hash;
  std::vector<EvalItemResult> items;
};

/// One greedy (temperature 0) trajectory per item; accuracy is the mean of
/// the per-item accuracy rewards. Policy failures score 0 and are counted.
/// Throws DatasetMalformed for an empty dataset, ImageNotFound for missing images.
EvalReport run_benchmark(ChatClient& policy, Sandbox& sandbox, const std::vector<QAItem>& items,
                         const ImageStore& images, const EvalConfig& cfg, TrajectoryStoreWriter* store = nullptr,
                         ChatClient* judge = nullptr);

nlohmann::json to_json(const EvalReport& r);
/// One row per item.
std::string to_csv(const EvalReport& r);

/// Maps a third-party benchmark file onto the QA JSONL format.
struct BenchmarkAdapter {
  std::string name;
  std::string question_key = "question";
  std::string answer_key = "answer";
  std::string image_key = "image";
  /// Optional record id field; records are numbered otherwise.
  std::string id_key;
  /// Image path relative to the source file; "{}" is replaced by the image field.
  std::string image_pattern = "{}";
  QuestionType qtype = QuestionType::Reasoning;
};

/// Known layouts: "chartqa" (imgname/query/label, images under png/) and
/// "charxiv-reasoning" / "charxiv-descriptive" (id-keyed object, images/<figure_id>.jpg).
std::optional<BenchmarkAdapter> builtin_adapter(std::string_view name);

/// Accepts a JSON array, an id-keyed JSON object, or JSONL. Images are
/// re-encoded as PNG into `out_images`; answer types are inferred.
std::size_t adapt_benchmark(const std::filesystem::path& source, const BenchmarkAdapter& adapter,
                            const std::filesystem::path& out_qa, const std::filesystem::path& out_images);

AnswerType infer_answer_type(std::string_view answer);

}  // namespace ctir
