// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "datasynth/agents.hpp"

namespace ctir {

struct StageSummary {
  std::size_t attempted = 0;
  std::size_t kept = 0;
  std::vector<std::filesystem::path> outputs;
};

/// Layout of a chart stage output directory.
struct ChartDirs {
  std::filesystem::path root;
  std::filesystem::path charts() const { return root / "charts"; }
  std::filesystem::path meta() const { return root / "charts.meta.jsonl"; }
  std::filesystem::path audit() const { return root / "synth-charts.audit.jsonl"; }
};

struct SynthChartsOptions {
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> reference_dir;
  /// JSONL of {id, image_path, caption, context, field_tag}; image paths are
  /// relative to the file's directory.
  std::optional<std::filesystem::path> arxiv_records;
  SpecPools pools = SpecPools::defaults();
  ChartGenOptions gen;
  QualityThresholds quality;
  std::size_t concurrency = 4;
};

/// Samples specs, renders charts with repair, filters by quality, and ingests
/// optional pre-extracted arXiv figures. Writes charts/<id>.png,
/// charts.meta.jsonl and an audit log; output order is independent of
/// scheduling.
StageSummary run_synth_charts(ChatClient& llm, ChatClient& judge, Sandbox& sandbox, const SynthChartsOptions& opts);

std::vector<ArxivFigureRecord> read_arxiv_records(const std::filesystem::path& path);

struct SynthQaOptions {
  std::filesystem::path charts_meta;
  /// Defaults to `charts/` next to the meta file.
  std::optional<std::filesystem::path> charts_dir;
  std::filesystem::path out_qa;
  std::size_t aspects_per_chart = 2;
  std::uint64_t seed = 0;
  CheckParams check;
  SpecPools pools = SpecPools::defaults();
  AspectPool aspects = AspectPool::defaults();
  std::size_t concurrency = 4;
};

/// `<out_qa>.audit.jsonl`: one line per candidate with its CheckReport.
std::filesystem::path qa_audit_path(const std::filesystem::path& out_qa);

StageSummary run_synth_qa(ChatClient& llm, ChatClient& checker, const SynthQaOptions& opts);

struct ColdStartOptions {
  std::filesystem::path qa;
  std::filesystem::path images_dir;
  std::filesystem::path out_sft;
  RolloutConfig rollout;
  MatchPolicy match;
  AspectPool aspects = AspectPool::defaults();
  std::size_t concurrency = 4;
};

/// Writes the SFT file, `<out_sft>.audit.jsonl`, and a trajectory store
/// `<out_sft>.traj.jsonl` with every teacher rollout.
StageSummary run_cold_start(ChatClient& teacher, Sandbox& sandbox, const ColdStartOptions& opts,
                            ChatClient* judge = nullptr);

}  // namespace ctir
