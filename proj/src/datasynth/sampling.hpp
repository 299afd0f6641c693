// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "core/model.hpp"

namespace ctir {

struct SubplotBucket {
  int lo = 1;
  int hi = 1;
  double weight = 0.0;
};

struct WeightedTag {
  std::string tag;
  double weight = 0.0;
};

/// Attribute pools the chart-spec sampler draws from.
struct SpecPools {
  std::vector<std::string> personas;
  /// Counts are uniform within a bucket.
  std::vector<SubplotBucket> subplot_buckets;
  std::vector<WeightedTag> chart_types;
  /// Probability that a multi-subplot figure mixes chart types.
  double composite_share = 0.0;
  /// Weights for difficulty 1..5.
  std::vector<double> difficulty_weights;
  std::vector<WeightedTag> question_types;
  std::vector<WeightedTag> recognition_aspects;
  std::vector<WeightedTag> reasoning_aspects;

  static SpecPools defaults();
};

void validate(const SpecPools& pools);

enum class LayoutTag { SinglePlot, MultiSubplot };

struct ReferenceSnippet {
  std::string id;
  LayoutTag layout = LayoutTag::SinglePlot;
  std::string code;
  std::string provenance;
};

/// Parses a snippet file whose leading comment block carries
/// `# id:`, `# layout: single_plot|multi_subplot` and `# provenance:`.
ReferenceSnippet parse_reference_snippet(const std::string& text, const std::string& fallback_id);

/// Loads every `*.py` under `dir`, sorted by id.
std::vector<ReferenceSnippet> load_reference_library(const std::filesystem::path& dir);

/// Deterministic per-record generator derived from a run seed and an index.
std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t index);

std::size_t pick_weighted(std::mt19937_64& rng, const std::vector<double>& weights);
const std::string& pick_weighted(std::mt19937_64& rng, const std::vector<WeightedTag>& tags);

int sample_subplot_count(std::mt19937_64& rng, const SpecPools& pools);
Layout sample_layout(std::mt19937_64& rng, int num_subplots);

/// Draws one chart specification. When `library` is non-empty a reference
/// snippet with a matching layout tag is attached (falling back to any).
ChartSpec sample_chart_spec(std::mt19937_64& rng, const SpecPools& pools,
                            const std::vector<ReferenceSnippet>& library = {});

}  // namespace ctir
