// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "datasynth/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "core/error.hpp"
#include "core/text.hpp"

namespace ctir {

SpecPools SpecPools::defaults() {
  SpecPools p;
  p.personas = {
      "a hospital operations analyst tracking ward occupancy",
      "a climate scientist comparing regional temperature anomalies",
      "a retail buyer reviewing seasonal sales by category",
      "a transit planner studying ridership across lines",
      "a high-school teacher summarizing exam results",
      "a venture analyst comparing startup funding rounds",
      "an energy trader watching electricity prices by hour",
      "a sports statistician comparing player performance",
      "a public-health officer monitoring vaccination coverage",
      "a supply-chain manager tracking shipment delays",
      "a city budget officer breaking down municipal spending",
      "a marine biologist counting species across survey sites",
      "a software reliability engineer reviewing incident latency",
      "an agronomist comparing crop yields by fertilizer",
      "a museum curator analysing visitor demographics",
      "a telecom engineer measuring network throughput",
      "a housing economist following rent and price indices",
      "a nutritionist comparing macronutrient intake",
      "a game designer balancing character statistics",
      "a wildlife ranger tracking migration counts by month",
  };
  p.subplot_buckets = {{1, 1, 51.32}, {2, 4, 29.61}, {5, 9, 18.26}, {10, 15, 0.81}};
  p.chart_types = {{"line", 30.07}, {"bar", 20.37},  {"scatter", 11.45},  {"heatmap", 9.14}, {"pie", 8.14},
                   {"area", 4.59},  {"box", 4.14},   {"histogram", 2.44}, {"radar", 1.67},   {"other", 8.00}};
  p.composite_share = 10.87 / 48.68;
  p.difficulty_weights = {1.0, 1.0, 1.0, 1.0, 1.0};
  p.question_types = {{"recognition", 57.18}, {"reasoning", 42.82}};
  p.recognition_aspects = {{"Axis label extraction", 14.32},   {"Color extraction", 13.62},
                           {"Title extraction", 7.34},        {"Tick extraction", 5.58},
                           {"Numerical value extraction", 5.56}, {"Counting", 5.94},
                           {"Pattern Recognition", 4.78},     {"Enumeration", 0.03}};
  p.reasoning_aspects = {{"Extreme Value Analysis", 15.46},
                         {"Conditional Reasoning", 9.34},
                         {"Comparative Analysis", 6.01},
                         {"Trend Analysis", 3.32},
                         {"Aggregation & Calculation", 3.20},
                         {"Ranking & Ordering", 2.22},
                         {"Proportional & Distributional Analysis", 1.78},
                         {"Pattern & Correlation", 1.49}};
  return p;
}

namespace {

void check_weights(const std::vector<double>& w, const std::string& what) {
  if (w.empty()) fail(ErrorCode::ConfigInvalid, what + " is empty");
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) fail(ErrorCode::ConfigInvalid, what + " has a negative or non-finite weight");
    sum += x;
  }
  if (!(sum > 0.0)) fail(ErrorCode::ConfigInvalid, what + " weights sum to zero");
}

std::vector<double> weights_of(const std::vector<WeightedTag>& tags) {
  std::vector<double> w;
  w.reserve(tags.size());
  for (const auto& t : tags) w.push_back(t.weight);
  return w;
}

}  // namespace

void validate(const SpecPools& pools) {
  if (pools.personas.empty()) fail(ErrorCode::ConfigInvalid, "persona pool is empty");
  std::vector<double> bw;
  for (const auto& b : pools.subplot_buckets) {
    if (b.lo < 1 || b.hi < b.lo) fail(ErrorCode::ConfigInvalid, "subplot bucket bounds must satisfy 1 <= lo <= hi");
    bw.push_back(b.weight);
  }
  check_weights(bw, "subplot bucket distribution");
  check_weights(weights_of(pools.chart_types), "chart type distribution");
  if (pools.difficulty_weights.size() != 5) fail(ErrorCode::ConfigInvalid, "difficulty weights need 5 entries");
  check_weights(pools.difficulty_weights, "difficulty distribution");
  if (!(pools.composite_share >= 0.0 && pools.composite_share <= 1.0)) {
    fail(ErrorCode::ConfigInvalid, "composite_share must lie in [0, 1]");
  }
}

ReferenceSnippet parse_reference_snippet(const std::string& text, const std::string& fallback_id) {
  ReferenceSnippet s;
  s.id = fallback_id;
  s.code = text;
  std::string layout = "single_plot";
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.starts_with("#")) break;
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const auto key = text::trim(line.substr(1, colon - 1));
    const auto value = text::trim(line.substr(colon + 1));
    if (key == "id") s.id = value;
    else if (key == "layout") layout = value;
    else if (key == "provenance") s.provenance = value;
  }
  if (layout == "single_plot") s.layout = LayoutTag::SinglePlot;
  else if (layout == "multi_subplot") s.layout = LayoutTag::MultiSubplot;
  else fail(ErrorCode::MalformedRecord, "reference snippet " + s.id + ": unknown layout '" + layout + "'");
  if (s.id.empty()) fail(ErrorCode::MalformedRecord, "reference snippet without id");
  return s;
}

std::vector<ReferenceSnippet> load_reference_library(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) fail(ErrorCode::Io, "reference library " + dir.string() + " is not a directory");
  std::vector<ReferenceSnippet> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".py") continue;
    std::ifstream f(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    out.push_back(parse_reference_snippet(ss.str(), entry.path().stem().string()));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

std::size_t pick_weighted(std::mt19937_64& rng, const std::vector<double>& weights) {
  check_weights(weights, "weighted choice");
  std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
  return dist(rng);
}

const std::string& pick_weighted(std::mt19937_64& rng, const std::vector<WeightedTag>& tags) {
  return tags[pick_weighted(rng, weights_of(tags))].tag;
}

int sample_subplot_count(std::mt19937_64& rng, const SpecPools& pools) {
  std::vector<double> w;
  for (const auto& b : pools.subplot_buckets) w.push_back(b.weight);
  const auto& bucket = pools.subplot_buckets[pick_weighted(rng, w)];
  return std::uniform_int_distribution<int>(bucket.lo, bucket.hi)(rng);
}

Layout sample_layout(std::mt19937_64& rng, int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "subplot count must be >= 1");
  std::vector<Layout> candidates;
  for (int cols = 1; cols <= std::min(n, 5); ++cols) {
    const int rows = (n + cols - 1) / cols;
    if (rows <= 5 && rows * cols - n < cols) candidates.push_back({rows, cols});
  }
  if (candidates.empty()) {
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    return {(n + cols - 1) / cols, cols};
  }
  return candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
}

ChartSpec sample_chart_spec(std::mt19937_64& rng, const SpecPools& pools,
                            const std::vector<ReferenceSnippet>& library) {
  validate(pools);
  ChartSpec spec;
  spec.persona = pools.personas[std::uniform_int_distribution<std::size_t>(0, pools.personas.size() - 1)(rng)];
  spec.num_subplots = sample_subplot_count(rng, pools);
  spec.layout = sample_layout(rng, spec.num_subplots);
  const bool composite =
      spec.num_subplots > 1 && std::bernoulli_distribution(pools.composite_share)(rng);
  if (composite) {
    for (int i = 0; i < spec.num_subplots; ++i) spec.chart_types.push_back(pick_weighted(rng, pools.chart_types));
  } else {
    spec.chart_types.assign(static_cast<std::size_t>(spec.num_subplots), pick_weighted(rng, pools.chart_types));
  }
  spec.difficulty = static_cast<int>(pick_weighted(rng, pools.difficulty_weights)) + 1;
  if (!library.empty()) {
    const auto want = spec.num_subplots > 1 ? LayoutTag::MultiSubplot : LayoutTag::SinglePlot;
    std::vector<const ReferenceSnippet*> matching;
    for (const auto& s : library) {
      if (s.layout == want) matching.push_back(&s);
    }
    if (matching.empty()) {
      for (const auto& s : library) matching.push_back(&s);
    }
    spec.reference_id = matching[std::uniform_int_distribution<std::size_t>(0, matching.size() - 1)(rng)]->id;
  }
  validate(spec);
  return spec;
}

}  // namespace ctir
