// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "core/model.hpp"
#include "sandbox/sandbox.hpp"

namespace ctir {

struct ToolConfig {
  int min_crop_side = 8;
  double crop_resize_factor = 1.0;
  ExecLimits exec_limits;
};

void validate(const ToolConfig& cfg);

/// File name under which the chart is visible to code-tool programs.
inline constexpr const char* kChartFileName = "chart.png";

/// Clamps `bbox` to the image, rejects slivers thinner than min_crop_side,
/// then upscales by crop_resize_factor with nearest-neighbour sampling.
Observation crop(const ChartImage& image, const BBox& bbox, const ToolConfig& cfg);

/// Executes one tool action. Never throws for tool-level failures; those
/// become ToolError observations.
Observation run_tool(const ChartImage& image, const ToolAction& action, const ToolConfig& cfg,
                     Sandbox& sandbox);

}  // namespace ctir
