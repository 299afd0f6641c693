// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "tools/tools.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "core/error.hpp"
#include "core/text.hpp"

namespace ctir {
namespace {

constexpr std::size_t kStderrExcerpt = 512;

std::string crop_id(const std::string& parent, const BBox& b, double factor) {
  std::string id = parent + "__crop_" + std::to_string(b.x0) + "_" + std::to_string(b.y0) + "_" +
                   std::to_string(b.x1) + "_" + std::to_string(b.y1);
  if (factor != 1.0) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_s%g", factor);
    id += buf;
  }
  return id;
}

Observation code_observation(const ExecResult& r, std::size_t cap) {
  switch (r.exit) {
    case ExitKind::Ok: {
      auto content = text::to_valid_utf8(r.stdout_text);
      bool truncated = r.truncated;
      if (content.size() > cap) {
        std::size_t cut = cap;
        while (cut > 0 && (static_cast<unsigned char>(content[cut]) & 0xC0) == 0x80) --cut;
        content.resize(cut);
        truncated = true;
      }
      return TextObservation{std::move(content), truncated};
    }
    case ExitKind::NonZero:
      return ToolErrorObservation{
          ToolErrorKind::ExecFailure,
          "exit code " + std::to_string(r.exit_code) + ": " +
              text::to_valid_utf8(text::tail(text::trim(r.stderr_text), kStderrExcerpt))};
    case ExitKind::Timeout:
      return ToolErrorObservation{ToolErrorKind::Timeout, "execution exceeded the wall-clock limit"};
    case ExitKind::Killed:
      return ToolErrorObservation{ToolErrorKind::ResourceLimit,
                                  "killed by signal " + std::to_string(r.signal) + ": " +
                                      text::to_valid_utf8(text::tail(text::trim(r.stderr_text), kStderrExcerpt))};
    case ExitKind::LaunchError:
      return ToolErrorObservation{ToolErrorKind::ExecFailure, "sandbox launch failed: " + r.launch_error};
  }
  return ToolErrorObservation{ToolErrorKind::ExecFailure, "unknown execution outcome"};
}

}  // namespace

void validate(const ToolConfig& cfg) {
  if (cfg.min_crop_side < 1) fail(ErrorCode::InvalidArgument, "min_crop_side must be >= 1");
  if (!(cfg.crop_resize_factor >= 1.0)) fail(ErrorCode::InvalidArgument, "crop_resize_factor must be >= 1");
  validate(cfg.exec_limits);
}

Observation crop(const ChartImage& image, const BBox& bbox, const ToolConfig& cfg) {
  const BBox b{std::clamp(bbox.x0, 0, image.width()), std::clamp(bbox.y0, 0, image.height()),
               std::clamp(bbox.x1, 0, image.width()), std::clamp(bbox.y1, 0, image.height())};
  const int w = b.x1 - b.x0;
  const int h = b.y1 - b.y0;
  if (w < cfg.min_crop_side || h < cfg.min_crop_side) {
    return ToolErrorObservation{
        ToolErrorKind::InvalidArgs,
        "crop box [" + std::to_string(bbox.x0) + ", " + std::to_string(bbox.y0) + ", " + std::to_string(bbox.x1) +
            ", " + std::to_string(bbox.y1) + "] covers less than " + std::to_string(cfg.min_crop_side) +
            " px per side of the " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
            " image"};
  }
  const double factor = cfg.crop_resize_factor;
  const int out_w = std::max(1, static_cast<int>(std::floor(w * factor)));
  const int out_h = std::max(1, static_cast<int>(std::floor(h * factor)));
  const auto src = image.bytes();
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(out_w) * out_h * 3);
  for (int y = 0; y < out_h; ++y) {
    const int sy = b.y0 + std::min(h - 1, static_cast<int>(std::floor(y / factor)));
    for (int x = 0; x < out_w; ++x) {
      const int sx = b.x0 + std::min(w - 1, static_cast<int>(std::floor(x / factor)));
      const auto s = (static_cast<std::size_t>(sy) * image.width() + sx) * 3;
      const auto d = (static_cast<std::size_t>(y) * out_w + x) * 3;
      rgb[d] = src[s];
      rgb[d + 1] = src[s + 1];
      rgb[d + 2] = src[s + 2];
    }
  }
  return ImageObservation{ChartImage(out_w, out_h, std::move(rgb), crop_id(image.source_id(), b, factor))};
}

Observation run_tool(const ChartImage& image, const ToolAction& action, const ToolConfig& cfg,
                     Sandbox& sandbox) {
  if (const auto* c = std::get_if<CropAction>(&action)) return crop(image, c->bbox, cfg);
  const auto& code = std::get<CodeAction>(action);
  if (code.source.empty()) return ToolErrorObservation{ToolErrorKind::InvalidArgs, "empty program"};
  ExecRequest request;
  request.source = code.source;
  request.limits = cfg.exec_limits;
  try {
    request.seed_files.push_back(SeedFile{kChartFileName, encode_png(image), true});
    return code_observation(sandbox.execute(request), cfg.exec_limits.stdout_cap_bytes);
  } catch (const std::exception& e) {
    return ToolErrorObservation{ToolErrorKind::ExecFailure, std::string("sandbox error: ") + e.what()};
  }
}

}  // namespace ctir
