// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "clients/clients.hpp"
#include "datasynth/agents.hpp"
#include "grpo/grpo.hpp"
#include "reward/reward.hpp"
#include "rollout/rollout.hpp"
#include "sandbox/sandbox.hpp"

namespace ctir::app {

using nlohmann::json;

inline constexpr std::string_view kConfigEnvVar = "CHART_TIR_CONFIG";
inline constexpr std::string_view kEnvPrefix = "CHART_TIR__";

/// Every recognised section and key with its default value. Layers may only
/// set keys present here, with a value of the same kind.
json default_config();

/// Reads `[section]` tables of `key = value` pairs, where a value is a basic or
/// literal string, integer, float, boolean, or array of those. Throws ConfigInvalid.
json parse_toml(std::string_view text, const std::string& origin);

/// Serializes a two-level table back to the same syntax.
std::string to_toml(const json& cfg);

/// Overlays `layer` onto `cfg`. Unknown sections or keys and kind mismatches
/// throw ConfigInvalid. Integers are accepted where floats are expected.
void merge_layer(json& cfg, const json& layer, const std::string& origin);

/// Sets `section.key` from its textual form (TOML value syntax; bare text is
/// accepted for string keys).
void apply_setting(json& cfg, std::string_view dotted_key, std::string_view raw_value, const std::string& origin);

struct ConfigSources {
  std::optional<std::filesystem::path> file;
  /// (name, value) pairs; only names starting with CHART_TIR__ are used.
  std::vector<std::pair<std::string, std::string>> env;
  /// `section.key=value` strings.
  std::vector<std::string> sets;
};

/// defaults < file < environment < sets, then validated.
json load_config(const ConfigSources& sources);

/// Snapshot of the process environment.
std::vector<std::pair<std::string, std::string>> process_env();

/// Hex SHA-256 of the canonical (sorted-key, compact) JSON form.
std::string config_hash(const json& cfg);

/// Builds every typed view and checks it; throws ConfigInvalid.
void validate_config(const json& cfg);

EndpointConfig endpoint_config(const json& cfg, const std::string& section);
ExecLimits exec_limits(const json& cfg);
LocalSandboxOptions local_sandbox_options(const json& cfg);
ToolConfig tool_config(const json& cfg);
RolloutConfig rollout_config(const json& cfg);
MatchPolicy match_policy(const json& cfg);
RewardWeights reward_weights(const json& cfg);
GrpoConfig grpo_config(const json& cfg);
SpecPools spec_pools(const json& cfg);
ChartGenOptions chart_gen_options(const json& cfg);
QualityThresholds quality_thresholds(const json& cfg);
CheckParams check_params(const json& cfg);

}  // namespace ctir::app
