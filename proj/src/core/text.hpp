// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ctir::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_ws(std::string_view s);
std::string collapse_ws(std::string_view s);

/// Replaces ill-formed UTF-8 sequences with U+FFFD.
std::string to_valid_utf8(std::string_view s);

/// Keeps at most `max_bytes` from the end of `s`, cut on a UTF-8 boundary.
std::string tail(std::string_view s, std::size_t max_bytes);

}  // namespace ctir::text
