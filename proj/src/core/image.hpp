// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctir {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Immutable 8-bit RGB raster. Copies share the pixel buffer.
class ChartImage {
 public:
  /// `rgb` is row-major, 3 bytes per pixel, exactly width*height*3 long.
  ChartImage(int width, int height, std::vector<std::uint8_t> rgb, std::string source_id);

  static ChartImage filled(int width, int height, Rgb color, std::string source_id);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const std::string& source_id() const noexcept { return source_id_; }
  std::span<const std::uint8_t> bytes() const noexcept { return *pixels_; }

  Rgb at(int x, int y) const;

  /// Same pixels under a different id.
  ChartImage with_source_id(std::string id) const;

  /// Hex SHA-256 over "width x height" and the raw RGB bytes.
  std::string content_hash() const;

  friend bool operator==(const ChartImage& a, const ChartImage& b);

 private:
  int width_;
  int height_;
  std::shared_ptr<const std::vector<std::uint8_t>> pixels_;
  std::string source_id_;
};

std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(std::string_view data);
std::string base64_encode(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::vector<std::uint8_t> encode_png(const ChartImage& image);
ChartImage decode_png(std::span<const std::uint8_t> png, std::string source_id);
ChartImage load_png(const std::filesystem::path& path, std::string source_id);
void save_png(const ChartImage& image, const std::filesystem::path& path);

ChartImage decode_jpeg(std::span<const std::uint8_t> jpeg, std::string source_id);

/// PNG or JPEG, chosen by the file's magic bytes.
ChartImage load_image(const std::filesystem::path& path, std::string source_id);

/// Maps an arbitrary id onto a string usable as a file stem.
std::string sanitize_source_id(std::string_view id);

}  // namespace ctir
