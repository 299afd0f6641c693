// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include "core/image.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <csetjmp>
#include <cstdio>

#include <jpeglib.h>

#include <cstring>
#include <fstream>
#include <iterator>

#include "core/error.hpp"

namespace ctir {
namespace {

std::string to_hex(const unsigned char* digest, unsigned int len) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace

ChartImage::ChartImage(int width, int height, std::vector<std::uint8_t> rgb, std::string source_id)
    : width_(width), height_(height), source_id_(std::move(source_id)) {
  if (width < 1 || height < 1) {
    fail(ErrorCode::InvariantViolation, "image dimensions must be at least 1x1");
  }
  if (rgb.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
    fail(ErrorCode::InvariantViolation, "pixel buffer does not match image dimensions");
  }
  pixels_ = std::make_shared<const std::vector<std::uint8_t>>(std::move(rgb));
}

ChartImage ChartImage::filled(int width, int height, Rgb color, std::string source_id) {
  std::vector<std::uint8_t> rgb;
  if (width > 0 && height > 0) {
    rgb.reserve(static_cast<std::size_t>(width) * height * 3);
    for (long i = 0; i < static_cast<long>(width) * height; ++i) {
      rgb.push_back(color.r);
      rgb.push_back(color.g);
      rgb.push_back(color.b);
    }
  }
  return ChartImage(width, height, std::move(rgb), std::move(source_id));
}

Rgb ChartImage::at(int x, int y) const {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) {
    fail(ErrorCode::InvalidArgument, "pixel coordinate out of range");
  }
  const auto off = (static_cast<std::size_t>(y) * width_ + x) * 3;
  const auto& px = *pixels_;
  return Rgb{px[off], px[off + 1], px[off + 2]};
}

ChartImage ChartImage::with_source_id(std::string id) const {
  ChartImage copy = *this;
  copy.source_id_ = std::move(id);
  return copy;
}

std::string ChartImage::content_hash() const {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  const std::string dims = std::to_string(width_) + "x" + std::to_string(height_);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, dims.data(), dims.size());
  EVP_DigestUpdate(ctx, pixels_->data(), pixels_->size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  return to_hex(digest, len);
}

bool operator==(const ChartImage& a, const ChartImage& b) {
  if (a.width_ != b.width_ || a.height_ != b.height_ || a.source_id_ != b.source_id_) return false;
  return a.pixels_ == b.pixels_ || *a.pixels_ == *b.pixels_;
}

std::string sha256_hex(std::span<const std::uint8_t> data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  return to_hex(digest, len);
}

std::string sha256_hex(std::string_view data) {
  return sha256_hex(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

std::string base64_encode(std::span<const std::uint8_t> data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                                static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) fail(ErrorCode::MalformedRecord, "base64 length not a multiple of 4");
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) fail(ErrorCode::MalformedRecord, "invalid base64");
  std::size_t size = static_cast<std::size_t>(n);
  // EVP_DecodeBlock keeps the padding bytes as zeros.
  if (!text.empty() && text.back() == '=') --size;
  if (text.size() > 1 && text[text.size() - 2] == '=') --size;
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> encode_png(const ChartImage& image) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  const auto px = image.bytes();
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, px.data(), 0, nullptr)) {
    fail(ErrorCode::Io, std::string("png sizing failed: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, px.data(), 0, nullptr)) {
    fail(ErrorCode::Io, std::string("png encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

ChartImage decode_png(std::span<const std::uint8_t> png, std::string source_id) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, png.data(), png.size())) {
    fail(ErrorCode::Io, std::string("png decode failed: ") + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(img));
  // Transparent regions are composited over white, which is what plotting
  // libraries assume for saved figures.
  png_color background{255, 255, 255};
  if (!png_image_finish_read(&img, &background, rgb.data(), 0, nullptr)) {
    png_image_free(&img);
    fail(ErrorCode::Io, std::string("png decode failed: ") + img.message);
  }
  return ChartImage(static_cast<int>(img.width), static_cast<int>(img.height), std::move(rgb),
                    std::move(source_id));
}

ChartImage load_png(const std::filesystem::path& path, std::string source_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ImageNotFound, "cannot open image " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  return decode_png(data, std::move(source_id));
}

void save_png(const ChartImage& image, const std::filesystem::path& path) {
  const auto data = encode_png(image);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write image " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

namespace {

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

}  // namespace

ChartImage decode_jpeg(std::span<const std::uint8_t> jpeg, std::string source_id) {
  jpeg_decompress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  std::vector<std::uint8_t> rgb;
  JDIMENSION width = 0;
  JDIMENSION height = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    fail(ErrorCode::Io, std::string("jpeg decode failed: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, jpeg.data(), static_cast<unsigned long>(jpeg.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = cinfo.output_width;
  height = cinfo.output_height;
  rgb.resize(static_cast<std::size_t>(width) * height * 3);
  while (cinfo.output_scanline < height) {
    JSAMPROW row = rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return ChartImage(static_cast<int>(width), static_cast<int>(height), std::move(rgb), std::move(source_id));
}

ChartImage load_image(const std::filesystem::path& path, std::string source_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ImageNotFound, "cannot open image " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() >= 3 && data[0] == 0xFF && data[1] == 0xD8 && data[2] == 0xFF) {
    return decode_jpeg(data, std::move(source_id));
  }
  return decode_png(data, std::move(source_id));
}

std::string sanitize_source_id(std::string_view id) {
  std::string out;
  out.reserve(id.size());
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

}  // namespace ctir
