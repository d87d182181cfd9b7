// Copyright 2026 The facefeat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FACEFEAT_IMAGE_HPP
#define FACEFEAT_IMAGE_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "facefeat/error.hpp"

namespace facefeat {

/// Row-major grayscale image with intensities in [0, 1].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(std::size_t width, std::size_t height, double fill = 0.0)
      : width_(width), height_(height), values_(width * height, fill) {
    if (width == 0 || height == 0) throw DimensionError("image dimensions must be >= 1");
  }
  GrayImage(std::size_t width, std::size_t height, std::vector<double> values)
      : width_(width), height_(height), values_(std::move(values)) {
    if (width == 0 || height == 0) throw DimensionError("image dimensions must be >= 1");
    if (values_.size() != width * height)
      throw DimensionError("image buffer size does not match dimensions");
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  bool empty() const noexcept { return values_.empty(); }

  double operator()(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }
  double& operator()(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }

  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> values_;
};

namespace detail {

// Netpbm header tokenizer: whitespace separated, '#' starts a comment that
// runs to end of line.
class PnmReader {
 public:
  explicit PnmReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space_and_comments();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#')
      out.push_back(static_cast<char>(bytes_[pos_++]));
    if (out.empty()) throw FormatError("truncated netpbm header");
    return out;
  }

  unsigned long number() {
    const std::string t = token();
    if (!std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      throw FormatError("malformed netpbm field '" + t + "'");
    return std::stoul(t);
  }

  // Binary payload starts after exactly one whitespace byte.
  void skip_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      throw FormatError("truncated netpbm header");
    ++pos_;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  unsigned char byte() { return bytes_[pos_++]; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

// ITU-R BT.601 luma in integer arithmetic so that white maps to exactly 1.
inline double luma(unsigned r, unsigned g, unsigned b, unsigned maxval) {
  return static_cast<double>(299u * r + 587u * g + 114u * b) / (1000.0 * maxval);
}

}  // namespace detail

/// Decodes an 8-bit binary or ASCII PGM/PPM (P2, P3, P5, P6). Color input is
/// converted with BT.601 luma.
inline GrayImage decode_pnm(const std::vector<unsigned char>& bytes) {
  detail::PnmReader in(bytes);
  const std::string magic = in.token();
  if (magic != "P2" && magic != "P3" && magic != "P5" && magic != "P6")
    throw FormatError("unsupported image format (expected PGM/PPM, got '" + magic + "')");
  const bool color = magic == "P3" || magic == "P6";
  const bool binary = magic == "P5" || magic == "P6";
  const unsigned long width = in.number();
  const unsigned long height = in.number();
  const unsigned long maxval = in.number();
  if (width == 0 || height == 0) throw FormatError("image has zero extent");
  if (maxval == 0 || maxval > 255) throw FormatError("only 8-bit netpbm images are supported");
  const std::size_t pixels = width * height;
  const std::size_t channels = color ? 3 : 1;

  std::vector<unsigned> raw(pixels * channels);
  if (binary) {
    in.skip_single_space();
    if (in.remaining() < raw.size()) throw FormatError("truncated image payload");
    for (auto& v : raw) v = in.byte();
  } else {
    for (auto& v : raw) v = static_cast<unsigned>(in.number());
  }
  for (unsigned v : raw)
    if (v > maxval) throw FormatError("sample exceeds maxval");

  std::vector<double> values(pixels);
  for (std::size_t i = 0; i < pixels; ++i) {
    values[i] = color ? detail::luma(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2],
                                     static_cast<unsigned>(maxval))
                      : static_cast<double>(raw[i]) / static_cast<double>(maxval);
  }
  return GrayImage(width, height, std::move(values));
}

inline GrayImage load_image(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open image '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) throw IoError("read failed for '" + path.string() + "'");
  try {
    return decode_pnm(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

/// Writes an 8-bit binary PGM, rounding to the nearest level.
inline void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write image '" + path.string() + "'");
  f << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  for (double v : img.values()) {
    const double c = std::clamp(v, 0.0, 1.0);
    f.put(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

/// Bilinear resampling with pixel-center alignment; source coordinates are
/// clamped to the image so borders replicate.
inline GrayImage resize(const GrayImage& img, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0) throw DimensionError("resize target must be >= 1x1");
  if (width == img.width() && height == img.height()) return img;
  GrayImage out(width, height);
  const double sx = static_cast<double>(img.width()) / static_cast<double>(width);
  const double sy = static_cast<double>(img.height()) / static_cast<double>(height);
  const double max_x = static_cast<double>(img.width() - 1);
  const double max_y = static_cast<double>(img.height() - 1);
  for (std::size_t r = 0; r < height; ++r) {
    const double y = std::clamp((static_cast<double>(r) + 0.5) * sy - 0.5, 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(std::floor(y));
    const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
    const double wy = y - static_cast<double>(y0);
    for (std::size_t c = 0; c < width; ++c) {
      const double x = std::clamp((static_cast<double>(c) + 0.5) * sx - 0.5, 0.0, max_x);
      const auto x0 = static_cast<std::size_t>(std::floor(x));
      const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
      const double wx = x - static_cast<double>(x0);
      // std::lerp is exact when both endpoints agree, so flat regions stay flat.
      const double top = std::lerp(img(y0, x0), img(y0, x1), wx);
      const double bottom = std::lerp(img(y1, x0), img(y1, x1), wx);
      out(r, c) = std::lerp(top, bottom, wy);
    }
  }
  return out;
}

}  // namespace facefeat

#endif  // FACEFEAT_IMAGE_HPP
