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

#ifndef FACEFEAT_LBP_HPP
#define FACEFEAT_LBP_HPP

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "facefeat/error.hpp"
#include "facefeat/image.hpp"
#include "facefeat/pooling.hpp"

namespace facefeat {

/// Basic 3x3 LBP. Neighbours are visited clockwise from the top-left one,
/// which supplies the most significant bit; a bit is set when the neighbour
/// is >= the center. The result is (H-2) x (W-2) with code / 255 per pixel.
inline GrayImage lbp_code_image(const GrayImage& img) {
  if (img.width() < 3 || img.height() < 3) throw DimensionError("LBP needs an image of at least 3x3");
  static constexpr int kDr[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
  static constexpr int kDc[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
  GrayImage out(img.width() - 2, img.height() - 2);
  for (std::size_t r = 1; r + 1 < img.height(); ++r) {
    for (std::size_t c = 1; c + 1 < img.width(); ++c) {
      const double center = img(r, c);
      unsigned code = 0;
      for (int k = 0; k < 8; ++k) {
        const double v = img(static_cast<std::size_t>(static_cast<long>(r) + kDr[k]),
                             static_cast<std::size_t>(static_cast<long>(c) + kDc[k]));
        code = (code << 1) | (v >= center ? 1u : 0u);
      }
      out(r - 1, c - 1) = static_cast<double>(code) / 255.0;
    }
  }
  return out;
}

/// Concatenates channels in order and records each channel's length.
inline FeatureVector fuse(std::span<const FeatureVector> channels) {
  if (channels.empty()) throw ValidationError("fuse needs at least one channel");
  FeatureVector out = channels.front();
  std::size_t total = 0;
  for (const auto& ch : channels) total += ch.size();
  out.values.resize(static_cast<Eigen::Index>(total));
  out.channel_lengths.clear();
  Eigen::Index offset = 0;
  for (const auto& ch : channels) {
    out.values.segment(offset, ch.values.size()) = ch.values;
    offset += ch.values.size();
    out.channel_lengths.push_back(ch.size());
  }
  return out;
}

/// Inverse of fuse() for the value payload.
inline std::vector<Eigen::VectorXd> split_channels(const FeatureVector& fused) {
  std::vector<Eigen::VectorXd> out;
  Eigen::Index offset = 0;
  for (auto len : fused.channel_lengths) {
    const auto n = static_cast<Eigen::Index>(len);
    if (offset + n > fused.values.size()) throw DimensionError("channel lengths exceed the fused vector");
    out.emplace_back(fused.values.segment(offset, n));
    offset += n;
  }
  if (offset != fused.values.size()) throw DimensionError("channel lengths do not cover the fused vector");
  return out;
}

}  // namespace facefeat

#endif  // FACEFEAT_LBP_HPP
