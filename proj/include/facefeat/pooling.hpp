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

#ifndef FACEFEAT_POOLING_HPP
#define FACEFEAT_POOLING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "facefeat/encoders.hpp"
#include "facefeat/error.hpp"

namespace facefeat {

enum class PoolMode { Max, Average };

inline std::string_view to_string(PoolMode m) { return m == PoolMode::Max ? "max" : "avg"; }

inline PoolMode parse_pool_mode(std::string_view s) {
  if (s == "max") return PoolMode::Max;
  if (s == "avg" || s == "average" || s == "mean") return PoolMode::Average;
  throw ValidationError("unknown pooling mode '" + std::string(s) + "'");
}

/// Allowed grid sides of a pyramid level.
inline constexpr std::size_t kPyramidSides[] = {1, 2, 4, 6, 8};

struct PyramidSpec {
  std::vector<std::size_t> levels{1, 2, 4, 6, 8};
  PoolMode mode = PoolMode::Max;

  /// Sum of g^2 over levels: the number of pooling cells.
  std::size_t cell_count() const {
    std::size_t n = 0;
    for (auto g : levels) n += g * g;
    return n;
  }

  void validate() const {
    if (levels.empty() || levels.size() > 5) throw ValidationError("pyramid needs 1 to 5 levels");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (std::find(std::begin(kPyramidSides), std::end(kPyramidSides), levels[i]) == std::end(kPyramidSides))
        throw ValidationError("pyramid grid side " + std::to_string(levels[i]) + " not in {1,2,4,6,8}");
      if (i > 0 && levels[i] <= levels[i - 1]) throw ValidationError("pyramid sides must be strictly increasing");
    }
  }

  friend bool operator==(const PyramidSpec&, const PyramidSpec&) = default;
};

/// The first `count` standard levels, e.g. 3 -> {1, 2, 4}.
inline PyramidSpec standard_pyramid(std::size_t count, PoolMode mode = PoolMode::Max) {
  if (count < 1 || count > 5) throw ValidationError("pyramid level count must be in [1, 5]");
  PyramidSpec s;
  s.levels.assign(std::begin(kPyramidSides), std::begin(kPyramidSides) + static_cast<std::ptrdiff_t>(count));
  s.mode = mode;
  return s;
}

inline std::string format_levels(const std::vector<std::size_t>& levels) {
  std::string out;
  for (std::size_t i = 0; i < levels.size(); ++i) out += (i ? "," : "") + std::to_string(levels[i]);
  return out;
}

inline std::vector<std::size_t> parse_levels(std::string_view s) {
  std::vector<std::size_t> out;
  std::stringstream ss{std::string(s)};
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(static_cast<std::size_t>(std::stoul(tok)));
    } catch (const std::exception&) {
      throw ValidationError("bad pyramid level '" + tok + "'");
    }
  }
  return out;
}

/// Pooled image representation. For fused features `channel_lengths` lists
/// the span of each channel in order; a single-channel vector has one entry.
struct FeatureVector {
  Eigen::VectorXd values;
  std::size_t code_dim = 0;
  PyramidSpec spec;
  std::vector<std::size_t> channel_lengths;

  std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
};

/// Pools codes over every level of the pyramid. A patch centered at (r, c)
/// falls in cell (floor(r g / H), floor(c g / W)), clamped to g - 1. Output
/// layout: level-major, then row-major cells, then code dimension.
inline FeatureVector pool_pyramid(const Eigen::MatrixXd& codes, const std::vector<PatchCoord>& coords,
                                  const PyramidSpec& spec, std::size_t height, std::size_t width) {
  spec.validate();
  if (static_cast<std::size_t>(codes.cols()) != coords.size())
    throw DimensionError("code count does not match coordinate count");
  const double h = static_cast<double>(height);
  const double w = static_cast<double>(width);
  for (const auto& p : coords)
    if (!(p.row >= 0.0 && p.row < h && p.col >= 0.0 && p.col < w))
      throw DimensionError("patch center outside the pooling extent");

  const Eigen::Index k = codes.rows();
  FeatureVector out;
  out.code_dim = static_cast<std::size_t>(k);
  out.spec = spec;
  out.values = Eigen::VectorXd::Zero(k * static_cast<Eigen::Index>(spec.cell_count()));
  out.channel_lengths = {out.size()};

  std::vector<std::size_t> members;
  Eigen::Index offset = 0;
  for (const std::size_t g : spec.levels) {
    const auto cells = g * g;
    std::vector<std::size_t> cell_of(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) {
      const auto r = std::min(static_cast<std::size_t>(std::floor(coords[i].row * static_cast<double>(g) / h)), g - 1);
      const auto c = std::min(static_cast<std::size_t>(std::floor(coords[i].col * static_cast<double>(g) / w)), g - 1);
      cell_of[i] = r * g + c;
    }
    for (std::size_t cell = 0; cell < cells; ++cell) {
      auto dst = out.values.segment(offset + static_cast<Eigen::Index>(cell) * k, k);
      std::size_t count = 0;
      if (spec.mode == PoolMode::Max) dst.setConstant(-std::numeric_limits<double>::infinity());
      for (std::size_t i = 0; i < coords.size(); ++i) {
        if (cell_of[i] != cell) continue;
        const auto col = codes.col(static_cast<Eigen::Index>(i));
        if (spec.mode == PoolMode::Max) dst = dst.cwiseMax(col);
        else dst += col;
        ++count;
      }
      if (count == 0) dst.setZero();
      else if (spec.mode == PoolMode::Average) dst /= static_cast<double>(count);
    }
    offset += static_cast<Eigen::Index>(cells) * k;
  }
  return out;
}

inline FeatureVector pool_pyramid(const CodeMap& codes, const PyramidSpec& spec, std::size_t height,
                                  std::size_t width) {
  return pool_pyramid(codes.codes, codes.coords, spec, height, width);
}

}  // namespace facefeat

#endif  // FACEFEAT_POOLING_HPP
