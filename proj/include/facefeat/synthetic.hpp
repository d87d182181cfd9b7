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

#ifndef FACEFEAT_SYNTHETIC_HPP
#define FACEFEAT_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "facefeat/dataset.hpp"
#include "facefeat/error.hpp"
#include "facefeat/image.hpp"
#include "facefeat/pipeline.hpp"
#include "facefeat/random.hpp"

namespace facefeat {

/// Oriented-grating texture classes. Class k has orientation k*pi/classes.
/// With phase_jitter each image gets its own random phase, so a class is a
/// texture rather than a fixed template; noise is additive Gaussian with
/// standard deviation `noise`. Pixels are clamped to [0,1] and quantized to
/// 8 bits so in-memory and on-disk datasets agree exactly.
struct SyntheticSpec {
  std::size_t classes = 3;
  std::size_t per_class = 15;
  std::size_t size = 32;
  std::uint64_t seed = 0;
  double noise = 0.05;
  bool phase_jitter = true;
  double period = 6.0;      // pixels per grating cycle
  double contrast = 0.3;    // grating amplitude around mid-gray
  bool pure_noise = false;  // uniform noise images, no grating (label = class index still)
};

namespace detail {

inline double quantize8(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; }

}  // namespace detail

/// In-memory synthetic dataset. Entries are named class{c}_{i}.pgm.
inline Dataset synthesize(const SyntheticSpec& spec) {
  if (spec.classes < 2) throw ValidationError("synthetic dataset needs at least 2 classes");
  if (spec.per_class < 1 || spec.size < 1) throw ValidationError("synthetic per-class count and size must be >= 1");
  Rng rng(derive_seed(spec.seed, "synthetic"));
  std::vector<ManifestEntry> entries;
  Dataset ds;
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    const double theta = std::numbers::pi * static_cast<double>(c) / static_cast<double>(spec.classes);
    const double kx = std::cos(theta) * two_pi / spec.period;
    const double ky = std::sin(theta) * two_pi / spec.period;
    for (std::size_t i = 0; i < spec.per_class; ++i) {
      const double phase = spec.phase_jitter ? rng.uniform(0.0, two_pi) : 0.0;
      GrayImage img(spec.size, spec.size);
      for (std::size_t r = 0; r < spec.size; ++r) {
        for (std::size_t col = 0; col < spec.size; ++col) {
          double v;
          if (spec.pure_noise) {
            v = rng.uniform01();
          } else {
            v = 0.5 + spec.contrast * std::sin(kx * static_cast<double>(col) + ky * static_cast<double>(r) + phase);
            if (spec.noise > 0.0) v += spec.noise * rng.normal();
          }
          img(r, col) = detail::quantize8(v);
        }
      }
      ds.images.push_back(std::move(img));
      entries.push_back({"class" + std::to_string(c) + "_" + std::to_string(i) + ".pgm", static_cast<int>(c),
                         "s" + std::to_string(c)});
    }
  }
  ds.manifest = DatasetManifest(std::move(entries));
  return ds;
}

/// Writes the synthetic images plus `manifest.txt` under `dir`.
inline DatasetManifest make_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir) {
  Dataset ds = synthesize(spec);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  for (std::size_t i = 0; i < ds.images.size(); ++i) save_pgm(ds.images[i], dir / ds.manifest.entries()[i].path);
  write_manifest(ds.manifest, dir / "manifest.txt");
  return DatasetManifest(ds.manifest.entries(), dir);
}

}  // namespace facefeat

#endif  // FACEFEAT_SYNTHETIC_HPP
