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


#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "facefeat/lbp.hpp"
#include "facefeat/pipeline.hpp"
#include "support.hpp"

namespace ff = facefeat;

namespace {

ff::GrayImage random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
  ff::GrayImage img(w, h);
  std::mt19937_64 gen(seed);
  // Coarse levels so ties between neighbours actually occur.
  for (auto& v : img.values()) v = static_cast<double>(gen() % 6) / 5.0;
  return img;
}

ff::FeatureVector feature(Eigen::Index n, double base) {
  ff::FeatureVector f;
  f.values = Eigen::VectorXd::LinSpaced(n, base, base + 1.0);
  f.channel_lengths = {static_cast<std::size_t>(n)};
  return f;
}

}  // namespace

TEST(Lbp, ConstantImageIsAllOnes) {
  const auto codes = ff::lbp_code_image(ff::GrayImage(7, 5, 0.4));
  EXPECT_EQ(codes.width(), 5u);
  EXPECT_EQ(codes.height(), 3u);
  for (double v : codes.values()) EXPECT_EQ(v, 1.0);
}

TEST(Lbp, BrightCenterIsZero) {
  ff::GrayImage img(3, 3, 0.0);
  img(1, 1) = 1.0;
  EXPECT_EQ(ff::lbp_code_image(img)(0, 0), 0.0);
}

TEST(Lbp, MatchesDoubleLoopOracle) {
  const auto img = random_image(5, 5, 1);
  const auto codes = ff::lbp_code_image(img);
  // Neighbour order: clockwise from the top-left, first one is the MSB.
  const int dr[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
  const int dc[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
  for (int r = 1; r < 4; ++r) {
    for (int c = 1; c < 4; ++c) {
      int code = 0;
      for (int k = 0; k < 8; ++k)
        if (img(static_cast<std::size_t>(r + dr[k]), static_cast<std::size_t>(c + dc[k])) >= img(r, c))
          code += 1 << (7 - k);
      EXPECT_EQ(codes(static_cast<std::size_t>(r - 1), static_cast<std::size_t>(c - 1)), code / 255.0);
    }
  }
}

TEST(Lbp, InvariantToIncreasingTransforms) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto img = random_image(9, 8, seed);
    ff::GrayImage t = img;
    for (auto& v : t.values()) v = std::exp(3.0 * v) * 0.1 + 0.2;
    ASSERT_EQ(ff::lbp_code_image(img), ff::lbp_code_image(t));
  }
  EXPECT_THROW(ff::lbp_code_image(ff::GrayImage(2, 5)), ff::DimensionError);
}

TEST(Fusion, SingleChannelIsIdentity) {
  const auto a = feature(6, 0.0);
  const std::vector<ff::FeatureVector> one{a};
  const auto f = ff::fuse(one);
  EXPECT_EQ(f.values, a.values);
  EXPECT_EQ(f.channel_lengths, a.channel_lengths);
}

TEST(Fusion, LengthsAddAndSplitRoundTrips) {
  const std::vector<ff::FeatureVector> parts{feature(7, 0.1), feature(3, -2.0), feature(5, 9.0)};
  const auto f = ff::fuse(parts);
  EXPECT_EQ(f.size(), 15u);
  EXPECT_EQ(f.channel_lengths, (std::vector<std::size_t>{7, 3, 5}));
  const auto back = ff::split_channels(f);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back[i], parts[i].values);

  // Grouping does not change the result length or bytes.
  const std::vector<ff::FeatureVector> left{parts[0], parts[1]};
  const std::vector<ff::FeatureVector> nested{ff::fuse(left), parts[2]};
  EXPECT_EQ(ff::fuse(nested).values, f.values);
}

TEST(Fusion, LbpChannelHasItsOwnModels) {
  // Both channels go through fit_channel with their own whitening and
  // dictionary; the LBP channel sees 2 pixels less per side.
  std::vector<ff::GrayImage> imgs;
  for (std::uint64_t s = 0; s < 4; ++s) imgs.push_back(random_image(16, 16, 100 + s));
  auto cfg = ff::ExperimentConfig::from_map({{"dictionary.size", "8"}, {"dictionary.patches", "200"},
                                              {"pyramid.levels", "1,2"}, {"channels", "raw,lbp"}});
  const auto raw = ff::fit_channel(imgs, ff::Channel::Raw, cfg, 1);
  const auto lbp = ff::fit_channel(imgs, ff::Channel::Lbp, cfg, 1);
  EXPECT_NE(raw.whitening.mean, lbp.whitening.mean);
  EXPECT_NE(raw.dictionary.atoms, lbp.dictionary.atoms);

  ff::FeaturePipeline p = ff::FeaturePipeline::from_config(cfg);
  p.channels = {raw, lbp};
  const auto enc = ff::make_encoders(p);
  const auto f = ff::image_features(imgs[0], p, enc);
  EXPECT_EQ(f.channel_lengths, (std::vector<std::size_t>{16 * 5, 16 * 5}));
}
