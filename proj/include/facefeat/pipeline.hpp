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

// Glue from images to pooled features: patch sampling, per-channel
// whitening and dictionary fitting, and the encode -> pool path.

#ifndef FACEFEAT_PIPELINE_HPP
#define FACEFEAT_PIPELINE_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "facefeat/config.hpp"
#include "facefeat/container.hpp"
#include "facefeat/dataset.hpp"
#include "facefeat/dictionary.hpp"
#include "facefeat/encoders.hpp"
#include "facefeat/image.hpp"
#include "facefeat/lbp.hpp"
#include "facefeat/parallel.hpp"
#include "facefeat/pooling.hpp"
#include "facefeat/preprocess.hpp"
#include "facefeat/random.hpp"

namespace facefeat {

enum class Channel { Raw, Lbp };

inline std::string_view to_string(Channel c) { return c == Channel::Raw ? "raw" : "lbp"; }

inline Channel parse_channel(std::string_view s) {
  if (s == "raw") return Channel::Raw;
  if (s == "lbp") return Channel::Lbp;
  throw ValidationError("unknown channel '" + std::string(s) + "'");
}

inline GrayImage channel_image(const GrayImage& img, Channel ch) {
  return ch == Channel::Raw ? img : lbp_code_image(img);
}

/// Images plus their manifest, already resized to the experiment size.
struct Dataset {
  DatasetManifest manifest;
  std::vector<GrayImage> images;

  std::vector<int> labels() const { return manifest.labels(); }
};

inline Dataset load_dataset(const std::filesystem::path& manifest_path, std::size_t width, std::size_t height) {
  Dataset ds;
  ds.manifest = load_manifest(manifest_path);
  ds.images.resize(ds.manifest.size());
  parallel_for(ds.manifest.size(), [&](std::size_t i) {
    ds.images[i] = resize(load_image(ds.manifest.resolve(i)), width, height);
  });
  return ds;
}

/// Draws `count` patches without replacement from all stride-1 windows of
/// the given images (all of them when fewer exist).
inline PatchSet sample_patches(std::span<const GrayImage> images, std::size_t side, std::size_t count,
                               std::uint64_t seed) {
  std::vector<std::size_t> offsets{0};
  for (const auto& img : images) offsets.push_back(offsets.back() + patch_count(img.height(), img.width(), side, 1));
  const std::size_t total = offsets.back();
  if (total == 0) throw InsufficientSamplesError("no patches of side " + std::to_string(side) + " available");
  Rng rng(derive_seed(seed, "patch-sample"));
  std::vector<std::size_t> picks = rng.sample_without_replacement(total, count);
  std::sort(picks.begin(), picks.end());

  PatchSet out;
  out.side = side;
  out.data.resize(static_cast<Eigen::Index>(side * side), static_cast<Eigen::Index>(picks.size()));
  out.coords.reserve(picks.size());
  out.source_ids.reserve(picks.size());
  const double half = (static_cast<double>(side) - 1.0) / 2.0;
  std::size_t img = 0;
  for (std::size_t k = 0; k < picks.size(); ++k) {
    while (picks[k] >= offsets[img + 1]) ++img;
    const std::size_t local = picks[k] - offsets[img];
    const std::size_t cols = images[img].width() - side + 1;
    const std::size_t top = local / cols;
    const std::size_t left = local % cols;
    copy_patch(images[img], top, left, side, out.data.col(static_cast<Eigen::Index>(k)));
    out.coords.push_back({static_cast<double>(top) + half, static_cast<double>(left) + half});
    out.source_ids.push_back(img);
  }
  return out;
}

/// Whitening + dictionary for one input channel.
struct ChannelModel {
  Channel channel = Channel::Raw;
  WhiteningModel whitening;
  Dictionary dictionary;
};

/// Everything needed to turn an image into a feature vector.
struct FeaturePipeline {
  std::size_t patch_side = 6;
  std::size_t patch_stride = 1;
  EncoderKind encoder = EncoderKind::SoftThreshold;
  EncoderParams encoder_params;
  PyramidSpec pyramid;
  std::vector<ChannelModel> channels;

  static FeaturePipeline from_config(const ExperimentConfig& cfg) {
    FeaturePipeline p;
    p.patch_side = cfg.patch_side;
    p.patch_stride = cfg.patch_stride;
    p.encoder = cfg.encoder;
    p.encoder_params = cfg.encoder_params;
    p.pyramid = cfg.pyramid;
    return p;
  }
};

inline std::vector<Channel> configured_channels(const ExperimentConfig& cfg) {
  std::vector<Channel> out;
  if (cfg.channel_raw) out.push_back(Channel::Raw);
  if (cfg.channel_lbp) out.push_back(Channel::Lbp);
  return out;
}

/// Fits whitening and the dictionary for one channel on `images` only.
inline ChannelModel fit_channel(std::span<const GrayImage> images, Channel ch, const ExperimentConfig& cfg,
                                std::uint64_t seed) {
  std::vector<GrayImage> converted;
  converted.reserve(images.size());
  for (const auto& img : images) converted.push_back(channel_image(img, ch));
  const std::uint64_t ch_seed = derive_seed(seed, to_string(ch));
  PatchSet patches = sample_patches(converted, cfg.patch_side, cfg.dictionary_patches, ch_seed);
  contrast_normalize_inplace(patches.data, cfg.norm_eps);
  ChannelModel model;
  model.channel = ch;
  model.whitening = zca_fit(patches, cfg.zca_eps, cfg.norm_eps);
  zca_apply_inplace(model.whitening, patches.data);
  model.dictionary = build_dictionary(patches, cfg.dictionary, derive_seed(ch_seed, "dictionary"));
  return model;
}

/// Dense patches of one channel image, contrast-normalized and whitened.
inline PatchSet whitened_patches(const GrayImage& img, const ChannelModel& model, std::size_t side,
                                 std::size_t stride) {
  PatchSet p = extract_patches(img, side, stride);
  contrast_normalize_inplace(p.data, model.whitening.norm_epsilon);
  zca_apply_inplace(model.whitening, p.data);
  return p;
}

/// Encoders bound to each channel's dictionary; build once, share read-only.
inline std::vector<Encoder> make_encoders(const FeaturePipeline& p) {
  std::vector<Encoder> out;
  out.reserve(p.channels.size());
  for (const auto& ch : p.channels) out.emplace_back(ch.dictionary, p.encoder, p.encoder_params);
  return out;
}

inline CodeMap encode_image(const GrayImage& channel_img, const ChannelModel& model, const Encoder& enc,
                            const FeaturePipeline& p) {
  return enc.encode(whitened_patches(channel_img, model, p.patch_side, p.patch_stride));
}

inline FeatureVector image_features(const GrayImage& img, const FeaturePipeline& p,
                                    std::span<const Encoder> encoders) {
  std::vector<FeatureVector> parts;
  parts.reserve(p.channels.size());
  for (std::size_t c = 0; c < p.channels.size(); ++c) {
    const GrayImage ci = channel_image(img, p.channels[c].channel);
    const CodeMap codes = encode_image(ci, p.channels[c], encoders[c], p);
    parts.push_back(pool_pyramid(codes, p.pyramid, ci.height(), ci.width()));
  }
  return parts.size() == 1 ? std::move(parts.front()) : fuse(parts);
}

/// Features of the selected images, one row each.
inline Eigen::MatrixXd feature_matrix(std::span<const GrayImage> images, std::span<const std::size_t> which,
                                      const FeaturePipeline& p) {
  const auto encoders = make_encoders(p);
  std::vector<Eigen::VectorXd> rows(which.size());
  parallel_for(which.size(), [&](std::size_t i) { rows[i] = image_features(images[which[i]], p, encoders).values; });
  if (rows.empty()) return {};
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Container (de)serialization of fitted pipelines.

inline void store_pipeline(Container& c, const FeaturePipeline& p) {
  std::string meta = "patch.side=" + std::to_string(p.patch_side) + "\npatch.stride=" +
                     std::to_string(p.patch_stride) + "\nencoder.name=" + std::string(to_string(p.encoder)) +
                     "\nencoder.alpha=" + format_number(p.encoder_params.alpha) +
                     "\nencoder.lambda=" + format_number(p.encoder_params.lambda) +
                     "\nencoder.knn=" + std::to_string(p.encoder_params.knn) +
                     "\nencoder.delta=" + format_number(p.encoder_params.delta) +
                     "\nencoder.gamma=" + format_number(p.encoder_params.gamma) +
                     "\npyramid.levels=" + format_levels(p.pyramid.levels) +
                     "\npyramid.mode=" + std::string(to_string(p.pyramid.mode)) +
                     "\nchannels.count=" + std::to_string(p.channels.size()) + "\n";
  c.set_text("pipeline", meta);
  for (std::size_t i = 0; i < p.channels.size(); ++i) {
    const auto& ch = p.channels[i];
    const std::string pre = "channel" + std::to_string(i) + ".";
    c.set_text(pre + "meta", "channel=" + std::string(to_string(ch.channel)) + "\ndictionary.method=" +
                                 std::string(to_string(ch.dictionary.method)) + "\ndictionary.seed=" +
                                 std::to_string(ch.dictionary.seed) + "\nwhiten.norm_eps=" +
                                 format_number(ch.whitening.norm_epsilon) + "\nwhiten.zca_eps=" +
                                 format_number(ch.whitening.zca_epsilon) + "\n");
    c.set_vector(pre + "whiten.mean", ch.whitening.mean);
    c.set_matrix(pre + "whiten.transform", ch.whitening.transform);
    c.set_matrix(pre + "dictionary", ch.dictionary.atoms);
  }
}

namespace detail {

inline ConfigMap parse_meta(const std::string& text) {
  ConfigMap out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

inline const std::string& meta_at(const ConfigMap& m, const std::string& key) {
  const auto it = m.find(key);
  if (it == m.end()) throw FormatError("container metadata lacks '" + key + "'");
  return it->second;
}

}  // namespace detail

inline FeaturePipeline restore_pipeline(const Container& c) {
  const ConfigMap meta = detail::parse_meta(c.text("pipeline"));
  auto num = [&](const char* k) { return detail::to_double(k, detail::meta_at(meta, k)); };
  auto uint = [&](const char* k) { return static_cast<std::size_t>(detail::to_uint(k, detail::meta_at(meta, k))); };
  FeaturePipeline p;
  p.patch_side = uint("patch.side");
  p.patch_stride = uint("patch.stride");
  p.encoder = parse_encoder(detail::meta_at(meta, "encoder.name"));
  p.encoder_params.alpha = num("encoder.alpha");
  p.encoder_params.lambda = num("encoder.lambda");
  p.encoder_params.knn = uint("encoder.knn");
  p.encoder_params.delta = num("encoder.delta");
  p.encoder_params.gamma = num("encoder.gamma");
  p.pyramid.levels = parse_levels(detail::meta_at(meta, "pyramid.levels"));
  p.pyramid.mode = parse_pool_mode(detail::meta_at(meta, "pyramid.mode"));
  const std::size_t n = uint("channels.count");
  for (std::size_t i = 0; i < n; ++i) {
    const std::string pre = "channel" + std::to_string(i) + ".";
    const ConfigMap cm = detail::parse_meta(c.text(pre + "meta"));
    ChannelModel ch;
    ch.channel = parse_channel(detail::meta_at(cm, "channel"));
    ch.dictionary.method = parse_dict_method(detail::meta_at(cm, "dictionary.method"));
    ch.dictionary.seed = detail::to_uint("dictionary.seed", detail::meta_at(cm, "dictionary.seed"));
    ch.whitening.norm_epsilon = detail::to_double("whiten.norm_eps", detail::meta_at(cm, "whiten.norm_eps"));
    ch.whitening.zca_epsilon = detail::to_double("whiten.zca_eps", detail::meta_at(cm, "whiten.zca_eps"));
    ch.whitening.mean = c.vector(pre + "whiten.mean");
    ch.whitening.transform = c.matrix(pre + "whiten.transform");
    ch.dictionary.atoms = c.matrix(pre + "dictionary");
    if (ch.whitening.transform.rows() != ch.whitening.mean.size() ||
        ch.dictionary.atoms.rows() != ch.whitening.mean.size())
      throw FormatError("channel " + std::to_string(i) + " has inconsistent dimensions");
    p.channels.push_back(std::move(ch));
  }
  p.pyramid.validate();
  return p;
}

}  // namespace facefeat

#endif  // FACEFEAT_PIPELINE_HPP
