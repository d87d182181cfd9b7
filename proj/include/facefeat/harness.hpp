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

#ifndef FACEFEAT_HARNESS_HPP
#define FACEFEAT_HARNESS_HPP

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "facefeat/classifier.hpp"
#include "facefeat/config.hpp"
#include "facefeat/container.hpp"
#include "facefeat/dataset.hpp"
#include "facefeat/error.hpp"
#include "facefeat/pipeline.hpp"

namespace facefeat {

/// A fitted end-to-end model: feature pipeline plus ridge classifier.
struct TrainedModel {
  FeaturePipeline pipeline;
  RidgeClassifier classifier;
  int class_count = 0;
  std::string fingerprint;            // config fingerprint of the run that produced it
  std::vector<std::size_t> fit_ids;   // dataset images that fed whitening/dictionary fitting
  bool external_dictionary = false;   // true when fitted on a separate source dataset
};

namespace detail {

inline std::vector<GrayImage> gather(const Dataset& ds, std::span<const std::size_t> ids) {
  std::vector<GrayImage> out;
  out.reserve(ids.size());
  for (auto i : ids) out.push_back(ds.images.at(i));
  return out;
}

inline std::vector<int> gather_labels(const Dataset& ds, std::span<const std::size_t> ids) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (auto i : ids) out.push_back(ds.manifest.entries().at(i).label);
  return out;
}

inline double percent(std::size_t correct, std::size_t total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace detail

/// Fits whitening, dictionaries and the classifier on the training images.
/// When `dictionary_source` is given, whitening and dictionaries come from
/// all of its images and no pixel of `data` is read while fitting them.
inline TrainedModel train_model(const ExperimentConfig& cfg, const Dataset& data, std::span<const std::size_t> train,
                                const Dataset* dictionary_source, std::uint64_t seed) {
  TrainedModel model;
  model.pipeline = FeaturePipeline::from_config(cfg);
  model.class_count = data.manifest.class_count();
  model.fingerprint = hex64(cfg.fingerprint());
  std::vector<GrayImage> fit_images;
  if (dictionary_source) {
    fit_images = dictionary_source->images;
    model.external_dictionary = true;
  } else {
    fit_images = detail::gather(data, train);
    model.fit_ids.assign(train.begin(), train.end());
  }
  for (Channel ch : configured_channels(cfg))
    model.pipeline.channels.push_back(fit_channel(fit_images, ch, cfg, derive_seed(seed, "fit")));

  const Eigen::MatrixXd x = feature_matrix(data.images, train, model.pipeline);
  const std::vector<int> y = detail::gather_labels(data, train);
  model.classifier = fit_ridge(x, y, model.class_count, cfg.classifier_delta, cfg.standardize);
  return model;
}

inline std::vector<int> predict(const TrainedModel& model, std::span<const GrayImage> images,
                                std::span<const std::size_t> which) {
  return model.classifier.predict_rows(feature_matrix(images, which, model.pipeline));
}

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw DimensionError("prediction and label counts differ");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) ok += predicted[i] == truth[i];
  return detail::percent(ok, truth.size());
}

/// Modular residual baseline. Every location of a side x side window grid
/// gets its own collaborative-representation model over the training
/// images' windows at that location (unit L2 norm). A probe is classified by
/// summing class residuals over locations (Sum) or by a plurality vote of
/// the per-location decisions (Voting).
inline std::vector<int> modular_predict(const ExperimentConfig& cfg, const Dataset& data,
                                        std::span<const std::size_t> train, std::span<const std::size_t> test,
                                        Aggregation mode) {
  if (train.empty()) throw ValidationError("modular baseline needs training images");
  const GrayImage& ref = data.images.at(train.front());
  const std::size_t side = cfg.modular_patch_side;
  const std::size_t stride = cfg.modular_stride;
  auto windows = [&](std::size_t id) {
    PatchSet p = extract_patches(data.images.at(id), side, stride);
    for (Eigen::Index j = 0; j < p.data.cols(); ++j) {
      const double n = p.data.col(j).norm();
      if (n > 0.0) p.data.col(j) /= n;
    }
    return p.data;
  };
  const std::size_t locations = patch_count(ref.height(), ref.width(), side, stride);
  const auto d = static_cast<Eigen::Index>(side * side);
  std::vector<Eigen::MatrixXd> per_location(locations, Eigen::MatrixXd(static_cast<Eigen::Index>(train.size()), d));
  for (std::size_t t = 0; t < train.size(); ++t) {
    const Eigen::MatrixXd w = windows(train[t]);
    if (static_cast<std::size_t>(w.cols()) != locations) throw DimensionError("modular baseline needs equal-sized images");
    for (std::size_t l = 0; l < locations; ++l)
      per_location[l].row(static_cast<Eigen::Index>(t)) = w.col(static_cast<Eigen::Index>(l)).transpose();
  }
  const std::vector<int> labels = detail::gather_labels(data, train);
  std::vector<ResidualModel> models;
  models.reserve(locations);
  for (const auto& m : per_location) models.emplace_back(m, labels, cfg.modular_gamma);

  const int classes = data.manifest.class_count();
  std::vector<int> out(test.size());
  parallel_for(test.size(), [&](std::size_t i) {
    const Eigen::MatrixXd w = windows(test[i]);
    Eigen::MatrixXd residuals(static_cast<Eigen::Index>(locations), classes);
    for (std::size_t l = 0; l < locations; ++l)
      residuals.row(static_cast<Eigen::Index>(l)) =
          models[l].residuals(w.col(static_cast<Eigen::Index>(l))).transpose();
    out[i] = modular_aggregate(residuals, mode);
  });
  return out;
}

struct SeedOutcome {
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  Split split;
  std::vector<std::size_t> fit_ids;
  bool external_dictionary = false;
};

/// Accuracy figures of one configuration over its seeds.
struct ResultRecord {
  std::string fingerprint;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::uint64_t> seeds;
  std::vector<double> accuracies;
  double mean = 0.0;
  double stddev = 0.0;
  double wall_seconds = 0.0;
  std::string error;

  void summarize() {
    if (accuracies.empty()) {
      mean = stddev = 0.0;
      return;
    }
    mean = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / static_cast<double>(accuracies.size());
    double ss = 0.0;
    for (double a : accuracies) ss += (a - mean) * (a - mean);
    stddev = accuracies.size() > 1 ? std::sqrt(ss / static_cast<double>(accuracies.size() - 1)) : 0.0;
  }

  std::string params_text() const {
    std::string s;
    for (const auto& [k, v] : params) s += (s.empty() ? "" : ";") + k + "=" + v;
    return s;
  }

  nlohmann::ordered_json to_json(bool with_time = true) const {
    nlohmann::ordered_json j;
    j["fingerprint"] = fingerprint;
    j["params"] = nlohmann::ordered_json::array();
    for (const auto& [k, v] : params) j["params"].push_back({k, v});
    j["seeds"] = seeds;
    j["accuracies"] = accuracies;
    j["mean"] = mean;
    j["std"] = stddev;
    if (with_time) j["wall_seconds"] = wall_seconds;
    if (!error.empty()) j["error"] = error;
    return j;
  }

  static ResultRecord from_json(const nlohmann::json& j) {
    ResultRecord r;
    try {
      r.fingerprint = j.at("fingerprint").get<std::string>();
      for (const auto& p : j.at("params")) r.params.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
      r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
      r.accuracies = j.at("accuracies").get<std::vector<double>>();
      r.mean = j.at("mean").get<double>();
      r.stddev = j.at("std").get<double>();
      r.wall_seconds = j.value("wall_seconds", 0.0);
      r.error = j.value("error", std::string{});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("malformed result record: ") + e.what());
    }
    return r;
  }
};

/// One configuration bound to its loaded data.
class Experiment {
 public:
  Experiment(ExperimentConfig cfg, Dataset data, std::optional<Dataset> dictionary_source = std::nullopt)
      : cfg_(std::move(cfg)), data_(std::move(data)), source_(std::move(dictionary_source)) {
    cfg_.validate();
  }

  const ExperimentConfig& config() const noexcept { return cfg_; }
  const Dataset& data() const noexcept { return data_; }

  Split split(std::uint64_t seed) const {
    return make_split(data_.manifest, SplitSpec{seed, cfg_.train_per_class, cfg_.test_per_class});
  }

  SeedOutcome run_seed(std::uint64_t seed) const {
    SeedOutcome out;
    out.seed = seed;
    out.split = split(seed);
    const std::vector<int> truth = detail::gather_labels(data_, out.split.test);
    if (cfg_.classifier == ClassifierKind::Ridge) {
      const TrainedModel model = train_model(cfg_, data_, out.split.train, source_ ? &*source_ : nullptr, seed);
      out.fit_ids = model.fit_ids;
      out.external_dictionary = model.external_dictionary;
      out.accuracy = accuracy(predict(model, data_.images, out.split.test), truth);
    } else {
      const Aggregation mode = cfg_.classifier == ClassifierKind::ModularSum ? Aggregation::Sum : Aggregation::Voting;
      out.accuracy = accuracy(modular_predict(cfg_, data_, out.split.train, out.split.test, mode), truth);
    }
    return out;
  }

  ResultRecord run(std::vector<std::pair<std::string, std::string>> params = {}) const {
    const auto start = std::chrono::steady_clock::now();
    ResultRecord rec;
    rec.fingerprint = hex64(cfg_.fingerprint());
    rec.params = std::move(params);
    for (const auto seed : cfg_.seeds) {
      rec.seeds.push_back(seed);
      rec.accuracies.push_back(run_seed(seed).accuracy);
    }
    rec.summarize();
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
  }

 private:
  ExperimentConfig cfg_;
  Dataset data_;
  std::optional<Dataset> source_;
};

/// Resolves a manifest path to loaded images; sweeps share one instance so
/// each dataset is read once.
class DatasetCache {
 public:
  using Loader = std::function<Dataset(const std::string& manifest, std::size_t width, std::size_t height)>;

  DatasetCache()
      : loader_([](const std::string& m, std::size_t w, std::size_t h) { return load_dataset(m, w, h); }) {}
  explicit DatasetCache(Loader loader) : loader_(std::move(loader)) {}

  const Dataset& get(const std::string& manifest, std::size_t width, std::size_t height) {
    if (manifest.empty()) throw ValidationError("dataset.manifest is not set");
    const auto key = manifest + "@" + std::to_string(width) + "x" + std::to_string(height);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, loader_(manifest, width, height)).first;
    return it->second;
  }

 private:
  Loader loader_;
  std::map<std::string, Dataset> cache_;
};

inline ResultRecord run_experiment(const ExperimentConfig& cfg, DatasetCache& cache,
                                   std::vector<std::pair<std::string, std::string>> params = {}) {
  const Dataset& data = cache.get(cfg.manifest, cfg.image_width, cfg.image_height);
  std::optional<Dataset> source;
  if (!cfg.dictionary_source.empty()) source = cache.get(cfg.dictionary_source, cfg.image_width, cfg.image_height);
  return Experiment(cfg, data, std::move(source)).run(std::move(params));
}

inline ResultRecord run_experiment(const ExperimentConfig& cfg) {
  DatasetCache cache;
  return run_experiment(cfg, cache);
}

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

/// Runs the Cartesian product of the axes (first axis varies slowest). A
/// failing combination yields a record carrying the error and the sweep
/// moves on.
inline std::vector<ResultRecord> sweep(const ConfigMap& base, const std::vector<SweepAxis>& axes, DatasetCache& cache) {
  if (axes.empty()) throw ValidationError("sweep needs at least one axis");
  for (const auto& a : axes) {
    if (a.values.empty()) throw ValidationError("sweep axis '" + a.key + "' has no values");
    if (!config_defaults().contains(a.key)) throw ValidationError("unknown sweep key '" + a.key + "'");
  }
  std::vector<ResultRecord> out;
  std::vector<std::size_t> idx(axes.size(), 0);
  for (;;) {
    ConfigMap map = base;
    std::vector<std::pair<std::string, std::string>> params;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      map[axes[a].key] = axes[a].values[idx[a]];
      params.emplace_back(axes[a].key, axes[a].values[idx[a]]);
    }
    try {
      out.push_back(run_experiment(ExperimentConfig::from_map(map), cache, params));
    } catch (const std::exception& e) {
      ResultRecord failed;
      failed.fingerprint = hex64(fnv1a64(canonical_text(map)));
      failed.params = params;
      failed.error = e.what();
      out.push_back(std::move(failed));
    }
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axes[a].values.size()) break;
      idx[a] = 0;
      if (a == 0) return out;
    }
  }
}

// ---------------------------------------------------------------------------
// Model containers used by the CLI.

inline Container to_container(const TrainedModel& m) {
  Container c;
  c.set_text("kind", "model");
  c.set_text("fingerprint", m.fingerprint);
  store_pipeline(c, m.pipeline);
  c.set_matrix("classifier.W", m.classifier.weights());
  c.set_text("classifier.meta", "delta=" + format_number(m.classifier.delta()) +
                                    "\nclasses=" + std::to_string(m.class_count) +
                                    "\nexternal_dictionary=" + (m.external_dictionary ? "1" : "0") + "\n");
  std::vector<std::int32_t> fit(m.fit_ids.begin(), m.fit_ids.end());
  c.set_ints("provenance.fit_ids", std::move(fit));
  if (const auto& s = m.classifier.standardizer()) {
    c.set_vector("classifier.standardizer.mean", s->mean);
    c.set_vector("classifier.standardizer.scale", s->scale);
  }
  return c;
}

inline TrainedModel model_from_container(const Container& c) {
  if (c.text("kind") != "model") throw FormatError("container does not hold a trained model");
  TrainedModel m;
  m.fingerprint = c.text("fingerprint");
  m.pipeline = restore_pipeline(c);
  const ConfigMap meta = detail::parse_meta(c.text("classifier.meta"));
  const double delta = detail::to_double("delta", detail::meta_at(meta, "delta"));
  m.class_count = static_cast<int>(detail::to_uint("classes", detail::meta_at(meta, "classes")));
  m.external_dictionary = detail::meta_at(meta, "external_dictionary") == "1";
  for (auto v : c.ints("provenance.fit_ids")) m.fit_ids.push_back(static_cast<std::size_t>(v));
  std::optional<Standardizer> s;
  if (c.has("classifier.standardizer.mean"))
    s = Standardizer{c.vector("classifier.standardizer.mean"), c.vector("classifier.standardizer.scale")};
  m.classifier = RidgeClassifier(c.matrix("classifier.W"), delta, std::move(s));
  return m;
}

}  // namespace facefeat

#endif  // FACEFEAT_HARNESS_HPP
