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
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "facefeat/harness.hpp"
#include "facefeat/report.hpp"
#include "facefeat/synthetic.hpp"
#include "support.hpp"

namespace ff = facefeat;
using ff::testing::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ff::ConfigMap small_config() {
  return {{"dictionary.size", "128"}, {"split.train_per_class", "10"}, {"split.test_per_class", "5"}};
}

// Labels predicted by the nearest class mean of the training features.
std::vector<int> nearest_centroid(const Eigen::MatrixXd& train, const std::vector<int>& labels, int classes,
                                  const Eigen::MatrixXd& test) {
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(classes, train.cols());
  std::vector<int> count(static_cast<std::size_t>(classes), 0);
  for (Eigen::Index i = 0; i < train.rows(); ++i) {
    means.row(labels[static_cast<std::size_t>(i)]) += train.row(i);
    ++count[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  }
  for (int c = 0; c < classes; ++c) means.row(c) /= count[static_cast<std::size_t>(c)];
  std::vector<int> out;
  for (Eigen::Index i = 0; i < test.rows(); ++i) {
    int best = 0;
    for (int c = 1; c < classes; ++c)
      if ((test.row(i) - means.row(c)).squaredNorm() < (test.row(i) - means.row(best)).squaredNorm()) best = c;
    out.push_back(best);
  }
  return out;
}

ff::ResultRecord fake_record(const std::string& size, const std::string& method, double mean) {
  ff::ResultRecord r;
  r.fingerprint = ff::hex64(ff::fnv1a64(size + method));
  r.params = {{"dictionary.size", size}, {"dictionary.method", method}};
  r.seeds = {0, 1};
  r.accuracies = {mean - 1.0, mean + 1.0};
  r.summarize();
  r.wall_seconds = 0.5;
  return r;
}

}  // namespace

TEST(Synthetic, WritesImagesAndManifest) {
  TempDir dir("synth");
  const auto m = ff::make_synthetic(ff::SyntheticSpec{}, dir.path());
  EXPECT_EQ(m.size(), 45u);
  EXPECT_EQ(m.class_count(), 3);
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) files += e.path().extension() == ".pgm";
  EXPECT_EQ(files, 45u);
  const auto loaded = ff::load_manifest(dir / "manifest.txt");
  const auto labels = loaded.labels();
  EXPECT_EQ(std::set<int>(labels.begin(), labels.end()), (std::set<int>{0, 1, 2}));
  // On-disk pixels equal the in-memory generator output.
  const auto mem = ff::synthesize(ff::SyntheticSpec{});
  EXPECT_EQ(ff::load_image(loaded.resolve(7)), mem.images[7]);
}

TEST(Synthetic, ZeroNoiseFixedPhaseGivesIdenticalClassMembers) {
  ff::SyntheticSpec spec;
  spec.noise = 0.0;
  spec.phase_jitter = false;
  const auto ds = ff::synthesize(spec);
  for (std::size_t i = 0; i < ds.images.size(); ++i) {
    const std::size_t first = (i / spec.per_class) * spec.per_class;
    ASSERT_EQ(ds.images[i], ds.images[first]);
  }
  EXPECT_NE(ds.images[0], ds.images[spec.per_class]);
  spec.classes = 1;
  EXPECT_THROW(ff::synthesize(spec), ff::ValidationError);
}

TEST(Synthetic, OrthogonalOrientationsSeparatePerfectly) {
  ff::SyntheticSpec spec;
  spec.classes = 2;  // orientations 0 and pi/2
  auto cfg = ff::ExperimentConfig::from_map(small_config());
  const auto rec = ff::Experiment(cfg, ff::synthesize(spec)).run();
  for (double a : rec.accuracies) EXPECT_EQ(a, 100.0);
}

TEST(Experiment, SeparableTexturesReachFullAccuracyWithOracle) {
  const auto cfg = ff::ExperimentConfig::from_map(small_config());
  const ff::Experiment exp(cfg, ff::synthesize(ff::SyntheticSpec{}));
  const auto rec = exp.run();
  ASSERT_EQ(rec.accuracies.size(), 5u);
  for (double a : rec.accuracies) EXPECT_EQ(a, 100.0);
  EXPECT_EQ(rec.mean, 100.0);
  EXPECT_EQ(rec.stddev, 0.0);

  // Independent check: nearest class mean on the same pooled features.
  for (std::uint64_t seed : cfg.seeds) {
    const auto split = exp.split(seed);
    const auto model = ff::train_model(cfg, exp.data(), split.train, nullptr, seed);
    const auto xtr = ff::feature_matrix(exp.data().images, split.train, model.pipeline);
    const auto xte = ff::feature_matrix(exp.data().images, split.test, model.pipeline);
    const auto ytr = ff::detail::gather_labels(exp.data(), split.train);
    const auto yte = ff::detail::gather_labels(exp.data(), split.test);
    EXPECT_EQ(nearest_centroid(xtr, ytr, 3, xte), yte) << "seed " << seed;
  }
}

TEST(Experiment, DeterministicRecords) {
  const auto cfg = ff::ExperimentConfig::from_map(small_config());
  const auto data = ff::synthesize(ff::SyntheticSpec{.noise = 0.6});
  const auto a = ff::Experiment(cfg, data).run();
  const auto b = ff::Experiment(cfg, data).run();
  EXPECT_EQ(a.to_json(false).dump(), b.to_json(false).dump());
  EXPECT_EQ(a.fingerprint, ff::hex64(cfg.fingerprint()));
}

TEST(Experiment, FittingSeesTrainImagesOnly) {
  const auto cfg = ff::ExperimentConfig::from_map(small_config());
  auto data = ff::synthesize(ff::SyntheticSpec{});
  const ff::Experiment exp(cfg, data);
  const auto split = exp.split(3);
  // Poison every test image: any use during fitting makes the model non-finite.
  for (auto i : split.test) std::fill(data.images[i].values().begin(), data.images[i].values().end(), std::nan(""));
  const auto model = ff::train_model(cfg, data, split.train, nullptr, 3);
  EXPECT_TRUE(model.classifier.weights().allFinite());
  for (const auto& ch : model.pipeline.channels) {
    EXPECT_TRUE(ch.whitening.transform.allFinite());
    EXPECT_TRUE(ch.dictionary.atoms.allFinite());
  }
  const std::set<std::size_t> train(split.train.begin(), split.train.end());
  for (auto i : model.fit_ids) EXPECT_TRUE(train.count(i));
  EXPECT_EQ(model.fit_ids.size(), split.train.size());
  EXPECT_TRUE(model.classifier.standardizer()->mean.allFinite());
}

TEST(Experiment, ExternalDictionarySourceNeverReadsTarget) {
  auto cfg = ff::ExperimentConfig::from_map(small_config());
  const auto target = ff::synthesize(ff::SyntheticSpec{});
  const auto source = ff::synthesize(ff::SyntheticSpec{.seed = 9, .pure_noise = true});
  auto poisoned = target;
  const auto split = ff::make_split(target.manifest, ff::SplitSpec{0, 10, 5});
  for (auto i : split.test) std::fill(poisoned.images[i].values().begin(), poisoned.images[i].values().end(), std::nan(""));
  const auto model = ff::train_model(cfg, poisoned, split.train, &source, 0);
  EXPECT_TRUE(model.external_dictionary);
  EXPECT_TRUE(model.fit_ids.empty());
  EXPECT_TRUE(model.classifier.weights().allFinite());

  const auto rec = ff::Experiment(cfg, target, source).run();
  ASSERT_EQ(rec.accuracies.size(), 5u);
  for (double a : rec.accuracies) {
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 100.0);
  }
}

TEST(Experiment, ModularBaselinesRun) {
  for (const char* kind : {"modular-sum", "modular-vote"}) {
    auto map = small_config();
    map["classifier.kind"] = kind;
    map["seeds"] = "0,1";
    const auto rec = ff::Experiment(ff::ExperimentConfig::from_map(map), ff::synthesize(ff::SyntheticSpec{})).run();
    ASSERT_EQ(rec.accuracies.size(), 2u);
    for (double a : rec.accuracies) EXPECT_GE(a, 100.0 / 3.0 - 1e-9) << kind;
  }
}

TEST(Experiment, ModelContainerRoundTripPredictsTheSame) {
  const auto cfg = ff::ExperimentConfig::from_map(small_config());
  const auto data = ff::synthesize(ff::SyntheticSpec{.noise = 0.5});
  const auto split = ff::make_split(data.manifest, ff::SplitSpec{1, 10, 5});
  const auto model = ff::train_model(cfg, data, split.train, nullptr, 1);
  TempDir dir("model");
  ff::to_container(model).save(dir / "m.fcv");
  const auto back = ff::model_from_container(ff::Container::load(dir / "m.fcv"));
  EXPECT_EQ(back.fit_ids, model.fit_ids);
  EXPECT_EQ(back.pipeline.pyramid, model.pipeline.pyramid);
  EXPECT_EQ(ff::predict(back, data.images, split.test), ff::predict(model, data.images, split.test));
}

TEST(Sweep, DictionarySizeAxisGivesFiveRecordsAndTrend) {
  TempDir dir("sweep-size");
  ff::ConfigMap base = {{"dataset.manifest", "mem"}, {"split.train_per_class", "3"}, {"split.test_per_class", "2"},
                        {"pyramid.levels", "1,2"}, {"seeds", "0"}};
  ff::DatasetCache cache([](const std::string&, std::size_t, std::size_t) {
    return ff::synthesize(ff::SyntheticSpec{.classes = 2, .per_class = 5});
  });
  const auto recs = ff::sweep(base, {{"dictionary.size", {"100", "200", "400", "800", "1600"}}}, cache);
  ASSERT_EQ(recs.size(), 5u);
  for (const auto& r : recs) EXPECT_TRUE(r.error.empty()) << r.error;
  ff::emit_report(recs, dir.path());
  const auto summary = slurp(dir / "summary.txt");
  EXPECT_NE(summary.find("dictionary.size 100:"), std::string::npos);
  EXPECT_TRUE(summary.find("non-decreasing") != std::string::npos || summary.find("flat") != std::string::npos ||
              summary.find("mixed") != std::string::npos || summary.find("non-increasing") != std::string::npos);
}

TEST(Sweep, PyramidLevelsByModeGivesTenRecords) {
  ff::ConfigMap base = {{"dataset.manifest", "mem"}, {"dictionary.size", "16"}, {"split.train_per_class", "3"},
                        {"split.test_per_class", "2"}, {"seeds", "0"}};
  ff::DatasetCache cache([](const std::string&, std::size_t, std::size_t) {
    return ff::synthesize(ff::SyntheticSpec{.classes = 2, .per_class = 5});
  });
  const auto recs =
      ff::sweep(base, {{"pyramid.levels", {"1", "1,2", "1,2,4", "1,2,4,6", "1,2,4,6,8"}}, {"pyramid.mode", {"max", "avg"}}},
                cache);
  ASSERT_EQ(recs.size(), 10u);
  EXPECT_EQ(recs[1].params, (std::vector<std::pair<std::string, std::string>>{{"pyramid.levels", "1"}, {"pyramid.mode", "avg"}}));
  for (const auto& r : recs) EXPECT_TRUE(r.error.empty()) << r.error;
}

TEST(Sweep, EmptyGridAndFailuresAreHandled) {
  ff::DatasetCache cache([](const std::string&, std::size_t, std::size_t) {
    return ff::synthesize(ff::SyntheticSpec{.classes = 2, .per_class = 5});
  });
  ff::ConfigMap base = {{"dataset.manifest", "mem"}, {"dictionary.size", "8"}, {"split.train_per_class", "3"},
                        {"seeds", "0"}};
  EXPECT_THROW(ff::sweep(base, {}, cache), ff::ValidationError);
  EXPECT_THROW(ff::sweep(base, {{"dictionary.size", {}}}, cache), ff::ValidationError);
  // train_per_class 9 leaves no test images: that point fails, the others run.
  const auto recs = ff::sweep(base, {{"split.train_per_class", {"3", "9", "2"}}}, cache);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_TRUE(recs[0].error.empty());
  EXPECT_NE(recs[1].error.find("class 0"), std::string::npos);
  EXPECT_TRUE(recs[2].error.empty());
}

TEST(Report, SingleRecordCsv) {
  TempDir dir("report1");
  ff::emit_report({fake_record("64", "random", 80.0)}, dir.path());
  const auto csv = slurp(dir / "results.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_EQ(csv.rfind("fingerprint,params,seeds,mean,std,wall_seconds,error\n", 0), 0u);
  EXPECT_NE(csv.find("dictionary.size=64;dictionary.method=random"), std::string::npos);
}

TEST(Report, IdempotentAndOneSeriesPerMethod) {
  TempDir dir("report2");
  std::vector<ff::ResultRecord> recs;
  for (const char* method : {"random", "kmeans", "ksvd"})
    for (const char* size : {"100", "400", "1600"}) recs.push_back(fake_record(size, method, 70.0 + std::stod(size) / 100.0));
  ff::emit_report(recs, dir.path());
  const auto csv = slurp(dir / "results.csv"), svg = slurp(dir / "plots.svg"), sum = slurp(dir / "summary.txt");
  ff::emit_report(recs, dir.path());
  EXPECT_EQ(slurp(dir / "results.csv"), csv);
  EXPECT_EQ(slurp(dir / "plots.svg"), svg);
  EXPECT_EQ(slurp(dir / "summary.txt"), sum);
  std::size_t lines = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
  EXPECT_EQ(lines, 3u);
  for (const char* method : {"random", "kmeans", "ksvd"})
    EXPECT_NE(svg.find(std::string("dictionary.method=") + method), std::string::npos);
  EXPECT_NE(sum.find("non-decreasing"), std::string::npos);
}

TEST(Report, UnwritableDirectoryIsIoError) {
  TempDir dir("report3");
  std::ofstream(dir / "file") << "x";
  EXPECT_THROW(ff::emit_report({fake_record("1", "random", 50)}, dir / "file"), ff::IoError);
}

TEST(Report, RecordsAppendAndReadBack) {
  TempDir dir("records");
  const auto a = fake_record("64", "random", 80.0);
  auto b = fake_record("128", "kmeans", 90.0);
  b.error = "boom, \"quoted\"";
  ff::append_record(a, dir.path());
  ff::append_record(b, dir.path());
  const auto back = ff::read_records(dir / ff::kRecordsFile);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].to_json().dump(), a.to_json().dump());
  EXPECT_EQ(back[1].to_json().dump(), b.to_json().dump());
  EXPECT_NE(ff::results_csv(back).find("\"boom, \"\"quoted\"\"\""), std::string::npos);
  std::ofstream(dir / "bad.jsonl") << "{not json\n";
  EXPECT_THROW(ff::read_records(dir / "bad.jsonl"), ff::FormatError);
}
