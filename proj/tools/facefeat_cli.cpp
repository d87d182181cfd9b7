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


// facefeat command-line driver.
//
// Every subcommand reads an experiment config (defaults, then --config
// file, then --set overrides in order). Errors are reported on stderr as a
// single JSON object {"error": <category>, "message": ...} and mapped to a
// per-category exit code.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "facefeat/facefeat.hpp"

namespace ff = facefeat;
namespace fs = std::filesystem;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kIo = 3,
  kFormat = 4,
  kDimension = 5,
  kValidation = 6,
  kInsufficient = 7,
  kSingular = 8,
  kInternal = 9,
};

int exit_code(ff::ErrorCategory c) {
  switch (c) {
    case ff::ErrorCategory::Io: return kIo;
    case ff::ErrorCategory::Format: return kFormat;
    case ff::ErrorCategory::Dimension: return kDimension;
    case ff::ErrorCategory::Validation: return kValidation;
    case ff::ErrorCategory::InsufficientSamples: return kInsufficient;
    case ff::ErrorCategory::Singularity: return kSingular;
  }
  return kInternal;
}

int report_error(std::string_view category, const std::string& message, int code) {
  nlohmann::ordered_json j;
  j["error"] = category;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
  return code;
}

struct ConfigArgs {
  std::string file;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "experiment config file");
    app->add_option("--set", overrides, "override a config key (key=value), repeatable");
  }

  ff::ExperimentConfig load() const {
    ff::ConfigMap map = file.empty() ? ff::config_defaults() : ff::load_config(file);
    for (const auto& o : overrides) ff::apply_override(map, o);
    return ff::ExperimentConfig::from_map(map);
  }

  ff::ConfigMap map() const {
    ff::ConfigMap m = file.empty() ? ff::config_defaults() : ff::load_config(file);
    for (const auto& o : overrides) ff::apply_override(m, o);
    return m;
  }
};

ff::Dataset load_data(const ff::ExperimentConfig& cfg) {
  if (cfg.manifest.empty()) throw ff::ValidationError("dataset.manifest is not set");
  return ff::load_dataset(cfg.manifest, cfg.image_width, cfg.image_height);
}

std::optional<ff::Dataset> load_source(const ff::ExperimentConfig& cfg) {
  if (cfg.dictionary_source.empty()) return std::nullopt;
  return ff::load_dataset(cfg.dictionary_source, cfg.image_width, cfg.image_height);
}

ff::Split split_for(const ff::ExperimentConfig& cfg, const ff::Dataset& data, const std::string& split_file,
                    std::uint64_t seed) {
  if (!split_file.empty()) return ff::read_split(split_file);
  return ff::make_split(data.manifest, ff::SplitSpec{seed, cfg.train_per_class, cfg.test_per_class});
}

std::uint64_t first_seed(const ff::ExperimentConfig& cfg, const std::optional<std::uint64_t>& seed) {
  return seed ? *seed : cfg.seeds.front();
}

std::vector<std::size_t> select_role(const ff::Split& s, const ff::Dataset& data, const std::string& role) {
  if (role == "train") return s.train;
  if (role == "test") return s.test;
  std::vector<std::size_t> all(data.images.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"facefeat: patch dictionary features for face recognition"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic oriented-texture dataset");
  ff::SyntheticSpec spec;
  std::string synth_out;
  bool no_jitter = false;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--classes", spec.classes, "number of classes");
  synth->add_option("--per-class", spec.per_class, "images per class");
  synth->add_option("--size", spec.size, "image side in pixels");
  synth->add_option("--seed", spec.seed, "generator seed");
  synth->add_option("--noise", spec.noise, "Gaussian noise standard deviation");
  synth->add_option("--period", spec.period, "grating period in pixels");
  synth->add_option("--contrast", spec.contrast, "grating amplitude");
  synth->add_flag("--no-jitter", no_jitter, "fixed phase per class");
  synth->add_flag("--pure-noise", spec.pure_noise, "uniform noise images instead of gratings");

  // split
  auto* split = app.add_subcommand("split", "write a train/test split file");
  ConfigArgs split_cfg;
  split_cfg.attach(split);
  std::optional<std::uint64_t> split_seed;
  std::string split_out;
  split->add_option("--seed", split_seed, "split seed (default: first configured seed)");
  split->add_option("--out", split_out, "split file")->required();

  // fit-dict
  auto* fitd = app.add_subcommand("fit-dict", "fit whitening and dictionaries on training images");
  ConfigArgs fitd_cfg;
  fitd_cfg.attach(fitd);
  std::optional<std::uint64_t> fitd_seed;
  std::string fitd_split, fitd_out;
  fitd->add_option("--seed", fitd_seed, "seed");
  fitd->add_option("--split", fitd_split, "split file (default: derived from seed)");
  fitd->add_option("--out", fitd_out, "output container")->required();

  // encode
  auto* enc = app.add_subcommand("encode", "encode and pool images with a fitted pipeline");
  ConfigArgs enc_cfg;
  enc_cfg.attach(enc);
  std::string enc_model, enc_out, enc_split, enc_role = "all";
  std::optional<std::uint64_t> enc_seed;
  bool dump_codes = false;
  enc->add_option("--model", enc_model, "container from fit-dict or train")->required();
  enc->add_option("--out", enc_out, "feature container")->required();
  enc->add_option("--split", enc_split, "split file");
  enc->add_option("--seed", enc_seed, "split seed");
  enc->add_option("--role", enc_role, "train, test or all")->check(CLI::IsMember({"train", "test", "all"}));
  enc->add_flag("--dump-codes", dump_codes, "also store the per-patch codes of every image");

  // train
  auto* train = app.add_subcommand("train", "fit the full pipeline and classifier");
  ConfigArgs train_cfg;
  train_cfg.attach(train);
  std::optional<std::uint64_t> train_seed;
  std::string train_split, train_out;
  train->add_option("--seed", train_seed, "seed");
  train->add_option("--split", train_split, "split file");
  train->add_option("--out", train_out, "model container")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a trained model on the test side of a split");
  ConfigArgs eval_cfg;
  eval_cfg.attach(eval);
  std::optional<std::uint64_t> eval_seed;
  std::string eval_split, eval_model;
  eval->add_option("--model", eval_model, "model container")->required();
  eval->add_option("--seed", eval_seed, "seed");
  eval->add_option("--split", eval_split, "split file");

  // run
  auto* run = app.add_subcommand("run", "run all configured seeds and append a result record");
  ConfigArgs run_cfg;
  run_cfg.attach(run);

  // sweep
  auto* sw = app.add_subcommand("sweep", "run a parameter grid and write the report");
  ConfigArgs sw_cfg;
  sw_cfg.attach(sw);
  std::vector<std::string> axes;
  sw->add_option("--axis", axes, "key=v1,v2,... or key=v1;v2;... (repeatable; first axis is the plot x)")->required();

  // report
  auto* rep = app.add_subcommand("report", "render results.csv, plots.svg and summary.txt from records");
  std::string rep_records, rep_out;
  rep->add_option("--records", rep_records, "records.jsonl")->required();
  rep->add_option("--out", rep_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kUsage);
  }

  try {
    if (*synth) {
      spec.phase_jitter = !no_jitter;
      const auto m = ff::make_synthetic(spec, synth_out);
      std::cout << (fs::path(synth_out) / "manifest.txt").string() << ' ' << m.size() << " images\n";
    } else if (*split) {
      const auto cfg = split_cfg.load();
      const auto manifest = ff::load_manifest(cfg.manifest);
      const auto s = ff::make_split(manifest, ff::SplitSpec{first_seed(cfg, split_seed), cfg.train_per_class,
                                                            cfg.test_per_class});
      ff::write_split(s, split_out);
      std::cout << s.train.size() << " train, " << s.test.size() << " test\n";
    } else if (*fitd) {
      const auto cfg = fitd_cfg.load();
      const auto seed = first_seed(cfg, fitd_seed);
      const auto data = load_data(cfg);
      const auto source = load_source(cfg);
      const auto s = split_for(cfg, data, fitd_split, seed);
      const auto images = source ? source->images : ff::detail::gather(data, s.train);
      ff::FeaturePipeline p = ff::FeaturePipeline::from_config(cfg);
      for (auto ch : ff::configured_channels(cfg))
        p.channels.push_back(ff::fit_channel(images, ch, cfg, ff::derive_seed(seed, "fit")));
      ff::Container c;
      c.set_text("kind", "pipeline");
      c.set_text("fingerprint", ff::hex64(cfg.fingerprint()));
      ff::store_pipeline(c, p);
      c.save(fitd_out);
      std::cout << fitd_out << '\n';
    } else if (*enc) {
      const auto cfg = enc_cfg.load();
      const auto data = load_data(cfg);
      const auto model = ff::Container::load(enc_model);
      const auto p = ff::restore_pipeline(model);
      const auto s = enc_role == "all" ? ff::Split{} : split_for(cfg, data, enc_split, first_seed(cfg, enc_seed));
      const auto ids = select_role(s, data, enc_role);
      ff::Container out;
      out.set_text("kind", "features");
      out.set_matrix("features", ff::feature_matrix(data.images, ids, p));
      std::vector<std::int32_t> labels, idx;
      for (auto i : ids) {
        labels.push_back(data.manifest.entries()[i].label);
        idx.push_back(static_cast<std::int32_t>(i));
      }
      out.set_ints("labels", labels);
      out.set_ints("ids", idx);
      if (dump_codes) {
        const auto encoders = ff::make_encoders(p);
        for (std::size_t k = 0; k < ids.size(); ++k) {
          for (std::size_t c = 0; c < p.channels.size(); ++c) {
            const auto ci = ff::channel_image(data.images[ids[k]], p.channels[c].channel);
            const auto codes = ff::encode_image(ci, p.channels[c], encoders[c], p);
            const std::string pre = "codes." + std::to_string(ids[k]) + "." + std::string(ff::to_string(p.channels[c].channel));
            out.set_matrix(pre, codes.codes);
            Eigen::MatrixXd centers(2, static_cast<Eigen::Index>(codes.coords.size()));
            for (std::size_t j = 0; j < codes.coords.size(); ++j)
              centers.col(static_cast<Eigen::Index>(j)) << codes.coords[j].row, codes.coords[j].col;
            out.set_matrix(pre + ".centers", centers);
          }
        }
      }
      out.save(enc_out);
      std::cout << ids.size() << " images encoded\n";
    } else if (*train) {
      const auto cfg = train_cfg.load();
      const auto seed = first_seed(cfg, train_seed);
      const auto data = load_data(cfg);
      const auto source = load_source(cfg);
      const auto s = split_for(cfg, data, train_split, seed);
      const auto model = ff::train_model(cfg, data, s.train, source ? &*source : nullptr, seed);
      ff::to_container(model).save(train_out);
      std::cout << train_out << '\n';
    } else if (*eval) {
      const auto cfg = eval_cfg.load();
      const auto seed = first_seed(cfg, eval_seed);
      const auto data = load_data(cfg);
      const auto s = split_for(cfg, data, eval_split, seed);
      const auto model = ff::model_from_container(ff::Container::load(eval_model));
      const auto acc = ff::accuracy(ff::predict(model, data.images, s.test), ff::detail::gather_labels(data, s.test));
      nlohmann::ordered_json j;
      j["seed"] = seed;
      j["test_images"] = s.test.size();
      j["accuracy"] = acc;
      std::cout << j.dump() << '\n';
    } else if (*run) {
      const auto cfg = run_cfg.load();
      const auto rec = ff::run_experiment(cfg);
      ff::append_record(rec, cfg.output_dir);
      std::cout << rec.to_json().dump() << '\n';
    } else if (*sw) {
      const auto base = sw_cfg.map();
      const auto cfg = ff::ExperimentConfig::from_map(base);
      std::vector<ff::SweepAxis> grid;
      for (const auto& a : axes) {
        const auto eq = a.find('=');
        if (eq == std::string::npos) throw ff::ValidationError("axis '" + a + "' lacks '='");
        // Values are comma separated, or ';' separated when a value itself
        // is a list (pyramid.levels=1;1,2;1,2,4).
        std::string values = a.substr(eq + 1);
        std::vector<std::string> list;
        if (values.find(';') == std::string::npos) {
          list = ff::detail::split_list(values);
        } else {
          std::stringstream ss(values);
          for (std::string v; std::getline(ss, v, ';');)
            if (!ff::detail::trim(v).empty()) list.push_back(ff::detail::trim(v));
        }
        grid.push_back({ff::detail::trim(a.substr(0, eq)), list});
      }
      ff::DatasetCache cache;
      const auto records = ff::sweep(base, grid, cache);
      for (const auto& r : records) {
        ff::append_record(r, cfg.output_dir);
        std::cout << r.to_json().dump() << '\n';
      }
      ff::emit_report(records, cfg.output_dir);
    } else if (*rep) {
      const auto records = ff::read_records(rep_records);
      if (records.empty()) throw ff::ValidationError("no records in '" + rep_records + "'");
      ff::emit_report(records, rep_out);
      std::cout << records.size() << " records\n";
    }
  } catch (const ff::Error& e) {
    return report_error(ff::to_string(e.category()), e.what(), exit_code(e.category()));
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kInternal);
  }
  return kOk;
}
