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

#ifndef FACEFEAT_CONFIG_HPP
#define FACEFEAT_CONFIG_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "facefeat/dataset.hpp"
#include "facefeat/dictionary.hpp"
#include "facefeat/encoders.hpp"
#include "facefeat/error.hpp"
#include "facefeat/pooling.hpp"

namespace facefeat {

enum class ClassifierKind { Ridge, ModularSum, ModularVote };

inline std::string_view to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::Ridge: return "ridge";
    case ClassifierKind::ModularSum: return "modular-sum";
    case ClassifierKind::ModularVote: return "modular-vote";
  }
  return "?";
}

inline ClassifierKind parse_classifier(std::string_view s) {
  if (s == "ridge") return ClassifierKind::Ridge;
  if (s == "modular-sum") return ClassifierKind::ModularSum;
  if (s == "modular-vote") return ClassifierKind::ModularVote;
  throw ValidationError("unknown classifier '" + std::string(s) + "'");
}

/// Flat `section.key -> value` view of a configuration.
using ConfigMap = std::map<std::string, std::string>;

/// Every recognised key with its default value.
inline const ConfigMap& config_defaults() {
  static const ConfigMap defaults = {
      {"dataset.manifest", ""},
      {"image.width", "32"},
      {"image.height", "32"},
      {"split.train_per_class", "10"},
      {"split.test_per_class", "rest"},
      {"patch.side", "6"},
      {"patch.stride", "1"},
      {"whiten.norm_eps", "0.00015378700499807768"},  // 10 / 255^2
      {"whiten.zca_eps", "0.1"},
      {"dictionary.method", "random"},
      {"dictionary.size", "1600"},
      {"dictionary.patches", "50000"},
      {"dictionary.iters", "30"},
      {"dictionary.sparsity", "5"},
      {"dictionary.lambda", "1"},
      {"dictionary.source", ""},
      {"encoder.name", "st"},
      {"encoder.alpha", "0.25"},
      {"encoder.lambda", "1"},
      {"encoder.knn", "5"},
      {"encoder.delta", "0.01"},
      {"encoder.gamma", "0.01"},
      {"pyramid.levels", "1,2,4,6,8"},
      {"pyramid.mode", "max"},
      {"classifier.kind", "ridge"},
      {"classifier.delta", "0.005"},
      {"classifier.standardize", "true"},
      {"modular.patch_side", "8"},
      {"modular.stride", "4"},
      {"modular.gamma", "0.01"},
      {"channels", "raw"},
      {"seeds", "0,1,2,3,4"},
      {"output.dir", "out"},
  };
  return defaults;
}

namespace detail {

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::stringstream ss{std::string(s)};
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "' expects a number, got '" + v + "'");
  }
}

inline std::uint64_t to_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v.front() == '-') throw std::invalid_argument("negative");
    const auto u = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return u;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ValidationError("config key '" + key + "' expects a boolean, got '" + v + "'");
}

}  // namespace detail

/// Applies `key = value` to a map after checking that the key exists.
inline void set_config_value(ConfigMap& map, const std::string& key, const std::string& value) {
  if (!config_defaults().contains(key)) throw ValidationError("unknown config key '" + key + "'");
  map[key] = value;
}

/// Parses `key = value` lines. `[section]` headers prefix the keys that
/// follow with `section.`; `#` and `;` start comments.
inline ConfigMap parse_config(std::istream& in, ConfigMap base = config_defaults()) {
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    std::string t = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw FormatError("config line " + std::to_string(lineno) + ": unterminated section");
      section = detail::trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw FormatError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(t.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    set_config_value(base, key, detail::trim(t.substr(eq + 1)));
  }
  return base;
}

inline ConfigMap load_config(const std::filesystem::path& path, ConfigMap base = config_defaults()) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config '" + path.string() + "'");
  return parse_config(f, std::move(base));
}

/// Applies a `key=value` override string.
inline void apply_override(ConfigMap& map, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ValidationError("override '" + std::string(assignment) + "' lacks '='");
  set_config_value(map, detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
}

/// Canonical text: sorted `key=value` lines.
inline std::string canonical_text(const ConfigMap& map) {
  std::string out;
  for (const auto& [k, v] : map) out += k + "=" + v + "\n";
  return out;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Shortest round-trippable decimal form.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Typed experiment configuration.
struct ExperimentConfig {
  std::string manifest;
  std::size_t image_width = 32;
  std::size_t image_height = 32;
  std::size_t train_per_class = 10;
  std::optional<std::size_t> test_per_class;
  std::size_t patch_side = 6;
  std::size_t patch_stride = 1;
  double norm_eps = 10.0 / (255.0 * 255.0);
  double zca_eps = 0.1;
  DictionaryParams dictionary;
  std::size_t dictionary_patches = 50000;
  std::string dictionary_source;
  EncoderKind encoder = EncoderKind::SoftThreshold;
  EncoderParams encoder_params;
  PyramidSpec pyramid;
  ClassifierKind classifier = ClassifierKind::Ridge;
  double classifier_delta = 0.005;
  bool standardize = true;
  std::size_t modular_patch_side = 8;
  std::size_t modular_stride = 4;
  double modular_gamma = 0.01;
  bool channel_raw = true;
  bool channel_lbp = false;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::string output_dir = "out";

  /// The map this config was built from; fingerprints hash it.
  ConfigMap source = config_defaults();

  static ExperimentConfig from_map(const ConfigMap& in) {
    ConfigMap map = config_defaults();
    for (const auto& [k, v] : in) set_config_value(map, k, v);
    auto get = [&](const char* k) -> const std::string& { return map.at(k); };
    auto uint = [&](const char* k) { return static_cast<std::size_t>(detail::to_uint(k, get(k))); };
    auto num = [&](const char* k) { return detail::to_double(k, get(k)); };

    ExperimentConfig c;
    c.source = map;
    c.manifest = get("dataset.manifest");
    c.image_width = uint("image.width");
    c.image_height = uint("image.height");
    c.train_per_class = uint("split.train_per_class");
    if (get("split.test_per_class") != "rest") c.test_per_class = uint("split.test_per_class");
    c.patch_side = uint("patch.side");
    c.patch_stride = uint("patch.stride");
    c.norm_eps = num("whiten.norm_eps");
    c.zca_eps = num("whiten.zca_eps");
    c.dictionary.method = parse_dict_method(get("dictionary.method"));
    c.dictionary.size = uint("dictionary.size");
    c.dictionary.iters = uint("dictionary.iters");
    c.dictionary.sparsity = uint("dictionary.sparsity");
    c.dictionary.lambda = num("dictionary.lambda");
    c.dictionary_patches = uint("dictionary.patches");
    c.dictionary_source = get("dictionary.source");
    c.encoder = parse_encoder(get("encoder.name"));
    c.encoder_params.alpha = num("encoder.alpha");
    c.encoder_params.lambda = num("encoder.lambda");
    c.encoder_params.knn = uint("encoder.knn");
    c.encoder_params.delta = num("encoder.delta");
    c.encoder_params.gamma = num("encoder.gamma");
    c.pyramid.levels = parse_levels(get("pyramid.levels"));
    c.pyramid.mode = parse_pool_mode(get("pyramid.mode"));
    c.classifier = parse_classifier(get("classifier.kind"));
    c.classifier_delta = num("classifier.delta");
    c.standardize = detail::to_bool("classifier.standardize", get("classifier.standardize"));
    c.modular_patch_side = uint("modular.patch_side");
    c.modular_stride = uint("modular.stride");
    c.modular_gamma = num("modular.gamma");
    c.channel_raw = c.channel_lbp = false;
    for (const auto& ch : detail::split_list(get("channels"))) {
      if (ch == "raw") c.channel_raw = true;
      else if (ch == "lbp") c.channel_lbp = true;
      else throw ValidationError("unknown channel '" + ch + "'");
    }
    c.seeds.clear();
    for (const auto& s : detail::split_list(get("seeds"))) c.seeds.push_back(detail::to_uint("seeds", s));
    c.output_dir = get("output.dir");
    c.validate();
    return c;
  }

  void validate() const {
    if (image_width < 1 || image_height < 1) throw ValidationError("image size must be >= 1");
    if (train_per_class < 1) throw ValidationError("split.train_per_class must be >= 1");
    if (patch_side < 1 || patch_stride < 1) throw ValidationError("patch side and stride must be >= 1");
    if (!(norm_eps > 0.0)) throw ValidationError("whiten.norm_eps must be > 0");
    if (zca_eps < 0.0) throw ValidationError("whiten.zca_eps must be >= 0");
    if (dictionary.size < 1) throw ValidationError("dictionary.size must be >= 1");
    if (dictionary_patches < dictionary.size) throw ValidationError("dictionary.patches must be >= dictionary.size");
    if (!(classifier_delta > 0.0)) throw ValidationError("classifier.delta must be > 0");
    if (!(modular_gamma > 0.0)) throw ValidationError("modular.gamma must be > 0");
    if (!channel_raw && !channel_lbp) throw ValidationError("at least one channel required");
    if (seeds.empty()) throw ValidationError("seeds must be non-empty");
    pyramid.validate();
  }

  /// Hash of every setting that can influence results (output.dir excluded).
  std::uint64_t fingerprint() const {
    ConfigMap m = source;
    m.erase("output.dir");
    return fnv1a64(canonical_text(m));
  }

  std::uint64_t seed_fingerprint(std::uint64_t seed) const {
    return fnv1a64("seed=" + std::to_string(seed), fingerprint());
  }
};

}  // namespace facefeat

#endif  // FACEFEAT_CONFIG_HPP
