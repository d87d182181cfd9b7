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

#ifndef FACEFEAT_DATASET_HPP
#define FACEFEAT_DATASET_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "facefeat/error.hpp"
#include "facefeat/random.hpp"

namespace facefeat {

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory
  int label = 0;
  std::string subject;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Labeled image list. Labels form the contiguous range [0, class_count).
class DatasetManifest {
 public:
  DatasetManifest() = default;
  explicit DatasetManifest(std::vector<ManifestEntry> entries, std::filesystem::path root = {})
      : entries_(std::move(entries)), root_(std::move(root)) {
    validate();
  }

  const std::vector<ManifestEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  int class_count() const noexcept { return class_count_; }
  const std::filesystem::path& root() const noexcept { return root_; }

  std::filesystem::path resolve(std::size_t i) const { return root_ / entries_.at(i).path; }

  std::vector<int> labels() const {
    std::vector<int> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.label);
    return out;
  }

 private:
  void validate() {
    std::set<std::string> paths;
    std::set<int> labels;
    for (const auto& e : entries_) {
      if (e.label < 0) throw ValidationError("negative class label for '" + e.path + "'");
      if (!paths.insert(e.path).second) throw ValidationError("duplicate manifest path '" + e.path + "'");
      labels.insert(e.label);
    }
    class_count_ = static_cast<int>(labels.size());
    if (!labels.empty() && *labels.rbegin() != class_count_ - 1)
      throw ValidationError("class labels must form a contiguous range [0, c)");
  }

  std::vector<ManifestEntry> entries_;
  std::filesystem::path root_;
  int class_count_ = 0;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace detail

/// Parses `relative_path,label,subject` records. Blank lines and lines
/// starting with '#' are skipped; the subject column may be omitted.
inline DatasetManifest parse_manifest(std::istream& in, const std::filesystem::path& root = {}) {
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(t);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(detail::trim(field));
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty())
      throw FormatError("manifest line " + std::to_string(lineno) + ": expected path,label[,subject]");
    ManifestEntry e;
    e.path = fields[0];
    try {
      std::size_t used = 0;
      e.label = std::stoi(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw FormatError("manifest line " + std::to_string(lineno) + ": bad label '" + fields[1] + "'");
    }
    if (fields.size() == 3) e.subject = fields[2];
    entries.push_back(std::move(e));
  }
  return DatasetManifest(std::move(entries), root);
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open manifest '" + path.string() + "'");
  return parse_manifest(f, path.parent_path());
}

inline void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write manifest '" + path.string() + "'");
  f << "# relative_path,label,subject\n";
  for (const auto& e : m.entries()) f << e.path << ',' << e.label << ',' << e.subject << '\n';
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

struct SplitSpec {
  std::uint64_t seed = 0;
  std::size_t train_per_class = 1;
  std::optional<std::size_t> test_per_class;  // nullopt means "rest"
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per-class random split. Within each class the manifest order is shuffled
/// with the seed; the first train_per_class go to train and the next
/// test_per_class (or all remaining) to test. Output indices are sorted.
inline Split make_split(const DatasetManifest& manifest, const SplitSpec& spec) {
  if (spec.train_per_class < 1) throw ValidationError("train-per-class must be >= 1");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(manifest.class_count()));
  for (std::size_t i = 0; i < manifest.size(); ++i)
    by_class[static_cast<std::size_t>(manifest.entries()[i].label)].push_back(i);

  Rng rng(derive_seed(spec.seed, "split"));
  Split out;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    const std::size_t need = spec.train_per_class + spec.test_per_class.value_or(0);
    if (members.size() < need || (!spec.test_per_class && members.size() <= spec.train_per_class)) {
      throw InsufficientSamplesError("class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                                     " samples, split needs " +
                                     (spec.test_per_class ? std::to_string(need)
                                                          : "more than " + std::to_string(spec.train_per_class)));
    }
    rng.shuffle(members);
    const std::size_t test_n = spec.test_per_class.value_or(members.size() - spec.train_per_class);
    out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(spec.train_per_class));
    out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(spec.train_per_class),
                    members.begin() + static_cast<std::ptrdiff_t>(spec.train_per_class + test_n));
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

/// Split file: one `index,role` line per selected manifest entry.
inline void write_split(const Split& split, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write split '" + path.string() + "'");
  for (auto i : split.train) f << i << ",train\n";
  for (auto i : split.test) f << i << ",test\n";
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

inline Split read_split(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open split '" + path.string() + "'");
  Split out;
  std::string line;
  while (std::getline(f, line)) {
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto comma = t.find(',');
    if (comma == std::string::npos) throw FormatError("split line '" + t + "' lacks a role");
    const std::size_t idx = std::stoul(t.substr(0, comma));
    const std::string role = detail::trim(t.substr(comma + 1));
    if (role == "train") out.train.push_back(idx);
    else if (role == "test") out.test.push_back(idx);
    else throw FormatError("unknown split role '" + role + "'");
  }
  return out;
}

}  // namespace facefeat

#endif  // FACEFEAT_DATASET_HPP
