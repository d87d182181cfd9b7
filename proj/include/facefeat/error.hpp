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

#ifndef FACEFEAT_ERROR_HPP
#define FACEFEAT_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace facefeat {

/// Coarse error classes. The CLI reports these verbatim on stderr and maps
/// each one to a distinct exit code.
enum class ErrorCategory {
  Io,
  Format,
  Dimension,
  Validation,
  InsufficientSamples,
  Singularity,
};

inline std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Io: return "io";
    case ErrorCategory::Format: return "format";
    case ErrorCategory::Dimension: return "dimension";
    case ErrorCategory::Validation: return "validation";
    case ErrorCategory::InsufficientSamples: return "insufficient-samples";
    case ErrorCategory::Singularity: return "singularity";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorCategory::Io, w) {}
};
struct FormatError : Error {
  explicit FormatError(const std::string& w) : Error(ErrorCategory::Format, w) {}
};
struct DimensionError : Error {
  explicit DimensionError(const std::string& w) : Error(ErrorCategory::Dimension, w) {}
};
struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error(ErrorCategory::Validation, w) {}
};
struct InsufficientSamplesError : Error {
  explicit InsufficientSamplesError(const std::string& w)
      : Error(ErrorCategory::InsufficientSamples, w) {}
};
struct SingularityError : Error {
  explicit SingularityError(const std::string& w) : Error(ErrorCategory::Singularity, w) {}
};

}  // namespace facefeat

#endif  // FACEFEAT_ERROR_HPP
