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

// Binary container for features and fitted models.
//
//   magic    "FCV1"
//   u16      version (currently 1)
//   u32      section count
//   section* u16 name length, name bytes (UTF-8), u8 type, payload
//
// Payloads by type:
//   0 matrix  u32 rows, u32 cols, rows*cols float32, column-major
//   1 text    u32 byte length, bytes
//   2 int32   u32 count, count int32
//
// Every integer and float is little-endian regardless of host order.

#ifndef FACEFEAT_CONTAINER_HPP
#define FACEFEAT_CONTAINER_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "facefeat/error.hpp"

namespace facefeat {

inline constexpr char kContainerMagic[4] = {'F', 'C', 'V', '1'};
inline constexpr std::uint16_t kContainerVersion = 1;

class Container {
 public:
  using FloatMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic>;
  using Payload = std::variant<FloatMatrix, std::string, std::vector<std::int32_t>>;

  struct Section {
    std::string name;
    Payload payload;
  };

  void set_matrix(const std::string& name, const Eigen::MatrixXd& m) { set(name, FloatMatrix(m.cast<float>())); }
  void set_vector(const std::string& name, const Eigen::VectorXd& v) { set_matrix(name, Eigen::MatrixXd(v)); }
  void set_text(const std::string& name, std::string text) { set(name, std::move(text)); }
  void set_ints(const std::string& name, std::vector<std::int32_t> v) { set(name, std::move(v)); }

  bool has(std::string_view name) const { return find(name) != nullptr; }

  const FloatMatrix& matrix_f32(std::string_view name) const { return get<FloatMatrix>(name, "matrix"); }
  Eigen::MatrixXd matrix(std::string_view name) const { return matrix_f32(name).cast<double>(); }
  Eigen::VectorXd vector(std::string_view name) const {
    const auto& m = matrix_f32(name);
    if (m.cols() != 1) throw FormatError("section '" + std::string(name) + "' is not a column vector");
    return m.col(0).cast<double>();
  }
  const std::string& text(std::string_view name) const { return get<std::string>(name, "text"); }
  const std::vector<std::int32_t>& ints(std::string_view name) const {
    return get<std::vector<std::int32_t>>(name, "int32");
  }

  const std::vector<Section>& sections() const noexcept { return sections_; }

  std::vector<unsigned char> serialize() const {
    std::vector<unsigned char> out(std::begin(kContainerMagic), std::end(kContainerMagic));
    put_u16(out, kContainerVersion);
    put_u32(out, checked_u32(sections_.size()));
    for (const auto& s : sections_) {
      if (s.name.size() > std::numeric_limits<std::uint16_t>::max()) throw ValidationError("section name too long");
      put_u16(out, static_cast<std::uint16_t>(s.name.size()));
      out.insert(out.end(), s.name.begin(), s.name.end());
      if (const auto* m = std::get_if<FloatMatrix>(&s.payload)) {
        out.push_back(0);
        put_u32(out, checked_u32(static_cast<std::size_t>(m->rows())));
        put_u32(out, checked_u32(static_cast<std::size_t>(m->cols())));
        for (Eigen::Index i = 0; i < m->size(); ++i) put_u32(out, std::bit_cast<std::uint32_t>(m->data()[i]));
      } else if (const auto* t = std::get_if<std::string>(&s.payload)) {
        out.push_back(1);
        put_u32(out, checked_u32(t->size()));
        out.insert(out.end(), t->begin(), t->end());
      } else {
        const auto& v = std::get<std::vector<std::int32_t>>(s.payload);
        out.push_back(2);
        put_u32(out, checked_u32(v.size()));
        for (auto x : v) put_u32(out, static_cast<std::uint32_t>(x));
      }
    }
    return out;
  }

  static Container deserialize(const std::vector<unsigned char>& bytes) {
    Cursor in{bytes};
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kContainerMagic, 4) != 0)
      throw FormatError("not an FCV1 container (bad magic)");
    in.pos = 4;
    const auto version = in.u16();
    if (version != kContainerVersion) throw FormatError("unsupported container version " + std::to_string(version));
    const auto count = in.u32();
    Container c;
    for (std::uint32_t s = 0; s < count; ++s) {
      const auto name_len = in.u16();
      std::string name = in.bytes(name_len);
      const auto type = in.u8();
      switch (type) {
        case 0: {
          const auto rows = in.u32();
          const auto cols = in.u32();
          in.require(static_cast<std::uint64_t>(rows) * cols * 4);
          FloatMatrix m(rows, cols);
          for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std::bit_cast<float>(in.u32());
          c.set(name, std::move(m));
          break;
        }
        case 1: {
          const auto len = in.u32();
          c.set(name, in.bytes(len));
          break;
        }
        case 2: {
          const auto len = in.u32();
          in.require(static_cast<std::uint64_t>(len) * 4);
          std::vector<std::int32_t> v(len);
          for (auto& x : v) x = static_cast<std::int32_t>(in.u32());
          c.set(name, std::move(v));
          break;
        }
        default:
          throw FormatError("unknown section type " + std::to_string(type) + " for '" + name + "'");
      }
    }
    if (in.pos != bytes.size()) throw FormatError("trailing bytes after last section");
    return c;
  }

  void save(const std::filesystem::path& path) const {
    const auto bytes = serialize();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write container '" + path.string() + "'");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed for '" + path.string() + "'");
  }

  static Container load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open container '" + path.string() + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    try {
      return deserialize(bytes);
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }

 private:
  struct Cursor {
    const std::vector<unsigned char>& data;
    std::size_t pos = 0;

    void require(std::uint64_t n) const {
      if (n > data.size() - pos) throw FormatError("truncated container");
    }
    std::uint8_t u8() {
      require(1);
      return data[pos++];
    }
    std::uint16_t u16() {
      require(2);
      const auto v = static_cast<std::uint16_t>(data[pos] | (data[pos + 1] << 8));
      pos += 2;
      return v;
    }
    std::uint32_t u32() {
      require(4);
      std::uint32_t v = 0;
      for (int i = 3; i >= 0; --i) v = (v << 8) | data[pos + static_cast<std::size_t>(i)];
      pos += 4;
      return v;
    }
    std::string bytes(std::size_t n) {
      require(n);
      std::string s(reinterpret_cast<const char*>(data.data() + pos), n);
      pos += n;
      return s;
    }
  };

  static std::uint32_t checked_u32(std::size_t v) {
    if (v > std::numeric_limits<std::uint32_t>::max()) throw ValidationError("dimension exceeds u32 range");
    return static_cast<std::uint32_t>(v);
  }
  static void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>(v >> 8));
  }
  static void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
  }

  void set(const std::string& name, Payload p) {
    for (auto& s : sections_) {
      if (s.name == name) {
        s.payload = std::move(p);
        return;
      }
    }
    sections_.push_back({name, std::move(p)});
  }

  const Section* find(std::string_view name) const {
    for (const auto& s : sections_)
      if (s.name == name) return &s;
    return nullptr;
  }

  template <typename T>
  const T& get(std::string_view name, const char* kind) const {
    const Section* s = find(name);
    if (!s) throw FormatError("container has no section '" + std::string(name) + "'");
    const T* v = std::get_if<T>(&s->payload);
    if (!v) throw FormatError("section '" + std::string(name) + "' is not of type " + kind);
    return *v;
  }

  std::vector<Section> sections_;
};

}  // namespace facefeat

#endif  // FACEFEAT_CONTAINER_HPP
