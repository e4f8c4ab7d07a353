// Copyright 2026 The clmark Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Versioned little-endian container shared by encoder, probe and generator
// files:
//
//   "CLMK" | u16 version | u16 kind | kind-specific header | payload
//
// Integers are little-endian u32/u64, reals are IEEE-754 binary64.

#ifndef CLMARK_SRC_BINFMT_H_
#define CLMARK_SRC_BINFMT_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>

#include "clmark/common.h"

namespace clmark::binfmt {

inline constexpr char kMagic[4] = {'C', 'L', 'M', 'K'};
inline constexpr uint16_t kVersion = 1;

enum class Kind : uint16_t { kEncoder = 1, kProbe = 2, kGenerator = 3 };

class Writer {
 public:
  Writer(Kind kind) {
    out_.append(kMagic, 4);
    U16(kVersion);
    U16(static_cast<uint16_t>(kind));
  }
  void U16(uint16_t v) { Le(v); }
  void U32(uint32_t v) { Le(v); }
  void U64(uint64_t v) { Le(v); }
  void F64(double v) { Le(std::bit_cast<uint64_t>(v)); }
  void F64s(std::span<const double> values) {
    U64(values.size());
    for (double v : values) F64(v);
  }
  void Str(std::string_view s) {
    U32(static_cast<uint32_t>(s.size()));
    out_.append(s);
  }
  const std::string& bytes() const { return out_; }

 private:
  template <typename T>
  void Le(T v) {
    for (size_t i = 0; i < sizeof(T); ++i)
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class Reader {
 public:
  Reader(std::string_view bytes, Kind kind, std::string name)
      : bytes_(bytes), name_(std::move(name)) {
    if (bytes_.size() < 8 || std::memcmp(bytes_.data(), kMagic, 4) != 0)
      Corrupt("bad magic");
    pos_ = 4;
    if (U16() != kVersion) Corrupt("unsupported version");
    if (U16() != static_cast<uint16_t>(kind)) Corrupt("wrong file kind");
  }
  uint16_t U16() { return Le<uint16_t>(); }
  uint32_t U32() { return Le<uint32_t>(); }
  uint64_t U64() { return Le<uint64_t>(); }
  double F64() { return std::bit_cast<double>(Le<uint64_t>()); }
  std::vector<double> F64s() {
    const uint64_t n = U64();
    if (n > (bytes_.size() - pos_) / 8) Corrupt("truncated array");
    std::vector<double> out(n);
    for (auto& v : out) v = F64();
    return out;
  }
  std::string Str() {
    const uint32_t n = U32();
    Need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  void ExpectEnd() {
    if (pos_ != bytes_.size()) Corrupt("trailing bytes");
  }
  [[noreturn]] void Corrupt(const std::string& why) const {
    Fail(ErrorKind::kIo, name_ + ": corrupt model file (" + why + ")");
  }

 private:
  void Need(size_t n) {
    if (bytes_.size() - pos_ < n) Corrupt("truncated");
  }
  template <typename T>
  T Le() {
    Need(sizeof(T));
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    pos_ += sizeof(T);
    return v;
  }
  std::string_view bytes_;
  std::string name_;
  size_t pos_ = 0;
};

inline std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

// Writes to a sibling temporary and renames, so readers never observe a
// partially written file.
inline void WriteFile(const std::filesystem::path& path,
                      std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorKind::kIo, "cannot create " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) Fail(ErrorKind::kIo, "write failed: " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot rename into " + path.string());
}

}  // namespace clmark::binfmt

#endif  // CLMARK_SRC_BINFMT_H_
