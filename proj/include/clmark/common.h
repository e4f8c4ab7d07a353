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

#ifndef CLMARK_COMMON_H_
#define CLMARK_COMMON_H_

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace clmark {

enum class ErrorKind {
  kInvalidInput,
  kIo,
  kCapacity,
  kUnsupportedMode,
  kTransport,
  kProtocol,
  kCapability,
  kStartup,
};

std::string_view ErrorKindName(ErrorKind kind);

// All toolkit failures are reported through this one exception type; the
// kind lets callers (and the CLI) map failures without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void Require(bool condition, const std::string& message) {
  if (!condition) Fail(ErrorKind::kInvalidInput, message);
}

// Mixes a base seed with a stream tag so independent consumers (views,
// epochs, probe batches) never share a random sequence.
uint64_t DeriveSeed(uint64_t seed, uint64_t stream);
uint64_t DeriveSeed(uint64_t seed, uint64_t a, uint64_t b);

using Rng = std::mt19937_64;

// Uniform in [0, 1) with 53 random bits; bit-stable across standard
// libraries, unlike std::uniform_real_distribution.
inline double UniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double UniformRange(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * UniformUnit(rng);
}

// Uniform integer in [0, n).
uint64_t UniformIndex(Rng& rng, uint64_t n);

double StandardNormal(Rng& rng);

template <typename T>
void Shuffle(std::span<T> items, Rng& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    size_t j = UniformIndex(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

std::string Sha256Hex(std::string_view bytes);

}  // namespace clmark

#endif  // CLMARK_COMMON_H_
