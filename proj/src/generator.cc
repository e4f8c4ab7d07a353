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

#include "clmark/generator.h"

#include <algorithm>
#include <cmath>

#include "binfmt.h"
#include "clmark/common.h"

namespace clmark {

TriggerGenerator TriggerGenerator::Zero(int height, int width, int channels,
                                        double linf_bound) {
  TriggerGenerator gen;
  gen.height = height;
  gen.width = width;
  gen.channels = channels;
  gen.linf_bound = linf_bound;
  gen.delta.assign(static_cast<size_t>(height) * width * channels, 0.0);
  gen.Validate();
  return gen;
}

void TriggerGenerator::Validate() const {
  Require(height > 0 && width > 0 && (channels == 1 || channels == 3),
          "generator shape must be positive with 1 or 3 channels");
  Require(linf_bound > 0.0 && std::isfinite(linf_bound),
          "generator L-inf bound must be positive");
  Require(delta.size() == static_cast<size_t>(height) * width * channels,
          "generator delta length does not match its shape");
  Require(std::all_of(delta.begin(), delta.end(),
                      [](double v) { return std::isfinite(v); }),
          "generator delta must be finite");
}

Image ApplyGenerator(const TriggerGenerator& gen, const Image& img) {
  Require(img.height() == gen.height && img.width() == gen.width &&
              img.channels() == gen.channels,
          "generator shape " + std::to_string(gen.height) + "x" +
              std::to_string(gen.width) + "x" + std::to_string(gen.channels) +
              " does not match image");
  const auto src = img.data();
  std::vector<double> out(src.size());
  for (size_t i = 0; i < src.size(); ++i)
    out[i] = src[i] + std::clamp(gen.delta[i], -gen.linf_bound, gen.linf_bound);
  return Image(img.height(), img.width(), img.channels(), std::move(out),
               img.colorspace());
}

std::vector<double> GeneratorPassMask(const TriggerGenerator& gen,
                                      const Image& img) {
  const auto src = img.data();
  std::vector<double> mask(src.size(), 0.0);
  for (size_t i = 0; i < src.size(); ++i) {
    const double d = gen.delta[i];
    if (std::abs(d) > gen.linf_bound) continue;
    const double v = src[i] + d;
    if (v > 0.0 && v < 1.0) mask[i] = 1.0;
  }
  return mask;
}

std::string SerializeGenerator(const TriggerGenerator& gen) {
  gen.Validate();
  binfmt::Writer w(binfmt::Kind::kGenerator);
  w.U32(0);  // kind: additive perturbation
  w.U32(static_cast<uint32_t>(gen.height));
  w.U32(static_cast<uint32_t>(gen.width));
  w.U32(static_cast<uint32_t>(gen.channels));
  w.F64(gen.linf_bound);
  w.F64s(gen.delta);
  return w.bytes();
}

TriggerGenerator DeserializeGenerator(std::string_view bytes,
                                      const std::string& name) {
  binfmt::Reader r(bytes, binfmt::Kind::kGenerator, name);
  if (r.U32() != 0) r.Corrupt("unknown generator kind");
  TriggerGenerator gen;
  gen.height = static_cast<int>(r.U32());
  gen.width = static_cast<int>(r.U32());
  gen.channels = static_cast<int>(r.U32());
  gen.linf_bound = r.F64();
  gen.delta = r.F64s();
  r.ExpectEnd();
  try {
    gen.Validate();
  } catch (const Error& e) {
    r.Corrupt(e.what());
  }
  return gen;
}

void SaveGenerator(const TriggerGenerator& gen,
                   const std::filesystem::path& path) {
  binfmt::WriteFile(path, SerializeGenerator(gen));
}

TriggerGenerator LoadGenerator(const std::filesystem::path& path) {
  return DeserializeGenerator(binfmt::ReadFile(path), path.string());
}

}  // namespace clmark
