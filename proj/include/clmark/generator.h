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

#ifndef CLMARK_GENERATOR_H_
#define CLMARK_GENERATOR_H_

#include <filesystem>
#include <string>
#include <vector>

#include "clmark/image.h"

namespace clmark {

// Bounded additive trigger: g(x) = clamp(x + clamp(delta, -eps, eps), 0, 1).
// `delta` has the layout of the images it applies to.
struct TriggerGenerator {
  int height = 0;
  int width = 0;
  int channels = 0;
  double linf_bound = 0.0;
  std::vector<double> delta;

  static TriggerGenerator Zero(int height, int width, int channels,
                               double linf_bound);
  void Validate() const;
  friend bool operator==(const TriggerGenerator&,
                         const TriggerGenerator&) = default;
};

Image ApplyGenerator(const TriggerGenerator& gen, const Image& img);

// d g(x) / d delta_i: 1 where neither clamp is active, else 0. The delta
// clamp counts as inactive on its boundary so projected ascent can leave it.
std::vector<double> GeneratorPassMask(const TriggerGenerator& gen,
                                      const Image& img);

std::string SerializeGenerator(const TriggerGenerator& gen);
TriggerGenerator DeserializeGenerator(std::string_view bytes,
                                      const std::string& name);
void SaveGenerator(const TriggerGenerator& gen,
                   const std::filesystem::path& path);
TriggerGenerator LoadGenerator(const std::filesystem::path& path);

}  // namespace clmark

#endif  // CLMARK_GENERATOR_H_
