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

// SSIM between clean hosts and their watermarked versions.

#ifndef CLMARK_FIDELITY_H_
#define CLMARK_FIDELITY_H_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "clmark/embed.h"
#include "clmark/image.h"

namespace clmark {

inline constexpr int kSsimWindow = 8;
inline constexpr double kSsimDynamicRange = 1.0;

// Mean SSIM over all 8x8 windows at stride 1 with uniform weights and
// population statistics; C1 = (0.01 L)^2, C2 = (0.03 L)^2, L = 1. Colour
// inputs are compared on luma. Images smaller than 8 px use one window
// spanning the smaller side.
double Ssim(const Image& a, const Image& b);

struct FidelityReport {
  std::string method;
  // False for compositing methods, whose items have no clean host.
  bool applicable = true;
  std::vector<std::pair<std::string, double>> items;  // (id, SSIM)
  double mean = 0.0;
  double min = 0.0;
};

// Matches watermarked ids between the two datasets by id.
FidelityReport ComputeFidelity(const Dataset& clean, const Dataset& watermarked,
                               const WatermarkManifest& manifest);
FidelityReport FidelityFromDirs(const std::filesystem::path& manifest,
                                const std::filesystem::path& clean_dir,
                                const std::filesystem::path& watermarked_dir);

std::string FidelityCsv(const FidelityReport& report);
std::string FidelityJson(const FidelityReport& report);

}  // namespace clmark

#endif  // CLMARK_FIDELITY_H_
