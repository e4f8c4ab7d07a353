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

#include <algorithm>
#include <cmath>

#include "clmark/cltrain.h"
#include "clmark/common.h"

namespace clmark {

namespace {

constexpr double kLumaWeights[3] = {0.299, 0.587, 0.114};
constexpr int kCropAttempts = 10;

// Source index (into the input tensor) of every output sample after the
// crop, nearest-neighbour resize and flip.
std::vector<size_t> GatherIndex(const Image& img, const AugPlan& plan) {
  const int c = img.channels();
  std::vector<size_t> index(static_cast<size_t>(plan.out_height) *
                            plan.out_width * c);
  size_t k = 0;
  for (int y = 0; y < plan.out_height; ++y) {
    const int sy = plan.crop_top +
                   std::min(plan.crop_height - 1,
                            static_cast<int>(static_cast<long>(y) *
                                             plan.crop_height / plan.out_height));
    for (int x = 0; x < plan.out_width; ++x) {
      const int xx = plan.flip ? plan.out_width - 1 - x : x;
      const int sx = plan.crop_left +
                     std::min(plan.crop_width - 1,
                              static_cast<int>(static_cast<long>(xx) *
                                               plan.crop_width / plan.out_width));
      for (int ch = 0; ch < c; ++ch) index[k++] = img.tensor().index(sy, sx, ch);
    }
  }
  return index;
}

bool HasJitter(const AugPlan& plan) {
  return plan.brightness != 1.0 || plan.contrast != 1.0;
}

}  // namespace

void AugConfig::Validate() const {
  Require(crop_scale_min > 0.0 && crop_scale_min <= crop_scale_max &&
              crop_scale_max <= 1.0,
          "crop scale must satisfy 0 < min <= max <= 1");
  Require(flip_prob >= 0.0 && flip_prob <= 1.0, "flip_prob must be in [0, 1]");
  Require(grayscale_prob >= 0.0 && grayscale_prob <= 1.0,
          "grayscale_prob must be in [0, 1]");
  Require(color_jitter_strength >= 0.0 && color_jitter_strength < 1.0,
          "color jitter strength must be in [0, 1)");
}

AugConfig AugConfig::Identity() { return AugConfig{1.0, 1.0, 0.0, 0.0, 0.0}; }

AugPlan SampleAugPlan(int in_height, int in_width, int out_height,
                      int out_width, const AugConfig& cfg, uint64_t seed) {
  cfg.Validate();
  Require(in_height > 0 && in_width > 0, "cannot augment an empty image");
  AugPlan plan;
  plan.out_height = out_height > 0 ? out_height : in_height;
  plan.out_width = out_width > 0 ? out_width : in_width;
  plan.crop_height = in_height;
  plan.crop_width = in_width;

  Rng rng(seed);
  const double area = static_cast<double>(in_height) * in_width;
  const double log_lo = std::log(3.0 / 4.0), log_hi = std::log(4.0 / 3.0);
  for (int attempt = 0; attempt < kCropAttempts; ++attempt) {
    const double target =
        area * UniformRange(rng, cfg.crop_scale_min, cfg.crop_scale_max);
    const double ratio = std::exp(UniformRange(rng, log_lo, log_hi));
    const int w = static_cast<int>(std::lround(std::sqrt(target * ratio)));
    const int h = static_cast<int>(std::lround(std::sqrt(target / ratio)));
    if (w > 0 && h > 0 && w <= in_width && h <= in_height) {
      plan.crop_width = w;
      plan.crop_height = h;
      plan.crop_top = static_cast<int>(UniformIndex(rng, in_height - h + 1));
      plan.crop_left = static_cast<int>(UniformIndex(rng, in_width - w + 1));
      break;
    }
  }
  plan.flip = UniformUnit(rng) < cfg.flip_prob;
  if (cfg.color_jitter_strength > 0.0) {
    const double j = cfg.color_jitter_strength;
    plan.brightness = UniformRange(rng, 1.0 - j, 1.0 + j);
    plan.contrast = UniformRange(rng, 1.0 - j, 1.0 + j);
  }
  plan.grayscale = UniformUnit(rng) < cfg.grayscale_prob;
  return plan;
}

Image ApplyAugPlan(const Image& img, const AugPlan& plan) {
  const int c = img.channels();
  const std::vector<size_t> index = GatherIndex(img, plan);
  const auto src = img.data();
  std::vector<double> v(index.size());
  for (size_t k = 0; k < index.size(); ++k) v[k] = src[index[k]];

  if (HasJitter(plan)) {
    double mean = 0.0;
    for (double& x : v) {
      x *= plan.brightness;
      mean += x;
    }
    mean /= static_cast<double>(v.size());
    for (double& x : v) x = std::clamp(plan.contrast * (x - mean) + mean, 0.0, 1.0);
  }
  if (plan.grayscale && c == 3) {
    for (size_t p = 0; p < v.size(); p += 3) {
      const double l = kLumaWeights[0] * v[p] + kLumaWeights[1] * v[p + 1] +
                       kLumaWeights[2] * v[p + 2];
      v[p] = v[p + 1] = v[p + 2] = l;
    }
  }
  return Image(plan.out_height, plan.out_width, c, std::move(v),
               img.colorspace());
}

std::vector<double> AugPlanVjp(const Image& img, const AugPlan& plan,
                               std::span<const double> grad_out) {
  const int c = img.channels();
  const std::vector<size_t> index = GatherIndex(img, plan);
  Require(grad_out.size() == index.size(),
          "augmentation gradient has the wrong length");
  std::vector<double> g(grad_out.begin(), grad_out.end());

  if (plan.grayscale && c == 3) {
    for (size_t p = 0; p < g.size(); p += 3) {
      const double total = g[p] + g[p + 1] + g[p + 2];
      for (int ch = 0; ch < 3; ++ch) g[p + ch] = kLumaWeights[ch] * total;
    }
  }
  if (HasJitter(plan)) {
    // Recompute the pre-clamp values to know which samples passed.
    const auto src = img.data();
    std::vector<double> y(index.size());
    double mean = 0.0;
    for (size_t k = 0; k < index.size(); ++k) {
      y[k] = src[index[k]] * plan.brightness;
      mean += y[k];
    }
    mean /= static_cast<double>(y.size());
    double total = 0.0;
    for (size_t k = 0; k < g.size(); ++k) {
      const double z = plan.contrast * (y[k] - mean) + mean;
      if (z <= 0.0 || z >= 1.0) g[k] = 0.0;
      total += g[k];
    }
    const double shared = (1.0 - plan.contrast) * total / static_cast<double>(g.size());
    for (double& gk : g) gk = plan.brightness * (plan.contrast * gk + shared);
  }
  std::vector<double> grad_in(img.size(), 0.0);
  for (size_t k = 0; k < index.size(); ++k) grad_in[index[k]] += g[k];
  return grad_in;
}

Image Augment(const Image& img, const AugConfig& cfg, uint64_t seed,
              int out_height, int out_width) {
  return ApplyAugPlan(
      img, SampleAugPlan(img.height(), img.width(), out_height, out_width, cfg,
                         seed));
}

}  // namespace clmark
