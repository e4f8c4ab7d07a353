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

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "clmark/common.h"
#include "clmark/embed.h"

namespace clmark {

namespace {

constexpr int kToyClasses = 4;
constexpr double kPixelNoise = 0.02;

using Rgb = std::array<double, 3>;

constexpr std::array<Rgb, kToyClasses> kShapeColors = {{
    {0.85, 0.20, 0.20},
    {0.20, 0.80, 0.30},
    {0.25, 0.35, 0.90},
    {0.90, 0.80, 0.20},
}};

// Signed inside test for shape `kind` centred at (cx, cy) with radius r.
bool InsideShape(int kind, double x, double y, double cx, double cy, double r) {
  const double dx = x - cx, dy = y - cy;
  switch (kind) {
    case 0:  // disk
      return dx * dx + dy * dy <= r * r;
    case 1:  // square
      return std::abs(dx) <= r * 0.85 && std::abs(dy) <= r * 0.85;
    case 2:  // upward triangle
      return dy <= r * 0.8 && dy >= -r && std::abs(dx) <= (dy + r) * 0.55;
    default:  // plus sign
      return (std::abs(dx) <= r * 0.3 && std::abs(dy) <= r) ||
             (std::abs(dy) <= r * 0.3 && std::abs(dx) <= r);
  }
}

Image MakeShape(int label, int size, Rng& rng) {
  Image img(size, size, 3);
  const double s = size / 16.0;
  Rgb base;
  for (double& v : base) v = UniformRange(rng, 0.1, 0.4);
  Rgb blob;
  for (double& v : blob) v = UniformRange(rng, -0.15, 0.35);
  const double bx = UniformRange(rng, 0, size), by = UniformRange(rng, 0, size);
  const double bs = UniformRange(rng, 2.0, 5.0) * s;
  const double r = UniformRange(rng, 3.0, 5.0) * s;
  const double cx = UniformRange(rng, 5.0 * s, size - 5.0 * s);
  const double cy = UniformRange(rng, 5.0 * s, size - 5.0 * s);
  Rgb color = kShapeColors[label];
  for (double& v : color) v += UniformRange(rng, -0.08, 0.08);

  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      const double g = std::exp(-((px - bx) * (px - bx) + (py - by) * (py - by)) /
                                (2.0 * bs * bs));
      const bool in = InsideShape(label, px, py, cx, cy, r);
      for (int c = 0; c < 3; ++c) {
        const double v = in ? color[c] : base[c] + g * blob[c];
        img.set(y, x, c, v + kPixelNoise * StandardNormal(rng));
      }
    }
  }
  return img;
}

Image MakeStripes(int label, int size, Rng& rng) {
  Image img(size, size, 3);
  const double angle = label * std::numbers::pi / 4.0 + UniformRange(rng, -0.15, 0.15);
  // Long periods and a narrow phase range keep orientation linearly
  // decodable from pixels.
  const double period = UniformRange(rng, 7.0, 9.0) * size / 16.0;
  const double phase = UniformRange(rng, 0.0, 0.5 * std::numbers::pi);
  Rgb a, b;
  for (double& v : a) v = UniformRange(rng, 0.05, 0.45);
  for (double& v : b) v = UniformRange(rng, 0.55, 0.95);
  const double ux = std::cos(angle), uy = std::sin(angle);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double t = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi *
                                                (x * ux + y * uy) / period +
                                            phase);
      for (int c = 0; c < 3; ++c)
        img.set(y, x, c, a[c] + t * (b[c] - a[c]) + kPixelNoise * StandardNormal(rng));
    }
  }
  return img;
}

}  // namespace

Dataset MakeToyDataset(ToyFamily family, int n, uint64_t seed, int size) {
  Require(n >= 0, "toy dataset size must be non-negative");
  Require(size >= 8, "toy images must be at least 8 px");
  Dataset d;
  d.manifest.class_names =
      family == ToyFamily::kShapes
          ? std::vector<std::string>{"disk", "square", "triangle", "plus"}
          : std::vector<std::string>{"horizontal", "diagonal", "vertical",
                                     "antidiagonal"};
  const std::string prefix = family == ToyFamily::kShapes ? "shape_" : "stripe_";
  d.images.reserve(n);
  for (int i = 0; i < n; ++i) {
    const int label = i % kToyClasses;
    Rng rng(DeriveSeed(seed, static_cast<uint64_t>(family), i));
    // Snapped to the 8-bit grid so in-memory images equal their PNG copy.
    d.images.push_back(SnapTo8Bit(family == ToyFamily::kShapes
                                      ? MakeShape(label, size, rng)
                                      : MakeStripes(label, size, rng)));
    char id[32];
    std::snprintf(id, sizeof(id), "%s%06d", prefix.c_str(), i);
    d.manifest.items.push_back({id, std::string(id) + ".png", label});
  }
  d.manifest.source_hash = DatasetSourceHash(d);
  d.manifest.created_at = ArtifactTimestamp();
  return d;
}

}  // namespace clmark
