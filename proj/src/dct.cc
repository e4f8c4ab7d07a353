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

#include <cmath>
#include <numbers>
#include <vector>

#include "clmark/common.h"
#include "clmark/image.h"

namespace clmark {

namespace {

// basis[u * n + x] = alpha(u) cos(pi (2x + 1) u / 2n), orthonormal rows.
std::vector<double> DctBasis(int n) {
  std::vector<double> basis(static_cast<size_t>(n) * n);
  for (int u = 0; u < n; ++u) {
    const double alpha = u == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int x = 0; x < n; ++x)
      basis[u * n + x] =
          alpha * std::cos(std::numbers::pi * (2 * x + 1) * u / (2.0 * n));
  }
  return basis;
}

// Applies out = B * block * B^T (forward) or B^T * block * B (inverse) to
// every block of every masked channel.
Tensor3 Transform(const Tensor3& in, const DctBlockPlan& plan, bool inverse) {
  const int n = plan.block_size;
  const std::vector<double> basis = DctBasis(n);
  auto coef = [&](int row, int col) {
    return inverse ? basis[col * n + row] : basis[row * n + col];
  };
  Tensor3 out = in;
  std::vector<double> block(n * n), tmp(n * n);
  for (int c : plan.channel_mask) {
    for (int by = 0; by < in.height; by += n) {
      for (int bx = 0; bx < in.width; bx += n) {
        for (int y = 0; y < n; ++y)
          for (int x = 0; x < n; ++x) block[y * n + x] = in.at(by + y, bx + x, c);
        // Rows: tmp = block * M^T.
        for (int y = 0; y < n; ++y)
          for (int v = 0; v < n; ++v) {
            double acc = 0.0;
            for (int x = 0; x < n; ++x) acc += coef(v, x) * block[y * n + x];
            tmp[y * n + v] = acc;
          }
        // Columns: out = M * tmp.
        for (int u = 0; u < n; ++u)
          for (int v = 0; v < n; ++v) {
            double acc = 0.0;
            for (int y = 0; y < n; ++y) acc += coef(u, y) * tmp[y * n + v];
            out.at(by + u, bx + v, c) = acc;
          }
      }
    }
  }
  return out;
}

}  // namespace

void ValidatePlan(const DctBlockPlan& plan, int height, int width,
                  int channels) {
  Require(plan.block_size > 0, "DCT block size must be positive");
  Require(!plan.channel_mask.empty(), "DCT channel mask must be non-empty");
  for (int c : plan.channel_mask)
    Require(c >= 0 && c < channels,
            "DCT channel mask index " + std::to_string(c) + " out of range");
  Require(height % plan.block_size == 0 && width % plan.block_size == 0,
          "image " + std::to_string(height) + "x" + std::to_string(width) +
              " is not divisible by DCT block size " +
              std::to_string(plan.block_size) + "; pad first");
}

Tensor3 Dct2Blockwise(const Tensor3& img, const DctBlockPlan& plan) {
  ValidatePlan(plan, img.height, img.width, img.channels);
  return Transform(img, plan, /*inverse=*/false);
}

Tensor3 Dct2Blockwise(const Image& img, const DctBlockPlan& plan) {
  return Dct2Blockwise(img.tensor(), plan);
}

Tensor3 Idct2Blockwise(const Tensor3& coeffs, const DctBlockPlan& plan) {
  Require(coeffs.data.size() == static_cast<size_t>(coeffs.height) *
                                    coeffs.width * coeffs.channels,
          "coefficient tensor length does not match its shape");
  ValidatePlan(plan, coeffs.height, coeffs.width, coeffs.channels);
  return Transform(coeffs, plan, /*inverse=*/true);
}

}  // namespace clmark
