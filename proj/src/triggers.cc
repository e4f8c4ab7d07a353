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

#include "clmark/triggers.h"

#include <algorithm>
#include <cmath>

#include "clmark/common.h"

namespace clmark {

bool Rect::Contains(const Rect& other) const {
  if (other.empty()) return true;
  return other.x >= x && other.y >= y && other.x + other.w <= x + w &&
         other.y + other.h <= y + h;
}

bool Rect::Overlaps(const Rect& other) const {
  if (empty() || other.empty()) return false;
  return x < other.x + other.w && other.x < x + w && y < other.y + other.h &&
         other.y < y + h;
}

Image DefaultPatch(int image_height, int image_width, int channels) {
  const int side = std::max(
      2, static_cast<int>(std::lround(3.0 * std::min(image_height, image_width) / 8.0)));
  const int cell = std::max(1, side / 3);
  Image patch(side, side, channels);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x)
      for (int c = 0; c < channels; ++c)
        patch.set(y, x, c, (x / cell + y / cell) % 2 == 0 ? 1.0 : 0.0);
  return patch;
}

PixelPos DefaultPatchPosition(int image_height, int image_width,
                              const Image& patch) {
  return {std::max(0, image_width - patch.width()),
          std::max(0, image_height - patch.height())};
}

Image ApplyPatchTrigger(const Image& img, const Image& patch,
                        const PatchPlacement& placement) {
  if (patch.empty() || patch.height() == 0 || patch.width() == 0) return img;
  Require(patch.channels() == img.channels(),
          "patch channel count does not match image");
  Require(patch.height() <= img.height() && patch.width() <= img.width(),
          "patch larger than image");
  PixelPos pos;
  if (const auto* fixed = std::get_if<PixelPos>(&placement)) {
    pos = *fixed;
  } else {
    Rng rng(std::get<RandomPlacement>(placement).seed);
    pos.x = static_cast<int>(
        UniformIndex(rng, img.width() - patch.width() + 1));
    pos.y = static_cast<int>(
        UniformIndex(rng, img.height() - patch.height() + 1));
  }
  Require(pos.x >= 0 && pos.y >= 0 && pos.x + patch.width() <= img.width() &&
              pos.y + patch.height() <= img.height(),
          "patch at (" + std::to_string(pos.x) + "," + std::to_string(pos.y) +
              ") is out of bounds");
  Image out = img;
  out.Paste(patch, pos.y, pos.x);
  return out;
}

std::vector<DctBand> DefaultCtrlBands(int block_size) {
  const int lo = std::max(1, block_size / 8);
  return {{lo, lo}, {std::min(block_size - 1, 2 * lo), std::min(block_size - 1, 2 * lo)}};
}

DctBlockPlan DefaultCtrlPlan() { return DctBlockPlan{8, {1, 2}}; }

Tensor3 PerturbChromaBands(const Tensor3& ycc,
                           const std::vector<DctBand>& bands, double magnitude,
                           const DctBlockPlan& plan) {
  Require(ycc.channels == 3, "chroma perturbation needs a 3-channel tensor");
  for (int c : plan.channel_mask)
    Require(c == 1 || c == 2, "CTRL only perturbs chroma channels (1, 2)");
  const int n = plan.block_size;
  for (const auto& [u, v] : bands)
    Require(u >= 0 && v >= 0 && u < n && v < n,
            "DCT band (" + std::to_string(u) + "," + std::to_string(v) +
                ") outside block size " + std::to_string(n));
  Tensor3 coeffs = Dct2Blockwise(ycc, plan);
  for (int c : plan.channel_mask)
    for (int by = 0; by < coeffs.height; by += n)
      for (int bx = 0; bx < coeffs.width; bx += n)
        for (const auto& [u, v] : bands) coeffs.at(by + u, bx + v, c) += magnitude;
  return Idct2Blockwise(coeffs, plan);
}

Image ApplyCtrlTrigger(const Image& img, const std::vector<DctBand>& bands,
                       double magnitude, const DctBlockPlan& plan,
                       YCbCrRange range) {
  Require(img.colorspace() == ColorSpace::kRgb && img.channels() == 3,
          "CTRL trigger needs an RGB image");
  Require(std::isfinite(magnitude), "CTRL magnitude must be finite");
  const Image padded = PadToMultiple(img, plan.block_size);
  const Tensor3 ycc = RgbToYCbCrRaw(padded.tensor(), range);
  const Tensor3 rgb =
      YCbCrToRgbRaw(PerturbChromaBands(ycc, bands, magnitude, plan), range);
  return Image::FromTensor(rgb).Crop(0, 0, img.height(), img.width());
}

Image ComposePoisonedEncoder(const Image& target, const Image& reference,
                             ConcatLayout layout) {
  Require(target.SameShape(reference),
          "PoisonedEncoder inputs must have equal dimensions");
  Require(!target.empty(), "PoisonedEncoder inputs must be non-empty");
  const int h = target.height(), w = target.width();
  const bool vertical =
      layout == ConcatLayout::kTopBottom || layout == ConcatLayout::kBottomTop;
  Image canvas(vertical ? 2 * h : h, vertical ? w : 2 * w, target.channels(),
               target.colorspace());
  switch (layout) {
    case ConcatLayout::kTopBottom:
      canvas.Paste(target, 0, 0);
      canvas.Paste(reference, h, 0);
      break;
    case ConcatLayout::kBottomTop:
      canvas.Paste(reference, 0, 0);
      canvas.Paste(target, h, 0);
      break;
    case ConcatLayout::kLeftRight:
      canvas.Paste(target, 0, 0);
      canvas.Paste(reference, 0, w);
      break;
    case ConcatLayout::kRightLeft:
      canvas.Paste(reference, 0, 0);
      canvas.Paste(target, 0, w);
      break;
  }
  return canvas;
}

void LayoutSpec::Validate() const {
  Require(canvas_w > 0 && canvas_h > 0, "layout canvas must be positive");
  const Rect canvas{0, 0, canvas_w, canvas_h};
  Require(canvas.Contains(ref_rect), "reference rect outside canvas");
  Require(canvas.Contains(shadow_rect), "shadow rect outside canvas");
  Require(!ref_rect.Overlaps(shadow_rect),
          "reference and shadow rects overlap");
  Require(shadow_rect.Contains(trigger_rect),
          "trigger rect must lie inside the shadow rect");
  Require(unit_len >= 0, "layout unit length must be non-negative");
}

std::pair<double, double> RemainderCentroid(int canvas_w, int canvas_h,
                                            const Rect& ref) {
  const double canvas_area = static_cast<double>(canvas_w) * canvas_h;
  const double ref_area = static_cast<double>(ref.w) * ref.h;
  Require(canvas_area > ref_area, "reference covers the whole canvas");
  const double cx = (canvas_area * canvas_w / 2.0 - ref_area * (ref.x + ref.w / 2.0)) /
                    (canvas_area - ref_area);
  const double cy = (canvas_area * canvas_h / 2.0 - ref_area * (ref.y + ref.h / 2.0)) /
                    (canvas_area - ref_area);
  return {cx, cy};
}

Composite ComposeCorruptEncoder(const Image& reference_obj,
                                const Image& trigger, const Image& background,
                                uint64_t seed) {
  Require(!reference_obj.empty() && !background.empty(),
          "CorruptEncoder inputs must be non-empty");
  Require(reference_obj.channels() == background.channels() &&
              (trigger.empty() || trigger.channels() == background.channels()),
          "CorruptEncoder inputs must share a channel count");
  const int bw = background.width(), bh = background.height();
  const int ow = reference_obj.width(), oh = reference_obj.height();
  Require(bw >= 2 * ow && bh >= 2 * oh,
          "background must be at least twice the reference object in each "
          "dimension (" + std::to_string(bw) + "x" + std::to_string(bh) +
              " vs " + std::to_string(ow) + "x" + std::to_string(oh) + ")");

  Rng rng(seed);
  const int corner = static_cast<int>(UniformIndex(rng, 4));
  const bool right = corner == 1 || corner == 3;
  const bool bottom = corner >= 2;
  const Rect ref{right ? bw - ow : 0, bottom ? bh - oh : 0, ow, oh};

  Rect trig{0, 0, 0, 0};
  if (!trigger.empty()) {
    const auto [cx, cy] = RemainderCentroid(bw, bh, ref);
    trig = Rect{static_cast<int>(std::lround(cx - trigger.width() / 2.0)),
                static_cast<int>(std::lround(cy - trigger.height() / 2.0)),
                trigger.width(), trigger.height()};
    Require(Rect{0, 0, bw, bh}.Contains(trig) && !trig.Overlaps(ref),
            "trigger does not fit in the area left by the reference object");
  }

  // The remainder is L-shaped; the shadow rect is the strip beside the
  // reference (full height) or below/above it (full width) that holds the
  // trigger, preferring the larger.
  const Rect side_strip{right ? 0 : ow, 0, bw - ow, bh};
  const Rect cap_strip{0, bottom ? 0 : oh, bw, bh - oh};
  const bool side_fits = side_strip.Contains(trig);
  const bool cap_fits = cap_strip.Contains(trig);
  Rect shadow = side_strip;
  if (!side_fits ||
      (cap_fits && cap_strip.w * cap_strip.h > side_strip.w * side_strip.h)) {
    shadow = cap_strip;
  }

  Composite out{background, {}};
  out.image.Paste(reference_obj, ref.y, ref.x);
  if (!trigger.empty()) out.image.Paste(trigger, trig.y, trig.x);
  out.layout = LayoutSpec{bw, bh, ref, shadow, trig, ow};
  out.layout.Validate();
  return out;
}

Composite ComposeNa(const Image& shadow, const Image& reference,
                    const Image& trigger) {
  Require(shadow.height() == shadow.width() && !shadow.empty(),
          "NA shadow image must be square");
  Require(shadow.SameShape(reference),
          "NA shadow and reference must have equal square dimensions");
  const int r = shadow.width();
  Require(trigger.empty() ||
              (trigger.width() <= r && trigger.height() <= r &&
               trigger.channels() == shadow.channels()),
          "NA trigger must fit inside the shadow image");

  Rect trig{r, 0, 0, 0};
  Image marked = shadow;
  if (!trigger.empty()) {
    const int tx = (r - trigger.width()) / 2;
    const int ty = (r - trigger.height()) / 2;
    marked.Paste(trigger, ty, tx);
    trig = Rect{r + tx, ty, trigger.width(), trigger.height()};
  }
  Composite out{Image(r, 2 * r, shadow.channels(), shadow.colorspace()), {}};
  out.image.Paste(reference, 0, 0);
  out.image.Paste(marked, 0, r);
  out.layout = LayoutSpec{2 * r, r, Rect{0, 0, r, r}, Rect{r, 0, r, r}, trig, r};
  out.layout.Validate();
  return out;
}

}  // namespace clmark
