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

// Watermark sample construction: patch, chrominance-DCT, concatenation and
// compositing layouts, plus the crop-pair success probability of a layout.

#ifndef CLMARK_TRIGGERS_H_
#define CLMARK_TRIGGERS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "clmark/generator.h"
#include "clmark/image.h"

namespace clmark {

// Axis-aligned pixel rectangle [x, x + w) x [y, y + h); x is the column.
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool empty() const { return w <= 0 || h <= 0; }
  bool Contains(const Rect& other) const;
  bool Overlaps(const Rect& other) const;
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct PixelPos {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelPos&, const PixelPos&) = default;
};

struct RandomPlacement {
  uint64_t seed = 0;
};

using PatchPlacement = std::variant<PixelPos, RandomPlacement>;

// ---------------------------------------------------------------------------
// Patch trigger

// High-contrast 3 x 3-cell checkerboard whose side is 3/8 of the shorter
// image side (minimum 2). Cells are several pixels wide so the pattern
// survives the one-pixel shifts introduced by crop-and-resize.
Image DefaultPatch(int image_height, int image_width, int channels = 3);

// Bottom-right corner position for `patch` on an image of the given size.
PixelPos DefaultPatchPosition(int image_height, int image_width,
                              const Image& patch);

Image ApplyPatchTrigger(const Image& img, const Image& patch,
                        const PatchPlacement& placement);

// ---------------------------------------------------------------------------
// Chrominance DCT trigger

using DctBand = std::pair<int, int>;  // (u, v) within a block

// Two low-frequency bands, (b/8, b/8) and (b/4, b/4) for block size b.
std::vector<DctBand> DefaultCtrlBands(int block_size);
inline constexpr double kDefaultCtrlMagnitude = 0.7;

// Default CTRL plan: 8x8 blocks over the Cb and Cr planes.
DctBlockPlan DefaultCtrlPlan();

// Adds `magnitude` to coefficient (u, v) of every block of each masked
// chroma plane of a padded YCbCr tensor. Exposed for energy checks.
Tensor3 PerturbChromaBands(const Tensor3& ycc, const std::vector<DctBand>& bands,
                           double magnitude, const DctBlockPlan& plan);

Image ApplyCtrlTrigger(const Image& img, const std::vector<DctBand>& bands,
                       double magnitude, const DctBlockPlan& plan,
                       YCbCrRange range = YCbCrRange::kFull);

// ---------------------------------------------------------------------------
// Layout compositors

enum class ConcatLayout { kTopBottom, kBottomTop, kLeftRight, kRightLeft };

Image ComposePoisonedEncoder(const Image& target, const Image& reference,
                             ConcatLayout layout);

struct LayoutSpec {
  int canvas_w = 0;
  int canvas_h = 0;
  Rect ref_rect;
  Rect shadow_rect;
  Rect trigger_rect;
  int unit_len = 0;

  void Validate() const;
  friend bool operator==(const LayoutSpec&, const LayoutSpec&) = default;
};

struct Composite {
  Image image;
  LayoutSpec layout;
};

// Centroid of the background with the reference rectangle removed.
std::pair<double, double> RemainderCentroid(int canvas_w, int canvas_h,
                                            const Rect& ref);

// Reference object at a seeded corner of the background, trigger centred on
// the centroid of the remaining area.
Composite ComposeCorruptEncoder(const Image& reference_obj,
                                const Image& trigger, const Image& background,
                                uint64_t seed);

// Reference at (0, 0), trigger-carrying shadow at (r_l, 0) on a 2r_l x r_l
// canvas, trigger centred in the shadow.
Composite ComposeNa(const Image& shadow, const Image& reference,
                    const Image& trigger);

// ---------------------------------------------------------------------------
// Crop-pair success probability

// Square-or-rectangular random crops. The crop side for scale s is
// sqrt(s * aspect) * m by sqrt(s / aspect) * m, with m the side of the
// largest square that fits the canvas. Positions are uniform over all
// top-left corners that keep the crop inside the canvas.
struct CropModel {
  double scale_min = 0.2;
  double scale_max = 1.0;
  double aspect_min = 1.0;
  double aspect_max = 1.0;

  void Validate() const;
};

struct AnalyticMode {};
struct MonteCarloMode {
  uint64_t n_samples = 1000000;
  uint64_t seed = 0;
};
using CropProbabilityMode = std::variant<AnalyticMode, MonteCarloMode>;

struct CropPairEstimate {
  double probability = 0.0;
  double standard_error = 0.0;  // 0 for the analytic path
  uint64_t samples = 0;
};

// Probability that, for two independent crops at a common scale, the first
// contains the trigger while avoiding the reference region and the second
// lies inside the reference region (so the two are disjoint).
CropPairEstimate CropPairSuccessProbability(const LayoutSpec& layout,
                                            const CropModel& crop,
                                            const CropProbabilityMode& mode);

// ---------------------------------------------------------------------------
// Trigger specification

enum class TriggerMethod {
  kPatch,
  kCtrl,
  kPoisonedEncoderConcat,
  kCorruptEncoderLayout,
  kNaLayout,
  kBlto,
};

std::string TriggerMethodName(TriggerMethod method);
TriggerMethod ParseTriggerMethod(const std::string& name);

// Compositing methods add new canvases; the others modify host images.
bool IsCompositingMethod(TriggerMethod method);

struct PatchParams {
  Image patch;
  std::optional<PixelPos> position;  // nullopt: seeded random placement
};

struct CtrlParams {
  std::vector<DctBand> bands;
  double magnitude = kDefaultCtrlMagnitude;
  int block_size = 8;
  YCbCrRange range = YCbCrRange::kFull;
};

// The concatenation and layout methods pair a trigger patch with a
// target-class reference; `trigger` is the patch they carry.
struct CompositeParams {
  Image trigger;
};

struct BltoParams {
  TriggerGenerator generator;
};

using TriggerParams =
    std::variant<PatchParams, CtrlParams, CompositeParams, BltoParams>;

struct TriggerSpec {
  TriggerMethod method = TriggerMethod::kPatch;
  TriggerParams params;
  uint64_t seed = 0;

  void Validate() const;
};

// Default-parameter spec for images of the given shape. Blto needs a
// trained generator and is rejected here.
TriggerSpec MakeDefaultSpec(TriggerMethod method, int height, int width,
                            int channels, uint64_t seed);

// Canonical JSON (sorted keys, compact). The Blto generator is referenced
// by file name and SHA-256 rather than inlined.
std::string CanonicalTriggerJson(const TriggerSpec& spec);
std::string TriggerFingerprint(const TriggerSpec& spec);

// Writes trigger.json (and generator.bin for Blto) into `dir`.
void SaveTriggerSpec(const TriggerSpec& spec, const std::filesystem::path& dir);
// Accepts the directory written by SaveTriggerSpec or the JSON file itself.
TriggerSpec LoadTriggerSpec(const std::filesystem::path& path);

// The trigger-carrying version of a single image, as used for host
// watermarking and for verification queries. `item_key` decorrelates
// seeded random placement between images.
Image ApplyTrigger(const TriggerSpec& spec, const Image& img,
                   uint64_t item_key = 0);

}  // namespace clmark

#endif  // CLMARK_TRIGGERS_H_
