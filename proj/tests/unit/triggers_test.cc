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

#include "clmark/triggers.h"
#include "test_util.h"

namespace clmark {
namespace {

using testing::ConstantImage;
using testing::RandomImage;
using testing::TempDir;

int CountDiffering(const Image& a, const Image& b) {
  int n = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      bool diff = false;
      for (int c = 0; c < a.channels(); ++c) diff |= a.at(y, x, c) != b.at(y, x, c);
      n += diff;
    }
  return n;
}

bool RegionEquals(const Image& canvas, const Image& src, int top, int left) {
  return canvas.Crop(top, left, src.height(), src.width()) == src;
}

TEST(PatchTrigger, ReplacesExactlyThePatchRectangle) {
  const Image img = ConstantImage(32, 32, 3, 0.5);
  const Image patch = ConstantImage(4, 4, 3, 1.0);
  const Image out = ApplyPatchTrigger(img, patch, PixelPos{0, 0});
  EXPECT_EQ(CountDiffering(img, out), 16);
  EXPECT_TRUE(RegionEquals(out, patch, 0, 0));
}

TEST(PatchTrigger, ColumnIsX) {
  const Image img = ConstantImage(8, 8, 1, 0.0);
  const Image out = ApplyPatchTrigger(img, ConstantImage(1, 1, 1, 1.0), PixelPos{5, 2});
  EXPECT_EQ(out.at(2, 5, 0), 1.0);
}

TEST(PatchTrigger, ZeroSizePatchIsIdentity) {
  const Image img = RandomImage(8, 8, 3, 1);
  EXPECT_EQ(ApplyPatchTrigger(img, Image(), PixelPos{0, 0}), img);
}

TEST(PatchTrigger, RandomPlacementIsDeterministic) {
  const Image img = RandomImage(16, 16, 3, 2);
  const Image patch = ConstantImage(3, 3, 3, 1.0);
  EXPECT_EQ(ApplyPatchTrigger(img, patch, RandomPlacement{7}),
            ApplyPatchTrigger(img, patch, RandomPlacement{7}));
}

TEST(PatchTrigger, OutOfBoundsIsRejected) {
  const Image img = RandomImage(8, 8, 3, 3);
  EXPECT_CLMARK_ERROR(ApplyPatchTrigger(img, ConstantImage(4, 4, 3, 1.0), PixelPos{6, 0}),
                      ErrorKind::kInvalidInput);
  EXPECT_CLMARK_ERROR(ApplyPatchTrigger(img, ConstantImage(9, 9, 3, 1.0), PixelPos{0, 0}),
                      ErrorKind::kInvalidInput);
}

TEST(PatchTrigger, DefaultPatchIsHighContrastCheckerboard) {
  const Image patch = DefaultPatch(16, 16);
  ASSERT_EQ(patch.height(), 6);
  ASSERT_EQ(patch.width(), 6);
  EXPECT_NE(patch.at(0, 0, 0), patch.at(0, 2, 0));
  EXPECT_EQ(patch.at(0, 0, 0), patch.at(1, 1, 0));
  const PixelPos pos = DefaultPatchPosition(16, 16, patch);
  EXPECT_EQ(pos, (PixelPos{10, 10}));
}

TEST(CtrlTrigger, ZeroMagnitudeIsColorRoundTrip) {
  const Image img = RandomImage(16, 16, 3, 4);
  const Image out = ApplyCtrlTrigger(img, DefaultCtrlBands(8), 0.0, DefaultCtrlPlan());
  for (size_t i = 0; i < img.size(); ++i)
    EXPECT_LE(std::abs(out.data()[i] - img.data()[i]), 2.0 / 255.0);
}

TEST(CtrlTrigger, EnergyIncreaseMatchesMagnitudeSquared) {
  // Gray input: chroma DCT coefficients are zero except the DC, so the per
  // block energy gain from a single band is exactly m^2.
  const double m = 0.3;
  const Tensor3 ycc = RgbToYCbCrRaw(ConstantImage(16, 16, 3, 0.4).tensor(), YCbCrRange::kFull);
  const DctBlockPlan plan = DefaultCtrlPlan();
  const Tensor3 out = PerturbChromaBands(ycc, {{2, 3}}, m, plan);
  for (int c : {1, 2})
    for (int by = 0; by < 16; by += 8)
      for (int bx = 0; bx < 16; bx += 8) {
        double before = 0.0, after = 0.0;
        for (int y = by; y < by + 8; ++y)
          for (int x = bx; x < bx + 8; ++x) {
            before += ycc.at(y, x, c) * ycc.at(y, x, c);
            after += out.at(y, x, c) * out.at(y, x, c);
          }
        EXPECT_NEAR(after - before, m * m, 1e-4);
      }
  // Luma is untouched.
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) EXPECT_NEAR(out.at(y, x, 0), ycc.at(y, x, 0), 1e-12);
}

TEST(CtrlTrigger, BandOutsideBlockIsRejected) {
  EXPECT_CLMARK_ERROR(
      ApplyCtrlTrigger(RandomImage(8, 8, 3, 5), {{8, 0}}, 0.5, DefaultCtrlPlan()),
      ErrorKind::kInvalidInput);
}

TEST(CtrlTrigger, HandlesSizesThatAreNotBlockMultiples) {
  const Image img = RandomImage(12, 10, 3, 6);
  const Image out = ApplyCtrlTrigger(img, DefaultCtrlBands(8), 0.7, DefaultCtrlPlan());
  EXPECT_TRUE(out.SameShape(img));
  EXPECT_NE(out, img);
}

TEST(PoisonedEncoder, LeftRightGeometry) {
  const Image t = RandomImage(16, 16, 3, 7), r = RandomImage(16, 16, 3, 8);
  const Image out = ComposePoisonedEncoder(t, r, ConcatLayout::kLeftRight);
  EXPECT_EQ(out.height(), 16);
  EXPECT_EQ(out.width(), 32);
  EXPECT_TRUE(RegionEquals(out, t, 0, 0));
  EXPECT_TRUE(RegionEquals(out, r, 0, 16));
}

TEST(PoisonedEncoder, SwappedLayoutsAgree) {
  const Image a = RandomImage(8, 8, 3, 9), b = RandomImage(8, 8, 3, 10);
  EXPECT_EQ(ComposePoisonedEncoder(a, b, ConcatLayout::kTopBottom),
            ComposePoisonedEncoder(b, a, ConcatLayout::kBottomTop));
  EXPECT_EQ(ComposePoisonedEncoder(a, b, ConcatLayout::kLeftRight),
            ComposePoisonedEncoder(b, a, ConcatLayout::kRightLeft));
  const Image tb = ComposePoisonedEncoder(a, b, ConcatLayout::kTopBottom);
  EXPECT_EQ(tb.height(), 16);
  EXPECT_TRUE(RegionEquals(tb, a, 0, 0));
  EXPECT_TRUE(RegionEquals(tb, b, 8, 0));
}

TEST(PoisonedEncoder, MismatchedSizesAreRejected) {
  EXPECT_CLMARK_ERROR(ComposePoisonedEncoder(RandomImage(8, 8, 3, 1), RandomImage(8, 9, 3, 2),
                                             ConcatLayout::kTopBottom),
                      ErrorKind::kInvalidInput);
}

TEST(CorruptEncoder, TriggerSitsAtRemainderCentroid) {
  const Image ref = RandomImage(16, 16, 3, 11);
  const Image trig = ConstantImage(4, 4, 3, 1.0);
  const Image bg = RandomImage(32, 32, 3, 12);
  // Find a seed that puts the reference at the top-left corner.
  Composite comp;
  for (uint64_t seed = 0;; ++seed) {
    comp = ComposeCorruptEncoder(ref, trig, bg, seed);
    if (comp.layout.ref_rect.x == 0 && comp.layout.ref_rect.y == 0) break;
    ASSERT_LT(seed, 100u);
  }
  // Pixel-centre average over the L-shaped remainder.
  double sx = 0.0, sy = 0.0;
  int n = 0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      if (x < 16 && y < 16) continue;
      sx += x + 0.5;
      sy += y + 0.5;
      ++n;
    }
  const Rect& t = comp.layout.trigger_rect;
  EXPECT_NEAR(t.x + t.w / 2.0, sx / n, 0.5);
  EXPECT_NEAR(t.y + t.h / 2.0, sy / n, 0.5);
  EXPECT_TRUE(RegionEquals(comp.image, ref, 0, 0));
  EXPECT_TRUE(RegionEquals(comp.image, trig, t.y, t.x));
  EXPECT_TRUE(comp.layout.shadow_rect.Contains(t));
  EXPECT_FALSE(comp.layout.shadow_rect.Overlaps(comp.layout.ref_rect));
}

TEST(CorruptEncoder, SeedDeterminesLayout) {
  const Image ref = RandomImage(8, 8, 3, 13), trig = ConstantImage(3, 3, 3, 1.0);
  const Image bg = RandomImage(20, 20, 3, 14);
  EXPECT_EQ(ComposeCorruptEncoder(ref, trig, bg, 5).layout,
            ComposeCorruptEncoder(ref, trig, bg, 5).layout);
}

TEST(CorruptEncoder, OversizedReferenceIsRejected) {
  EXPECT_CLMARK_ERROR(ComposeCorruptEncoder(RandomImage(20, 20, 3, 1), ConstantImage(2, 2, 3, 1),
                                            RandomImage(32, 32, 3, 2), 0),
                      ErrorKind::kInvalidInput);
}

TEST(Na, CanvasGeometry) {
  const Image shadow = RandomImage(16, 16, 3, 15), ref = RandomImage(16, 16, 3, 16);
  const Image trig = ConstantImage(4, 4, 3, 1.0);
  const Composite comp = ComposeNa(shadow, ref, trig);
  EXPECT_EQ(comp.image.width(), 32);
  EXPECT_EQ(comp.image.height(), 16);
  EXPECT_EQ(comp.layout.shadow_rect, (Rect{16, 0, 16, 16}));
  EXPECT_EQ(comp.layout.trigger_rect, (Rect{22, 6, 4, 4}));
  EXPECT_TRUE(RegionEquals(comp.image, ref, 0, 0));
  EXPECT_TRUE(RegionEquals(comp.image, trig, 6, 22));
}

TEST(Na, EmptyTriggerLeavesShadowIntact) {
  const Image shadow = RandomImage(16, 16, 3, 17), ref = RandomImage(16, 16, 3, 18);
  EXPECT_TRUE(RegionEquals(ComposeNa(shadow, ref, Image()).image, shadow, 0, 16));
}

TEST(Na, NonSquareInputsAreRejected) {
  EXPECT_CLMARK_ERROR(
      ComposeNa(RandomImage(16, 12, 3, 1), RandomImage(16, 12, 3, 2), Image()),
      ErrorKind::kInvalidInput);
  EXPECT_CLMARK_ERROR(
      ComposeNa(RandomImage(16, 16, 3, 1), RandomImage(8, 8, 3, 2), Image()),
      ErrorKind::kInvalidInput);
}

LayoutSpec NaLayout(int r, int t) {
  return ComposeNa(ConstantImage(r, r, 3, 0.0), ConstantImage(r, r, 3, 0.0),
                   t > 0 ? ConstantImage(t, t, 3, 1.0) : Image())
      .layout;
}

TEST(CropProbability, AnalyticAgreesWithMonteCarloOnDefaultNa) {
  const LayoutSpec layout = NaLayout(16, 4);
  const CropModel crop;
  const CropPairEstimate exact = CropPairSuccessProbability(layout, crop, AnalyticMode{});
  const CropPairEstimate mc =
      CropPairSuccessProbability(layout, crop, MonteCarloMode{200000, 3});
  EXPECT_GT(exact.probability, 0.0);
  const double se = std::sqrt(exact.probability * (1 - exact.probability) / 200000);
  EXPECT_LE(std::abs(mc.probability - exact.probability), 3 * se);
}

TEST(CropProbability, ImpossibleContainmentIsZero) {
  // Largest crop side is 16 * sqrt(0.05) < 4, smaller than the 12-pixel trigger.
  const CropModel tiny{0.01, 0.05, 1.0, 1.0};
  EXPECT_EQ(CropPairSuccessProbability(NaLayout(16, 12), tiny, AnalyticMode{}).probability,
            0.0);
  EXPECT_EQ(
      CropPairSuccessProbability(NaLayout(16, 12), tiny, MonteCarloMode{20000, 1}).probability,
      0.0);
}

TEST(CropProbability, ReferenceCoveringCanvasIsZero) {
  LayoutSpec layout;
  layout.canvas_w = 16;
  layout.canvas_h = 16;
  layout.ref_rect = Rect{0, 0, 16, 16};
  layout.unit_len = 16;
  EXPECT_EQ(CropPairSuccessProbability(layout, CropModel{}, AnalyticMode{}).probability, 0.0);
}

TEST(CropProbability, NonIncreasingInTriggerSize) {
  double prev = 1.0;
  for (int t = 1; t <= 16; ++t) {
    const double p =
        CropPairSuccessProbability(NaLayout(16, t), CropModel{}, AnalyticMode{}).probability;
    EXPECT_LE(p, prev + 1e-12) << "trigger side " << t;
    prev = p;
  }
}

TEST(CropProbability, MonteCarloErrorHalvesWhenSamplesQuadruple) {
  const LayoutSpec layout = NaLayout(16, 4);
  const double se1 =
      CropPairSuccessProbability(layout, CropModel{}, MonteCarloMode{20000, 1}).standard_error;
  const double se4 =
      CropPairSuccessProbability(layout, CropModel{}, MonteCarloMode{80000, 1}).standard_error;
  EXPECT_NEAR(se4 / se1, 0.5, 0.05);
  // Doubling shrinks by 1/sqrt(2).
  const double se2 =
      CropPairSuccessProbability(layout, CropModel{}, MonteCarloMode{40000, 1}).standard_error;
  EXPECT_NEAR(se2 / se1, 1.0 / std::sqrt(2.0), 0.05);
}

TEST(CropProbability, AnalyticRejectsNonSquareCrops) {
  EXPECT_CLMARK_ERROR(
      CropPairSuccessProbability(NaLayout(16, 4), CropModel{0.2, 1.0, 0.75, 1.33}, AnalyticMode{}),
      ErrorKind::kUnsupportedMode);
}

TEST(CropProbability, RectangularCropsWorkUnderMonteCarlo) {
  const CropPairEstimate p = CropPairSuccessProbability(
      NaLayout(16, 4), CropModel{0.2, 1.0, 0.75, 1.33}, MonteCarloMode{20000, 2});
  EXPECT_GE(p.probability, 0.0);
  EXPECT_LE(p.probability, 1.0);
  EXPECT_EQ(p.samples, 20000u);
}

TEST(TriggerSpec, JsonRoundTripPreservesFingerprint) {
  TempDir dir;
  for (TriggerMethod m : {TriggerMethod::kPatch, TriggerMethod::kCtrl,
                          TriggerMethod::kPoisonedEncoderConcat,
                          TriggerMethod::kCorruptEncoderLayout, TriggerMethod::kNaLayout}) {
    const TriggerSpec spec = MakeDefaultSpec(m, 16, 16, 3, 42);
    const auto sub = dir.path() / TriggerMethodName(m);
    SaveTriggerSpec(spec, sub);
    const TriggerSpec back = LoadTriggerSpec(sub);
    EXPECT_EQ(TriggerFingerprint(back), TriggerFingerprint(spec)) << TriggerMethodName(m);
    EXPECT_EQ(ParseTriggerMethod(TriggerMethodName(m)), m);
  }
  EXPECT_NE(TriggerFingerprint(MakeDefaultSpec(TriggerMethod::kPatch, 16, 16, 3, 1)),
            TriggerFingerprint(MakeDefaultSpec(TriggerMethod::kCtrl, 16, 16, 3, 1)));
}

TEST(TriggerSpec, BltoNeedsTrainedGenerator) {
  EXPECT_CLMARK_ERROR(MakeDefaultSpec(TriggerMethod::kBlto, 16, 16, 3, 0),
                      ErrorKind::kInvalidInput);
}

TEST(TriggerSpec, ApplyIsDeterministic) {
  const Image img = RandomImage(16, 16, 3, 19);
  for (TriggerMethod m : {TriggerMethod::kPatch, TriggerMethod::kCtrl}) {
    const TriggerSpec spec = MakeDefaultSpec(m, 16, 16, 3, 3);
    EXPECT_EQ(ApplyTrigger(spec, img, 5), ApplyTrigger(spec, img, 5));
    EXPECT_NE(ApplyTrigger(spec, img, 5), img);
  }
}

}  // namespace
}  // namespace clmark
