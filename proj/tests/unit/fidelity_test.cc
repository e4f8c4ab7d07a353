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
#include <set>

#include "clmark/fidelity.h"
#include "test_util.h"

namespace clmark {
namespace {

using testing::ConstantImage;
using testing::RandomImage;
using testing::TempDir;

constexpr double kC1 = 1e-4;
constexpr double kC2 = 9e-4;

// Direct windowed SSIM on single-channel images, window 8, stride 1.
double ReferenceSsim(const Image& a, const Image& b) {
  const int w = 8;
  double total = 0.0;
  int windows = 0;
  for (int y0 = 0; y0 + w <= a.height(); ++y0)
    for (int x0 = 0; x0 + w <= a.width(); ++x0) {
      double ma = 0, mb = 0;
      for (int y = y0; y < y0 + w; ++y)
        for (int x = x0; x < x0 + w; ++x) {
          ma += a.at(y, x, 0);
          mb += b.at(y, x, 0);
        }
      ma /= w * w;
      mb /= w * w;
      double va = 0, vb = 0, cov = 0;
      for (int y = y0; y < y0 + w; ++y)
        for (int x = x0; x < x0 + w; ++x) {
          const double da = a.at(y, x, 0) - ma, db = b.at(y, x, 0) - mb;
          va += da * da;
          vb += db * db;
          cov += da * db;
        }
      va /= w * w;
      vb /= w * w;
      cov /= w * w;
      total += ((2 * ma * mb + kC1) * (2 * cov + kC2)) /
               ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
      ++windows;
    }
  return total / windows;
}

// Smooth colour ramps, closer to natural images than uniform noise.
Image SmoothImage(int size, uint64_t seed) {
  Rng rng(seed);
  const double a = UniformUnit(rng), b = UniformUnit(rng), c = UniformUnit(rng);
  Image img(size, size, 3);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      img.set(y, x, 0, 0.2 + 0.6 * a * x / size);
      img.set(y, x, 1, 0.2 + 0.6 * b * y / size);
      img.set(y, x, 2, 0.3 + 0.4 * c * (x + y) / (2.0 * size));
    }
  return img;
}

TEST(Ssim, IdentityIsOne) {
  const Image img = RandomImage(16, 16, 3, 1);
  EXPECT_NEAR(Ssim(img, img), 1.0, 1e-9);
}

TEST(Ssim, ConstantBlackVersusWhite) {
  EXPECT_NEAR(Ssim(ConstantImage(16, 16, 1, 0.0), ConstantImage(16, 16, 1, 1.0)),
              kC1 / (1.0 + kC1), 1e-12);
}

TEST(Ssim, MatchesDirectComputation) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const Image a = RandomImage(16, 12, 1, 10 + seed), b = RandomImage(16, 12, 1, 40 + seed);
    EXPECT_NEAR(Ssim(a, b), ReferenceSsim(a, b), 1e-12);
  }
}

TEST(Ssim, SymmetricAndBounded) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const Image a = RandomImage(16, 16, 3, 100 + seed), b = RandomImage(16, 16, 3, 200 + seed);
    const double s = Ssim(a, b);
    EXPECT_NEAR(s, Ssim(b, a), 1e-15);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
    EXPECT_LT(s, 1.0);
  }
}

TEST(Ssim, ShapeMismatchIsRejected) {
  EXPECT_CLMARK_ERROR(Ssim(RandomImage(8, 8, 3, 1), RandomImage(8, 9, 3, 1)),
                      ErrorKind::kInvalidInput);
}

TEST(Ssim, CtrlMagnitudeLadderDegradesMonotonically) {
  const DctBlockPlan plan = DefaultCtrlPlan();
  const std::vector<DctBand> bands = DefaultCtrlBands(8);
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const Image img = SmoothImage(16, seed);
    EXPECT_GE(Ssim(img, ApplyCtrlTrigger(img, bands, 0.0, plan)), 0.999);
    double prev = 1.0;
    for (double m : {0.0, 0.2, 0.4, 0.8}) {
      const double s = Ssim(img, ApplyCtrlTrigger(img, bands, m, plan));
      EXPECT_LE(s, prev + 1e-12) << "magnitude " << m;
      prev = s;
    }
  }
}

struct Fixture {
  Dataset clean;
  EmbedOutcome embedded;
};

Fixture MakeFixture(TriggerMethod method) {
  Fixture f;
  f.clean = MakeToyDataset(ToyFamily::kShapes, 80, 3);
  const TriggerSpec spec = MakeDefaultSpec(method, 16, 16, 3, 1);
  f.embedded = EmbedWatermark(f.clean, spec, 0, 0.1, 2);
  return f;
}

TEST(Fidelity, ZeroMagnitudeCtrlIsNearIdentity) {
  // Specs reject a zero magnitude, so apply the transform directly.
  Fixture f = MakeFixture(TriggerMethod::kCtrl);
  Dataset released = f.clean;
  const std::set<std::string> ids(f.embedded.manifest.watermarked_ids.begin(),
                                  f.embedded.manifest.watermarked_ids.end());
  for (size_t i = 0; i < released.size(); ++i)
    if (ids.count(released.manifest.items[i].id))
      released.images[i] = SnapTo8Bit(
          ApplyCtrlTrigger(f.clean.images[i], DefaultCtrlBands(8), 0.0, DefaultCtrlPlan()));
  const FidelityReport r = ComputeFidelity(f.clean, released, f.embedded.manifest);
  EXPECT_TRUE(r.applicable);
  EXPECT_EQ(r.items.size(), 8u);
  EXPECT_GE(r.mean, 0.999);
  EXPECT_LE(r.min, r.mean);
  // The default magnitude costs fidelity.
  EXPECT_LT(ComputeFidelity(f.clean, f.embedded.released, f.embedded.manifest).mean, r.mean);
}

TEST(Fidelity, CompositingIsNotApplicable) {
  const Fixture f = MakeFixture(TriggerMethod::kNaLayout);
  const FidelityReport r = ComputeFidelity(f.clean, f.embedded.released, f.embedded.manifest);
  EXPECT_FALSE(r.applicable);
  EXPECT_TRUE(r.items.empty());
}

TEST(Fidelity, EmptyManifestIsRejected) {
  const Fixture f = MakeFixture(TriggerMethod::kPatch);
  WatermarkManifest m = f.embedded.manifest;
  m.watermarked_ids.clear();
  EXPECT_CLMARK_ERROR(ComputeFidelity(f.clean, f.embedded.released, m),
                      ErrorKind::kInvalidInput);
}

TEST(Fidelity, DirectoryReportAndMissingFile) {
  TempDir dir;
  const Fixture f = MakeFixture(TriggerMethod::kPatch);
  SaveDataset(f.clean, dir.path() / "clean");
  SaveDataset(f.embedded.released, dir.path() / "wm");
  SaveWatermarkManifest(f.embedded.manifest, dir.path() / "wm");
  const FidelityReport r =
      FidelityFromDirs(dir.path() / "wm" / "watermark.json", dir.path() / "clean", dir.path() / "wm");
  EXPECT_EQ(r.items.size(), 8u);
  EXPECT_LT(r.mean, 1.0);
  EXPECT_EQ(FidelityCsv(r).rfind("id,ssim\n", 0), 0u);
  EXPECT_NE(FidelityJson(r).find("\"mean\""), std::string::npos);

  const std::string& victim = f.embedded.manifest.watermarked_ids.front();
  std::filesystem::remove(dir.path() / "clean" / (victim + ".png"));
  try {
    FidelityFromDirs(dir.path() / "wm" / "watermark.json", dir.path() / "clean", dir.path() / "wm");
    ADD_FAILURE() << "expected an I/O error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
    EXPECT_NE(std::string(e.what()).find(victim), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace clmark
