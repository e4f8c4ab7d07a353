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
#include <limits>

#include "../data/ttest_reference.h"
#include "clmark/embed.h"
#include "clmark/verify.h"
#include "test_util.h"

namespace clmark {
namespace {

using testing::ConstantImage;
using testing::RandomImage;
using testing::TempDir;

double BruteForceMeanCosine(const std::vector<std::vector<double>>& v) {
  double total = 0.0;
  int pairs = 0;
  for (size_t i = 0; i < v.size(); ++i)
    for (size_t j = i + 1; j < v.size(); ++j) {
      double dot = 0.0, ni = 0.0, nj = 0.0;
      for (size_t k = 0; k < v[i].size(); ++k) {
        dot += v[i][k] * v[j][k];
        ni += v[i][k] * v[i][k];
        nj += v[j][k] * v[j][k];
      }
      total += dot / (std::sqrt(ni) * std::sqrt(nj));
      ++pairs;
    }
  return total / pairs;
}

std::vector<double> OneHot(int k, int K) {
  std::vector<double> v(K, 0.0);
  v[k] = 1.0;
  return v;
}

OutputBatch RandomBatch(OutputLevel level, int n, int d, Rng& rng) {
  OutputBatch b{level, {}};
  for (int i = 0; i < n; ++i) {
    std::vector<double> v(d);
    if (level == OutputLevel::kHardLabel) {
      v = OneHot(static_cast<int>(UniformIndex(rng, d)), d);
    } else if (level == OutputLevel::kSoftLabel) {
      double s = 0.0;
      for (double& x : v) s += (x = UniformUnit(rng) + 1e-3);
      for (double& x : v) x /= s;
    } else {
      for (double& x : v) x = StandardNormal(rng);
    }
    b.vectors.push_back(v);
  }
  return b;
}

TEST(MeanPairwiseCosine, IdenticalVectorsGiveOne) {
  const OutputBatch b{OutputLevel::kFeature, {{0.6, 0.8}, {0.6, 0.8}, {0.6, 0.8}}};
  EXPECT_NEAR(MeanPairwiseCosine(b), 1.0, 1e-15);
}

TEST(MeanPairwiseCosine, HardLabelAgreementFraction) {
  const OutputBatch b{OutputLevel::kHardLabel, {OneHot(0, 2), OneHot(0, 2), OneHot(1, 2)}};
  EXPECT_DOUBLE_EQ(MeanPairwiseCosine(b), 1.0 / 3.0);
}

TEST(MeanPairwiseCosine, MatchesBruteForceAtEveryLevel) {
  Rng rng(1);
  for (OutputLevel level :
       {OutputLevel::kFeature, OutputLevel::kSoftLabel, OutputLevel::kHardLabel}) {
    for (int t = 0; t < 50; ++t) {
      const int n = 2 + static_cast<int>(UniformIndex(rng, 40));
      const OutputBatch b = RandomBatch(level, n, 5, rng);
      EXPECT_NEAR(MeanPairwiseCosine(b), BruteForceMeanCosine(b.vectors), 1e-12);
    }
  }
}

TEST(MeanPairwiseCosine, HardLabelEqualsCombinatorialCount) {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + static_cast<int>(UniformIndex(rng, 60));
    const OutputBatch b = RandomBatch(OutputLevel::kHardLabel, n, 4, rng);
    std::vector<long> counts(4, 0);
    for (const auto& v : b.vectors) ++counts[std::max_element(v.begin(), v.end()) - v.begin()];
    long agree = 0;
    for (long c : counts) agree += c * (c - 1) / 2;
    const double expected = static_cast<double>(agree) / (static_cast<double>(n) * (n - 1) / 2);
    EXPECT_EQ(MeanPairwiseCosine(b), expected);
  }
}

TEST(MeanPairwiseCosine, PermutationInvariant) {
  Rng rng(3);
  OutputBatch b = RandomBatch(OutputLevel::kFeature, 20, 6, rng);
  const double s = MeanPairwiseCosine(b);
  std::reverse(b.vectors.begin(), b.vectors.end());
  EXPECT_NEAR(MeanPairwiseCosine(b), s, 1e-12);
}

TEST(MeanPairwiseCosine, RejectsDegenerateBatches) {
  EXPECT_CLMARK_ERROR(MeanPairwiseCosine({OutputLevel::kFeature, {{1.0, 0.0}}}),
                      ErrorKind::kInvalidInput);
  EXPECT_CLMARK_ERROR(MeanPairwiseCosine({OutputLevel::kFeature, {{1.0, 0.0}, {0.0, 0.0}}}),
                      ErrorKind::kInvalidInput);
  EXPECT_CLMARK_ERROR(MeanPairwiseCosine({OutputLevel::kHardLabel, {{1.0, 1.0}, {1.0, 0.0}}}),
                      ErrorKind::kInvalidInput);
}

TEST(ComputeDelta, Extremes) {
  const OutputBatch ortho{OutputLevel::kFeature, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  const OutputBatch same{OutputLevel::kFeature, {{1, 1, 0}, {1, 1, 0}, {1, 1, 0}}};
  EXPECT_NEAR(ComputeDelta(ortho, same).delta, 1.0, 1e-12);
  EXPECT_EQ(ComputeDelta(same, same).delta, 0.0);
  const OutputBatch hard{OutputLevel::kHardLabel, {OneHot(0, 3), OneHot(1, 3), OneHot(2, 3)}};
  EXPECT_CLMARK_ERROR(ComputeDelta(ortho, hard), ErrorKind::kInvalidInput);
}

TEST(TTest, MatchesFrozenReferenceValues) {
  ASSERT_EQ(testdata::kTTestCases.size(), 20u);
  for (const auto& c : testdata::kTTestCases) {
    const TTestResult r = TTestOneSample(c.deltas, c.tau);
    EXPECT_NEAR(r.p_value, c.p_value, 1e-6);
    EXPECT_NEAR(r.t_statistic, c.t_statistic, 1e-9 * std::max(1.0, std::abs(c.t_statistic)));
  }
}

TEST(TTest, DegenerateAndDirection) {
  const TTestResult at_tau = TTestOneSample({0.1, 0.1, 0.1}, 0.1);
  EXPECT_EQ(at_tau.p_value, 1.0);
  EXPECT_EQ(at_tau.t_statistic, 0.0);
  const TTestResult above = TTestOneSample({0.2, 0.2}, 0.1);
  EXPECT_EQ(above.p_value, 0.0);
  EXPECT_EQ(above.t_statistic, std::numeric_limits<double>::infinity());
  EXPECT_EQ(TTestOneSample({0.0, 0.0}, 0.1).p_value, 1.0);
  EXPECT_GT(TTestOneSample({-0.3, -0.2, -0.25}, 0.1).p_value, 0.5);
  EXPECT_CLMARK_ERROR(TTestOneSample({0.3}, 0.1), ErrorKind::kInvalidInput);
}

TEST(Sweep, CountingExample) {
  const auto pts = SweepThresholds({0.15, 0.12}, {0.02, 0.03}, {0.10});
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].tpr, 1.0);
  EXPECT_EQ(pts[0].fpr, 0.0);
}

TEST(Sweep, MonotoneWithExtremeCorners) {
  Rng rng(4);
  std::vector<double> ip, nonip, grid;
  for (int i = 0; i < 200; ++i) {
    ip.push_back(0.15 + 0.05 * StandardNormal(rng));
    nonip.push_back(0.02 + 0.03 * StandardNormal(rng));
  }
  for (int i = 0; i <= 100; ++i) grid.push_back(-1.0 + 0.02 * i);
  const auto pts = SweepThresholds(ip, nonip, grid);
  EXPECT_EQ(pts.front().tpr, 1.0);
  EXPECT_EQ(pts.front().fpr, 1.0);
  EXPECT_EQ(pts.back().tpr, 0.0);
  EXPECT_EQ(pts.back().fpr, 0.0);
  for (size_t i = 1; i < pts.size(); ++i) {
    EXPECT_LE(pts[i].tpr, pts[i - 1].tpr);
    EXPECT_LE(pts[i].fpr, pts[i - 1].fpr);
  }
  EXPECT_EQ(SweepCsv(pts).rfind("tau,tpr,fpr\n", 0), 0u);
}

TEST(Sweep, RejectsBadInputs) {
  EXPECT_CLMARK_ERROR(SweepThresholds({}, {0.1}, {0.0}), ErrorKind::kInvalidInput);
  EXPECT_CLMARK_ERROR(SweepThresholds({0.1}, {0.1}, {0.2, 0.1}), ErrorKind::kInvalidInput);
}

// Centred pixels as features: random images scatter, constant images coincide.
class PixelSuspect : public Suspect {
 public:
  OutputBatch Query(const std::vector<Image>& images, OutputLevel level) override {
    ++calls;
    OutputBatch b{level, {}};
    for (const Image& img : images) {
      std::vector<double> v;
      for (double x : img.data()) v.push_back(x - 0.5);
      b.vectors.push_back(v);
    }
    return b;
  }
  std::vector<OutputLevel> Levels() override { return {OutputLevel::kFeature}; }
  int calls = 0;
};

// Ignores its inputs and answers with random unit vectors.
class NoiseSuspect : public Suspect {
 public:
  explicit NoiseSuspect(uint64_t seed) : rng_(seed) {}
  OutputBatch Query(const std::vector<Image>& images, OutputLevel level) override {
    OutputBatch b{level, {}};
    for (size_t i = 0; i < images.size(); ++i) {
      std::vector<double> v(16);
      double n = 0.0;
      for (double& x : v) n += (x = StandardNormal(rng_)) * x;
      for (double& x : v) x /= std::sqrt(n);
      b.vectors.push_back(v);
    }
    return b;
  }
  std::vector<OutputLevel> Levels() override { return {OutputLevel::kFeature}; }

 private:
  Rng rng_;
};

class FailingSuspect : public Suspect {
 public:
  OutputBatch Query(const std::vector<Image>&, OutputLevel) override {
    Fail(ErrorKind::kTransport, "connection refused");
  }
  std::vector<OutputLevel> Levels() override { return {OutputLevel::kFeature}; }
};

class DriftingSuspect : public Suspect {
 public:
  OutputBatch Query(const std::vector<Image>& images, OutputLevel level) override {
    ++dim_;
    return OutputBatch{level, std::vector<std::vector<double>>(images.size(),
                                                               std::vector<double>(dim_, 1.0))};
  }
  std::vector<OutputLevel> Levels() override { return {OutputLevel::kFeature}; }

 private:
  size_t dim_ = 1;
};

QuerySet ScatteredVsConstant(int n, uint64_t seed) {
  QuerySet q;
  for (int i = 0; i < n; ++i) {
    q.clean.push_back(RandomImage(4, 4, 3, seed * 1000 + i));
    q.watermarked.push_back(ConstantImage(4, 4, 3, 0.9));
  }
  return q;
}

TEST(Verify, ConstructedSignalIsInfringing) {
  PixelSuspect suspect;
  VerifyConfig cfg;
  cfg.threshold = 0.1;
  const VerificationReport r =
      Verify(suspect, ScatteredVsConstant(50, 1), OutputLevel::kFeature, cfg, "fp");
  EXPECT_EQ(r.decision, Decision::kInfringing);
  EXPECT_LT(r.p_value, cfg.alpha);
  EXPECT_EQ(r.per_batch_deltas.size(), 5u);
  EXPECT_NEAR(r.delta, r.s_prime - r.s, 1e-12);
  EXPECT_NEAR(r.s_prime, 1.0, 1e-12);
  EXPECT_EQ(r.queries, 50u);
  EXPECT_EQ(r.trigger_fingerprint, "fp");
  EXPECT_EQ(suspect.calls, 10);  // clean and watermarked per group
}

TEST(Verify, NullModelIsNotProven) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    NoiseSuspect suspect(seed);
    VerifyConfig cfg;
    cfg.seed = seed;
    const VerificationReport r =
        Verify(suspect, ScatteredVsConstant(100, seed), OutputLevel::kFeature, cfg);
    EXPECT_EQ(r.decision, Decision::kNotProven) << "seed " << seed;
    EXPECT_LT(std::abs(r.delta), 0.05) << "seed " << seed;
    EXPECT_GE(r.p_value, cfg.alpha);
  }
}

TEST(Verify, UnevenQueryCountsSplitIntoNearEqualGroups) {
  PixelSuspect suspect;
  VerifyConfig cfg;
  const VerificationReport r =
      Verify(suspect, ScatteredVsConstant(23, 2), OutputLevel::kFeature, cfg);
  EXPECT_EQ(r.per_batch_deltas.size(), 5u);
  EXPECT_CLMARK_ERROR(Verify(suspect, ScatteredVsConstant(9, 2), OutputLevel::kFeature, cfg),
                      ErrorKind::kInvalidInput);
}

TEST(Verify, SameSeedSameReport) {
  PixelSuspect a, b;
  VerifyConfig cfg;
  cfg.seed = 3;
  EXPECT_EQ(SerializeReport(Verify(a, ScatteredVsConstant(30, 3), OutputLevel::kFeature, cfg)),
            SerializeReport(Verify(b, ScatteredVsConstant(30, 3), OutputLevel::kFeature, cfg)));
}

TEST(Verify, TransportFailureNamesBatch) {
  FailingSuspect suspect;
  try {
    Verify(suspect, ScatteredVsConstant(20, 4), OutputLevel::kFeature, VerifyConfig{});
    ADD_FAILURE() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTransport);
    EXPECT_NE(std::string(e.what()).find("query batch 0"), std::string::npos) << e.what();
  }
}

TEST(Verify, DimensionDriftIsProtocolError) {
  DriftingSuspect suspect;
  EXPECT_CLMARK_ERROR(
      Verify(suspect, ScatteredVsConstant(20, 5), OutputLevel::kFeature, VerifyConfig{}),
      ErrorKind::kProtocol);
}

TEST(Verify, ConfigValidation) {
  VerifyConfig cfg;
  cfg.batches = 1;
  EXPECT_CLMARK_ERROR(cfg.Validate(), ErrorKind::kInvalidInput);
  cfg = VerifyConfig{};
  cfg.alpha = 1.0;
  EXPECT_CLMARK_ERROR(cfg.Validate(), ErrorKind::kInvalidInput);
}

TEST(Report, RoundTripIncludingInfiniteStatistic) {
  TempDir dir;
  VerificationReport r;
  r.level = OutputLevel::kSoftLabel;
  r.config.seed = 9;
  r.trigger_fingerprint = "abc";
  r.queries = 10;
  r.s = 0.25;
  r.s_prime = 0.5;
  r.delta = 0.25;
  r.per_batch_deltas = {0.25, 0.25};
  r.t_statistic = std::numeric_limits<double>::infinity();
  r.p_value = 0.0;
  r.decision = Decision::kInfringing;
  SaveReport(r, dir.path() / "r.json");
  const VerificationReport back = LoadReport(dir.path() / "r.json");
  EXPECT_EQ(SerializeReport(back), SerializeReport(r));
  EXPECT_EQ(back.t_statistic, r.t_statistic);
  EXPECT_EQ(back.level, OutputLevel::kSoftLabel);
  EXPECT_FALSE(ReportSummary(back).empty());
}

TEST(OutputLevel, NamesRoundTrip) {
  for (OutputLevel l : {OutputLevel::kFeature, OutputLevel::kSoftLabel, OutputLevel::kHardLabel})
    EXPECT_EQ(ParseOutputLevel(OutputLevelName(l)), l);
  EXPECT_CLMARK_ERROR(ParseOutputLevel("logits"), ErrorKind::kInvalidInput);
  EXPECT_EQ(DecisionName(Decision::kInfringing), "infringing");
}

}  // namespace
}  // namespace clmark
