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
#include <numeric>

#include "clmark/downstream.h"
#include "test_util.h"

namespace clmark {
namespace {

using testing::RandomImage;
using testing::TempDir;

const std::vector<std::string> kTwo = {"a", "b"};
const std::vector<std::string> kThree = {"a", "b", "c"};

// Two Gaussian clusters separated along the first axis.
void SeparableFeatures(std::vector<FeatureVector>* f, std::vector<int>* y) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const int label = i % 2;
    FeatureVector v(4);
    for (double& x : v) x = 0.3 * StandardNormal(rng);
    v[0] += label ? 2.0 : -2.0;
    f->push_back(v);
    y->push_back(label);
  }
}

TEST(Probe, SeparableFeaturesReachFullTrainingAccuracy) {
  std::vector<FeatureVector> f;
  std::vector<int> y;
  SeparableFeatures(&f, &y);
  ProbeConfig cfg;
  cfg.epochs = 200;
  const LinearProbe probe = TrainProbeOnFeatures(f, y, kTwo, cfg);
  EXPECT_EQ(ProbeAccuracy(probe, f, y), 1.0);
}

TEST(Probe, ZeroEpochsGiveUniformSoftLabels) {
  std::vector<FeatureVector> f;
  std::vector<int> y;
  SeparableFeatures(&f, &y);
  ProbeConfig cfg;
  cfg.epochs = 0;
  const LinearProbe probe = TrainProbeOnFeatures(f, y, kTwo, cfg);
  EXPECT_EQ(probe, LinearProbe::Zero(4, kTwo));
  for (double p : PredictSoftFromFeature(probe, f[0])) EXPECT_DOUBLE_EQ(p, 0.5);
}

TEST(Probe, SameSeedSameWeights) {
  std::vector<FeatureVector> f;
  std::vector<int> y;
  SeparableFeatures(&f, &y);
  ProbeConfig cfg;
  cfg.epochs = 10;
  cfg.seed = 4;
  EXPECT_EQ(TrainProbeOnFeatures(f, y, kTwo, cfg), TrainProbeOnFeatures(f, y, kTwo, cfg));
}

TEST(Probe, SingleClassIsRejected) {
  const std::vector<FeatureVector> f = {{1.0, 0.0}, {0.5, 0.2}};
  EXPECT_CLMARK_ERROR(TrainProbeOnFeatures(f, {0, 0}, kTwo, ProbeConfig{}),
                      ErrorKind::kInvalidInput);
}

TEST(Probe, EncoderIsFrozen) {
  const EncoderModel enc = EncoderModel::Create(4, 4, 3, {8, 4}, Activation::kRelu, 1);
  const EncoderModel before = enc;
  std::vector<Image> imgs;
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) {
    imgs.push_back(RandomImage(4, 4, 3, 100 + i));
    labels.push_back(i % 3);
  }
  ProbeConfig cfg;
  cfg.epochs = 5;
  TrainProbe(enc, imgs, labels, kThree, cfg);
  EXPECT_EQ(enc, before);
}

TEST(Softmax, DistributionAndShiftInvariance) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> logits(5);
    for (double& l : logits) l = 10 * StandardNormal(rng);
    const std::vector<double> p = Softmax(logits);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
    for (double v : p) EXPECT_GE(v, 0.0);
    std::vector<double> shifted = logits;
    for (double& l : shifted) l += 123.0;
    const std::vector<double> q = Softmax(shifted);
    for (size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-12);
  }
}

TEST(HardLabel, ArgmaxWithLowestIndexTieBreak) {
  const HardLabel h = ArgmaxOneHot({0.2, 0.4, 0.4});
  EXPECT_EQ(h.index, 1);
  EXPECT_EQ(h.one_hot, (std::vector<double>{0.0, 1.0, 0.0}));
  EXPECT_EQ(ArgmaxOneHot({0.0, 0.0, 0.0}).index, 0);
}

TEST(HardLabel, MatchesArgmaxOfSoft) {
  const EncoderModel enc = EncoderModel::Create(4, 4, 3, {8, 4}, Activation::kTanh, 2);
  LinearProbe probe = LinearProbe::Zero(4, kThree);
  Rng rng(6);
  for (double& w : probe.weights) w = StandardNormal(rng);
  for (int i = 0; i < 30; ++i) {
    const Image img = RandomImage(4, 4, 3, 200 + i);
    const std::vector<double> soft = PredictSoft(probe, enc, img);
    const HardLabel hard = PredictHard(probe, enc, img);
    const int expected =
        static_cast<int>(std::max_element(soft.begin(), soft.end()) - soft.begin());
    EXPECT_EQ(hard.index, expected);
    EXPECT_EQ(std::count(hard.one_hot.begin(), hard.one_hot.end(), 1.0), 1);
  }
}

TEST(Probe, DimensionMismatchIsRejected) {
  const EncoderModel enc = EncoderModel::Create(4, 4, 3, {8, 4}, Activation::kRelu, 1);
  const LinearProbe probe = LinearProbe::Zero(5, kTwo);
  EXPECT_CLMARK_ERROR(PredictSoft(probe, enc, RandomImage(4, 4, 3, 1)),
                      ErrorKind::kInvalidInput);
}

TEST(Probe, SerializationRoundTrip) {
  TempDir dir;
  LinearProbe probe = LinearProbe::Zero(3, kThree);
  probe.weights[4] = 0.25;
  probe.bias[2] = -1.5;
  SaveProbe(probe, dir.path() / "p.bin");
  EXPECT_EQ(LoadProbe(dir.path() / "p.bin"), probe);
  EXPECT_THROW(DeserializeProbe("not a probe", "junk"), Error);
}

}  // namespace
}  // namespace clmark
