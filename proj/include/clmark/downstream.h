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

// Linear probe on a frozen encoder, producing soft (probability) and hard
// (one-hot) labels.

#ifndef CLMARK_DOWNSTREAM_H_
#define CLMARK_DOWNSTREAM_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "clmark/cltrain.h"

namespace clmark {

struct LinearProbe {
  int feature_dim = 0;
  // Row-major feature_dim x K; logits = weights^T f + bias.
  std::vector<double> weights;
  std::vector<double> bias;
  std::vector<std::string> class_names;

  int num_classes() const { return static_cast<int>(class_names.size()); }
  void Validate() const;
  static LinearProbe Zero(int feature_dim, std::vector<std::string> class_names);

  friend bool operator==(const LinearProbe&, const LinearProbe&) = default;
};

struct ProbeConfig {
  int epochs = 200;
  double learning_rate = 0.5;
  int batch_size = 64;
  uint64_t seed = 0;

  void Validate() const;
};

// Multinomial logistic regression by mini-batch gradient descent. The step
// is divided by max(1, mean squared feature norm) so the schedule does not
// depend on the encoder's output scale.
LinearProbe TrainProbeOnFeatures(const std::vector<FeatureVector>& features,
                                 const std::vector<int>& labels,
                                 const std::vector<std::string>& class_names,
                                 const ProbeConfig& cfg);

// Encodes `images` with the frozen encoder, then trains on the features.
LinearProbe TrainProbe(const EncoderModel& encoder,
                       const std::vector<Image>& images,
                       const std::vector<int>& labels,
                       const std::vector<std::string>& class_names,
                       const ProbeConfig& cfg);

std::vector<double> ProbeLogits(const LinearProbe& probe, const FeatureVector& f);
// Max-shifted softmax.
std::vector<double> Softmax(const std::vector<double>& logits);

struct HardLabel {
  int index = 0;
  std::vector<double> one_hot;
};

// Lowest index wins ties.
HardLabel ArgmaxOneHot(const std::vector<double>& scores);

std::vector<double> PredictSoftFromFeature(const LinearProbe& probe,
                                           const FeatureVector& f);
std::vector<double> PredictSoft(const LinearProbe& probe,
                                const EncoderModel& encoder, const Image& img);
HardLabel PredictHard(const LinearProbe& probe, const EncoderModel& encoder,
                      const Image& img);

double ProbeAccuracy(const LinearProbe& probe,
                     const std::vector<FeatureVector>& features,
                     const std::vector<int>& labels);

std::string SerializeProbe(const LinearProbe& probe);
LinearProbe DeserializeProbe(std::string_view bytes, const std::string& name);
void SaveProbe(const LinearProbe& probe, const std::filesystem::path& path);
LinearProbe LoadProbe(const std::filesystem::path& path);

}  // namespace clmark

#endif  // CLMARK_DOWNSTREAM_H_
