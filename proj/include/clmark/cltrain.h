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

// Miniature contrastive trainer: augmentation, a fully connected encoder
// with hand-written gradients, the NT-Xent and SimSiam objectives, and a
// deterministic SGD loop.

#ifndef CLMARK_CLTRAIN_H_
#define CLMARK_CLTRAIN_H_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clmark/image.h"

namespace clmark {

using FeatureVector = std::vector<double>;

// ---------------------------------------------------------------------------
// Encoder

enum class Activation { kRelu, kTanh };

std::string ActivationName(Activation a);
Activation ParseActivation(const std::string& name);

// Fully connected stack. `layers` lists every width from the flattened
// input to the feature dimension; hidden layers use `activation`, the last
// layer is linear. Parameters are stored per layer as a column-major
// (out x in) weight block followed by the bias.
struct EncoderModel {
  int input_height = 0;
  int input_width = 0;
  int input_channels = 0;
  std::vector<int> layers;
  Activation activation = Activation::kRelu;
  std::vector<double> params;

  int input_dim() const { return layers.empty() ? 0 : layers.front(); }
  int feature_dim() const { return layers.empty() ? 0 : layers.back(); }
  size_t ExpectedParamCount() const;
  void Validate() const;

  // He (ReLU) or Glorot (tanh) uniform weights, zero biases.
  static EncoderModel Create(int input_height, int input_width,
                             int input_channels, std::vector<int> hidden_and_out,
                             Activation activation, uint64_t seed);

  friend bool operator==(const EncoderModel&, const EncoderModel&) = default;
};

// Activations recorded by a forward pass; columns are batch items.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
};

Eigen::MatrixXd Forward(const EncoderModel& model, const Eigen::MatrixXd& x,
                        ForwardCache* cache = nullptr);

// Backpropagates d loss / d output. Either output pointer may be null.
void Backward(const EncoderModel& model, const ForwardCache& cache,
              const Eigen::MatrixXd& grad_out, std::vector<double>* grad_params,
              Eigen::MatrixXd* grad_input);

// Flattened image as a column vector (row-major H x W x C order).
Eigen::VectorXd Flatten(const Image& img);

FeatureVector Encode(const EncoderModel& model, const Image& img);
std::vector<FeatureVector> EncodeBatch(const EncoderModel& model,
                                       const std::vector<Image>& images);

std::string SerializeEncoder(const EncoderModel& model);
EncoderModel DeserializeEncoder(std::string_view bytes, const std::string& name);
void SaveEncoder(const EncoderModel& model, const std::filesystem::path& path);
EncoderModel LoadEncoder(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Augmentation

// Defaults are scaled to 16 px inputs and a pixel-space MLP: mild crops,
// no flip and no grayscale, since the encoder has no translation or mirror
// structure and grayscale erases chroma content entirely.
struct AugConfig {
  double crop_scale_min = 0.9;
  double crop_scale_max = 1.0;
  double flip_prob = 0.0;
  double color_jitter_strength = 0.2;
  double grayscale_prob = 0.0;

  void Validate() const;
  // crop_scale [1, 1], all probabilities and jitter zero.
  static AugConfig Identity();
};

// The random choices of one augmented view, sampled up front so the view is
// a fixed (piecewise linear) function of the input and can be
// differentiated.
struct AugPlan {
  int out_height = 0;
  int out_width = 0;
  int crop_top = 0;
  int crop_left = 0;
  int crop_height = 0;
  int crop_width = 0;
  bool flip = false;
  double brightness = 1.0;
  double contrast = 1.0;
  bool grayscale = false;
};

AugPlan SampleAugPlan(int in_height, int in_width, int out_height,
                      int out_width, const AugConfig& cfg, uint64_t seed);
Image ApplyAugPlan(const Image& img, const AugPlan& plan);
// Vector-Jacobian product: gradient w.r.t. the input image given the
// gradient w.r.t. the augmented view.
std::vector<double> AugPlanVjp(const Image& img, const AugPlan& plan,
                               std::span<const double> grad_out);

// Random resized crop (nearest neighbour back to the input size, or to
// out_height x out_width when given), horizontal flip, brightness and
// contrast jitter, optional grayscale.
Image Augment(const Image& img, const AugConfig& cfg, uint64_t seed,
              int out_height = 0, int out_width = 0);

// ---------------------------------------------------------------------------
// Objectives. Batches are d x N matrices, one column per sample.

struct NtXentResult {
  double loss = 0.0;
  Eigen::MatrixXd grad_z1;
  Eigen::MatrixXd grad_z2;
};

// NT-Xent over 2N anchors: the positive of z1[:, i] is z2[:, i] and its
// negatives are every other in-batch view; the loss is averaged over both
// view directions.
NtXentResult NtXentLoss(const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2,
                        double temperature);

struct SimSiamResult {
  double loss = 0.0;
  Eigen::MatrixXd grad_p1;
  Eigen::MatrixXd grad_p2;
  Eigen::MatrixXd grad_z1;  // always zero (stop-gradient)
  Eigen::MatrixXd grad_z2;  // always zero (stop-gradient)
};

// Batch mean of -1/2 (cos(p1, z2) + cos(p2, z1)).
SimSiamResult SimSiamLoss(const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2,
                          const Eigen::MatrixXd& z1, const Eigen::MatrixXd& z2);

// ---------------------------------------------------------------------------
// Training

enum class Framework { kSimClr, kSimSiam };

std::string FrameworkName(Framework f);
Framework ParseFramework(const std::string& name);

struct TrainConfig {
  Framework framework = Framework::kSimClr;
  double temperature = 0.5;
  int batch_size = 128;
  int epochs = 30;
  double learning_rate = 0.3;
  // L2 penalty folded into the SGD update; 0 keeps plain SGD.
  double weight_decay = 0.0;
  uint64_t seed = 0;
  AugConfig augmentation;
  std::vector<int> hidden_and_out = {256, 64};
  int predictor_hidden = 64;  // SimSiam 64 -> 64 -> 64 predictor
  Activation activation = Activation::kRelu;
  // Model input size; 0 takes the first image's size. Images of other sizes
  // are resampled by the crop step.
  int input_height = 0;
  int input_width = 0;
  // Stops after this many SGD steps when > 0.
  int64_t max_steps = 0;

  void Validate() const;
};

struct TrainResult {
  EncoderModel model;
  std::optional<EncoderModel> predictor;  // SimSiam only
  std::vector<double> loss_trace;         // mean loss per epoch
  int64_t steps = 0;
};

// Trains from `init` when given, otherwise from a seeded initialization.
TrainResult Pretrain(const std::vector<Image>& dataset, const TrainConfig& cfg,
                     const EncoderModel* init = nullptr);

}  // namespace clmark

#endif  // CLMARK_CLTRAIN_H_
