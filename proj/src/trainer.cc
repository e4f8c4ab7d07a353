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

#include "clmark/cltrain.h"
#include "clmark/common.h"

namespace clmark {

namespace {

// Seed streams.
constexpr uint64_t kInitStream = 1;
constexpr uint64_t kShuffleStream = 2;
constexpr uint64_t kViewStream = 3;
constexpr uint64_t kPredictorStream = 4;

void SgdStep(std::vector<double>& params, const std::vector<double>& grad,
             double lr, double decay) {
  for (size_t i = 0; i < params.size(); ++i)
    params[i] -= lr * (grad[i] + decay * params[i]);
}

void AddInto(std::vector<double>& acc, const std::vector<double>& g) {
  for (size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
}

}  // namespace

std::string FrameworkName(Framework f) {
  return f == Framework::kSimClr ? "simclr" : "simsiam";
}

Framework ParseFramework(const std::string& name) {
  if (name == "simclr") return Framework::kSimClr;
  if (name == "simsiam") return Framework::kSimSiam;
  Fail(ErrorKind::kInvalidInput, "unknown framework '" + name + "'");
}

void TrainConfig::Validate() const {
  Require(temperature > 0.0 && std::isfinite(temperature),
          "temperature must be positive");
  Require(batch_size >= 1, "batch_size must be positive");
  Require(framework != Framework::kSimClr || batch_size >= 2,
          "SimCLR needs batch_size >= 2 for in-batch negatives");
  Require(epochs >= 0, "epochs must be non-negative");
  Require(learning_rate >= 0.0 && std::isfinite(learning_rate),
          "learning_rate must be non-negative");
  Require(weight_decay >= 0.0 && std::isfinite(weight_decay),
          "weight_decay must be non-negative");
  Require(!hidden_and_out.empty(), "encoder needs at least one layer");
  Require(predictor_hidden > 0, "predictor_hidden must be positive");
  Require(input_height >= 0 && input_width >= 0, "input size must be >= 0");
  Require(max_steps >= 0, "max_steps must be non-negative");
  augmentation.Validate();
}

TrainResult Pretrain(const std::vector<Image>& dataset, const TrainConfig& cfg,
                     const EncoderModel* init) {
  cfg.Validate();
  Require(!dataset.empty(), "cannot pretrain on an empty dataset");
  Require(static_cast<size_t>(cfg.batch_size) <= dataset.size(),
          "batch_size " + std::to_string(cfg.batch_size) +
              " exceeds dataset size " + std::to_string(dataset.size()));

  TrainResult result;
  if (init) {
    init->Validate();
    result.model = *init;
  } else {
    const int h = cfg.input_height > 0 ? cfg.input_height : dataset[0].height();
    const int w = cfg.input_width > 0 ? cfg.input_width : dataset[0].width();
    result.model =
        EncoderModel::Create(h, w, dataset[0].channels(), cfg.hidden_and_out,
                             cfg.activation, DeriveSeed(cfg.seed, kInitStream));
  }
  EncoderModel& model = result.model;
  for (const Image& img : dataset)
    Require(img.channels() == model.input_channels,
            "dataset channel count does not match the encoder");

  const bool simsiam = cfg.framework == Framework::kSimSiam;
  if (simsiam) {
    const int d = model.feature_dim();
    result.predictor = EncoderModel::Create(
        1, d, 1, {cfg.predictor_hidden, d}, cfg.activation,
        DeriveSeed(cfg.seed, kPredictorStream));
  }

  const size_t n = dataset.size();
  const size_t b = static_cast<size_t>(cfg.batch_size);
  const int dim = model.input_dim();
  std::vector<size_t> order(n);
  std::vector<double> grad_a, grad_b, grad_p;
  ForwardCache cache1, cache2, pcache1, pcache2;
  Eigen::MatrixXd x1(dim, static_cast<Eigen::Index>(b));
  Eigen::MatrixXd x2(dim, static_cast<Eigen::Index>(b));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), size_t{0});
    Rng shuffle_rng(DeriveSeed(cfg.seed, kShuffleStream, epoch));
    Shuffle(std::span<size_t>(order), shuffle_rng);

    double loss_sum = 0.0;
    int64_t batches = 0;
    for (size_t start = 0; start + b <= n; start += b) {
      if (cfg.max_steps > 0 && result.steps >= cfg.max_steps) break;
      for (size_t i = 0; i < b; ++i) {
        const Image& img = dataset[order[start + i]];
        const uint64_t view_seed =
            DeriveSeed(cfg.seed, kViewStream, static_cast<uint64_t>(result.steps) * b + i);
        x1.col(i) = Flatten(Augment(img, cfg.augmentation, DeriveSeed(view_seed, 1),
                                    model.input_height, model.input_width));
        x2.col(i) = Flatten(Augment(img, cfg.augmentation, DeriveSeed(view_seed, 2),
                                    model.input_height, model.input_width));
      }
      const Eigen::MatrixXd z1 = Forward(model, x1, &cache1);
      const Eigen::MatrixXd z2 = Forward(model, x2, &cache2);

      Eigen::MatrixXd gz1, gz2;
      if (!simsiam) {
        NtXentResult r = NtXentLoss(z1, z2, cfg.temperature);
        loss_sum += r.loss;
        gz1 = std::move(r.grad_z1);
        gz2 = std::move(r.grad_z2);
      } else {
        EncoderModel& pred = *result.predictor;
        const Eigen::MatrixXd p1 = Forward(pred, z1, &pcache1);
        const Eigen::MatrixXd p2 = Forward(pred, z2, &pcache2);
        SimSiamResult r = SimSiamLoss(p1, p2, z1, z2);
        loss_sum += r.loss;
        // The z targets are constants; gradients reach the encoder only
        // through the predictor branch.
        Backward(pred, pcache1, r.grad_p1, &grad_p, &gz1);
        std::vector<double> grad_p2;
        Backward(pred, pcache2, r.grad_p2, &grad_p2, &gz2);
        AddInto(grad_p, grad_p2);
        gz1 += r.grad_z1;
        gz2 += r.grad_z2;
        SgdStep(pred.params, grad_p, cfg.learning_rate, cfg.weight_decay);
      }
      Backward(model, cache1, gz1, &grad_a, nullptr);
      Backward(model, cache2, gz2, &grad_b, nullptr);
      AddInto(grad_a, grad_b);
      SgdStep(model.params, grad_a, cfg.learning_rate, cfg.weight_decay);
      ++result.steps;
      ++batches;
    }
    if (batches > 0) result.loss_trace.push_back(loss_sum / static_cast<double>(batches));
    if (cfg.max_steps > 0 && result.steps >= cfg.max_steps) break;
  }
  model.Validate();
  return result;
}

}  // namespace clmark
