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

#include "clmark/blto.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "clmark/common.h"

namespace clmark {

namespace {

// Seed streams.
constexpr uint64_t kInnerStream = 1;
constexpr uint64_t kProbeStream = 2;
constexpr uint64_t kStepStream = 3;
constexpr uint64_t kEvalStream = 4;

std::vector<Image> SampleImages(const std::vector<Image>& pool, size_t k,
                                uint64_t seed) {
  std::vector<size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  Rng rng(seed);
  Shuffle(std::span<size_t>(idx), rng);
  idx.resize(std::min(k, idx.size()));
  std::vector<Image> out;
  out.reserve(idx.size());
  for (size_t i : idx) out.push_back(pool[i]);
  return out;
}

}  // namespace

void BltoConfig::Validate() const {
  Require(inner_steps >= 1 && outer_steps >= 1, "BLTO step counts must be >= 1");
  Require(alternations >= 0, "BLTO alternations must be non-negative");
  Require(inner_lr > 0.0 && outer_lr > 0.0, "BLTO learning rates must be positive");
  Require(linf_bound > 0.0 && std::isfinite(linf_bound),
          "BLTO L-inf bound must be positive");
  Require(probe_batch >= 1, "BLTO probe batch must be positive");
  surrogate.Validate();
}

TrainResult InnerTrain(const std::vector<Image>& dataset,
                       const std::vector<Image>& refs, const TriggerGenerator& gen,
                       const BltoConfig& cfg, const EncoderModel* init,
                       uint64_t round) {
  cfg.Validate();
  Require(!refs.empty(), "BLTO needs at least one reference image");
  std::vector<Image> poisoned = dataset;
  for (const Image& r : refs) poisoned.push_back(ApplyGenerator(gen, r));

  TrainConfig tc = cfg.surrogate;
  tc.learning_rate = cfg.inner_lr;
  tc.max_steps = cfg.inner_steps;
  tc.seed = DeriveSeed(cfg.seed, kInnerStream, round);
  const size_t per_epoch = poisoned.size() / static_cast<size_t>(tc.batch_size);
  Require(per_epoch >= 1, "surrogate batch size exceeds the poisoned set");
  tc.epochs = static_cast<int>((static_cast<size_t>(cfg.inner_steps) + per_epoch - 1) /
                               per_epoch);
  return Pretrain(poisoned, tc, init);
}

OuterObjective EvaluateOuterObjective(const TriggerGenerator& gen,
                                      const EncoderModel& surrogate,
                                      const std::vector<Image>& probe_imgs,
                                      const std::vector<Image>& refs,
                                      const AugConfig& aug, uint64_t seed,
                                      bool with_gradient) {
  Require(!probe_imgs.empty() && !refs.empty(),
          "outer objective needs probe and reference images");
  const size_t p = probe_imgs.size();
  const int dim = surrogate.input_dim();
  const int oh = surrogate.input_height, ow = surrogate.input_width;

  std::vector<Image> triggered;
  std::vector<AugPlan> plans;
  Eigen::MatrixXd x1(dim, static_cast<Eigen::Index>(p));
  Eigen::MatrixXd x2(dim, static_cast<Eigen::Index>(p));
  for (size_t i = 0; i < p; ++i) {
    triggered.push_back(ApplyGenerator(gen, probe_imgs[i]));
    const Image& gx = triggered.back();
    plans.push_back(SampleAugPlan(gx.height(), gx.width(), oh, ow, aug,
                                  DeriveSeed(seed, i, 1)));
    x1.col(static_cast<Eigen::Index>(i)) = Flatten(ApplyAugPlan(gx, plans.back()));
    const Image& r = refs[i % refs.size()];
    x2.col(static_cast<Eigen::Index>(i)) = Flatten(ApplyAugPlan(
        r, SampleAugPlan(r.height(), r.width(), oh, ow, aug, DeriveSeed(seed, i, 2))));
  }

  ForwardCache cache;
  const Eigen::MatrixXd a = Forward(surrogate, x1, &cache);
  const Eigen::MatrixXd b = Forward(surrogate, x2);
  OuterObjective out;
  Eigen::MatrixXd grad_a(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    const double na = a.col(i).norm(), nb = b.col(i).norm();
    Require(na > 0.0 && nb > 0.0, "surrogate produced a zero feature");
    const double cos = a.col(i).dot(b.col(i)) / (na * nb);
    out.value += cos;
    grad_a.col(i) = (b.col(i) / nb - cos * a.col(i) / na) / (na * static_cast<double>(p));
  }
  out.value /= static_cast<double>(p);
  if (!with_gradient) return out;

  Eigen::MatrixXd grad_x;
  Backward(surrogate, cache, grad_a, nullptr, &grad_x);
  out.gradient.assign(gen.delta.size(), 0.0);
  for (size_t i = 0; i < p; ++i) {
    const Eigen::VectorXd col = grad_x.col(static_cast<Eigen::Index>(i));
    const std::vector<double> g_img = AugPlanVjp(
        triggered[i], plans[i], std::span<const double>(col.data(), col.size()));
    const std::vector<double> mask = GeneratorPassMask(gen, probe_imgs[i]);
    for (size_t k = 0; k < g_img.size(); ++k) out.gradient[k] += g_img[k] * mask[k];
  }
  return out;
}

OuterStepResult OuterStep(const TriggerGenerator& gen, const EncoderModel& surrogate,
                          const std::vector<Image>& probe_imgs,
                          const std::vector<Image>& refs, const BltoConfig& cfg,
                          uint64_t step_seed) {
  const AugConfig& aug = cfg.surrogate.augmentation;
  const OuterObjective before = EvaluateOuterObjective(gen, surrogate, probe_imgs, refs,
                                                       aug, step_seed, true);
  OuterStepResult r;
  r.generator = gen;
  for (size_t k = 0; k < gen.delta.size(); ++k) {
    const double g = before.gradient[k];
    const double s = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
    r.generator.delta[k] = std::clamp(gen.delta[k] + cfg.outer_lr * s,
                                      -gen.linf_bound, gen.linf_bound);
  }
  r.objective_before = before.value;
  r.objective_after = EvaluateOuterObjective(r.generator, surrogate, probe_imgs, refs,
                                             aug, step_seed, false)
                          .value;
  return r;
}

BltoResult RunBlto(const std::vector<Image>& dataset, const std::vector<Image>& refs,
                   const BltoConfig& cfg) {
  cfg.Validate();
  Require(!dataset.empty(), "BLTO needs a pretraining dataset");
  Require(!refs.empty(), "BLTO needs at least one reference image");
  const Image& shape = refs.front();
  BltoResult result;
  result.generator = TriggerGenerator::Zero(shape.height(), shape.width(),
                                            shape.channels(), cfg.linf_bound);
  if (cfg.alternations == 0) return result;

  const std::vector<Image> eval_imgs =
      SampleImages(dataset, static_cast<size_t>(cfg.probe_batch),
                   DeriveSeed(cfg.seed, kEvalStream));
  const uint64_t eval_seed = DeriveSeed(cfg.seed, kEvalStream, 1);
  const AugConfig& aug = cfg.surrogate.augmentation;

  std::optional<EncoderModel> surrogate;
  std::vector<TriggerGenerator> iterates = {result.generator};
  int ascents = 0, steps = 0;
  for (int a = 0; a < cfg.alternations; ++a) {
    TrainResult inner = InnerTrain(dataset, refs, result.generator, cfg,
                                   surrogate ? &*surrogate : nullptr,
                                   static_cast<uint64_t>(a));
    surrogate = std::move(inner.model);
    result.inner_loss_trace.insert(result.inner_loss_trace.end(),
                                   inner.loss_trace.begin(), inner.loss_trace.end());
    if (a == 0)
      result.live_trace.push_back(EvaluateOuterObjective(
          result.generator, *surrogate, eval_imgs, refs, aug, eval_seed, false).value);
    for (int s = 0; s < cfg.outer_steps; ++s) {
      const uint64_t k = static_cast<uint64_t>(a) * cfg.outer_steps + s;
      const std::vector<Image> probe = SampleImages(
          dataset, static_cast<size_t>(cfg.probe_batch), DeriveSeed(cfg.seed, kProbeStream, k));
      OuterStepResult step = OuterStep(result.generator, *surrogate, probe, refs, cfg,
                                       DeriveSeed(cfg.seed, kStepStream, k));
      ascents += step.objective_after >= step.objective_before;
      ++steps;
      result.generator = std::move(step.generator);
      iterates.push_back(result.generator);
      result.live_trace.push_back(EvaluateOuterObjective(
          result.generator, *surrogate, eval_imgs, refs, aug, eval_seed, false).value);
    }
  }
  for (const TriggerGenerator& g : iterates)
    result.objective_trace.push_back(
        EvaluateOuterObjective(g, *surrogate, eval_imgs, refs, aug, eval_seed, false).value);
  result.ascent_fraction = static_cast<double>(ascents) / steps;
  return result;
}

}  // namespace clmark
