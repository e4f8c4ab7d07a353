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

// Bi-level trigger optimisation. The inner level trains a surrogate encoder
// on the data plus generator-transformed references; the outer level moves
// the generator to raise the similarity between augmented triggered images
// and augmented references under the frozen surrogate.

#ifndef CLMARK_BLTO_H_
#define CLMARK_BLTO_H_

#include <cstdint>
#include <vector>

#include "clmark/cltrain.h"
#include "clmark/generator.h"

namespace clmark {

struct BltoConfig {
  int inner_steps = 200;
  int outer_steps = 5;
  int alternations = 2;  // 0 returns the initial generator
  double inner_lr = 0.3;
  // Signed-gradient step size in pixel units.
  double outer_lr = 2.0 / 255.0;
  double linf_bound = 8.0 / 255.0;
  int probe_batch = 64;  // pretraining images per outer step
  uint64_t seed = 0;
  TrainConfig surrogate;  // framework, architecture, augmentation

  void Validate() const;
};

// Pretrains on dataset + g(refs) for cfg.inner_steps SGD steps, warm
// starting from `init` when given.
TrainResult InnerTrain(const std::vector<Image>& dataset,
                       const std::vector<Image>& refs, const TriggerGenerator& gen,
                       const BltoConfig& cfg, const EncoderModel* init = nullptr,
                       uint64_t round = 0);

struct OuterObjective {
  double value = 0.0;
  std::vector<double> gradient;  // d value / d delta; empty unless requested
};

// Mean over i of cos(f(t1(g(x_i))), f(t2(r_i))), with r_i cycling through
// the references and the augmentation plans fixed by `seed`.
OuterObjective EvaluateOuterObjective(const TriggerGenerator& gen,
                                      const EncoderModel& surrogate,
                                      const std::vector<Image>& probe_imgs,
                                      const std::vector<Image>& refs,
                                      const AugConfig& aug, uint64_t seed,
                                      bool with_gradient);

struct OuterStepResult {
  TriggerGenerator generator;
  double objective_before = 0.0;
  double objective_after = 0.0;
};

// One projected signed-gradient ascent step on delta with the surrogate
// frozen; before/after are measured on the same augmentation draw.
OuterStepResult OuterStep(const TriggerGenerator& gen, const EncoderModel& surrogate,
                          const std::vector<Image>& probe_imgs,
                          const std::vector<Image>& refs, const BltoConfig& cfg,
                          uint64_t step_seed);

struct BltoResult {
  TriggerGenerator generator;
  // Objective of the initial generator and of the iterate after every outer
  // step, all measured under the final surrogate on one fixed evaluation
  // draw, so the entries differ only in the generator.
  std::vector<double> objective_trace;
  // The same iterates measured under the surrogate current at the time.
  std::vector<double> live_trace;
  // Fraction of outer steps whose after-value was >= the before-value.
  double ascent_fraction = 0.0;
  std::vector<double> inner_loss_trace;
};

BltoResult RunBlto(const std::vector<Image>& dataset, const std::vector<Image>& refs,
                   const BltoConfig& cfg);

}  // namespace clmark

#endif  // CLMARK_BLTO_H_
