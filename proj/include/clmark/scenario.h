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

// End-to-end toy runs: pretrain on a watermarked toy set, attach a probe
// trained on a second, disjoint toy family, and verify through it.

#ifndef CLMARK_SCENARIO_H_
#define CLMARK_SCENARIO_H_

#include <cstdint>
#include <optional>

#include "clmark/cltrain.h"
#include "clmark/downstream.h"
#include "clmark/embed.h"
#include "clmark/verify.h"

namespace clmark {

// Trainer settings used for toy runs: library defaults plus weight decay
// 0.01, which keeps untouched input directions from carrying random
// initial weights into the features.
TrainConfig ToyTrainConfig(uint64_t seed);

struct RobustnessConfig {
  uint64_t seed = 0;
  TriggerMethod method = TriggerMethod::kPatch;
  int owner_size = 2000;       // shapes family, carries the watermark
  double rate = 0.10;
  int target_class = 0;
  int downstream_size = 2000;  // stripes family
  int labeled = 400;           // downstream items the probe sees
  size_t queries = 100;
  VerifyConfig verify;
  bool with_baseline = true;   // also train a clean encoder for comparison

  void Validate() const;
};

struct RobustnessOutcome {
  VerificationReport ip_soft;
  VerificationReport ip_hard;
  double ip_probe_accuracy = 0.0;  // on held-out downstream items
  std::optional<VerificationReport> nonip_soft;
  std::optional<VerificationReport> nonip_hard;
  std::optional<double> nonip_probe_accuracy;
};

// Trains a probe on the downstream family over `encoder` and verifies it at
// soft and hard levels with queries drawn from the owner's set.
struct ProbedVerification {
  VerificationReport soft;
  VerificationReport hard;
  double probe_accuracy = 0.0;
};
ProbedVerification VerifyThroughDownstreamProbe(const EncoderModel& encoder,
                                                const Dataset& owner,
                                                const TriggerSpec& spec,
                                                const RobustnessConfig& cfg);

RobustnessOutcome RunRobustnessScenario(const RobustnessConfig& cfg);

}  // namespace clmark

#endif  // CLMARK_SCENARIO_H_
