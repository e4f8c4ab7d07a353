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

#include "clmark/scenario.h"

#include "clmark/common.h"
#include "clmark/suspectio.h"

namespace clmark {

namespace {

// Seed streams.
constexpr uint64_t kOwnerStream = 1;
constexpr uint64_t kDownstreamStream = 2;
constexpr uint64_t kTriggerStream = 3;
constexpr uint64_t kEmbedStream = 4;
constexpr uint64_t kIpTrainStream = 5;
constexpr uint64_t kCleanTrainStream = 6;
constexpr uint64_t kProbeStream = 7;
constexpr uint64_t kQueryStream = 8;

}  // namespace

TrainConfig ToyTrainConfig(uint64_t seed) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.weight_decay = 0.01;
  return cfg;
}

void RobustnessConfig::Validate() const {
  Require(owner_size > 0 && downstream_size > 0, "toy set sizes must be positive");
  Require(labeled >= 2 && labeled < downstream_size,
          "labeled count must leave held-out downstream items");
  Require(queries > 0, "query count must be positive");
  verify.Validate();
}

ProbedVerification VerifyThroughDownstreamProbe(const EncoderModel& encoder,
                                                const Dataset& owner,
                                                const TriggerSpec& spec,
                                                const RobustnessConfig& cfg) {
  const Dataset downstream = MakeToyDataset(ToyFamily::kStripes, cfg.downstream_size,
                                            DeriveSeed(cfg.seed, kDownstreamStream));
  std::vector<Image> train_imgs, test_imgs;
  std::vector<int> train_labels, test_labels;
  for (size_t i = 0; i < downstream.size(); ++i) {
    const bool labeled = i < static_cast<size_t>(cfg.labeled);
    (labeled ? train_imgs : test_imgs).push_back(downstream.images[i]);
    (labeled ? train_labels : test_labels).push_back(*downstream.manifest.items[i].label);
  }
  ProbeConfig pc;
  pc.seed = DeriveSeed(cfg.seed, kProbeStream);
  LinearProbe probe =
      TrainProbe(encoder, train_imgs, train_labels, downstream.manifest.class_names, pc);

  ProbedVerification out;
  out.probe_accuracy = ProbeAccuracy(probe, EncodeBatch(encoder, test_imgs), test_labels);
  const QuerySet queries = BuildQuerySet(owner, spec, cfg.target_class, cfg.queries,
                                         DeriveSeed(cfg.seed, kQueryStream));
  InProcessSuspect suspect(encoder, std::move(probe));
  const std::string fp = TriggerFingerprint(spec);
  out.soft = Verify(suspect, queries, OutputLevel::kSoftLabel, cfg.verify, fp);
  out.hard = Verify(suspect, queries, OutputLevel::kHardLabel, cfg.verify, fp);
  return out;
}

RobustnessOutcome RunRobustnessScenario(const RobustnessConfig& cfg) {
  cfg.Validate();
  const Dataset owner = MakeToyDataset(ToyFamily::kShapes, cfg.owner_size,
                                       DeriveSeed(cfg.seed, kOwnerStream));
  const Image& first = owner.images.front();
  const TriggerSpec spec = MakeDefaultSpec(cfg.method, first.height(), first.width(),
                                           first.channels(),
                                           DeriveSeed(cfg.seed, kTriggerStream));
  const EmbedOutcome embedded = EmbedWatermark(owner, spec, cfg.target_class, cfg.rate,
                                               DeriveSeed(cfg.seed, kEmbedStream));

  RobustnessOutcome out;
  const EncoderModel ip =
      Pretrain(embedded.released.images,
               ToyTrainConfig(DeriveSeed(cfg.seed, kIpTrainStream)))
          .model;
  ProbedVerification ipv = VerifyThroughDownstreamProbe(ip, owner, spec, cfg);
  out.ip_soft = std::move(ipv.soft);
  out.ip_hard = std::move(ipv.hard);
  out.ip_probe_accuracy = ipv.probe_accuracy;
  if (cfg.with_baseline) {
    const EncoderModel clean =
        Pretrain(owner.images, ToyTrainConfig(DeriveSeed(cfg.seed, kCleanTrainStream)))
            .model;
    ProbedVerification cv = VerifyThroughDownstreamProbe(clean, owner, spec, cfg);
    out.nonip_soft = std::move(cv.soft);
    out.nonip_hard = std::move(cv.hard);
    out.nonip_probe_accuracy = cv.probe_accuracy;
  }
  return out;
}

}  // namespace clmark
