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

#include "clmark/downstream.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "binfmt.h"
#include "clmark/common.h"

namespace clmark {

void LinearProbe::Validate() const {
  Require(num_classes() >= 2, "probe needs at least two classes");
  Require(feature_dim > 0, "probe feature dimension must be positive");
  Require(weights.size() == static_cast<size_t>(feature_dim) * num_classes() &&
              bias.size() == static_cast<size_t>(num_classes()),
          "probe parameter sizes do not match its dimensions");
  for (double v : weights) Require(std::isfinite(v), "probe weights must be finite");
  for (double v : bias) Require(std::isfinite(v), "probe bias must be finite");
}

LinearProbe LinearProbe::Zero(int feature_dim, std::vector<std::string> class_names) {
  LinearProbe p;
  p.feature_dim = feature_dim;
  p.class_names = std::move(class_names);
  p.weights.assign(static_cast<size_t>(feature_dim) * p.class_names.size(), 0.0);
  p.bias.assign(p.class_names.size(), 0.0);
  p.Validate();
  return p;
}

void ProbeConfig::Validate() const {
  Require(epochs >= 0, "probe epochs must be non-negative");
  Require(learning_rate >= 0.0 && std::isfinite(learning_rate),
          "probe learning rate must be non-negative");
  Require(batch_size >= 1, "probe batch size must be positive");
}

std::vector<double> ProbeLogits(const LinearProbe& probe, const FeatureVector& f) {
  Require(static_cast<int>(f.size()) == probe.feature_dim,
          "feature dimension " + std::to_string(f.size()) +
              " does not match probe input " + std::to_string(probe.feature_dim));
  const int k = probe.num_classes();
  std::vector<double> logits(probe.bias);
  for (int i = 0; i < probe.feature_dim; ++i) {
    const double* row = probe.weights.data() + static_cast<size_t>(i) * k;
    for (int c = 0; c < k; ++c) logits[c] += row[c] * f[i];
  }
  return logits;
}

std::vector<double> Softmax(const std::vector<double>& logits) {
  Require(!logits.empty(), "softmax of an empty vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double z = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) z += out[i] = std::exp(logits[i] - m);
  for (double& v : out) v /= z;
  return out;
}

HardLabel ArgmaxOneHot(const std::vector<double>& scores) {
  Require(!scores.empty(), "argmax of an empty vector");
  HardLabel h;
  // max_element returns the first maximum, i.e. the lowest index on ties.
  h.index = static_cast<int>(std::max_element(scores.begin(), scores.end()) -
                             scores.begin());
  h.one_hot.assign(scores.size(), 0.0);
  h.one_hot[h.index] = 1.0;
  return h;
}

LinearProbe TrainProbeOnFeatures(const std::vector<FeatureVector>& features,
                                 const std::vector<int>& labels,
                                 const std::vector<std::string>& class_names,
                                 const ProbeConfig& cfg) {
  cfg.Validate();
  Require(!features.empty(), "probe training set is empty");
  Require(features.size() == labels.size(), "features and labels differ in length");
  const int k = static_cast<int>(class_names.size());
  Require(k >= 2, "probe needs at least two classes");
  std::set<int> seen;
  for (int y : labels) {
    Require(y >= 0 && y < k, "label " + std::to_string(y) + " outside class list");
    seen.insert(y);
  }
  Require(seen.size() >= 2, "probe training data covers a single class");
  const int d = static_cast<int>(features[0].size());
  for (const auto& f : features)
    Require(static_cast<int>(f.size()) == d, "features must share a dimension");

  LinearProbe probe = LinearProbe::Zero(d, class_names);
  double mean_sq = 0.0;
  for (const auto& f : features)
    mean_sq += std::inner_product(f.begin(), f.end(), f.begin(), 0.0);
  mean_sq /= static_cast<double>(features.size());
  const double step = cfg.learning_rate / std::max(1.0, mean_sq);

  const size_t n = features.size();
  std::vector<size_t> order(n);
  std::vector<double> gw(probe.weights.size()), gb(k);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(DeriveSeed(cfg.seed, epoch));
    Shuffle(std::span<size_t>(order), rng);
    for (size_t start = 0; start < n; start += cfg.batch_size) {
      const size_t end = std::min(n, start + cfg.batch_size);
      std::fill(gw.begin(), gw.end(), 0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      for (size_t t = start; t < end; ++t) {
        const FeatureVector& f = features[order[t]];
        std::vector<double> p = Softmax(ProbeLogits(probe, f));
        p[labels[order[t]]] -= 1.0;
        for (int i = 0; i < d; ++i)
          for (int c = 0; c < k; ++c) gw[static_cast<size_t>(i) * k + c] += f[i] * p[c];
        for (int c = 0; c < k; ++c) gb[c] += p[c];
      }
      const double scale = step / static_cast<double>(end - start);
      for (size_t i = 0; i < gw.size(); ++i) probe.weights[i] -= scale * gw[i];
      for (int c = 0; c < k; ++c) probe.bias[c] -= scale * gb[c];
    }
  }
  probe.Validate();
  return probe;
}

LinearProbe TrainProbe(const EncoderModel& encoder,
                       const std::vector<Image>& images,
                       const std::vector<int>& labels,
                       const std::vector<std::string>& class_names,
                       const ProbeConfig& cfg) {
  return TrainProbeOnFeatures(EncodeBatch(encoder, images), labels, class_names,
                              cfg);
}

std::vector<double> PredictSoftFromFeature(const LinearProbe& probe,
                                           const FeatureVector& f) {
  return Softmax(ProbeLogits(probe, f));
}

std::vector<double> PredictSoft(const LinearProbe& probe,
                                const EncoderModel& encoder, const Image& img) {
  return PredictSoftFromFeature(probe, Encode(encoder, img));
}

HardLabel PredictHard(const LinearProbe& probe, const EncoderModel& encoder,
                      const Image& img) {
  return ArgmaxOneHot(PredictSoft(probe, encoder, img));
}

double ProbeAccuracy(const LinearProbe& probe,
                     const std::vector<FeatureVector>& features,
                     const std::vector<int>& labels) {
  Require(!features.empty() && features.size() == labels.size(),
          "accuracy needs matching non-empty features and labels");
  size_t correct = 0;
  for (size_t i = 0; i < features.size(); ++i)
    correct += ArgmaxOneHot(ProbeLogits(probe, features[i])).index == labels[i];
  return static_cast<double>(correct) / static_cast<double>(features.size());
}

std::string SerializeProbe(const LinearProbe& probe) {
  probe.Validate();
  binfmt::Writer w(binfmt::Kind::kProbe);
  w.U32(static_cast<uint32_t>(probe.feature_dim));
  w.U32(static_cast<uint32_t>(probe.num_classes()));
  for (const std::string& name : probe.class_names) w.Str(name);
  w.F64s(probe.weights);
  w.F64s(probe.bias);
  return w.bytes();
}

LinearProbe DeserializeProbe(std::string_view bytes, const std::string& name) {
  binfmt::Reader r(bytes, binfmt::Kind::kProbe, name);
  LinearProbe p;
  p.feature_dim = static_cast<int>(r.U32());
  const uint32_t k = r.U32();
  if (k > 1u << 16) r.Corrupt("implausible class count");
  for (uint32_t i = 0; i < k; ++i) p.class_names.push_back(r.Str());
  p.weights = r.F64s();
  p.bias = r.F64s();
  r.ExpectEnd();
  try {
    p.Validate();
  } catch (const Error& e) {
    r.Corrupt(e.what());
  }
  return p;
}

void SaveProbe(const LinearProbe& probe, const std::filesystem::path& path) {
  binfmt::WriteFile(path, SerializeProbe(probe));
}

LinearProbe LoadProbe(const std::filesystem::path& path) {
  return DeserializeProbe(binfmt::ReadFile(path), path.string());
}

}  // namespace clmark
