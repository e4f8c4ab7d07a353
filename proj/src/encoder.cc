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

#include "binfmt.h"
#include "clmark/cltrain.h"
#include "clmark/common.h"

namespace clmark {

namespace {

using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

// Offset of layer l's weight block in the flat parameter vector.
size_t LayerOffset(const std::vector<int>& layers, size_t l) {
  size_t offset = 0;
  for (size_t i = 0; i < l; ++i)
    offset += static_cast<size_t>(layers[i + 1]) * layers[i] + layers[i + 1];
  return offset;
}

void Activate(Activation a, Eigen::MatrixXd& m) {
  if (a == Activation::kRelu)
    m = m.cwiseMax(0.0);
  else
    m = m.array().tanh().matrix();
}

// Multiplies `grad` in place by the activation derivative at `pre`.
void ActivationGrad(Activation a, const Eigen::MatrixXd& pre,
                    Eigen::MatrixXd& grad) {
  if (a == Activation::kRelu) {
    grad = (pre.array() > 0.0).select(grad, 0.0);
  } else {
    grad.array() *= 1.0 - pre.array().tanh().square();
  }
}

}  // namespace

std::string ActivationName(Activation a) {
  return a == Activation::kRelu ? "relu" : "tanh";
}

Activation ParseActivation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  Fail(ErrorKind::kInvalidInput, "unknown activation '" + name + "'");
}

size_t EncoderModel::ExpectedParamCount() const {
  return layers.size() < 2 ? 0 : LayerOffset(layers, layers.size() - 1);
}

void EncoderModel::Validate() const {
  Require(layers.size() >= 2, "encoder needs at least one layer");
  for (int width : layers) Require(width > 0, "layer widths must be positive");
  Require(input_height > 0 && input_width > 0 &&
              (input_channels == 1 || input_channels == 3),
          "encoder input shape must be positive with 1 or 3 channels");
  Require(static_cast<int64_t>(input_height) * input_width * input_channels ==
              layers.front(),
          "encoder input shape does not match the first layer width");
  Require(params.size() == ExpectedParamCount(),
          "encoder has " + std::to_string(params.size()) +
              " parameters, architecture needs " +
              std::to_string(ExpectedParamCount()));
  Require(std::all_of(params.begin(), params.end(),
                      [](double v) { return std::isfinite(v); }),
          "encoder parameters must be finite");
}

EncoderModel EncoderModel::Create(int input_height, int input_width,
                                  int input_channels,
                                  std::vector<int> hidden_and_out,
                                  Activation activation, uint64_t seed) {
  EncoderModel model;
  model.input_height = input_height;
  model.input_width = input_width;
  model.input_channels = input_channels;
  model.activation = activation;
  model.layers.push_back(input_height * input_width * input_channels);
  model.layers.insert(model.layers.end(), hidden_and_out.begin(),
                      hidden_and_out.end());
  Require(model.layers.size() >= 2, "encoder needs at least one layer");
  model.params.assign(model.ExpectedParamCount(), 0.0);
  Rng rng(seed);
  for (size_t l = 0; l + 1 < model.layers.size(); ++l) {
    const int in = model.layers[l], out = model.layers[l + 1];
    const double limit = activation == Activation::kRelu
                             ? std::sqrt(6.0 / in)
                             : std::sqrt(6.0 / (in + out));
    const size_t offset = LayerOffset(model.layers, l);
    for (size_t i = 0; i < static_cast<size_t>(in) * out; ++i)
      model.params[offset + i] = UniformRange(rng, -limit, limit);
  }
  model.Validate();
  return model;
}

Eigen::MatrixXd Forward(const EncoderModel& model, const Eigen::MatrixXd& x,
                        ForwardCache* cache) {
  Require(x.rows() == model.input_dim(),
          "input dimension " + std::to_string(x.rows()) +
              " does not match encoder input " +
              std::to_string(model.input_dim()));
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Eigen::MatrixXd h = x;
  const size_t n_layers = model.layers.size() - 1;
  for (size_t l = 0; l < n_layers; ++l) {
    const int in = model.layers[l], out = model.layers[l + 1];
    const size_t offset = LayerOffset(model.layers, l);
    ConstMatMap w(model.params.data() + offset, out, in);
    ConstVecMap b(model.params.data() + offset + static_cast<size_t>(out) * in,
                  out);
    Eigen::MatrixXd z = w * h;
    z.colwise() += b;
    if (cache) {
      cache->inputs.push_back(std::move(h));
      cache->pre.push_back(z);
    }
    if (l + 1 < n_layers) Activate(model.activation, z);
    h = std::move(z);
  }
  return h;
}

void Backward(const EncoderModel& model, const ForwardCache& cache,
              const Eigen::MatrixXd& grad_out, std::vector<double>* grad_params,
              Eigen::MatrixXd* grad_input) {
  const size_t n_layers = model.layers.size() - 1;
  Require(cache.pre.size() == n_layers, "forward cache does not match model");
  if (grad_params) grad_params->assign(model.params.size(), 0.0);
  Eigen::MatrixXd g = grad_out;
  for (size_t l = n_layers; l-- > 0;) {
    if (l + 1 < n_layers) ActivationGrad(model.activation, cache.pre[l], g);
    const int in = model.layers[l], out = model.layers[l + 1];
    const size_t offset = LayerOffset(model.layers, l);
    if (grad_params) {
      Eigen::Map<Eigen::MatrixXd> gw(grad_params->data() + offset, out, in);
      Eigen::Map<Eigen::VectorXd> gb(
          grad_params->data() + offset + static_cast<size_t>(out) * in, out);
      gw.noalias() = g * cache.inputs[l].transpose();
      gb = g.rowwise().sum();
    }
    if (l > 0 || grad_input) {
      ConstMatMap w(model.params.data() + offset, out, in);
      g = w.transpose() * g;
    }
  }
  if (grad_input) *grad_input = std::move(g);
}

Eigen::VectorXd Flatten(const Image& img) {
  const auto d = img.data();
  return ConstVecMap(d.data(), static_cast<Eigen::Index>(d.size()));
}

FeatureVector Encode(const EncoderModel& model, const Image& img) {
  Require(img.height() == model.input_height &&
              img.width() == model.input_width &&
              img.channels() == model.input_channels,
          "image " + std::to_string(img.height()) + "x" +
              std::to_string(img.width()) + "x" +
              std::to_string(img.channels()) +
              " does not match encoder input " +
              std::to_string(model.input_height) + "x" +
              std::to_string(model.input_width) + "x" +
              std::to_string(model.input_channels));
  const Eigen::MatrixXd out = Forward(model, Flatten(img));
  return FeatureVector(out.data(), out.data() + out.size());
}

std::vector<FeatureVector> EncodeBatch(const EncoderModel& model,
                                       const std::vector<Image>& images) {
  std::vector<FeatureVector> out;
  out.reserve(images.size());
  for (const Image& img : images) out.push_back(Encode(model, img));
  return out;
}

std::string SerializeEncoder(const EncoderModel& model) {
  model.Validate();
  binfmt::Writer w(binfmt::Kind::kEncoder);
  w.U32(model.activation == Activation::kRelu ? 0 : 1);
  w.U32(static_cast<uint32_t>(model.input_height));
  w.U32(static_cast<uint32_t>(model.input_width));
  w.U32(static_cast<uint32_t>(model.input_channels));
  w.U32(static_cast<uint32_t>(model.layers.size()));
  for (int width : model.layers) w.U32(static_cast<uint32_t>(width));
  w.F64s(model.params);
  return w.bytes();
}

EncoderModel DeserializeEncoder(std::string_view bytes,
                                const std::string& name) {
  binfmt::Reader r(bytes, binfmt::Kind::kEncoder, name);
  EncoderModel model;
  const uint32_t act = r.U32();
  if (act > 1) r.Corrupt("unknown activation");
  model.activation = act == 0 ? Activation::kRelu : Activation::kTanh;
  model.input_height = static_cast<int>(r.U32());
  model.input_width = static_cast<int>(r.U32());
  model.input_channels = static_cast<int>(r.U32());
  const uint32_t n = r.U32();
  if (n > 64) r.Corrupt("implausible layer count");
  for (uint32_t i = 0; i < n; ++i) model.layers.push_back(static_cast<int>(r.U32()));
  model.params = r.F64s();
  r.ExpectEnd();
  try {
    model.Validate();
  } catch (const Error& e) {
    r.Corrupt(e.what());
  }
  return model;
}

void SaveEncoder(const EncoderModel& model, const std::filesystem::path& path) {
  binfmt::WriteFile(path, SerializeEncoder(model));
}

EncoderModel LoadEncoder(const std::filesystem::path& path) {
  return DeserializeEncoder(binfmt::ReadFile(path), path.string());
}

}  // namespace clmark
