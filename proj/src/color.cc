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

#include "clmark/common.h"
#include "clmark/image.h"

namespace clmark {

namespace {

// BT.601 luma weights; full-range chroma scale factors follow from them.
constexpr double kKr = 0.299;
constexpr double kKg = 0.587;
constexpr double kKb = 0.114;

constexpr double kStudioLumaOffset = 16.0 / 255.0;
constexpr double kStudioLumaScale = 219.0 / 255.0;
constexpr double kStudioChromaScale = 224.0 / 255.0;

}  // namespace

Tensor3 RgbToYCbCrRaw(const Tensor3& rgb, YCbCrRange range) {
  Require(rgb.channels == 3, "RGB to YCbCr needs 3 channels");
  Tensor3 out(rgb.height, rgb.width, 3);
  for (size_t i = 0; i < rgb.data.size(); i += 3) {
    const double r = rgb.data[i], g = rgb.data[i + 1], b = rgb.data[i + 2];
    const double y = kKr * r + kKg * g + kKb * b;
    double cb = (b - y) / (2.0 * (1.0 - kKb));
    double cr = (r - y) / (2.0 * (1.0 - kKr));
    if (range == YCbCrRange::kFull) {
      out.data[i] = y;
      out.data[i + 1] = cb + 0.5;
      out.data[i + 2] = cr + 0.5;
    } else {
      out.data[i] = kStudioLumaOffset + kStudioLumaScale * y;
      out.data[i + 1] = 0.5 + kStudioChromaScale * cb;
      out.data[i + 2] = 0.5 + kStudioChromaScale * cr;
    }
  }
  return out;
}

Tensor3 YCbCrToRgbRaw(const Tensor3& ycc, YCbCrRange range) {
  Require(ycc.channels == 3, "YCbCr to RGB needs 3 channels");
  Tensor3 out(ycc.height, ycc.width, 3);
  for (size_t i = 0; i < ycc.data.size(); i += 3) {
    double y = ycc.data[i], cb = ycc.data[i + 1] - 0.5,
           cr = ycc.data[i + 2] - 0.5;
    if (range == YCbCrRange::kStudio) {
      y = (y - kStudioLumaOffset) / kStudioLumaScale;
      cb /= kStudioChromaScale;
      cr /= kStudioChromaScale;
    }
    const double r = y + 2.0 * (1.0 - kKr) * cr;
    const double b = y + 2.0 * (1.0 - kKb) * cb;
    const double g = (y - kKr * r - kKb * b) / kKg;
    out.data[i] = r;
    out.data[i + 1] = g;
    out.data[i + 2] = b;
  }
  return out;
}

Image RgbToYCbCr(const Image& img, YCbCrRange range) {
  Require(img.colorspace() == ColorSpace::kRgb,
          "RgbToYCbCr expects an RGB image");
  Require(img.channels() == 3, "RgbToYCbCr expects 3 channels");
  return Image::FromTensor(RgbToYCbCrRaw(img.tensor(), range),
                           ColorSpace::kYCbCr);
}

Image YCbCrToRgb(const Image& img, YCbCrRange range) {
  Require(img.colorspace() == ColorSpace::kYCbCr,
          "YCbCrToRgb expects a YCbCr image");
  Require(img.channels() == 3, "YCbCrToRgb expects 3 channels");
  return Image::FromTensor(YCbCrToRgbRaw(img.tensor(), range),
                           ColorSpace::kRgb);
}

Image ToLuma(const Image& img) {
  if (img.channels() == 1) return img;
  if (img.colorspace() == ColorSpace::kYCbCr) {
    Tensor3 out(img.height(), img.width(), 1);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = img.data()[3 * i];
    return Image::FromTensor(out);
  }
  Tensor3 out(img.height(), img.width(), 1);
  const auto d = img.data();
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = kKr * d[3 * i] + kKg * d[3 * i + 1] + kKb * d[3 * i + 2];
  return Image::FromTensor(out);
}

}  // namespace clmark
