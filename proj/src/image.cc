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

#include "clmark/common.h"
#include "clmark/image.h"

namespace clmark {

namespace {

double Clamp01(double v) {
  // NaN maps to 0 so the [0, 1] invariant has no escape hatch.
  if (!(v >= 0.0)) return 0.0;
  return v > 1.0 ? 1.0 : v;
}

void CheckDims(int h, int w, int c) {
  Require(h >= 0 && w >= 0, "image dimensions must be non-negative");
  Require(c == 1 || c == 3, "image must have 1 or 3 channels, got " +
                                std::to_string(c));
}

}  // namespace

Tensor3::Tensor3(int h, int w, int c, double fill)
    : height(h),
      width(w),
      channels(c),
      data(static_cast<size_t>(h) * w * c, fill) {}

Image::Image(int height, int width, int channels, ColorSpace colorspace,
             double fill)
    : colorspace_(colorspace) {
  CheckDims(height, width, channels);
  pixels_ = Tensor3(height, width, channels, Clamp01(fill));
}

Image::Image(int height, int width, int channels, std::vector<double> data,
             ColorSpace colorspace)
    : colorspace_(colorspace) {
  CheckDims(height, width, channels);
  Require(data.size() == static_cast<size_t>(height) * width * channels,
          "image data length " + std::to_string(data.size()) +
              " does not match " + std::to_string(height) + "x" +
              std::to_string(width) + "x" + std::to_string(channels));
  for (double& v : data) v = Clamp01(v);
  pixels_.height = height;
  pixels_.width = width;
  pixels_.channels = channels;
  pixels_.data = std::move(data);
}

Image Image::FromTensor(const Tensor3& tensor, ColorSpace colorspace) {
  return Image(tensor.height, tensor.width, tensor.channels, tensor.data,
               colorspace);
}

void Image::set(int y, int x, int c, double value) {
  pixels_.at(y, x, c) = Clamp01(value);
}

void Image::Paste(const Image& src, int top, int left) {
  Require(src.channels() == channels(), "paste channel mismatch");
  Require(top >= 0 && left >= 0 && top + src.height() <= height() &&
              left + src.width() <= width(),
          "pasted region exceeds image bounds");
  for (int y = 0; y < src.height(); ++y) {
    const auto row = src.data().subspan(
        src.tensor().index(y, 0, 0),
        static_cast<size_t>(src.width()) * src.channels());
    std::copy(row.begin(), row.end(),
              pixels_.data.begin() +
                  static_cast<std::ptrdiff_t>(pixels_.index(top + y, left, 0)));
  }
}

Image Image::Crop(int top, int left, int h, int w) const {
  Require(top >= 0 && left >= 0 && h >= 0 && w >= 0 && top + h <= height() &&
              left + w <= width(),
          "crop exceeds image bounds");
  Image out(h, w, channels(), colorspace_);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels(); ++c)
        out.pixels_.at(y, x, c) = pixels_.at(top + y, left + x, c);
  return out;
}

Image ResizeNearest(const Image& img, int height, int width) {
  Require(height > 0 && width > 0, "resize target must be positive");
  Require(!img.empty(), "cannot resize an empty image");
  if (img.height() == height && img.width() == width) return img;
  Tensor3 out(height, width, img.channels());
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(img.height() - 1,
                            static_cast<int>(static_cast<long>(y) *
                                             img.height() / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(img.width() - 1,
                              static_cast<int>(static_cast<long>(x) *
                                               img.width() / width));
      for (int c = 0; c < img.channels(); ++c)
        out.at(y, x, c) = img.at(sy, sx, c);
    }
  }
  return Image::FromTensor(out, img.colorspace());
}

Image PadToMultiple(const Image& img, int multiple) {
  Require(multiple > 0, "pad multiple must be positive");
  const int h = (img.height() + multiple - 1) / multiple * multiple;
  const int w = (img.width() + multiple - 1) / multiple * multiple;
  if (h == img.height() && w == img.width()) return img;
  Require(!img.empty(), "cannot pad an empty image");
  Tensor3 out(h, w, img.channels());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < img.channels(); ++c)
        out.at(y, x, c) = img.at(std::min(y, img.height() - 1),
                                 std::min(x, img.width() - 1), c);
  return Image::FromTensor(out, img.colorspace());
}

}  // namespace clmark
