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

// Image representation, YCbCr conversion, blockwise DCT and the 8-bit
// PNG/PPM codecs. Every trigger and fidelity computation works on these.

#ifndef CLMARK_IMAGE_H_
#define CLMARK_IMAGE_H_

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace clmark {

// Unclamped H x W x C scalar field, row-major with interleaved channels.
// Used for DCT coefficients and intermediate color math.
struct Tensor3 {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(int h, int w, int c, double fill = 0.0);

  size_t index(int y, int x, int c) const {
    return (static_cast<size_t>(y) * width + x) * channels + c;
  }
  double& at(int y, int x, int c) { return data[index(y, x, c)]; }
  double at(int y, int x, int c) const { return data[index(y, x, c)]; }
  bool SameShape(const Tensor3& other) const {
    return height == other.height && width == other.width &&
           channels == other.channels;
  }
};

enum class ColorSpace { kRgb, kYCbCr };

// An image whose samples always lie in [0, 1]. Construction and every
// mutation clamp, so no public path can produce an out-of-range value.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels,
        ColorSpace colorspace = ColorSpace::kRgb, double fill = 0.0);
  // Validates the length and clamps every sample.
  Image(int height, int width, int channels, std::vector<double> data,
        ColorSpace colorspace = ColorSpace::kRgb);
  static Image FromTensor(const Tensor3& tensor,
                          ColorSpace colorspace = ColorSpace::kRgb);

  int height() const { return pixels_.height; }
  int width() const { return pixels_.width; }
  int channels() const { return pixels_.channels; }
  ColorSpace colorspace() const { return colorspace_; }
  size_t size() const { return pixels_.data.size(); }
  bool empty() const { return pixels_.data.empty(); }

  double at(int y, int x, int c) const { return pixels_.at(y, x, c); }
  void set(int y, int x, int c, double value);

  std::span<const double> data() const { return pixels_.data; }
  const Tensor3& tensor() const { return pixels_; }

  bool SameShape(const Image& other) const {
    return pixels_.SameShape(other.pixels_);
  }

  // Copies `src` into this image with its top-left corner at (top, left).
  // The rectangle must fit.
  void Paste(const Image& src, int top, int left);
  Image Crop(int top, int left, int height, int width) const;

  friend bool operator==(const Image& a, const Image& b) {
    return a.colorspace_ == b.colorspace_ && a.pixels_.SameShape(b.pixels_) &&
           a.pixels_.data == b.pixels_.data;
  }

 private:
  Tensor3 pixels_;
  ColorSpace colorspace_ = ColorSpace::kRgb;
};

// Nearest-neighbour resample to (height, width).
Image ResizeNearest(const Image& img, int height, int width);

// Edge-replicating pad so both dimensions become multiples of `multiple`.
Image PadToMultiple(const Image& img, int multiple);

// ---------------------------------------------------------------------------
// Color conversion

enum class YCbCrRange { kFull, kStudio };

Image RgbToYCbCr(const Image& img, YCbCrRange range = YCbCrRange::kFull);
Image YCbCrToRgb(const Image& img, YCbCrRange range = YCbCrRange::kFull);

// Raw (unclamped) variants for pipelines that clamp once at the end.
Tensor3 RgbToYCbCrRaw(const Tensor3& rgb, YCbCrRange range);
Tensor3 YCbCrToRgbRaw(const Tensor3& ycc, YCbCrRange range);

// Luma plane (BT.601 weights) of a 3-channel image; 1-channel passes through.
Image ToLuma(const Image& img);

// ---------------------------------------------------------------------------
// Blockwise DCT

struct DctBlockPlan {
  int block_size = 8;
  std::set<int> channel_mask = {0, 1, 2};
};

void ValidatePlan(const DctBlockPlan& plan, int height, int width,
                  int channels);

// Orthonormal type-II DCT of every block_size x block_size block of each
// masked channel. Unmasked channels are copied through.
Tensor3 Dct2Blockwise(const Tensor3& img, const DctBlockPlan& plan);
Tensor3 Dct2Blockwise(const Image& img, const DctBlockPlan& plan);

// Exact inverse of Dct2Blockwise. The result is not clamped; wrap it in
// Image::FromTensor when a clamped image is wanted.
Tensor3 Idct2Blockwise(const Tensor3& coeffs, const DctBlockPlan& plan);

// ---------------------------------------------------------------------------
// Codecs (8-bit PNG and binary PPM). Samples are quantized with
// round(v * 255) on save.

Image LoadImage(const std::filesystem::path& path);
void SaveImage(const Image& img, const std::filesystem::path& path);

std::vector<unsigned char> EncodePng(const Image& img);
Image DecodePng(std::span<const unsigned char> bytes, const std::string& name);
std::vector<unsigned char> EncodePpm(const Image& img);
Image DecodePpm(std::span<const unsigned char> bytes, const std::string& name);

// Quantized 8-bit samples, as written by the codecs.
std::vector<unsigned char> QuantizeTo8Bit(const Image& img);
// The image after an 8-bit encode/decode round trip.
Image SnapTo8Bit(const Image& img);

}  // namespace clmark

#endif  // CLMARK_IMAGE_H_
