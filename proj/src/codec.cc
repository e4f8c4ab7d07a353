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

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "clmark/common.h"
#include "clmark/image.h"

namespace clmark {

namespace {

std::vector<unsigned char> ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) Fail(ErrorKind::kIo, "read failed: " + path.string());
  return bytes;
}

void WriteAll(const std::filesystem::path& path,
              std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorKind::kIo, "write failed: " + path.string());
}

bool IsPpm(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".ppm" || ext == ".pnm";
}

Image FromBytes(int h, int w, int c, std::span<const unsigned char> bytes) {
  std::vector<double> data(bytes.size());
  for (size_t i = 0; i < bytes.size(); ++i) data[i] = bytes[i] / 255.0;
  return Image(h, w, c, std::move(data));
}

Image AsRgb(const Image& img) {
  return img.colorspace() == ColorSpace::kRgb ? img : YCbCrToRgb(img);
}

}  // namespace

std::vector<unsigned char> QuantizeTo8Bit(const Image& img) {
  std::vector<unsigned char> out(img.size());
  const auto d = img.data();
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<unsigned char>(std::lround(d[i] * 255.0));
  return out;
}

std::vector<unsigned char> EncodePng(const Image& img) {
  Require(!img.empty(), "cannot encode an empty image");
  const Image rgb = AsRgb(img);
  const std::vector<unsigned char> pixels = QuantizeTo8Bit(rgb);
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(rgb.width());
  image.height = static_cast<png_uint_32>(rgb.height());
  image.format = rgb.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0,
                                 nullptr)) {
    Fail(ErrorKind::kIo, std::string("png encode failed: ") + image.message);
  }
  std::vector<unsigned char> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(),
                                 0, nullptr)) {
    Fail(ErrorKind::kIo, std::string("png encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

Image DecodePng(std::span<const unsigned char> bytes, const std::string& name) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    Fail(ErrorKind::kIo, name + ": not a readable PNG (" + image.message + ")");
  }
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const int channels = gray ? 1 : 3;
  std::vector<unsigned char> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    Fail(ErrorKind::kIo, name + ": corrupt PNG (" + message + ")");
  }
  return FromBytes(static_cast<int>(image.height),
                   static_cast<int>(image.width), channels, pixels);
}

std::vector<unsigned char> EncodePpm(const Image& img) {
  Require(!img.empty(), "cannot encode an empty image");
  const Image rgb = AsRgb(img);
  Require(rgb.channels() == 3, "PPM (P6) needs a 3-channel image");
  const std::string header = "P6\n" + std::to_string(rgb.width()) + " " +
                             std::to_string(rgb.height()) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  const std::vector<unsigned char> pixels = QuantizeTo8Bit(rgb);
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

Image DecodePpm(std::span<const unsigned char> bytes, const std::string& name) {
  size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    long value = 0;
    size_t digits = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos]) && digits < 9) {
      value = value * 10 + (bytes[pos++] - '0');
      ++digits;
    }
    if (digits == 0) Fail(ErrorKind::kIo, name + ": malformed PPM header");
    return value;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
    Fail(ErrorKind::kIo, name + ": not a binary PPM (P6)");
  pos = 2;
  const long w = read_int(), h = read_int(), maxval = read_int();
  if (maxval != 255)
    Fail(ErrorKind::kIo, name + ": only 8-bit PPM is supported");
  if (w <= 0 || h <= 0) Fail(ErrorKind::kIo, name + ": empty PPM");
  if (pos >= bytes.size() || !std::isspace(bytes[pos]))
    Fail(ErrorKind::kIo, name + ": malformed PPM header");
  ++pos;
  const size_t need = static_cast<size_t>(w) * h * 3;
  if (bytes.size() - pos < need)
    Fail(ErrorKind::kIo, name + ": truncated PPM pixel data");
  return FromBytes(static_cast<int>(h), static_cast<int>(w), 3,
                   bytes.subspan(pos, need));
}

Image LoadImage(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = ReadAll(path);
  return IsPpm(path) ? DecodePpm(bytes, path.string())
                     : DecodePng(bytes, path.string());
}

void SaveImage(const Image& img, const std::filesystem::path& path) {
  WriteAll(path, IsPpm(path) ? EncodePpm(img) : EncodePng(img));
}

Image SnapTo8Bit(const Image& img) {
  const auto bytes = QuantizeTo8Bit(img);
  std::vector<double> v(bytes.size());
  for (size_t i = 0; i < bytes.size(); ++i) v[i] = bytes[i] / 255.0;
  return Image(img.height(), img.width(), img.channels(), std::move(v),
               img.colorspace());
}

}  // namespace clmark
