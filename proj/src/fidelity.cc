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

#include "clmark/fidelity.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <nlohmann/json.hpp>

#include "clmark/common.h"

namespace clmark {

double Ssim(const Image& a, const Image& b) {
  Require(a.SameShape(b), "SSIM inputs differ in shape");
  Require(!a.empty(), "SSIM of empty images");
  const Image la = ToLuma(a);
  const Image lb = ToLuma(b);
  const int h = la.height(), w = la.width();
  const int win = std::min({kSsimWindow, h, w});
  const double c1 = (0.01 * kSsimDynamicRange) * (0.01 * kSsimDynamicRange);
  const double c2 = (0.03 * kSsimDynamicRange) * (0.03 * kSsimDynamicRange);
  const double count = static_cast<double>(win) * win;

  double total = 0.0;
  int windows = 0;
  for (int y0 = 0; y0 + win <= h; ++y0) {
    for (int x0 = 0; x0 + win <= w; ++x0) {
      double sa = 0, sb = 0;
      for (int y = y0; y < y0 + win; ++y)
        for (int x = x0; x < x0 + win; ++x) {
          sa += la.at(y, x, 0);
          sb += lb.at(y, x, 0);
        }
      const double ma = sa / count, mb = sb / count;
      double va = 0, vb = 0, cov = 0;
      for (int y = y0; y < y0 + win; ++y)
        for (int x = x0; x < x0 + win; ++x) {
          const double da = la.at(y, x, 0) - ma, db = lb.at(y, x, 0) - mb;
          va += da * da;
          vb += db * db;
          cov += da * db;
        }
      va /= count;
      vb /= count;
      cov /= count;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++windows;
    }
  }
  return total / windows;
}

FidelityReport ComputeFidelity(const Dataset& clean, const Dataset& watermarked,
                               const WatermarkManifest& manifest) {
  Require(!manifest.watermarked_ids.empty(),
          "watermark manifest lists no items; nothing to report");
  FidelityReport r;
  r.method = TriggerMethodName(manifest.method);
  if (IsCompositingMethod(manifest.method)) {
    r.applicable = false;
    return r;
  }
  std::map<std::string, size_t> clean_index, marked_index;
  for (size_t i = 0; i < clean.manifest.items.size(); ++i)
    clean_index[clean.manifest.items[i].id] = i;
  for (size_t i = 0; i < watermarked.manifest.items.size(); ++i)
    marked_index[watermarked.manifest.items[i].id] = i;
  r.min = 1.0;
  for (const std::string& id : manifest.watermarked_ids) {
    const auto c = clean_index.find(id);
    const auto m = marked_index.find(id);
    if (c == clean_index.end())
      Fail(ErrorKind::kIo, "item '" + id + "' is missing from the clean dataset");
    if (m == marked_index.end())
      Fail(ErrorKind::kIo, "item '" + id + "' is missing from the watermarked dataset");
    const double s = Ssim(clean.images[c->second], watermarked.images[m->second]);
    r.items.emplace_back(id, s);
    r.mean += s;
    r.min = std::min(r.min, s);
  }
  r.mean /= static_cast<double>(r.items.size());
  return r;
}

FidelityReport FidelityFromDirs(const std::filesystem::path& manifest,
                                const std::filesystem::path& clean_dir,
                                const std::filesystem::path& watermarked_dir) {
  const WatermarkManifest m = LoadWatermarkManifest(manifest);
  Require(!m.watermarked_ids.empty(),
          "watermark manifest lists no items; nothing to report");
  if (IsCompositingMethod(m.method)) return ComputeFidelity({}, {}, m);
  return ComputeFidelity(LoadDataset(clean_dir), LoadDataset(watermarked_dir), m);
}

std::string FidelityCsv(const FidelityReport& r) {
  if (!r.applicable) return "id,ssim\n# not applicable: " + r.method + " adds new items\n";
  std::string out = "id,ssim\n";
  char buf[64];
  for (const auto& [id, s] : r.items) {
    std::snprintf(buf, sizeof(buf), ",%.9g\n", s);
    out += id + buf;
  }
  return out;
}

std::string FidelityJson(const FidelityReport& r) {
  nlohmann::json j = {{"method", r.method}, {"applicable", r.applicable}};
  if (r.applicable) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& [id, s] : r.items) items.push_back({{"id", id}, {"ssim", s}});
    j["items"] = items;
    j["count"] = r.items.size();
    j["mean"] = r.mean;
    j["min"] = r.min;
  } else {
    j["note"] = "not applicable: compositing methods add new items with no clean host";
  }
  return j.dump(2) + "\n";
}

}  // namespace clmark
