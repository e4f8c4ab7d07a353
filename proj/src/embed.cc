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
#include <cstdio>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>

#include "binfmt.h"
#include "clmark/common.h"
#include "clmark/embed.h"

namespace clmark {

void WriteDatasetManifestFiles(const DatasetManifest& m,
                               const std::filesystem::path& dir);

namespace {

using nlohmann::json;

constexpr const char* kWatermarkFile = "watermark.json";

// Seed streams.
constexpr uint64_t kHostStream = 1;
constexpr uint64_t kReferenceStream = 2;
constexpr uint64_t kShadowStream = 3;
constexpr uint64_t kLayoutStream = 4;
constexpr uint64_t kQueryStream = 5;

std::vector<size_t> ShuffledCopy(std::vector<size_t> v, uint64_t seed) {
  Rng rng(seed);
  Shuffle(std::span<size_t>(v), rng);
  return v;
}

Image Compose(const TriggerSpec& spec, const Image& reference,
              const Image& shadow, uint64_t seed) {
  const Image& trigger = std::get<CompositeParams>(spec.params).trigger;
  switch (spec.method) {
    case TriggerMethod::kPoisonedEncoderConcat: {
      const Image triggered = ApplyPatchTrigger(
          shadow, trigger,
          DefaultPatchPosition(shadow.height(), shadow.width(), trigger));
      Rng rng(seed);
      const auto layout = static_cast<ConcatLayout>(UniformIndex(rng, 4));
      return ComposePoisonedEncoder(triggered, reference, layout);
    }
    case TriggerMethod::kCorruptEncoderLayout: {
      // The reference object is the target image at half size on the
      // shadow image as background.
      const Image obj = ResizeNearest(reference, std::max(1, reference.height() / 2),
                                      std::max(1, reference.width() / 2));
      return ComposeCorruptEncoder(obj, trigger, shadow, seed).image;
    }
    case TriggerMethod::kNaLayout:
      return ComposeNa(shadow, reference, trigger).image;
    default:
      Fail(ErrorKind::kInvalidInput, "not a compositing method");
  }
}

}  // namespace

std::string SerializeWatermarkManifest(const WatermarkManifest& m) {
  json sources = json::array();
  for (const auto& [ref, shadow] : m.sources)
    sources.push_back({{"reference", ref}, {"shadow", shadow}});
  return json{{"trigger_fingerprint", m.trigger_fingerprint},
              {"method", TriggerMethodName(m.method)},
              {"rate", m.rate},
              {"target_class", m.target_class},
              {"watermarked_ids", m.watermarked_ids},
              {"seed", m.seed},
              {"sources", sources}}
             .dump(2) +
         "\n";
}

WatermarkManifest ParseWatermarkManifest(const std::string& text,
                                         const std::string& name) {
  WatermarkManifest m;
  try {
    const json j = json::parse(text);
    m.trigger_fingerprint = j.at("trigger_fingerprint").get<std::string>();
    m.method = ParseTriggerMethod(j.at("method").get<std::string>());
    m.rate = j.at("rate").get<double>();
    m.target_class = j.at("target_class").get<int>();
    m.watermarked_ids = j.at("watermarked_ids").get<std::vector<std::string>>();
    m.seed = j.at("seed").get<uint64_t>();
    for (const json& s : j.at("sources"))
      m.sources.emplace_back(s.at("reference").get<std::string>(),
                             s.at("shadow").get<std::string>());
  } catch (const json::exception& e) {
    Fail(ErrorKind::kIo, name + ": malformed watermark manifest (" + e.what() + ")");
  } catch (const Error& e) {
    Fail(ErrorKind::kIo, name + ": " + e.what());
  }
  return m;
}

void SaveWatermarkManifest(const WatermarkManifest& m,
                           const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  binfmt::WriteFile(dir / kWatermarkFile, SerializeWatermarkManifest(m));
}

WatermarkManifest LoadWatermarkManifest(const std::filesystem::path& path) {
  const std::filesystem::path file =
      std::filesystem::is_directory(path) ? path / kWatermarkFile : path;
  return ParseWatermarkManifest(binfmt::ReadFile(file), file.string());
}

size_t WatermarkCount(double rate, size_t dataset_size) {
  Require(rate > 0.0 && rate < 1.0, "watermark rate must be in (0, 1)");
  const auto k = static_cast<size_t>(std::llround(rate * static_cast<double>(dataset_size)));
  Require(k > 0, "rate " + std::to_string(rate) + " on " +
                     std::to_string(dataset_size) +
                     " items rounds to zero watermark samples");
  return k;
}

EmbedOutcome EmbedWatermark(const Dataset& dataset, const TriggerSpec& spec,
                            int target_class, double rate, uint64_t seed) {
  spec.Validate();
  dataset.manifest.Validate();
  Require(target_class >= 0 &&
              static_cast<size_t>(target_class) < dataset.manifest.class_names.size(),
          "target class " + std::to_string(target_class) + " does not exist");
  const size_t k = WatermarkCount(rate, dataset.size());
  const std::vector<size_t> targets = dataset.IndicesOfClass(target_class);
  if (targets.size() < k)
    Fail(ErrorKind::kCapacity,
         "need " + std::to_string(k) + " target-class samples, have " +
             std::to_string(targets.size()));

  EmbedOutcome out;
  out.released = dataset;
  WatermarkManifest& wm = out.manifest;
  wm.trigger_fingerprint = TriggerFingerprint(spec);
  wm.method = spec.method;
  wm.rate = rate;
  wm.target_class = target_class;
  wm.seed = seed;

  if (!IsCompositingMethod(spec.method)) {
    std::vector<size_t> hosts = ShuffledCopy(targets, DeriveSeed(seed, kHostStream));
    hosts.resize(k);
    std::sort(hosts.begin(), hosts.end());
    for (size_t idx : hosts) {
      out.released.images[idx] =
          SnapTo8Bit(ApplyTrigger(spec, dataset.images[idx], idx));
      wm.watermarked_ids.push_back(dataset.manifest.items[idx].id);
    }
  } else {
    const std::vector<size_t> refs =
        ShuffledCopy(targets, DeriveSeed(seed, kReferenceStream));
    std::vector<size_t> all(dataset.size());
    std::iota(all.begin(), all.end(), size_t{0});
    const std::vector<size_t> shadows =
        ShuffledCopy(std::move(all), DeriveSeed(seed, kShadowStream));
    size_t s = 0;
    for (size_t i = 0; i < k; ++i) {
      const size_t ref = refs[i];
      if (shadows[s % shadows.size()] == ref) ++s;
      const size_t shadow = shadows[s++ % shadows.size()];
      char id[32];
      std::snprintf(id, sizeof(id), "wm_%06zu", i);
      Require(std::none_of(dataset.manifest.items.begin(),
                           dataset.manifest.items.end(),
                           [&](const DatasetItem& it) { return it.id == id; }),
              std::string("dataset already contains id ") + id);
      out.released.images.push_back(
          SnapTo8Bit(Compose(spec, dataset.images[ref], dataset.images[shadow],
                             DeriveSeed(seed, kLayoutStream, i))));
      out.released.manifest.items.push_back({id, std::string(id) + ".png", std::nullopt});
      wm.watermarked_ids.push_back(id);
      wm.sources.emplace_back(dataset.manifest.items[ref].id,
                              dataset.manifest.items[shadow].id);
    }
  }
  out.released.manifest.source_hash = DatasetSourceHash(out.released);
  out.released.manifest.created_at = ArtifactTimestamp();
  return out;
}

WatermarkManifest EmbedWatermarkToDir(const std::filesystem::path& dataset_dir,
                                      const TriggerSpec& spec, int target_class,
                                      double rate, uint64_t seed,
                                      const std::filesystem::path& out_dir) {
  const Dataset source = LoadDataset(dataset_dir);
  EmbedOutcome outcome = EmbedWatermark(source, spec, target_class, rate, seed);
  std::filesystem::create_directories(out_dir);

  std::map<std::string, bool> marked;
  for (const std::string& id : outcome.manifest.watermarked_ids) marked[id] = true;
  const auto& items = outcome.released.manifest.items;
  for (size_t i = 0; i < items.size(); ++i) {
    const std::filesystem::path dst = out_dir / items[i].path;
    if (marked.count(items[i].id)) {
      SaveImage(outcome.released.images[i], dst);
    } else {
      binfmt::WriteFile(dst, binfmt::ReadFile(dataset_dir / items[i].path));
    }
  }
  WriteDatasetManifestFiles(outcome.released.manifest, out_dir);
  SaveTriggerSpec(spec, out_dir);
  SaveWatermarkManifest(outcome.manifest, out_dir);
  return outcome.manifest;
}

QuerySet BuildQuerySet(const Dataset& dataset, const TriggerSpec& spec,
                       int target_class, size_t n, uint64_t seed) {
  QuerySet q;
  if (n == 0) return q;
  spec.Validate();
  std::vector<std::vector<size_t>> pools;
  size_t available = 0;
  for (size_t c = 0; c < dataset.manifest.class_names.size(); ++c) {
    if (static_cast<int>(c) == target_class) continue;
    pools.push_back(ShuffledCopy(dataset.IndicesOfClass(static_cast<int>(c)),
                                 DeriveSeed(seed, kQueryStream, c)));
    available += pools.back().size();
  }
  if (available < n)
    Fail(ErrorKind::kCapacity, "need " + std::to_string(n) +
                                   " non-target query samples, have " +
                                   std::to_string(available));
  std::vector<size_t> cursor(pools.size(), 0);
  while (q.clean.size() < n) {
    for (size_t p = 0; p < pools.size() && q.clean.size() < n; ++p) {
      if (cursor[p] >= pools[p].size()) continue;
      const size_t idx = pools[p][cursor[p]++];
      q.clean.push_back(dataset.images[idx]);
      q.watermarked.push_back(ApplyTrigger(spec, dataset.images[idx], idx));
    }
  }
  return q;
}

}  // namespace clmark
