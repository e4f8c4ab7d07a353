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

// Datasets on disk and in memory, the synthetic toy datasets, watermark
// embedding and query-set construction.
//
// On-disk layout of a dataset directory:
//   dataset.json    {"class_names", "source_hash", "created_at"}
//   items.jsonl     one {"id", "path", "label"} object per line
//   <id>.png        one image per item
// A released (watermarked) directory additionally holds watermark.json and
// the trigger spec (trigger.json, plus generator.bin for blto).

#ifndef CLMARK_EMBED_H_
#define CLMARK_EMBED_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clmark/image.h"
#include "clmark/triggers.h"

namespace clmark {

struct DatasetItem {
  std::string id;
  std::string path;  // relative to the dataset directory
  std::optional<int> label;

  friend bool operator==(const DatasetItem&, const DatasetItem&) = default;
};

struct DatasetManifest {
  std::vector<DatasetItem> items;
  std::vector<std::string> class_names;
  std::string source_hash;  // sha256 over ids, labels and pixel bytes
  int64_t created_at = 0;   // unix seconds

  // Unique ids, labels within class_names.
  void Validate() const;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

// A manifest with its decoded images, index-aligned with manifest.items.
struct Dataset {
  DatasetManifest manifest;
  std::vector<Image> images;

  size_t size() const { return images.size(); }
  // Indices of items carrying `label`.
  std::vector<size_t> IndicesOfClass(int label) const;
};

// Hash over ids, labels and 8-bit quantized pixels, in item order.
std::string DatasetSourceHash(const Dataset& dataset);

// SOURCE_DATE_EPOCH when set, otherwise 0, so artifacts stay reproducible.
int64_t ArtifactTimestamp();

std::string SerializeDatasetManifest(const DatasetManifest& m);  // items.jsonl
DatasetManifest ParseDatasetManifest(const std::string& items_jsonl,
                                     const std::string& dataset_json,
                                     const std::string& name);

void SaveDataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset LoadDataset(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Toy data

enum class ToyFamily {
  kShapes,   // colored shapes over Gaussian blob backgrounds
  kStripes,  // oriented stripe textures; disjoint from kShapes
};

// `n` balanced, labeled size x size RGB images in 4 classes.
Dataset MakeToyDataset(ToyFamily family, int n, uint64_t seed, int size = 16);

// ---------------------------------------------------------------------------
// Watermarking

struct WatermarkManifest {
  std::string trigger_fingerprint;
  TriggerMethod method = TriggerMethod::kPatch;
  double rate = 0.0;
  int target_class = 0;
  std::vector<std::string> watermarked_ids;
  uint64_t seed = 0;
  // Compositing methods: source ids per added item, as (reference, shadow).
  std::vector<std::pair<std::string, std::string>> sources;

  friend bool operator==(const WatermarkManifest&, const WatermarkManifest&) = default;
};

std::string SerializeWatermarkManifest(const WatermarkManifest& m);
WatermarkManifest ParseWatermarkManifest(const std::string& text,
                                         const std::string& name);
void SaveWatermarkManifest(const WatermarkManifest& m,
                           const std::filesystem::path& dir);
WatermarkManifest LoadWatermarkManifest(const std::filesystem::path& path);

// round(rate * dataset_size); errors when that is zero or rate is outside
// (0, 1).
size_t WatermarkCount(double rate, size_t dataset_size);

struct EmbedOutcome {
  Dataset released;
  WatermarkManifest manifest;
};

// Host methods (patch, ctrl, blto) replace target-class items in place;
// compositing methods append new "wm_NNNNNN" items built from a
// target-class reference and a shadow image from any class.
EmbedOutcome EmbedWatermark(const Dataset& dataset, const TriggerSpec& spec,
                            int target_class, double rate, uint64_t seed);

// File-based variant: reads `dataset_dir`, writes the released dataset,
// watermark.json and the trigger spec under `out_dir`. Untouched images are
// copied byte for byte.
WatermarkManifest EmbedWatermarkToDir(const std::filesystem::path& dataset_dir,
                                      const TriggerSpec& spec, int target_class,
                                      double rate, uint64_t seed,
                                      const std::filesystem::path& out_dir);

struct QuerySet {
  std::vector<Image> clean;
  std::vector<Image> watermarked;
};

// n clean images drawn round-robin over the non-target classes (each class
// shuffled by seed), each paired with its trigger-applied copy.
QuerySet BuildQuerySet(const Dataset& dataset, const TriggerSpec& spec,
                       int target_class, size_t n, uint64_t seed);

}  // namespace clmark

#endif  // CLMARK_EMBED_H_
