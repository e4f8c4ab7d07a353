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

#include <cstdlib>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "binfmt.h"
#include "clmark/common.h"
#include "clmark/embed.h"

namespace clmark {

namespace {

using nlohmann::json;

constexpr const char* kItemsFile = "items.jsonl";
constexpr const char* kDatasetFile = "dataset.json";

}  // namespace

void DatasetManifest::Validate() const {
  std::set<std::string> ids;
  for (const DatasetItem& item : items) {
    Require(!item.id.empty(), "dataset item id must be non-empty");
    Require(ids.insert(item.id).second, "duplicate dataset item id '" + item.id + "'");
    Require(!item.path.empty(), "dataset item '" + item.id + "' has no path");
    if (item.label)
      Require(*item.label >= 0 &&
                  static_cast<size_t>(*item.label) < class_names.size(),
              "dataset item '" + item.id + "' has label " +
                  std::to_string(*item.label) + " outside " +
                  std::to_string(class_names.size()) + " classes");
  }
}

std::vector<size_t> Dataset::IndicesOfClass(int label) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < manifest.items.size(); ++i)
    if (manifest.items[i].label == label) out.push_back(i);
  return out;
}

std::string DatasetSourceHash(const Dataset& dataset) {
  std::string buf;
  for (size_t i = 0; i < dataset.size(); ++i) {
    const DatasetItem& item = dataset.manifest.items[i];
    buf += item.id;
    buf += '\t';
    buf += item.label ? std::to_string(*item.label) : "-";
    buf += '\n';
    const auto bytes = QuantizeTo8Bit(dataset.images[i]);
    buf.append(bytes.begin(), bytes.end());
  }
  return Sha256Hex(buf);
}

int64_t ArtifactTimestamp() {
  const char* env = std::getenv("SOURCE_DATE_EPOCH");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long long v = std::strtoll(env, &end, 10);
  Require(end != env && *end == '\0' && v >= 0,
          "SOURCE_DATE_EPOCH must be a non-negative integer");
  return v;
}

std::string SerializeDatasetManifest(const DatasetManifest& m) {
  std::string out;
  for (const DatasetItem& item : m.items) {
    json j{{"id", item.id}, {"path", item.path}};
    j["label"] = item.label ? json(*item.label) : json(nullptr);
    out += j.dump();
    out += '\n';
  }
  return out;
}

DatasetManifest ParseDatasetManifest(const std::string& items_jsonl,
                                     const std::string& dataset_json,
                                     const std::string& name) {
  DatasetManifest m;
  try {
    const json meta = json::parse(dataset_json);
    m.class_names = meta.at("class_names").get<std::vector<std::string>>();
    m.source_hash = meta.at("source_hash").get<std::string>();
    m.created_at = meta.at("created_at").get<int64_t>();
    std::istringstream lines(items_jsonl);
    std::string line;
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      DatasetItem item{j.at("id").get<std::string>(),
                       j.at("path").get<std::string>(), std::nullopt};
      if (!j.at("label").is_null()) item.label = j.at("label").get<int>();
      m.items.push_back(std::move(item));
    }
  } catch (const json::exception& e) {
    Fail(ErrorKind::kIo, name + ": malformed dataset manifest (" + e.what() + ")");
  }
  try {
    m.Validate();
  } catch (const Error& e) {
    Fail(ErrorKind::kIo, name + ": " + e.what());
  }
  return m;
}

namespace {

std::string DatasetMetaJson(const DatasetManifest& m) {
  return json{{"class_names", m.class_names},
              {"created_at", m.created_at},
              {"source_hash", m.source_hash}}
             .dump() +
         "\n";
}

}  // namespace

void SaveDataset(const Dataset& dataset, const std::filesystem::path& dir) {
  dataset.manifest.Validate();
  Require(dataset.images.size() == dataset.manifest.items.size(),
          "dataset image count does not match its manifest");
  std::filesystem::create_directories(dir);
  for (size_t i = 0; i < dataset.size(); ++i)
    SaveImage(dataset.images[i], dir / dataset.manifest.items[i].path);
  binfmt::WriteFile(dir / kItemsFile, SerializeDatasetManifest(dataset.manifest));
  binfmt::WriteFile(dir / kDatasetFile, DatasetMetaJson(dataset.manifest));
}

Dataset LoadDataset(const std::filesystem::path& dir) {
  Dataset d;
  d.manifest = ParseDatasetManifest(binfmt::ReadFile(dir / kItemsFile),
                                    binfmt::ReadFile(dir / kDatasetFile),
                                    dir.string());
  d.images.reserve(d.manifest.items.size());
  for (const DatasetItem& item : d.manifest.items) {
    const std::filesystem::path file = dir / item.path;
    if (!std::filesystem::exists(file))
      Fail(ErrorKind::kIo, "missing image for item '" + item.id + "': " + file.string());
    d.images.push_back(LoadImage(file));
  }
  return d;
}

// Shared with embed.cc through a declaration there.
void WriteDatasetManifestFiles(const DatasetManifest& m,
                               const std::filesystem::path& dir) {
  binfmt::WriteFile(dir / kItemsFile, SerializeDatasetManifest(m));
  binfmt::WriteFile(dir / kDatasetFile, DatasetMetaJson(m));
}

}  // namespace clmark
