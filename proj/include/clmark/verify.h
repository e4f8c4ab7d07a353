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

// Ownership verification: output-density statistics over paired clean and
// trigger-carrying queries, and a one-sided t-test against a threshold.

#ifndef CLMARK_VERIFY_H_
#define CLMARK_VERIFY_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clmark/embed.h"
#include "clmark/image.h"

namespace clmark {

enum class OutputLevel { kFeature, kSoftLabel, kHardLabel };

// Wire names: "feature", "soft", "hard".
std::string OutputLevelName(OutputLevel level);
OutputLevel ParseOutputLevel(const std::string& name);

struct OutputBatch {
  OutputLevel level = OutputLevel::kFeature;
  std::vector<std::vector<double>> vectors;  // one-hot at kHardLabel

  size_t n() const { return vectors.size(); }
  size_t dim() const { return vectors.empty() ? 0 : vectors.front().size(); }
  // Uniform dimension, finite entries, valid one-hots at kHardLabel.
  void Validate() const;
};

// Anything that answers queries: a local model or a remote endpoint.
class Suspect {
 public:
  virtual ~Suspect() = default;
  // One vector per image, in input order.
  virtual OutputBatch Query(const std::vector<Image>& images,
                            OutputLevel level) = 0;
  virtual std::vector<OutputLevel> Levels() = 0;
};

// Mean cosine similarity over all unordered pairs. Needs n >= 2 and no
// zero vectors.
double MeanPairwiseCosine(const OutputBatch& batch);

struct DeltaResult {
  double s = 0.0;        // clean outputs
  double s_prime = 0.0;  // trigger-carrying outputs
  double delta = 0.0;    // s_prime - s
};

DeltaResult ComputeDelta(const OutputBatch& clean, const OutputBatch& watermarked);

struct TTestResult {
  // +/-infinity (or 0 when the mean equals tau) for zero-variance samples.
  double t_statistic = 0.0;
  double p_value = 1.0;
};

// H0: mean <= tau against H1: mean > tau, Student t with m - 1 degrees of
// freedom. Zero variance: p = 0 if mean > tau, else 1.
TTestResult TTestOneSample(const std::vector<double>& deltas, double tau);

struct SweepPoint {
  double tau = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

// Rates of deltas strictly above each grid value; the grid must ascend.
std::vector<SweepPoint> SweepThresholds(const std::vector<double>& ip_deltas,
                                        const std::vector<double>& nonip_deltas,
                                        const std::vector<double>& grid);
std::string SweepCsv(const std::vector<SweepPoint>& points);

struct VerifyConfig {
  double threshold = 0.12;
  int batches = 5;
  double alpha = 0.05;
  uint64_t seed = 0;

  void Validate() const;
};

enum class Decision { kNotProven, kInfringing };

std::string DecisionName(Decision d);

struct VerificationReport {
  OutputLevel level = OutputLevel::kFeature;
  VerifyConfig config;
  std::string trigger_fingerprint;
  size_t queries = 0;
  double s = 0.0;
  double s_prime = 0.0;
  double delta = 0.0;
  std::vector<double> per_batch_deltas;
  double t_statistic = 0.0;
  double p_value = 1.0;
  Decision decision = Decision::kNotProven;
};

// Splits the n query pairs into `batches` groups by a seeded shuffle (sizes
// differ by at most one, each >= 2), queries the suspect group by group and
// tests the per-group deltas. The overall S, S' and delta use all pairs.
VerificationReport Verify(Suspect& suspect, const QuerySet& queries,
                          OutputLevel level, const VerifyConfig& cfg,
                          const std::string& trigger_fingerprint = "");

std::string SerializeReport(const VerificationReport& report);
VerificationReport ParseReport(const std::string& text, const std::string& name);
void SaveReport(const VerificationReport& report, const std::filesystem::path& path);
VerificationReport LoadReport(const std::filesystem::path& path);
// A few lines for terminals.
std::string ReportSummary(const VerificationReport& report);

}  // namespace clmark

#endif  // CLMARK_VERIFY_H_
