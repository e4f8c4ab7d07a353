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

#include "clmark/verify.h"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>

#include "binfmt.h"
#include "clmark/common.h"

namespace clmark {

namespace {

using nlohmann::json;

constexpr uint64_t kPartitionStream = 1;

double Norm(const std::vector<double>& v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

OutputBatch Subset(const OutputBatch& b, const std::vector<size_t>& idx) {
  OutputBatch out;
  out.level = b.level;
  out.vectors.reserve(idx.size());
  for (size_t i : idx) out.vectors.push_back(b.vectors[i]);
  return out;
}

json FiniteOrTag(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "+inf" : "-inf";
}

double FromFiniteOrTag(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw json::type_error::create(302, "unexpected string " + s, nullptr);
  }
  return j.get<double>();
}

}  // namespace

std::string OutputLevelName(OutputLevel level) {
  switch (level) {
    case OutputLevel::kFeature:
      return "feature";
    case OutputLevel::kSoftLabel:
      return "soft";
    case OutputLevel::kHardLabel:
      return "hard";
  }
  return "feature";
}

OutputLevel ParseOutputLevel(const std::string& name) {
  if (name == "feature") return OutputLevel::kFeature;
  if (name == "soft") return OutputLevel::kSoftLabel;
  if (name == "hard") return OutputLevel::kHardLabel;
  Fail(ErrorKind::kInvalidInput, "unknown output level '" + name + "'");
}

void OutputBatch::Validate() const {
  const size_t d = dim();
  for (size_t i = 0; i < vectors.size(); ++i) {
    const auto& v = vectors[i];
    Require(!v.empty() && v.size() == d, "output vectors must share a non-zero dimension");
    for (double x : v) Require(std::isfinite(x), "output vector has a non-finite entry");
    if (level == OutputLevel::kHardLabel) {
      const auto ones = std::count(v.begin(), v.end(), 1.0);
      const auto zeros = std::count(v.begin(), v.end(), 0.0);
      Require(ones == 1 && ones + zeros == static_cast<long>(d),
              "hard label " + std::to_string(i) + " is not a one-hot vector");
    }
  }
}

double MeanPairwiseCosine(const OutputBatch& batch) {
  batch.Validate();
  const size_t n = batch.n();
  Require(n >= 2, "pairwise similarity needs at least two outputs");
  std::vector<double> norms(n);
  for (size_t i = 0; i < n; ++i) {
    norms[i] = Norm(batch.vectors[i]);
    Require(norms[i] > 0.0, "output " + std::to_string(i) + " is a zero vector");
  }
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const auto& a = batch.vectors[i];
    for (size_t j = i + 1; j < n; ++j) {
      const auto& b = batch.vectors[j];
      sum += std::inner_product(a.begin(), a.end(), b.begin(), 0.0) /
             (norms[i] * norms[j]);
    }
  }
  return 2.0 * sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

DeltaResult ComputeDelta(const OutputBatch& clean, const OutputBatch& watermarked) {
  Require(clean.level == watermarked.level,
          "clean and watermarked outputs come from different levels");
  Require(clean.dim() == watermarked.dim(),
          "clean and watermarked outputs differ in dimension");
  DeltaResult r;
  r.s = MeanPairwiseCosine(clean);
  r.s_prime = MeanPairwiseCosine(watermarked);
  r.delta = r.s_prime - r.s;
  return r;
}

TTestResult TTestOneSample(const std::vector<double>& deltas, double tau) {
  Require(deltas.size() >= 2, "t-test needs at least two samples");
  Require(std::isfinite(tau), "threshold must be finite");
  for (double d : deltas) Require(std::isfinite(d), "t-test sample is not finite");
  const double m = static_cast<double>(deltas.size());
  // Identical samples take the degenerate path directly; summing them can
  // leave a one-ulp residue that would otherwise pass for variance.
  const bool constant = std::all_of(deltas.begin(), deltas.end(),
                                    [&](double d) { return d == deltas.front(); });
  const double mean = constant
                          ? deltas.front()
                          : std::accumulate(deltas.begin(), deltas.end(), 0.0) / m;
  double ss = 0.0;
  for (double d : deltas) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / (m - 1.0));

  TTestResult r;
  if (constant || sd == 0.0) {
    const double inf = std::numeric_limits<double>::infinity();
    r.t_statistic = mean > tau ? inf : (mean < tau ? -inf : 0.0);
    r.p_value = mean > tau ? 0.0 : 1.0;
    return r;
  }
  r.t_statistic = (mean - tau) / (sd / std::sqrt(m));
  const boost::math::students_t dist(m - 1.0);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.t_statistic));
  return r;
}

std::vector<SweepPoint> SweepThresholds(const std::vector<double>& ip_deltas,
                                        const std::vector<double>& nonip_deltas,
                                        const std::vector<double>& grid) {
  Require(!ip_deltas.empty() && !nonip_deltas.empty(),
          "sweep needs IP and non-IP deltas");
  Require(!grid.empty(), "sweep grid is empty");
  Require(std::is_sorted(grid.begin(), grid.end()), "sweep grid must ascend");
  auto rate = [](const std::vector<double>& v, double tau) {
    const auto above = std::count_if(v.begin(), v.end(), [&](double d) { return d > tau; });
    return static_cast<double>(above) / static_cast<double>(v.size());
  };
  std::vector<SweepPoint> out;
  for (double tau : grid) out.push_back({tau, rate(ip_deltas, tau), rate(nonip_deltas, tau)});
  return out;
}

std::string SweepCsv(const std::vector<SweepPoint>& points) {
  std::string out = "tau,tpr,fpr\n";
  char line[96];
  for (const auto& p : points) {
    std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g\n", p.tau, p.tpr, p.fpr);
    out += line;
  }
  return out;
}

void VerifyConfig::Validate() const {
  Require(std::isfinite(threshold), "threshold must be finite");
  Require(batches >= 2, "verification needs at least two batches");
  Require(alpha > 0.0 && alpha < 1.0, "alpha must be in (0, 1)");
}

std::string DecisionName(Decision d) {
  return d == Decision::kInfringing ? "infringing" : "not_proven";
}

VerificationReport Verify(Suspect& suspect, const QuerySet& queries,
                          OutputLevel level, const VerifyConfig& cfg,
                          const std::string& trigger_fingerprint) {
  cfg.Validate();
  const size_t n = queries.clean.size();
  Require(n > 0, "query set is empty");
  Require(queries.watermarked.size() == n, "query set is not paired");
  const size_t m = static_cast<size_t>(cfg.batches);
  Require(n >= 2 * m, std::to_string(n) + " query pairs cannot form " +
                          std::to_string(m) + " batches of at least two");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(DeriveSeed(cfg.seed, kPartitionStream));
  Shuffle(std::span<size_t>(order), rng);

  OutputBatch all_clean{level, {}}, all_marked{level, {}};
  std::vector<std::vector<size_t>> groups(m);
  size_t dim = 0;
  size_t pos = 0;
  for (size_t g = 0; g < m; ++g) {
    const size_t size = n / m + (g < n % m ? 1 : 0);
    std::vector<Image> clean, marked;
    for (size_t i = 0; i < size; ++i, ++pos) {
      clean.push_back(queries.clean[order[pos]]);
      marked.push_back(queries.watermarked[order[pos]]);
    }
    OutputBatch oc, om;
    try {
      oc = suspect.Query(clean, level);
      om = suspect.Query(marked, level);
    } catch (const Error& e) {
      Fail(e.kind(), "query batch " + std::to_string(g) + ": " + e.what());
    }
    if (oc.n() != size || om.n() != size)
      Fail(ErrorKind::kProtocol, "query batch " + std::to_string(g) +
                                     ": suspect returned the wrong number of outputs");
    if (oc.level != level || om.level != level)
      Fail(ErrorKind::kProtocol, "query batch " + std::to_string(g) +
                                     ": suspect answered at a different level");
    if (dim == 0) dim = oc.dim();
    if (oc.dim() != dim || om.dim() != dim)
      Fail(ErrorKind::kProtocol, "query batch " + std::to_string(g) +
                                     ": output dimension drifted from " +
                                     std::to_string(dim));
    for (size_t i = 0; i < size; ++i) {
      groups[g].push_back(all_clean.n());
      all_clean.vectors.push_back(std::move(oc.vectors[i]));
      all_marked.vectors.push_back(std::move(om.vectors[i]));
    }
  }

  VerificationReport r;
  r.level = level;
  r.config = cfg;
  r.trigger_fingerprint = trigger_fingerprint;
  r.queries = n;
  const DeltaResult overall = ComputeDelta(all_clean, all_marked);
  r.s = overall.s;
  r.s_prime = overall.s_prime;
  r.delta = overall.delta;
  for (const auto& idx : groups)
    r.per_batch_deltas.push_back(
        ComputeDelta(Subset(all_clean, idx), Subset(all_marked, idx)).delta);
  const TTestResult t = TTestOneSample(r.per_batch_deltas, cfg.threshold);
  r.t_statistic = t.t_statistic;
  r.p_value = t.p_value;
  r.decision = r.p_value < cfg.alpha ? Decision::kInfringing : Decision::kNotProven;
  return r;
}

std::string SerializeReport(const VerificationReport& r) {
  const json j = {
      {"level", OutputLevelName(r.level)},
      {"config",
       {{"threshold", r.config.threshold},
        {"batches", r.config.batches},
        {"alpha", r.config.alpha},
        {"seed", r.config.seed}}},
      {"trigger_fingerprint", r.trigger_fingerprint},
      {"queries", r.queries},
      {"S", r.s},
      {"S_prime", r.s_prime},
      {"delta", r.delta},
      {"per_batch_deltas", r.per_batch_deltas},
      {"t_statistic", FiniteOrTag(r.t_statistic)},
      {"p_value", r.p_value},
      {"decision", DecisionName(r.decision)},
  };
  return j.dump(2) + "\n";
}

VerificationReport ParseReport(const std::string& text, const std::string& name) {
  VerificationReport r;
  try {
    const json j = json::parse(text);
    r.level = ParseOutputLevel(j.at("level").get<std::string>());
    const json& c = j.at("config");
    r.config.threshold = c.at("threshold").get<double>();
    r.config.batches = c.at("batches").get<int>();
    r.config.alpha = c.at("alpha").get<double>();
    r.config.seed = c.at("seed").get<uint64_t>();
    r.trigger_fingerprint = j.at("trigger_fingerprint").get<std::string>();
    r.queries = j.at("queries").get<size_t>();
    r.s = j.at("S").get<double>();
    r.s_prime = j.at("S_prime").get<double>();
    r.delta = j.at("delta").get<double>();
    r.per_batch_deltas = j.at("per_batch_deltas").get<std::vector<double>>();
    r.t_statistic = FromFiniteOrTag(j.at("t_statistic"));
    r.p_value = j.at("p_value").get<double>();
    const std::string d = j.at("decision").get<std::string>();
    Require(d == "infringing" || d == "not_proven", "unknown decision '" + d + "'");
    r.decision = d == "infringing" ? Decision::kInfringing : Decision::kNotProven;
  } catch (const json::exception& e) {
    Fail(ErrorKind::kIo, name + ": malformed verification report (" + e.what() + ")");
  } catch (const Error& e) {
    Fail(ErrorKind::kIo, name + ": " + e.what());
  }
  return r;
}

void SaveReport(const VerificationReport& report, const std::filesystem::path& path) {
  binfmt::WriteFile(path, SerializeReport(report));
}

VerificationReport LoadReport(const std::filesystem::path& path) {
  return ParseReport(binfmt::ReadFile(path), path.string());
}

std::string ReportSummary(const VerificationReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "level %s, %zu query pairs in %d batches\n"
                "S = %.4f, S' = %.4f, delta = %.4f (tau %.4f)\n"
                "p = %.4g (alpha %.3g): %s\n",
                OutputLevelName(r.level).c_str(), r.queries, r.config.batches, r.s,
                r.s_prime, r.delta, r.config.threshold, r.p_value, r.config.alpha,
                r.decision == Decision::kInfringing ? "INFRINGING" : "not proven");
  return buf;
}

}  // namespace clmark
