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

// clmark: embed watermarks, train toy encoders and probes, serve suspects,
// verify ownership and report fidelity.
//
// Exit codes: 0 success (verify: not proven), 1 runtime error, 2 usage
// error, 3 verify decided "infringing". Errors print one line:
//   error: <kind>: <message>

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "clmark/blto.h"
#include "clmark/cltrain.h"
#include "clmark/common.h"
#include "clmark/downstream.h"
#include "clmark/embed.h"
#include "clmark/fidelity.h"
#include "clmark/scenario.h"
#include "clmark/suspectio.h"
#include "clmark/triggers.h"
#include "clmark/verify.h"

namespace {

using namespace clmark;  // NOLINT

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInfringing = 3;

const std::vector<std::string> kMethods = {"patch", "ctrl", "poisonedencoder",
                                           "corruptencoder", "na", "blto"};

void WriteText(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
}

std::vector<std::string> SplitList(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const std::string& item : items) {
    size_t start = 0;
    while (start <= item.size()) {
      const size_t comma = item.find(',', start);
      const std::string part = item.substr(start, comma - start);
      if (!part.empty()) out.push_back(part);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

double ParseNumber(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  Require(ec == std::errc() && ptr == s.data() + s.size(), "not a number: '" + s + "'");
  return v;
}

// "a:b:step" (inclusive of b up to rounding) or "x,y,z".
std::vector<double> ParseGrid(const std::string& spec) {
  std::vector<double> grid;
  if (spec.find(':') != std::string::npos) {
    const size_t c1 = spec.find(':'), c2 = spec.find(':', c1 + 1);
    Require(c2 != std::string::npos, "grid range must be start:stop:step");
    const double a = ParseNumber(spec.substr(0, c1));
    const double b = ParseNumber(spec.substr(c1 + 1, c2 - c1 - 1));
    const double step = ParseNumber(spec.substr(c2 + 1));
    Require(step > 0.0 && b >= a, "grid range needs start <= stop and step > 0");
    const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= count; ++i) grid.push_back(a + static_cast<double>(i) * step);
  } else {
    for (const std::string& s : SplitList({spec})) grid.push_back(ParseNumber(s));
  }
  return grid;
}

// --- toy-dataset -----------------------------------------------------------

struct ToyArgs {
  std::string family = "shapes";
  int count = 2000;
  int size = 16;
  uint64_t seed = 0;
  std::string out;
};

int RunToy(const ToyArgs& a) {
  const ToyFamily family = a.family == "shapes" ? ToyFamily::kShapes : ToyFamily::kStripes;
  SaveDataset(MakeToyDataset(family, a.count, a.seed, a.size), a.out);
  std::printf("wrote %d %s images to %s\n", a.count, a.family.c_str(), a.out.c_str());
  return 0;
}

// --- embed -----------------------------------------------------------------

struct EmbedArgs {
  std::string dataset;
  std::string method;
  double rate = 0.10;
  int target_class = 0;
  uint64_t seed = 0;
  std::string out;
  int blto_alternations = 2;
  int blto_inner_steps = 200;
  int blto_outer_steps = 5;
  double blto_epsilon = 8.0 / 255.0;
  int blto_refs = 64;
};

int RunEmbed(const EmbedArgs& a) {
  const TriggerMethod method = ParseTriggerMethod(a.method);
  TriggerSpec spec;
  if (method == TriggerMethod::kBlto) {
    const Dataset ds = LoadDataset(a.dataset);
    Require(ds.size() > 0, "dataset is empty");
    std::vector<Image> refs;
    for (size_t i : ds.IndicesOfClass(a.target_class))
      if (refs.size() < static_cast<size_t>(a.blto_refs)) refs.push_back(ds.images[i]);
    Require(!refs.empty(), "BLTO needs labeled target-class references");
    BltoConfig cfg;
    cfg.alternations = a.blto_alternations;
    cfg.inner_steps = a.blto_inner_steps;
    cfg.outer_steps = a.blto_outer_steps;
    cfg.linf_bound = a.blto_epsilon;
    cfg.seed = a.seed;
    cfg.surrogate = ToyTrainConfig(a.seed);
    const BltoResult r = RunBlto(ds.images, refs, cfg);
    std::printf("blto objective %.4f -> %.4f\n", r.objective_trace.front(),
                r.objective_trace.back());
    spec.method = TriggerMethod::kBlto;
    spec.params = BltoParams{r.generator};
    spec.seed = a.seed;
  } else {
    const Dataset ds = LoadDataset(a.dataset);
    Require(ds.size() > 0, "dataset is empty");
    const Image& first = ds.images.front();
    spec = MakeDefaultSpec(method, first.height(), first.width(), first.channels(), a.seed);
  }
  const WatermarkManifest m =
      EmbedWatermarkToDir(a.dataset, spec, a.target_class, a.rate, a.seed, a.out);
  std::printf("watermarked %zu items with %s; manifest %s\n", m.watermarked_ids.size(),
              a.method.c_str(), (std::filesystem::path(a.out) / "watermark.json").c_str());
  return 0;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string dataset;
  std::string framework = "simclr";
  int epochs = 30;
  uint64_t seed = 0;
  std::string out;
  std::string trace;
  double lr = 0.3;
  double temperature = 0.5;
  int batch = 128;
  double weight_decay = 0.01;
};

int RunTrain(const TrainArgs& a) {
  const Dataset ds = LoadDataset(a.dataset);
  TrainConfig cfg;
  cfg.framework = ParseFramework(a.framework);
  cfg.epochs = a.epochs;
  cfg.seed = a.seed;
  cfg.learning_rate = a.lr;
  cfg.temperature = a.temperature;
  cfg.batch_size = a.batch;
  cfg.weight_decay = a.weight_decay;
  const TrainResult r = Pretrain(ds.images, cfg);
  SaveEncoder(r.model, a.out);
  std::string csv = "epoch,loss\n";
  char line[64];
  for (size_t i = 0; i < r.loss_trace.size(); ++i) {
    std::snprintf(line, sizeof(line), "%zu,%.9g\n", i + 1, r.loss_trace[i]);
    csv += line;
  }
  const std::string trace = a.trace.empty() ? a.out + ".loss.csv" : a.trace;
  WriteText(trace, csv);
  std::printf("trained %s encoder for %lld steps; loss %.4f -> %.4f\n",
              a.framework.c_str(), static_cast<long long>(r.steps),
              r.loss_trace.empty() ? 0.0 : r.loss_trace.front(),
              r.loss_trace.empty() ? 0.0 : r.loss_trace.back());
  return 0;
}

// --- probe -----------------------------------------------------------------

struct ProbeArgs {
  std::string encoder;
  std::string labeled;
  std::string out;
  int epochs = 200;
  double lr = 0.5;
  uint64_t seed = 0;
};

int RunProbe(const ProbeArgs& a) {
  const EncoderModel enc = LoadEncoder(a.encoder);
  const Dataset ds = LoadDataset(a.labeled);
  std::vector<Image> imgs;
  std::vector<int> labels;
  for (size_t i = 0; i < ds.size(); ++i) {
    if (!ds.manifest.items[i].label) continue;
    imgs.push_back(ds.images[i]);
    labels.push_back(*ds.manifest.items[i].label);
  }
  Require(!imgs.empty(), "dataset has no labeled items");
  ProbeConfig pc;
  pc.epochs = a.epochs;
  pc.learning_rate = a.lr;
  pc.seed = a.seed;
  const LinearProbe probe = TrainProbe(enc, imgs, labels, ds.manifest.class_names, pc);
  SaveProbe(probe, a.out);
  std::printf("probe on %zu items, training accuracy %.3f\n", imgs.size(),
              ProbeAccuracy(probe, EncodeBatch(enc, imgs), labels));
  return 0;
}

// --- serve -----------------------------------------------------------------

struct ServeArgs {
  std::string encoder;
  std::string probe;
  std::string bind = "127.0.0.1:8080";
  size_t max_batch = 256;
};

int RunServe(const ServeArgs& a) {
  std::optional<LinearProbe> probe;
  EncoderModel enc;
  try {
    enc = LoadEncoder(a.encoder);
    if (!a.probe.empty()) probe = LoadProbe(a.probe);
  } catch (const Error& e) {
    Fail(ErrorKind::kStartup, e.what());
  }
  const size_t colon = a.bind.rfind(':');
  Require(colon != std::string::npos, "bind address must be host:port");
  const std::string host = a.bind.substr(0, colon);
  const int port = static_cast<int>(ParseNumber(a.bind.substr(colon + 1)));
  SuspectServer server(std::move(enc), std::move(probe), a.max_batch);
  const int bound = server.Start(host, port);
  std::printf("listening on http://%s:%d\n", host.c_str(), bound);
  std::fflush(stdout);
  server.Wait();
  return 0;
}

// --- verify ----------------------------------------------------------------

struct VerifyArgs {
  std::string suspect;
  std::string trigger;
  std::string queries;
  std::string level = "feature";
  double tau = 0.12;
  int batches = 5;
  double alpha = 0.05;
  uint64_t seed = 0;
  std::optional<int> target_class;
  size_t count = 100;
  std::string out;
  double timeout = 30.0;
  size_t max_batch = 64;
};

std::unique_ptr<Suspect> MakeSuspect(const VerifyArgs& a) {
  if (a.suspect.rfind("http://", 0) == 0) {
    RemoteOptions opt;
    opt.url = a.suspect;
    opt.timeout_seconds = a.timeout;
    opt.max_batch = a.max_batch;
    return std::make_unique<RemoteSuspect>(opt);
  }
  const std::vector<std::string> files = SplitList({a.suspect});
  Require(files.size() == 1 || files.size() == 2,
          "--suspect takes a URL or encoder[,probe] files");
  std::optional<std::filesystem::path> probe;
  if (files.size() == 2) probe = files[1];
  return std::make_unique<InProcessSuspect>(InProcessSuspect::FromFiles(files[0], probe));
}

int RunVerify(const VerifyArgs& a) {
  const TriggerSpec spec = LoadTriggerSpec(a.trigger);
  int target = 0;
  if (a.target_class) {
    target = *a.target_class;
  } else {
    const std::filesystem::path dir = std::filesystem::is_directory(a.trigger)
                                          ? std::filesystem::path(a.trigger)
                                          : std::filesystem::path(a.trigger).parent_path();
    Require(std::filesystem::exists(dir / "watermark.json"),
            "no watermark.json beside the trigger; pass --target-class");
    target = LoadWatermarkManifest(dir).target_class;
  }
  const Dataset owner = LoadDataset(a.queries);
  VerifyConfig cfg;
  cfg.threshold = a.tau;
  cfg.batches = a.batches;
  cfg.alpha = a.alpha;
  cfg.seed = a.seed;
  const QuerySet qs = BuildQuerySet(owner, spec, target, a.count, a.seed);
  std::unique_ptr<Suspect> suspect = MakeSuspect(a);
  const VerificationReport r = Verify(*suspect, qs, ParseOutputLevel(a.level), cfg,
                                      TriggerFingerprint(spec));
  if (a.out.empty()) {
    std::cout << SerializeReport(r);
  } else {
    SaveReport(r, a.out);
    std::cout << ReportSummary(r);
  }
  return r.decision == Decision::kInfringing ? kExitInfringing : 0;
}

// --- sweep -----------------------------------------------------------------

struct SweepArgs {
  std::vector<std::string> ip;
  std::vector<std::string> nonip;
  std::string grid = "0:0.3:0.01";
  std::string out;
};

int RunSweep(const SweepArgs& a) {
  std::vector<double> ip, nonip;
  for (const std::string& f : SplitList(a.ip)) ip.push_back(LoadReport(f).delta);
  for (const std::string& f : SplitList(a.nonip)) nonip.push_back(LoadReport(f).delta);
  const std::string csv = SweepCsv(SweepThresholds(ip, nonip, ParseGrid(a.grid)));
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    WriteText(a.out, csv);
  }
  return 0;
}

// --- fidelity --------------------------------------------------------------

struct FidelityArgs {
  std::string manifest;
  std::string clean;
  std::string watermarked;
  std::string csv;
  std::string json;
};

int RunFidelity(const FidelityArgs& a) {
  const FidelityReport r = FidelityFromDirs(a.manifest, a.clean, a.watermarked);
  if (!a.csv.empty()) WriteText(a.csv, FidelityCsv(r));
  if (!a.json.empty()) WriteText(a.json, FidelityJson(r));
  if (r.applicable) {
    std::printf("%s: %zu items, mean SSIM %.4f, min %.4f\n", r.method.c_str(),
                r.items.size(), r.mean, r.min);
  } else {
    std::printf("%s: SSIM not applicable (compositing method)\n", r.method.c_str());
  }
  return 0;
}

// --- scenario robustness ---------------------------------------------------

struct ScenarioArgs {
  uint64_t seed = 0;
  std::string method = "patch";
  std::string out = "robustness";
  double tau = 0.12;
  bool no_baseline = false;
};

int RunScenario(const ScenarioArgs& a) {
  RobustnessConfig cfg;
  cfg.seed = a.seed;
  cfg.method = ParseTriggerMethod(a.method);
  Require(cfg.method != TriggerMethod::kBlto,
          "the robustness scenario uses fixed triggers; embed BLTO separately");
  cfg.verify.threshold = a.tau;
  cfg.verify.seed = a.seed;
  cfg.with_baseline = !a.no_baseline;
  const RobustnessOutcome r = RunRobustnessScenario(cfg);
  const std::filesystem::path out(a.out);
  std::filesystem::create_directories(out);
  SaveReport(r.ip_soft, out / "ip_soft.json");
  SaveReport(r.ip_hard, out / "ip_hard.json");
  std::printf("IP encoder (probe accuracy %.3f): soft delta %.4f p %.3g, hard delta %.4f p %.3g\n",
              r.ip_probe_accuracy, r.ip_soft.delta, r.ip_soft.p_value, r.ip_hard.delta,
              r.ip_hard.p_value);
  if (r.nonip_soft) {
    SaveReport(*r.nonip_soft, out / "nonip_soft.json");
    SaveReport(*r.nonip_hard, out / "nonip_hard.json");
    std::printf("clean encoder (probe accuracy %.3f): soft delta %.4f p %.3g, hard delta %.4f p %.3g\n",
                *r.nonip_probe_accuracy, r.nonip_soft->delta, r.nonip_soft->p_value,
                r.nonip_hard->delta, r.nonip_hard->p_value);
  }
  return 0;
}

std::string OneLine(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dataset watermarking and ownership verification for contrastive learning"};
  app.set_config("--config", "", "key = value configuration file");
  app.require_subcommand(1);

  auto seed_opt = [](CLI::App* sub, uint64_t& seed) {
    sub->add_option("--seed", seed, "random seed")->envname("CLMARK_SEED");
  };

  ToyArgs toy;
  CLI::App* toy_cmd = app.add_subcommand("toy-dataset", "write the synthetic 4-class toy set");
  toy_cmd->add_option("--family", toy.family)->check(CLI::IsMember({"shapes", "stripes"}));
  toy_cmd->add_option("--count", toy.count)->check(CLI::PositiveNumber);
  toy_cmd->add_option("--size", toy.size)->check(CLI::Range(8, 1024));
  seed_opt(toy_cmd, toy.seed);
  toy_cmd->add_option("--out", toy.out)->required();

  EmbedArgs embed;
  CLI::App* embed_cmd = app.add_subcommand("embed", "embed a watermark into a dataset");
  embed_cmd->add_option("--dataset", embed.dataset)->required();
  embed_cmd->add_option("--method", embed.method)->required()->check(CLI::IsMember(kMethods));
  embed_cmd->add_option("--rate", embed.rate);
  embed_cmd->add_option("--target-class", embed.target_class);
  seed_opt(embed_cmd, embed.seed);
  embed_cmd->add_option("--out", embed.out)->required();
  embed_cmd->add_option("--blto-alternations", embed.blto_alternations);
  embed_cmd->add_option("--blto-inner-steps", embed.blto_inner_steps);
  embed_cmd->add_option("--blto-outer-steps", embed.blto_outer_steps);
  embed_cmd->add_option("--blto-epsilon", embed.blto_epsilon);
  embed_cmd->add_option("--blto-refs", embed.blto_refs);

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "pretrain a contrastive encoder");
  train_cmd->add_option("--dataset", train.dataset)->required();
  train_cmd->add_option("--framework", train.framework)
      ->check(CLI::IsMember({"simclr", "simsiam"}));
  train_cmd->add_option("--epochs", train.epochs);
  seed_opt(train_cmd, train.seed);
  train_cmd->add_option("--out", train.out)->required();
  train_cmd->add_option("--trace", train.trace, "loss CSV (default <out>.loss.csv)");
  train_cmd->add_option("--lr", train.lr);
  train_cmd->add_option("--temperature", train.temperature);
  train_cmd->add_option("--batch", train.batch);
  train_cmd->add_option("--weight-decay", train.weight_decay);

  ProbeArgs probe;
  CLI::App* probe_cmd = app.add_subcommand("probe", "train a linear probe on a frozen encoder");
  probe_cmd->add_option("--encoder", probe.encoder)->required();
  probe_cmd->add_option("--labeled", probe.labeled)->required();
  probe_cmd->add_option("--out", probe.out)->required();
  probe_cmd->add_option("--epochs", probe.epochs);
  probe_cmd->add_option("--lr", probe.lr);
  seed_opt(probe_cmd, probe.seed);

  ServeArgs serve;
  CLI::App* serve_cmd = app.add_subcommand("serve", "serve an encoder as a suspect model");
  serve_cmd->add_option("--encoder", serve.encoder)->required();
  serve_cmd->add_option("--probe", serve.probe);
  serve_cmd->add_option("--bind", serve.bind);
  serve_cmd->add_option("--max-batch", serve.max_batch);

  VerifyArgs verify;
  CLI::App* verify_cmd = app.add_subcommand("verify", "test a suspect for the watermark");
  verify_cmd->add_option("--suspect", verify.suspect, "http://host:port or encoder[,probe]")
      ->required();
  verify_cmd->add_option("--trigger", verify.trigger, "embed output dir or trigger.json")
      ->required();
  verify_cmd->add_option("--queries", verify.queries, "owner's clean dataset")->required();
  verify_cmd->add_option("--level", verify.level)
      ->check(CLI::IsMember({"feature", "soft", "hard"}));
  verify_cmd->add_option("--tau", verify.tau);
  verify_cmd->add_option("--batches", verify.batches);
  verify_cmd->add_option("--alpha", verify.alpha);
  seed_opt(verify_cmd, verify.seed);
  verify_cmd->add_option("--target-class", verify.target_class);
  verify_cmd->add_option("--count", verify.count);
  verify_cmd->add_option("--out", verify.out);
  verify_cmd->add_option("--timeout", verify.timeout);
  verify_cmd->add_option("--max-batch", verify.max_batch);

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "TPR/FPR over thresholds");
  sweep_cmd->add_option("--ip-reports", sweep.ip)->required();
  sweep_cmd->add_option("--nonip-reports", sweep.nonip)->required();
  sweep_cmd->add_option("--grid", sweep.grid, "start:stop:step or a comma list");
  sweep_cmd->add_option("--out", sweep.out);

  FidelityArgs fid;
  CLI::App* fid_cmd = app.add_subcommand("fidelity", "SSIM of watermarked items");
  fid_cmd->add_option("--manifest", fid.manifest)->required();
  fid_cmd->add_option("--clean", fid.clean)->required();
  fid_cmd->add_option("--watermarked", fid.watermarked)->required();
  fid_cmd->add_option("--csv", fid.csv);
  fid_cmd->add_option("--json", fid.json);

  ScenarioArgs scen;
  CLI::App* scen_cmd = app.add_subcommand("scenario", "end-to-end toy scenarios");
  scen_cmd->require_subcommand(1);
  CLI::App* robust_cmd =
      scen_cmd->add_subcommand("robustness", "verify through a probe trained elsewhere");
  seed_opt(robust_cmd, scen.seed);
  robust_cmd->add_option("--method", scen.method)
      ->check(CLI::IsMember({"patch", "ctrl", "poisonedencoder", "corruptencoder", "na"}));
  robust_cmd->add_option("--out", scen.out);
  robust_cmd->add_option("--tau", scen.tau);
  robust_cmd->add_flag("--no-baseline", scen.no_baseline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << OneLine(e.what()) << "\n";
    return kExitUsage;
  }

  try {
    if (*toy_cmd) return RunToy(toy);
    if (*embed_cmd) return RunEmbed(embed);
    if (*train_cmd) return RunTrain(train);
    if (*probe_cmd) return RunProbe(probe);
    if (*serve_cmd) return RunServe(serve);
    if (*verify_cmd) return RunVerify(verify);
    if (*sweep_cmd) return RunSweep(sweep);
    if (*fid_cmd) return RunFidelity(fid);
    if (*robust_cmd) return RunScenario(scen);
  } catch (const Error& e) {
    std::cerr << "error: " << ErrorKindName(e.kind()) << ": " << OneLine(e.what()) << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << OneLine(e.what()) << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
