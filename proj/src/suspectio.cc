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

#include "clmark/suspectio.h"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <regex>

#include "clmark/common.h"

namespace clmark {

namespace {

using nlohmann::json;

constexpr int kStatusBadRequest = 400;
constexpr int kStatusTooLarge = 413;
constexpr int kStatusUnsupportedLevel = 422;

std::string ErrorBody(ErrorKind kind, const std::string& message) {
  return json{{"error", {{"kind", std::string(ErrorKindName(kind))}, {"message", message}}}}
      .dump();
}

void AppendVector(std::string& out, std::span<const double> v) {
  out += '[';
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += WireFloat(v[i]);
  }
  out += ']';
}

bool HasLevel(const std::vector<OutputLevel>& levels, OutputLevel level) {
  return std::find(levels.begin(), levels.end(), level) != levels.end();
}

std::string ServerMessage(const std::string& body) {
  try {
    return json::parse(body).at("error").at("message").get<std::string>();
  } catch (const json::exception&) {
    return body.substr(0, 200);
  }
}

}  // namespace

std::vector<OutputLevel> ServedLevels(bool has_probe) {
  if (!has_probe) return {OutputLevel::kFeature};
  return {OutputLevel::kFeature, OutputLevel::kSoftLabel, OutputLevel::kHardLabel};
}

OutputBatch ComputeOutputs(const EncoderModel& encoder, const LinearProbe* probe,
                           const std::vector<Image>& images, OutputLevel level) {
  Require(!images.empty(), "query has no images");
  if (level != OutputLevel::kFeature && !probe)
    Fail(ErrorKind::kCapability,
         "level '" + OutputLevelName(level) + "' needs a downstream probe");
  OutputBatch out;
  out.level = level;
  out.vectors.reserve(images.size());
  for (const FeatureVector& f : EncodeBatch(encoder, images)) {
    switch (level) {
      case OutputLevel::kFeature:
        out.vectors.push_back(f);
        break;
      case OutputLevel::kSoftLabel:
        out.vectors.push_back(PredictSoftFromFeature(*probe, f));
        break;
      case OutputLevel::kHardLabel:
        out.vectors.push_back(ArgmaxOneHot(ProbeLogits(*probe, f)).one_hot);
        break;
    }
  }
  return out;
}

InProcessSuspect::InProcessSuspect(EncoderModel encoder,
                                   std::optional<LinearProbe> probe)
    : encoder_(std::move(encoder)), probe_(std::move(probe)) {
  encoder_.Validate();
  if (probe_) {
    probe_->Validate();
    Require(probe_->feature_dim == encoder_.feature_dim(),
            "probe input dimension does not match the encoder");
  }
}

InProcessSuspect InProcessSuspect::FromFiles(
    const std::filesystem::path& encoder,
    const std::optional<std::filesystem::path>& probe) {
  std::optional<LinearProbe> p;
  if (probe) p = LoadProbe(*probe);
  return InProcessSuspect(LoadEncoder(encoder), std::move(p));
}

OutputBatch InProcessSuspect::Query(const std::vector<Image>& images,
                                    OutputLevel level) {
  return ComputeOutputs(encoder_, probe_ ? &*probe_ : nullptr, images, level);
}

std::vector<OutputLevel> InProcessSuspect::Levels() {
  return ServedLevels(probe_.has_value());
}

// ---------------------------------------------------------------------------
// Wire format

std::string WireFloat(double v) {
  Require(std::isfinite(v), "cannot serialize a non-finite value");
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string EncodeQueryRequest(const std::vector<Image>& images, OutputLevel level) {
  std::string out = "{\"level\":\"" + OutputLevelName(level) + "\",\"images\":[";
  for (size_t i = 0; i < images.size(); ++i) {
    const Image& img = images[i];
    if (i) out += ',';
    out += "{\"h\":" + std::to_string(img.height()) + ",\"w\":" +
           std::to_string(img.width()) + ",\"c\":" + std::to_string(img.channels()) +
           ",\"data\":";
    AppendVector(out, img.data());
    out += '}';
  }
  out += "]}";
  return out;
}

std::vector<Image> DecodeQueryRequest(const std::string& body, OutputLevel* level) {
  std::vector<Image> images;
  try {
    const json j = json::parse(body);
    Require(j.is_object() && j.size() == 2, "request must hold exactly 'level' and 'images'");
    *level = ParseOutputLevel(j.at("level").get<std::string>());
    const json& list = j.at("images");
    Require(list.is_array(), "'images' must be an array");
    for (const json& item : list) {
      Require(item.is_object() && item.size() == 4, "image must hold h, w, c and data");
      const int h = item.at("h").get<int>();
      const int w = item.at("w").get<int>();
      const int c = item.at("c").get<int>();
      Require(h > 0 && w > 0 && (c == 1 || c == 3), "bad image shape");
      const json& data = item.at("data");
      Require(data.is_array() && data.size() == static_cast<size_t>(h) * w * c,
              "image data length does not match its shape");
      std::vector<double> px;
      px.reserve(data.size());
      for (const json& v : data) {
        Require(v.is_number(), "image data must be numeric");
        const double x = v.get<double>();
        Require(x >= 0.0 && x <= 1.0, "image values must lie in [0, 1]");
        px.push_back(x);
      }
      images.emplace_back(h, w, c, std::move(px));
    }
  } catch (const json::exception& e) {
    Fail(ErrorKind::kProtocol, std::string("malformed query request: ") + e.what());
  } catch (const Error& e) {
    Fail(ErrorKind::kProtocol, std::string("malformed query request: ") + e.what());
  }
  return images;
}

std::string EncodeQueryResponse(const OutputBatch& batch) {
  std::string out = "{\"vectors\":[";
  for (size_t i = 0; i < batch.vectors.size(); ++i) {
    if (i) out += ',';
    AppendVector(out, batch.vectors[i]);
  }
  out += "],\"dim\":" + std::to_string(batch.dim()) + "}";
  return out;
}

OutputBatch DecodeQueryResponse(const std::string& body, OutputLevel level,
                                size_t expected) {
  OutputBatch out;
  out.level = level;
  try {
    const json j = json::parse(body);
    const size_t dim = j.at("dim").get<size_t>();
    const json& vectors = j.at("vectors");
    Require(vectors.is_array(), "'vectors' must be an array");
    for (const json& v : vectors) {
      Require(v.is_array() && v.size() == dim, "vector length differs from 'dim'");
      for (const json& x : v) Require(x.is_number(), "vector entries must be numeric");
      out.vectors.push_back(v.get<std::vector<double>>());
    }
    Require(out.n() == expected, "expected " + std::to_string(expected) +
                                     " vectors, got " + std::to_string(out.n()));
    out.Validate();
  } catch (const json::exception& e) {
    Fail(ErrorKind::kProtocol, std::string("malformed query response: ") + e.what());
  } catch (const Error& e) {
    Fail(ErrorKind::kProtocol, std::string("malformed query response: ") + e.what());
  }
  return out;
}

std::string EncodeCapabilities(const std::vector<OutputLevel>& levels, int dim) {
  std::string out = "{\"levels\":[";
  for (size_t i = 0; i < levels.size(); ++i) {
    if (i) out += ',';
    out += "\"" + OutputLevelName(levels[i]) + "\"";
  }
  out += "],\"dim\":" + std::to_string(dim) + "}";
  return out;
}

// ---------------------------------------------------------------------------
// Client

void RemoteOptions::Validate() const {
  static const std::regex kUrl(R"(^http://([A-Za-z0-9.\-]+|\[[0-9A-Fa-f:]+\]):([0-9]{1,5})/?$)");
  Require(std::regex_match(url, kUrl), "malformed suspect URL '" + url +
                                           "' (expected http://host:port)");
  Require(timeout_seconds > 0.0 && std::isfinite(timeout_seconds),
          "timeout must be positive");
  Require(max_batch >= 1, "max batch must be positive");
}

RemoteSuspect::RemoteSuspect(RemoteOptions options) : options_(std::move(options)) {
  options_.Validate();
  static const std::regex kUrl(R"(^http://(.+):([0-9]+)/?$)");
  std::smatch m;
  std::regex_match(options_.url, m, kUrl);
  host_ = m[1].str();
  if (host_.size() > 2 && host_.front() == '[') host_ = host_.substr(1, host_.size() - 2);
  port_ = std::stoi(m[2].str());
  Require(port_ > 0 && port_ < 65536, "port out of range in '" + options_.url + "'");
}

std::string RemoteSuspect::Send(const std::string& method, const std::string& path,
                                const std::string& body) {
  httplib::Client client(host_, port_);
  const auto sec = static_cast<time_t>(options_.timeout_seconds);
  const auto usec =
      static_cast<time_t>((options_.timeout_seconds - static_cast<double>(sec)) * 1e6);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  std::string last_failure;
  for (int attempt = 0; attempt <= kRemoteRetries; ++attempt) {
    httplib::Result res = method == "GET"
                              ? client.Get(path)
                              : client.Post(path, body, "application/json");
    if (!res) {
      last_failure = httplib::to_string(res.error());
      continue;
    }
    const int status = res->status;
    if (status == 200) return res->body;
    if (status >= 500) {
      last_failure = "HTTP " + std::to_string(status) + ": " + ServerMessage(res->body);
      continue;
    }
    if (status == kStatusUnsupportedLevel)
      Fail(ErrorKind::kCapability, ServerMessage(res->body));
    Fail(ErrorKind::kProtocol,
         "HTTP " + std::to_string(status) + ": " + ServerMessage(res->body));
  }
  Fail(ErrorKind::kTransport, options_.url + path + " failed after " +
                                  std::to_string(kRemoteRetries + 1) +
                                  " attempts: " + last_failure);
}

OutputBatch RemoteSuspect::Query(const std::vector<Image>& images, OutputLevel level) {
  Require(!images.empty(), "query has no images");
  OutputBatch out;
  out.level = level;
  for (size_t start = 0; start < images.size(); start += options_.max_batch) {
    const size_t end = std::min(images.size(), start + options_.max_batch);
    const std::vector<Image> chunk(images.begin() + static_cast<long>(start),
                                   images.begin() + static_cast<long>(end));
    OutputBatch part = DecodeQueryResponse(
        Send("POST", "/query", EncodeQueryRequest(chunk, level)), level, chunk.size());
    if (out.n() > 0 && part.dim() != out.dim())
      Fail(ErrorKind::kProtocol, "output dimension changed between chunks");
    for (auto& v : part.vectors) out.vectors.push_back(std::move(v));
  }
  return out;
}

std::vector<OutputLevel> RemoteSuspect::Levels() {
  const std::string body = Send("GET", "/capabilities", "");
  std::vector<OutputLevel> levels;
  try {
    const json doc = json::parse(body);
    for (const json& l : doc.at("levels"))
      levels.push_back(ParseOutputLevel(l.get<std::string>()));
  } catch (const json::exception& e) {
    Fail(ErrorKind::kProtocol, std::string("malformed capabilities: ") + e.what());
  } catch (const Error& e) {
    Fail(ErrorKind::kProtocol, std::string("malformed capabilities: ") + e.what());
  }
  return levels;
}

// ---------------------------------------------------------------------------
// Server

SuspectServer::SuspectServer(EncoderModel encoder, std::optional<LinearProbe> probe,
                             size_t max_batch)
    : encoder_(std::move(encoder)), probe_(std::move(probe)), max_batch_(max_batch) {
  try {
    encoder_.Validate();
    if (probe_) {
      probe_->Validate();
      Require(probe_->feature_dim == encoder_.feature_dim(),
              "probe input dimension does not match the encoder");
    }
    Require(max_batch_ >= 1, "max batch must be positive");
  } catch (const Error& e) {
    Fail(ErrorKind::kStartup, e.what());
  }
  server_ = std::make_unique<httplib::Server>();
  Install();
}

SuspectServer::~SuspectServer() { Stop(); }

void SuspectServer::Install() {
  const std::vector<OutputLevel> levels = ServedLevels(probe_.has_value());
  server_->Get("/capabilities", [this, levels](const httplib::Request&,
                                               httplib::Response& res) {
    res.set_content(EncodeCapabilities(levels, encoder_.feature_dim()),
                    "application/json");
  });
  server_->Post("/query", [this, levels](const httplib::Request& req,
                                         httplib::Response& res) {
    try {
      OutputLevel level;
      const std::vector<Image> images = DecodeQueryRequest(req.body, &level);
      if (images.empty()) Fail(ErrorKind::kProtocol, "query has no images");
      if (images.size() > max_batch_) {
        res.status = kStatusTooLarge;
        res.set_content(ErrorBody(ErrorKind::kProtocol,
                                  "batch of " + std::to_string(images.size()) +
                                      " exceeds the limit of " +
                                      std::to_string(max_batch_)),
                        "application/json");
        return;
      }
      if (!HasLevel(levels, level)) {
        res.status = kStatusUnsupportedLevel;
        res.set_content(ErrorBody(ErrorKind::kCapability,
                                  "level '" + OutputLevelName(level) + "' is not served"),
                        "application/json");
        return;
      }
      const OutputBatch out =
          ComputeOutputs(encoder_, probe_ ? &*probe_ : nullptr, images, level);
      res.set_content(EncodeQueryResponse(out), "application/json");
    } catch (const Error& e) {
      res.status = kStatusBadRequest;
      res.set_content(ErrorBody(e.kind(), e.what()), "application/json");
    }
  });
}

int SuspectServer::Start(const std::string& host, int port) {
  Require(!thread_.joinable(), "server already started");
  int bound = -1;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (server_->bind_to_port(host, port)) {
    bound = port;
  }
  if (bound <= 0)
    Fail(ErrorKind::kStartup, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void SuspectServer::Wait() {
  if (thread_.joinable()) thread_.join();
}

void SuspectServer::Stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace clmark
