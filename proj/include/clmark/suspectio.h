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

// Suspect access: local models, a JSON-over-HTTP client and the matching
// reference server.
//
// Wire protocol (HTTP/1.1, UTF-8 JSON, floats printed with 9 significant
// digits):
//   POST /query  {"level": "feature"|"soft"|"hard",
//                 "images": [{"h": H, "w": W, "c": C, "data": [...]}]}
//             -> {"vectors": [[...], ...], "dim": D}
//   GET /capabilities -> {"levels": [...], "dim": D}
// Errors carry {"error": {"kind": K, "message": M}} with status 400
// (malformed request), 413 (batch above the server limit) or 422 (level
// not served).

#ifndef CLMARK_SUSPECTIO_H_
#define CLMARK_SUSPECTIO_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "clmark/cltrain.h"
#include "clmark/downstream.h"
#include "clmark/verify.h"

namespace httplib {
class Server;
}

namespace clmark {

// Feature level always; soft and hard labels need a probe.
std::vector<OutputLevel> ServedLevels(bool has_probe);

// Outputs of encoder (+ probe) at `level`.
OutputBatch ComputeOutputs(const EncoderModel& encoder, const LinearProbe* probe,
                           const std::vector<Image>& images, OutputLevel level);

class InProcessSuspect : public Suspect {
 public:
  explicit InProcessSuspect(EncoderModel encoder,
                            std::optional<LinearProbe> probe = std::nullopt);
  static InProcessSuspect FromFiles(
      const std::filesystem::path& encoder,
      const std::optional<std::filesystem::path>& probe = std::nullopt);

  OutputBatch Query(const std::vector<Image>& images, OutputLevel level) override;
  std::vector<OutputLevel> Levels() override;

 private:
  EncoderModel encoder_;
  std::optional<LinearProbe> probe_;
};

struct RemoteOptions {
  std::string url;  // http://host:port
  double timeout_seconds = 30.0;
  size_t max_batch = 64;

  void Validate() const;
};

// Transient failures (connection errors, timeouts, 5xx) are retried this
// many times before a transport error is raised.
inline constexpr int kRemoteRetries = 2;

class RemoteSuspect : public Suspect {
 public:
  explicit RemoteSuspect(RemoteOptions options);

  // Splits the request into chunks of at most max_batch images.
  OutputBatch Query(const std::vector<Image>& images, OutputLevel level) override;
  std::vector<OutputLevel> Levels() override;

 private:
  std::string Send(const std::string& method, const std::string& path,
                   const std::string& body);

  RemoteOptions options_;
  std::string host_;
  int port_ = 0;
};

// Wire encoding helpers, exposed for protocol tests.
std::string WireFloat(double v);
std::string EncodeQueryRequest(const std::vector<Image>& images, OutputLevel level);
// Throws kProtocol on anything that does not match the schema.
std::vector<Image> DecodeQueryRequest(const std::string& body, OutputLevel* level);
std::string EncodeQueryResponse(const OutputBatch& batch);
OutputBatch DecodeQueryResponse(const std::string& body, OutputLevel level,
                                size_t expected);
std::string EncodeCapabilities(const std::vector<OutputLevel>& levels, int dim);

// Reference suspect server over immutable model state.
class SuspectServer {
 public:
  SuspectServer(EncoderModel encoder, std::optional<LinearProbe> probe,
                size_t max_batch = 256);
  ~SuspectServer();
  SuspectServer(const SuspectServer&) = delete;
  SuspectServer& operator=(const SuspectServer&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port; bind failure is a startup error.
  int Start(const std::string& host, int port);
  // Blocks until Stop() is called from elsewhere.
  void Wait();
  void Stop();

 private:
  void Install();

  EncoderModel encoder_;
  std::optional<LinearProbe> probe_;
  size_t max_batch_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace clmark

#endif  // CLMARK_SUSPECTIO_H_
