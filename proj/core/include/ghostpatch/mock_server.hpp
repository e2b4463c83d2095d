/* Copyright 2026 The Ghostpatch Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "ghostpatch/mock_detector.hpp"
#include "ghostpatch/wire.hpp"

namespace ghostpatch {

struct MockServerOptions {
  std::size_t max_payload_bytes = kDefaultMaxPayloadBytes;
  // Requests arriving faster than this rate get 429. 0 disables limiting.
  double rate_limit_per_second = 0.0;
  // When set, images are resized to (height, width) before detection and the
  // boxes are mapped back to the submitted frame.
  std::optional<std::pair<int, int>> resize_to;
};

// Serves a MockDetector over the local detection protocol.
class MockServer {
 public:
  MockServer(MockDetectorConfig detector, MockServerOptions options = {});
  ~MockServer();

  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  // Blocks until stop() is called. Returns false if the port cannot be bound.
  bool listen(const std::string& host, int port);

  // Binds an ephemeral port on `host`, serves on a background thread and
  // returns the port.
  int start_background(const std::string& host = "127.0.0.1");

  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread worker_;
};

}  // namespace ghostpatch
