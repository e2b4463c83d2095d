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

#include <optional>
#include <string>

#include "ghostpatch/oracle.hpp"
#include "ghostpatch/wire.hpp"

namespace ghostpatch {

struct HttpOracleOptions {
  std::string url;  // e.g. "http://127.0.0.1:8080"
  double timeout_seconds = 30.0;
  std::optional<double> min_score;
};

// Client for the local detection protocol. Each forward() uses its own
// connection, so concurrent calls are independent.
class HttpOracle final : public Oracle {
 public:
  // Contacts /v1/info once. Throws TransportError when the service is down.
  explicit HttpOracle(HttpOracleOptions options);

  std::string id() const override { return info_.model_id; }
  std::vector<Detection> forward(const ImageTensor& image) override;

  const ServiceInfo& info() const noexcept { return info_; }
  bool healthy() const;

 private:
  HttpOracleOptions options_;
  ServiceInfo info_;
};

}  // namespace ghostpatch
