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

#include "ghostpatch/http_oracle.hpp"

#include <cmath>

#include "ghostpatch/errors.hpp"
#include "httplib.h"

namespace ghostpatch {
namespace {

httplib::Client make_client(const HttpOracleOptions& opt) {
  httplib::Client cli(opt.url);
  const auto secs = static_cast<time_t>(opt.timeout_seconds);
  const auto usecs = static_cast<time_t>(
      (opt.timeout_seconds - std::floor(opt.timeout_seconds)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  return cli;
}

[[noreturn]] void throw_status(int status, const std::string& body) {
  std::string what = "oracle returned HTTP " + std::to_string(status);
  if (!body.empty()) what += ": " + body.substr(0, 200);
  throw OracleHttpError(status, what);
}

}  // namespace

HttpOracle::HttpOracle(HttpOracleOptions options) : options_(std::move(options)) {
  auto cli = make_client(options_);
  auto res = cli.Get("/v1/info");
  if (!res) {
    throw TransportError("cannot reach oracle at " + options_.url + ": " +
                         httplib::to_string(res.error()));
  }
  if (res->status != 200) throw_status(res->status, res->body);
  info_ = decode_info(res->body);
}

bool HttpOracle::healthy() const {
  auto cli = make_client(options_);
  auto res = cli.Get("/v1/health");
  return res && res->status == 200 &&
         res->body.find("\"ok\"") != std::string::npos;
}

std::vector<Detection> HttpOracle::forward(const ImageTensor& image) {
  auto cli = make_client(options_);
  const std::string body = encode_detect_request(image, options_.min_score);
  auto res = cli.Post("/v1/detect", body, "application/json");
  if (!res) {
    throw TransportError("oracle request failed: " +
                         httplib::to_string(res.error()));
  }
  if (res->status != 200) throw_status(res->status, res->body);
  return decode_detect_response(res->body, image.width(), image.height())
      .detections;
}

}  // namespace ghostpatch
