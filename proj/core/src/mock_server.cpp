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

#include "ghostpatch/mock_server.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>

#include "ghostpatch/errors.hpp"
#include "httplib.h"

namespace ghostpatch {
namespace {

std::string error_body(const std::string& message) {
  std::string escaped;
  for (char ch : message) {
    if (ch == '"' || ch == '\\') escaped.push_back('\\');
    if (static_cast<unsigned char>(ch) >= 0x20) escaped.push_back(ch);
  }
  return "{\"error\":\"" + escaped + "\"}";
}

}  // namespace

struct MockServer::Impl {
  MockDetectorConfig detector;
  MockServerOptions options;
  httplib::Server server;

  std::mutex rate_mu;
  std::chrono::steady_clock::time_point last_accepted{};
  bool any_accepted = false;

  bool admit() {
    if (options.rate_limit_per_second <= 0.0) return true;
    const auto now = std::chrono::steady_clock::now();
    const auto min_gap = std::chrono::duration<double>(
        1.0 / options.rate_limit_per_second);
    std::lock_guard lock(rate_mu);
    if (any_accepted && now - last_accepted < min_gap) return false;
    any_accepted = true;
    last_accepted = now;
    return true;
  }

  DetectResponse run(const DetectRequest& req) {
    const auto t0 = std::chrono::steady_clock::now();
    DetectResponse resp;
    resp.model_id = detector.model_id;

    const ImageTensor& original = req.image;
    if (options.resize_to) {
      const auto [rh, rw] = *options.resize_to;
      const ImageTensor resized = resize_bilinear(original, rh, rw);
      const double sx = static_cast<double>(original.width()) / rw;
      const double sy = static_cast<double>(original.height()) / rh;
      for (auto d : mock_detect(resized, detector).detections) {
        d.box.x0 = std::clamp(static_cast<int>(std::floor(d.box.x0 * sx)), 0,
                              original.width());
        d.box.y0 = std::clamp(static_cast<int>(std::floor(d.box.y0 * sy)), 0,
                              original.height());
        d.box.x1 = std::clamp(static_cast<int>(std::ceil(d.box.x1 * sx)), 0,
                              original.width());
        d.box.y1 = std::clamp(static_cast<int>(std::ceil(d.box.y1 * sy)), 0,
                              original.height());
        if (!d.box.empty()) resp.detections.push_back(std::move(d));
      }
    } else {
      resp.detections = mock_detect(original, detector).detections;
    }
    if (req.min_score) {
      std::erase_if(resp.detections,
                    [&](const Detection& d) { return d.score < *req.min_score; });
    }
    resp.elapsed_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    return resp;
  }

  void install_routes() {
    server.set_payload_max_length(options.max_payload_bytes);
    // Errors raised inside httplib (413, 404, ...) get the same JSON body.
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        res.set_content(error_body(httplib::status_message(res.status)),
                        "application/json");
      }
      return httplib::Server::HandlerResponse::Handled;
    });

    server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"status\":\"ok\"}", "application/json");
    });

    server.Get("/v1/info", [this](const httplib::Request&, httplib::Response& res) {
      ServiceInfo info;
      info.model_id = detector.model_id;
      if (options.resize_to) {
        info.input_height = options.resize_to->first;
        info.input_width = options.resize_to->second;
      } else {
        info.input_height = 640;
        info.input_width = 640;
      }
      res.set_content(encode_info(info), "application/json");
    });

    server.Post("/v1/detect", [this](const httplib::Request& req,
                                     httplib::Response& res) {
      if (!admit()) {
        res.status = 429;
        res.set_content(error_body("rate limited"), "application/json");
        return;
      }
      try {
        const DetectRequest parsed = decode_detect_request(req.body);
        res.set_content(encode_detect_response(run(parsed)), "application/json");
      } catch (const DecodeError& e) {
        res.status = 400;
        res.set_content(error_body(e.what()), "application/json");
      } catch (const ProtocolError& e) {
        res.status = 400;
        res.set_content(error_body(e.what()), "application/json");
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(error_body(e.what()), "application/json");
      }
    });
  }
};

MockServer::MockServer(MockDetectorConfig detector, MockServerOptions options)
    : impl_(std::make_unique<Impl>()) {
  detector.validate();
  impl_->detector = std::move(detector);
  impl_->options = std::move(options);
  impl_->install_routes();
}

MockServer::~MockServer() { stop(); }

bool MockServer::listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int MockServer::start_background(const std::string& host) {
  const int port = impl_->server.bind_to_any_port(host);
  if (port < 0) throw IoError("cannot bind mock server on " + host);
  worker_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void MockServer::stop() {
  impl_->server.stop();
  if (worker_.joinable()) worker_.join();
}

}  // namespace ghostpatch
