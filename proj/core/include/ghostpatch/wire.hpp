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

// JSON bodies of the local detection protocol.
//
//   POST /v1/detect
//     request  {"image_png_b64": "<base64 PNG>", "min_score": <float, optional>}
//     response {"model_id": "...",
//               "detections": [{"box": [x0, y0, x1, y1], "label": "...",
//                               "score": <float>}],
//               "elapsed_ms": <float>}
//   GET /v1/health -> {"status": "ok"}
//   GET /v1/info   -> {"model_id": "...", "input_size": [h, w]}
//
// Boxes are always in the pixel frame of the submitted image.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ghostpatch/image.hpp"
#include "ghostpatch/oracle.hpp"

namespace ghostpatch {

inline constexpr std::size_t kDefaultMaxPayloadBytes = 20u * 1024u * 1024u;

struct DetectRequest {
  ImageTensor image;
  std::optional<double> min_score;
};

struct DetectResponse {
  std::string model_id;
  std::vector<Detection> detections;
  double elapsed_ms = 0.0;
};

struct ServiceInfo {
  std::string model_id;
  int input_height = 0;
  int input_width = 0;
};

std::string encode_detect_request(const ImageTensor& image,
                                  std::optional<double> min_score = {});

// Server side. Throws ProtocolError for malformed JSON or fields, DecodeError
// when the embedded image cannot be decoded.
DetectRequest decode_detect_request(std::string_view body);

std::string encode_detect_response(const DetectResponse& response);

// Client side. Validates the body against the response schema and maps each
// box onto integer pixels inside a width x height frame (floor for the low
// corner, ceil for the high one). Throws ProtocolError on any violation.
DetectResponse decode_detect_response(std::string_view body, int image_width,
                                      int image_height);

std::string encode_info(const ServiceInfo& info);
ServiceInfo decode_info(std::string_view body);

}  // namespace ghostpatch
