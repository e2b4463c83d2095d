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

// JSON documents for attack, detector and server configuration. Field names
// match the C++ members. Missing fields keep their defaults; unknown fields
// are rejected so that typos do not silently fall back to defaults.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ghostpatch/attack.hpp"
#include "ghostpatch/mock_detector.hpp"
#include "ghostpatch/mock_server.hpp"

namespace ghostpatch {

// Canonical, key-sorted form. parse_attack_config(attack_config_json(c))
// reproduces c.
std::string attack_config_json(const AttackConfig& cfg);
AttackConfig parse_attack_config(std::string_view text);
AttackConfig load_attack_config(const std::filesystem::path& path);

// Detector section: model_id, correlation_threshold, score_threshold,
// nms_iou, min_size_fraction, stride, box_sizes, min_contrast and
// template_seed (selects the template library). Server section (optional,
// under "server"): max_payload_bytes, rate_limit_per_second, resize_to.
struct MockServiceConfig {
  MockDetectorConfig detector = MockDetectorConfig::defaults();
  MockServerOptions server;
};

MockServiceConfig parse_mock_config(std::string_view text);
MockServiceConfig load_mock_config(const std::filesystem::path& path);

}  // namespace ghostpatch
