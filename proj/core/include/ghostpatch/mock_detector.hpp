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

// Deterministic template-correlation detector used as a stand-in victim.
//
// For every configured box size S the image is box-averaged down by
// f = S / template_size and each template is slid over that level at
// max(1, stride / f) level pixels (i.e. `stride` pixels in the original
// frame). The score at a position is the normalized cross-correlation of the
// window with the best template, computed over all three channels. Windows
// whose intensity standard deviation is below `min_contrast` are skipped.
//
// Pipeline: correlation scan -> keep 3x3 local maxima above
// correlation_threshold -> NMS(nms_iou) -> drop boxes smaller than
// min_size_fraction of the image -> drop scores below score_threshold.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ghostpatch/image.hpp"
#include "ghostpatch/oracle.hpp"

namespace ghostpatch {

struct DetectorTemplate {
  std::string label;
  ImageTensor pattern;  // kTemplateSize square, constant on 2x2 blocks
};

inline constexpr int kTemplateSize = 8;

struct MockDetectorConfig {
  std::string model_id = "mock-ncc-v1";
  std::vector<DetectorTemplate> templates;
  double correlation_threshold = 0.85;
  double score_threshold = 0.25;
  double nms_iou = 0.5;
  double min_size_fraction = 0.0;
  int stride = 8;
  std::vector<int> box_sizes = {16, 32, 64};
  double min_contrast = 4.0;

  // Default configuration with the default template library.
  static MockDetectorConfig defaults();

  // Throws InvalidArgument on out-of-range fields.
  void validate() const;
};

// Six two-color block patterns with distinct layouts, generated from `seed`.
// Different seeds give libraries that do not correlate with each other.
std::vector<DetectorTemplate> default_templates(std::uint64_t seed = 0x5eed);

DetectionSet mock_detect(const ImageTensor& image,
                         const MockDetectorConfig& cfg);

class MockDetector final : public Oracle {
 public:
  explicit MockDetector(MockDetectorConfig cfg);

  std::string id() const override { return cfg_.model_id; }
  std::vector<Detection> forward(const ImageTensor& image) override;

  const MockDetectorConfig& config() const noexcept { return cfg_; }

 private:
  MockDetectorConfig cfg_;
};

}  // namespace ghostpatch
