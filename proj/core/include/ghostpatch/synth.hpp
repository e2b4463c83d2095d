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

// Seeded synthetic images for desk-scale runs: textured target scenes with
// no detectable content, and harvest corpora made of template collages.

#pragma once

#include <cstdint>
#include <vector>

#include "ghostpatch/image.hpp"
#include "ghostpatch/mock_detector.hpp"
#include "ghostpatch/oracle.hpp"

namespace ghostpatch {

struct TargetStyle {
  // Multi-octave texture amplitude, drawn per image from [min, max].
  double texture_min = 4.0;
  double texture_max = 14.0;
  // Independent per-pixel noise amplitude.
  double grain = 3.0;
};

ImageTensor synthetic_target(std::uint64_t seed, int height = 640,
                             int width = 640, const TargetStyle& style = {});

struct Collage {
  ImageTensor image;
  std::vector<Detection> planted;  // label + box of every pasted template
};

// Pastes `count` templates (bilinear-resized to a size drawn from `sizes`)
// at non-overlapping, 8-pixel aligned positions on a mildly textured
// background. Fewer than `count` are placed if the canvas runs out of room.
Collage synthetic_collage(std::uint64_t seed,
                          const std::vector<DetectorTemplate>& templates,
                          int height, int width, int count,
                          const std::vector<int>& sizes = {16, 32, 64});

}  // namespace ghostpatch
