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

#include <string>
#include <string_view>

#include "ghostpatch/image.hpp"
#include "ghostpatch/rng.hpp"

namespace ghostpatch {

// Color augmentation applied during harvesting and patch generation.
struct ColorTransform {
  enum class Kind { kIdentity, kJitter, kEqualize, kPosterize };

  Kind kind = Kind::kIdentity;
  // Jitter: factors drawn uniformly from [max(0, 1 - x), 1 + x].
  double brightness = 0.0;
  double contrast = 0.0;
  // Posterize: number of most significant bits kept, in [1, 8].
  int bits = 8;

  static ColorTransform identity() { return {}; }
  static ColorTransform jitter(double brightness, double contrast) {
    return {Kind::kJitter, brightness, contrast, 8};
  }
  static ColorTransform equalize() { return {Kind::kEqualize, 0.0, 0.0, 8}; }
  static ColorTransform posterize(int bits) {
    return {Kind::kPosterize, 0.0, 0.0, bits};
  }

  // Accepts "identity", "none", "equalize", "posterize", "posterize:B",
  // "jitter" or "jitter:B:C". Bare names take the harvest defaults.
  static ColorTransform parse(std::string_view tag);

  // Canonical tag; parse(tag()) reproduces the transform.
  std::string tag() const;

  friend bool operator==(const ColorTransform&, const ColorTransform&) = default;
};

// Deterministic given (img, transform, rng state). Throws InvalidArgument for
// out-of-range parameters.
ImageTensor color_transform(const ImageTensor& img, const ColorTransform& t,
                            Rng& rng);

}  // namespace ghostpatch
