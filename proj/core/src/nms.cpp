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

#include <algorithm>

#include "ghostpatch/oracle.hpp"

namespace ghostpatch {

double iou(const RegionRect& a, const RegionRect& b) noexcept {
  const long long iw =
      std::max(0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  const long long ih =
      std::max(0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  const long long inter = iw * ih;
  const long long uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.box.x0 != b.box.x0) return a.box.x0 < b.box.x0;
                     return a.box.y0 < b.box.y0;
                   });
  std::vector<Detection> kept;
  kept.reserve(dets.size());
  for (auto& d : dets) {
    const bool suppressed =
        std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
          return iou(k.box, d.box) > iou_threshold;
        });
    if (!suppressed) kept.push_back(std::move(d));
  }
  return kept;
}

DetectionSet nms(const DetectionSet& dets, double iou_threshold) {
  DetectionSet out;
  out.detections = nms(dets.detections, iou_threshold);
  out.oracle_id = dets.oracle_id;
  out.query_index = dets.query_index;
  return out;
}

}  // namespace ghostpatch
