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

// The victim detector as seen by the attacker: an opaque function from an
// image to a list of reported boxes. Nothing else (scores of suppressed
// candidates, logits, gradients) crosses this boundary.

#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "ghostpatch/image.hpp"

namespace ghostpatch {

struct Detection {
  RegionRect box;
  std::string label;
  double score = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct DetectionSet {
  std::vector<Detection> detections;
  std::string oracle_id;
  // 1-based position of this call on the budget that paid for it.
  std::uint64_t query_index = 0;

  std::size_t size() const noexcept { return detections.size(); }
};

inline constexpr std::uint64_t kDefaultMaxQueries = 4000;

// Client-side query accounting. Charging is atomic: concurrent callers can
// never push `used` past `max_queries`, and `used` always equals the sum of
// the per-phase tallies.
class QueryBudget {
 public:
  explicit QueryBudget(std::uint64_t max_queries = kDefaultMaxQueries);

  QueryBudget(const QueryBudget&) = delete;
  QueryBudget& operator=(const QueryBudget&) = delete;

  // Reserves one query under `phase` and returns its 1-based index.
  // Throws BudgetExhausted when used == max_queries.
  std::uint64_t charge(std::string_view phase);

  std::uint64_t max_queries() const noexcept { return max_queries_; }
  std::uint64_t used() const;
  std::uint64_t remaining() const;
  bool exhausted() const;
  std::map<std::string, std::uint64_t> tallies() const;

 private:
  const std::uint64_t max_queries_;
  mutable std::mutex mu_;
  std::uint64_t used_ = 0;
  std::map<std::string, std::uint64_t, std::less<>> tallies_;
};

class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual std::string id() const = 0;

  // One forward pass, unmetered. Must be safe to call concurrently.
  virtual std::vector<Detection> forward(const ImageTensor& image) = 0;
};

// Metered query: charges one unit of `budget` and then calls the oracle.
// After exhaustion it throws BudgetExhausted without touching the oracle.
DetectionSet detect(Oracle& oracle, const ImageTensor& image,
                    QueryBudget& budget, std::string_view phase = "attack");

double iou(const RegionRect& a, const RegionRect& b) noexcept;

// Greedy non-maximum suppression. Candidates are visited by (score desc,
// x0 asc, y0 asc); a candidate is dropped when its IoU with any kept box
// exceeds iou_threshold. Output keeps that visiting order.
std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold);
DetectionSet nms(const DetectionSet& dets, double iou_threshold);

}  // namespace ghostpatch
