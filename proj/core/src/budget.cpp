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

#include "ghostpatch/errors.hpp"
#include "ghostpatch/oracle.hpp"

namespace ghostpatch {

QueryBudget::QueryBudget(std::uint64_t max_queries)
    : max_queries_(max_queries) {}

std::uint64_t QueryBudget::charge(std::string_view phase) {
  std::lock_guard lock(mu_);
  if (used_ >= max_queries_) {
    throw BudgetExhausted("query budget exhausted (" +
                          std::to_string(max_queries_) + " used)");
  }
  ++used_;
  auto it = tallies_.find(phase);
  if (it == tallies_.end()) {
    tallies_.emplace(std::string(phase), 1);
  } else {
    ++it->second;
  }
  return used_;
}

std::uint64_t QueryBudget::used() const {
  std::lock_guard lock(mu_);
  return used_;
}

std::uint64_t QueryBudget::remaining() const {
  std::lock_guard lock(mu_);
  return max_queries_ - used_;
}

bool QueryBudget::exhausted() const {
  std::lock_guard lock(mu_);
  return used_ >= max_queries_;
}

std::map<std::string, std::uint64_t> QueryBudget::tallies() const {
  std::lock_guard lock(mu_);
  return {tallies_.begin(), tallies_.end()};
}

DetectionSet detect(Oracle& oracle, const ImageTensor& image,
                    QueryBudget& budget, std::string_view phase) {
  const std::uint64_t index = budget.charge(phase);
  DetectionSet out;
  out.detections = oracle.forward(image);
  out.oracle_id = oracle.id();
  out.query_index = index;
  return out;
}

}  // namespace ghostpatch
