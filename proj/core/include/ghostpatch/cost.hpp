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

// Monetary cost of an evaluation, by paid API or by a rented GPU running a
// private copy of the model. All figures are estimates.

#pragma once

#include <cstdint>
#include <string>

#include "ghostpatch/harness.hpp"

namespace ghostpatch {

struct PricingModel {
  double per_1k_queries = 1.5;
  double per_gpu_hour = 2.48;
  double seconds_per_query = 7.2;
  // One-off GPU time for provisioning and loading the model.
  double init_hours = 0.2;

  void validate() const;
};

struct CostBreakdown {
  std::uint64_t total_queries = 0;
  double api_cost = 0.0;
  double gpu_cost = 0.0;
  double wall_time_s = 0.0;
  std::string cheaper;  // "api" or "gpu"; "api" on a tie
};

CostBreakdown estimate_cost(std::uint64_t total_queries,
                            const PricingModel& pricing);

// Counts attack queries plus the harvest queries recorded in the report.
CostBreakdown estimate_cost(const EvalReport& report,
                            const PricingModel& pricing);

std::string cost_json(const CostBreakdown& cost);

}  // namespace ghostpatch
