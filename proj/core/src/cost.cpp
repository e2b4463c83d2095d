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

#include "ghostpatch/cost.hpp"

#include <cmath>

#include "ghostpatch/errors.hpp"
#include "json.hpp"

namespace ghostpatch {

void PricingModel::validate() const {
  for (double v : {per_1k_queries, per_gpu_hour, seconds_per_query, init_hours}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("pricing values must be finite and non-negative");
    }
  }
}

CostBreakdown estimate_cost(std::uint64_t total_queries,
                            const PricingModel& pricing) {
  pricing.validate();
  CostBreakdown c;
  c.total_queries = total_queries;
  const auto q = static_cast<double>(total_queries);
  c.api_cost = q / 1000.0 * pricing.per_1k_queries;
  c.wall_time_s = q * pricing.seconds_per_query;
  // no work, no machine to provision
  if (total_queries > 0) {
    c.gpu_cost = (c.wall_time_s / 3600.0 + pricing.init_hours) * pricing.per_gpu_hour;
  }
  c.cheaper = c.gpu_cost < c.api_cost ? "gpu" : "api";
  return c;
}

CostBreakdown estimate_cost(const EvalReport& report,
                            const PricingModel& pricing) {
  return estimate_cost(report.queries.total + report.harvest_queries, pricing);
}

std::string cost_json(const CostBreakdown& cost) {
  nlohmann::ordered_json j;
  j["total_queries"] = cost.total_queries;
  j["api_cost"] = cost.api_cost;
  j["gpu_cost"] = cost.gpu_cost;
  j["wall_time_s"] = cost.wall_time_s;
  j["cheaper"] = cost.cheaper;
  j["estimate"] = true;
  return j.dump(2);
}

}  // namespace ghostpatch
