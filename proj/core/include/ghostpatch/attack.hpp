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

// One complete attack on one image: baseline query, position-centric
// selection, color manipulation and election of the best in-ball iterate,
// all paid for from a single query budget.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ghostpatch/image.hpp"
#include "ghostpatch/oracle.hpp"
#include "ghostpatch/patchdb.hpp"
#include "ghostpatch/projection.hpp"
#include "ghostpatch/selection.hpp"

namespace ghostpatch {

inline constexpr int kDefaultSuccessIncrement = 20;
inline constexpr int kDefaultInputSize = 640;

struct AttackConfig {
  int epsilon = 32;
  std::uint64_t max_queries = kDefaultMaxQueries;
  int success_increment = kDefaultSuccessIncrement;
  SelectionConfig selection;
  ProjectionParams projection;
  ToleranceSchedule schedule;
  std::uint64_t seed = 0;

  // Also checks the nested configs.
  void validate() const;
};

struct TraceRecord {
  std::uint64_t query_index = 0;
  std::string phase;  // baseline | selection | projection | final
  int object_count = 0;
  int linf = 0;
  std::optional<double> tolerance;  // set for projection and final queries

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct AttackResult {
  ImageTensor adv_image;
  int baseline_count = 0;
  int best_count = 0;
  int increment = 0;  // best_count - baseline_count
  std::uint64_t queries_used = 0;
  bool success = false;
  std::string failure;  // empty, or "budget"
  std::vector<TraceRecord> trace;  // one record per query, in order
  std::map<std::string, std::uint64_t> phase_queries;
  double wall_time_s = 0.0;
};

// Throws EmptyIndex for an empty db and InvalidArgument for a bad config.
// Every other failure mode is reported in the result.
AttackResult run_attack(const ImageTensor& x, const PatchIndex& db,
                        const AttackConfig& cfg, Oracle& oracle);

// increment > success_increment and the image lies in the epsilon ball
// around `original`, checked here by a direct pixel scan.
bool is_success(const AttackResult& result, const AttackConfig& cfg,
                const ImageTensor& original);

// One JSON object per line: query_index, phase, object_count, linf, d.
std::string trace_jsonl(const std::vector<TraceRecord>& trace);
void write_trace(const std::vector<TraceRecord>& trace,
                 const std::filesystem::path& path);

}  // namespace ghostpatch
