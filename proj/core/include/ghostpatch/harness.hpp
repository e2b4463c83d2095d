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

// Batch evaluation: one attack per (image, config), ASR per epsilon, query
// statistics, and deterministic JSON / CSV / PNG reports.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ghostpatch/attack.hpp"
#include "ghostpatch/image.hpp"
#include "ghostpatch/oracle.hpp"
#include "ghostpatch/patchdb.hpp"

namespace ghostpatch {

inline constexpr int kReportSchemaVersion = 1;

struct EvalItem {
  std::string id;  // file name; part of the per-attack seed
  ImageTensor image;
};

struct ImageSummary {
  std::string image_id;
  int epsilon = 0;
  std::uint64_t seed = 0;
  int baseline_count = 0;
  int best_count = 0;
  int increment = 0;
  std::uint64_t queries_used = 0;
  std::size_t trace_length = 0;
  int linf = 0;
  bool success = false;
  std::string failure;  // "", "budget" or "error"
  std::string error;    // exception text when failure == "error"

  friend bool operator==(const ImageSummary&, const ImageSummary&) = default;
};

struct EpsilonSummary {
  int epsilon = 0;
  std::size_t attempts = 0;
  std::size_t successes = 0;
  double asr = 0.0;

  friend bool operator==(const EpsilonSummary&, const EpsilonSummary&) = default;
};

struct QueryStats {
  std::uint64_t total = 0;
  double mean = 0.0;
  double median = 0.0;
  std::uint64_t max = 0;

  friend bool operator==(const QueryStats&, const QueryStats&) = default;
};

struct EvalReport {
  std::string oracle_id;
  std::string config_digest;
  std::uint64_t harvest_queries = 0;
  std::vector<ImageSummary> results;  // image-major, config order within
  std::vector<EpsilonSummary> asr;    // ascending epsilon
  QueryStats queries;                 // attack queries only

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct EvalOptions {
  std::size_t workers = 1;
  // When set, each adversarial image is written as <stem>_eps<E>.png.
  std::optional<std::filesystem::path> adv_dir;
  // When set, each trace is written as <stem>_eps<E>.jsonl.
  std::optional<std::filesystem::path> trace_dir;
};

// Seed used for one image: config seed xor stable_hash(image id).
std::uint64_t per_image_seed(std::uint64_t seed, std::string_view image_id);

// Loads every PNG/JPEG in dir, sorted, with the file name as id.
std::vector<EvalItem> load_eval_items(const std::filesystem::path& dir);

// Throws InvalidArgument for empty inputs. Per-attack failures are recorded
// in the report, never dropped.
EvalReport run_eval(const std::vector<EvalItem>& items, const PatchIndex& db,
                    const std::vector<AttackConfig>& cfgs, Oracle& oracle,
                    const EvalOptions& options = {});

// Recomputes asr and queries from results.
void summarize(EvalReport& report);

// Byte-stable for equal reports; contains no timestamps or wall times.
std::string report_json(const EvalReport& report);
EvalReport parse_report_json(std::string_view text);
EvalReport load_report(const std::filesystem::path& path);

// One row per oracle, one column per epsilon.
std::string report_csv(const EvalReport& report);

// ASR against epsilon as a small line chart.
ImageTensor plot_asr(const EvalReport& report, int height = 240,
                     int width = 360);

}  // namespace ghostpatch
