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

// Database of object patches harvested from a corpus by querying a detector
// ahead of time. Harvesting is a one-time cost: the same index serves every
// later attack against that detector until the detector changes, which
// probe_drift() checks by replaying stored probe queries.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ghostpatch/image.hpp"
#include "ghostpatch/oracle.hpp"
#include "ghostpatch/rng.hpp"
#include "ghostpatch/transform.hpp"

namespace ghostpatch {

struct PatchRecord {
  ImageTensor patch;
  std::string label;
  double score = 0.0;
  std::string source_image_id;
  RegionRect source_box;
  ColorStats stats;
  std::string augmentation = "none";
  // Number of tested transforms under which the detector still reported a
  // same-label box with IoU >= 0.5 at this location.
  int robustness = 0;

  friend bool operator==(const PatchRecord&, const PatchRecord&) = default;
};

// Detections observed for one corpus image at harvest time, replayed later
// to detect model drift.
struct ProbeFingerprint {
  std::string probe_id;
  ImageTensor image;
  std::vector<Detection> detections;
  std::string digest;  // fingerprint_digest(detections)

  friend bool operator==(const ProbeFingerprint&, const ProbeFingerprint&) = default;
};

struct PatchIndex {
  std::vector<PatchRecord> records;
  std::vector<ProbeFingerprint> fingerprints;
  std::string created_at;  // ISO-8601 UTC
  std::string config_digest;
  std::string oracle_id;
  int transforms_tested = 0;
  std::uint64_t harvest_queries = 0;

  bool empty() const noexcept { return records.empty(); }

  friend bool operator==(const PatchIndex&, const PatchIndex&) = default;
};

inline constexpr int kIndexSchemaVersion = 1;
inline constexpr double kDefaultMinScore = 0.3;
inline constexpr double kDefaultDriftThreshold = 0.8;

struct CorpusImage {
  std::string id;
  ImageTensor image;
};

struct HarvestOptions {
  std::vector<ColorTransform> augment;
  std::size_t probe_count = 4;
  double robustness_iou = 0.5;
  std::size_t workers = 1;
};

struct HarvestResult {
  PatchIndex index;
  // The budget ran dry part way; the index holds what was gathered so far.
  bool budget_exhausted = false;
};

// Queries the oracle once per corpus image and once per augmented variant,
// turning every reported box into a PatchRecord. Per-image random streams
// are forked from `rng` by image id, so results do not depend on corpus
// order or worker count. Throws EmptyIndex if nothing was detected.
HarvestResult harvest(const std::vector<CorpusImage>& corpus, Oracle& oracle,
                      const HarvestOptions& options, QueryBudget& budget,
                      Rng& rng);

// Loads every PNG/JPEG under `dir` (sorted by file name); ids are file stems.
std::vector<CorpusImage> load_corpus(const std::filesystem::path& dir);

// Keeps records with robustness >= min_robustness, preserving order.
PatchIndex consistency_filter(const PatchIndex& index, int min_robustness);

// Indices of the n records (score >= min_score) whose color means are
// closest to `target`, best first. `rng` only breaks exact distance ties.
// Throws EmptyIndex / NoCandidates.
std::vector<std::size_t> rank_candidates(const PatchIndex& index,
                                         const ColorStats& target,
                                         std::size_t n, double min_score,
                                         Rng& rng);

// The n records (score >= min_score) whose color means are closest to
// `target`, best first, each resized to cell_size x cell_size. `rng` only
// breaks exact distance ties. Throws EmptyIndex / NoCandidates.
std::vector<PatchRecord> select_candidates(const PatchIndex& index,
                                           const ColorStats& target,
                                           int cell_size, std::size_t n,
                                           double min_score, Rng& rng);

// On-disk layout: `dir/index.json` plus `dir/patches/<source_id>_<k>.png`
// and `dir/probes/<probe_id>.png`.
void save_index(const PatchIndex& index, const std::filesystem::path& dir);

// Throws IoError, VersionMismatch or DigestMismatch.
PatchIndex load_index(const std::filesystem::path& dir);

// sha256 over the canonical JSON form of a detection list.
std::string fingerprint_digest(const std::vector<Detection>& detections);

// Mean IoU of greedily matched same-label boxes, normalized by the larger
// list. Two empty lists agree fully.
double detection_agreement(const std::vector<Detection>& before,
                           const std::vector<Detection>& after);

struct DriftReport {
  bool changed = false;
  double agreement = 1.0;
  std::vector<double> per_probe;
};

DriftReport probe_drift(const PatchIndex& index, Oracle& oracle,
                        QueryBudget& budget,
                        double threshold = kDefaultDriftThreshold);

}  // namespace ghostpatch
