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

#include "ghostpatch/patchdb.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <numeric>
#include <optional>

#include "ghostpatch/codec.hpp"
#include "ghostpatch/digest.hpp"
#include "ghostpatch/errors.hpp"
#include "ghostpatch/parallel.hpp"

namespace ghostpatch {
namespace {

std::string utc_now_iso8601() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool survives(const std::vector<Detection>& dets, const Detection& target,
              double min_iou) {
  return std::any_of(dets.begin(), dets.end(), [&](const Detection& d) {
    return d.label == target.label && iou(d.box, target.box) >= min_iou;
  });
}

struct ImageHarvest {
  std::vector<PatchRecord> records;
  std::optional<ProbeFingerprint> probe;
  bool exhausted = false;
};

ImageHarvest harvest_one(const CorpusImage& item, Oracle& oracle,
                         const HarvestOptions& options, QueryBudget& budget,
                         const Rng& parent) {
  ImageHarvest out;
  Rng rng = parent.fork(stable_hash(item.id));

  // variant 0 is the untouched image, variant k applies augment[k - 1]
  std::vector<ImageTensor> variants;
  variants.push_back(item.image);
  for (const auto& t : options.augment) {
    variants.push_back(color_transform(item.image, t, rng));
  }

  std::vector<std::vector<Detection>> seen;
  for (const auto& v : variants) {
    try {
      seen.push_back(detect(oracle, v, budget, "harvest").detections);
    } catch (const BudgetExhausted&) {
      out.exhausted = true;
      break;
    }
  }
  if (seen.empty()) return out;

  out.probe = ProbeFingerprint{item.id, item.image, seen[0],
                               fingerprint_digest(seen[0])};

  for (std::size_t v = 0; v < seen.size(); ++v) {
    const std::string tag = v == 0 ? "none" : options.augment[v - 1].tag();
    for (const auto& d : seen[v]) {
      int robust = 0;
      for (std::size_t k = 1; k < seen.size(); ++k) {
        if (survives(seen[k], d, options.robustness_iou)) ++robust;
      }
      PatchRecord rec;
      rec.patch = crop(variants[v], d.box);
      rec.label = d.label;
      rec.score = d.score;
      rec.source_image_id = item.id;
      rec.source_box = d.box;
      rec.stats = color_stats(variants[v], d.box);
      rec.augmentation = tag;
      rec.robustness = robust;
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace

HarvestResult harvest(const std::vector<CorpusImage>& corpus, Oracle& oracle,
                      const HarvestOptions& options, QueryBudget& budget,
                      Rng& rng) {
  if (corpus.empty()) throw InvalidArgument("harvest: empty corpus");

  const std::uint64_t used_before = budget.used();
  std::vector<ImageHarvest> per_image(corpus.size());
  parallel_for(corpus.size(), options.workers, [&](std::size_t i) {
    per_image[i] = harvest_one(corpus[i], oracle, options, budget, rng);
  });

  HarvestResult result;
  PatchIndex& index = result.index;
  for (auto& h : per_image) {
    result.budget_exhausted = result.budget_exhausted || h.exhausted;
    for (auto& r : h.records) index.records.push_back(std::move(r));
    if (h.probe && index.fingerprints.size() < options.probe_count) {
      index.fingerprints.push_back(std::move(*h.probe));
    }
  }
  if (index.records.empty()) {
    throw EmptyIndex("harvest: the oracle reported no objects in the corpus");
  }

  std::string cfg = "oracle=" + oracle.id() + ";augment=";
  for (const auto& t : options.augment) cfg += t.tag() + ",";
  cfg += ";probes=" + std::to_string(options.probe_count) +
         ";iou=" + std::to_string(options.robustness_iou);
  index.config_digest = sha256_hex(cfg);
  index.created_at = utc_now_iso8601();
  index.oracle_id = oracle.id();
  index.transforms_tested = static_cast<int>(options.augment.size());
  index.harvest_queries = budget.used() - used_before;
  return result;
}

std::vector<CorpusImage> load_corpus(const std::filesystem::path& dir) {
  std::vector<CorpusImage> corpus;
  for (const auto& f : list_image_files(dir)) {
    corpus.push_back({f.stem().string(), load_image(f)});
  }
  return corpus;
}

PatchIndex consistency_filter(const PatchIndex& index, int min_robustness) {
  if (min_robustness < 0) {
    throw InvalidArgument("consistency_filter: negative min_robustness");
  }
  PatchIndex out = index;
  std::erase_if(out.records, [&](const PatchRecord& r) {
    return r.robustness < min_robustness;
  });
  return out;
}

std::vector<std::size_t> rank_candidates(const PatchIndex& index,
                                         const ColorStats& target,
                                         std::size_t n, double min_score,
                                         Rng& rng) {
  if (index.empty()) throw EmptyIndex("rank_candidates: empty index");
  if (n == 0) throw InvalidArgument("rank_candidates: n must be >= 1");

  struct Ranked {
    double distance;
    std::uint64_t tie;
    std::size_t index;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(index.records.size());
  for (std::size_t i = 0; i < index.records.size(); ++i) {
    const auto& r = index.records[i];
    if (r.score < min_score) continue;
    ranked.push_back({color_mean_distance(r.stats, target), rng.next(), i});
  }
  if (ranked.empty()) {
    throw NoCandidates("no patch record has score >= " + std::to_string(min_score));
  }

  const std::size_t take = std::min(n, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take),
                    ranked.end(), [](const Ranked& a, const Ranked& b) {
                      if (a.distance != b.distance) return a.distance < b.distance;
                      if (a.tie != b.tie) return a.tie < b.tie;
                      return a.index < b.index;
                    });
  std::vector<std::size_t> out(take);
  for (std::size_t k = 0; k < take; ++k) out[k] = ranked[k].index;
  return out;
}

std::vector<PatchRecord> select_candidates(const PatchIndex& index,
                                           const ColorStats& target,
                                           int cell_size, std::size_t n,
                                           double min_score, Rng& rng) {
  if (cell_size <= 0) throw InvalidArgument("select_candidates: bad cell size");
  std::vector<PatchRecord> out;
  for (std::size_t i : rank_candidates(index, target, n, min_score, rng)) {
    PatchRecord rec = index.records[i];
    rec.patch = resize_bilinear(rec.patch, cell_size, cell_size);
    out.push_back(std::move(rec));
  }
  return out;
}

double detection_agreement(const std::vector<Detection>& before,
                           const std::vector<Detection>& after) {
  if (before.empty() && after.empty()) return 1.0;

  struct Pair {
    double iou;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < before.size(); ++i) {
    for (std::size_t j = 0; j < after.size(); ++j) {
      if (before[i].label != after[j].label) continue;
      const double v = iou(before[i].box, after[j].box);
      if (v > 0.0) pairs.push_back({v, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });

  std::vector<bool> used_before(before.size(), false);
  std::vector<bool> used_after(after.size(), false);
  double total = 0.0;
  for (const auto& p : pairs) {
    if (used_before[p.i] || used_after[p.j]) continue;
    used_before[p.i] = true;
    used_after[p.j] = true;
    total += p.iou;
  }
  return total / static_cast<double>(std::max(before.size(), after.size()));
}

DriftReport probe_drift(const PatchIndex& index, Oracle& oracle,
                        QueryBudget& budget, double threshold) {
  if (index.fingerprints.empty()) {
    throw InvalidArgument("probe_drift: index has no stored fingerprints");
  }
  DriftReport report;
  for (const auto& fp : index.fingerprints) {
    const auto now = detect(oracle, fp.image, budget, "drift");
    report.per_probe.push_back(detection_agreement(fp.detections, now.detections));
  }
  report.agreement =
      std::accumulate(report.per_probe.begin(), report.per_probe.end(), 0.0) /
      static_cast<double>(report.per_probe.size());
  report.changed = report.agreement < threshold;
  return report;
}

}  // namespace ghostpatch
