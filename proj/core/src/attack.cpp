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

#include "ghostpatch/attack.hpp"

#include <chrono>
#include <fstream>

#include "ghostpatch/errors.hpp"
#include "ghostpatch/rng.hpp"
#include "json.hpp"

namespace ghostpatch {

void AttackConfig::validate() const {
  if (epsilon <= 0) throw InvalidArgument("attack: epsilon must be > 0");
  if (success_increment < 0) {
    throw InvalidArgument("attack: success_increment must be >= 0");
  }
  selection.validate();
  projection.validate();
  schedule.validate();
  if (max_queries < static_cast<std::uint64_t>(selection.trials) + 1) {
    throw InvalidArgument("attack: max_queries must cover the baseline and "
                          "every selection trial");
  }
}

bool is_success(const AttackResult& result, const AttackConfig& cfg,
                const ImageTensor& original) {
  if (result.increment <= cfg.success_increment) return false;
  if (result.adv_image.height() != original.height() ||
      result.adv_image.width() != original.width()) {
    return false;
  }
  auto a = result.adv_image.data();
  auto b = original.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int diff = int{a[i]} - int{b[i]};
    if (diff > cfg.epsilon || -diff > cfg.epsilon) return false;
  }
  return true;
}

AttackResult run_attack(const ImageTensor& x, const PatchIndex& db,
                        const AttackConfig& cfg_in, Oracle& oracle) {
  const auto started = std::chrono::steady_clock::now();
  AttackConfig cfg = cfg_in;
  cfg.selection.epsilon = cfg.epsilon;
  cfg.projection.epsilon = cfg.epsilon;
  cfg.validate();
  if (db.empty()) throw EmptyIndex("run_attack: empty patch index");

  QueryBudget budget(cfg.max_queries);
  Rng rng(cfg.seed);
  AttackResult result;
  result.adv_image = x;

  auto finish = [&]() -> AttackResult {
    result.queries_used = budget.used();
    result.phase_queries = budget.tallies();
    result.increment = result.best_count - result.baseline_count;
    result.success = result.failure.empty() && is_success(result, cfg, x);
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
            .count();
    return std::move(result);
  };

  const DetectionSet base = detect(oracle, x, budget, "baseline");
  result.baseline_count = static_cast<int>(base.size());
  result.best_count = result.baseline_count;
  result.trace.push_back({base.query_index, "baseline", result.baseline_count, 0, {}});

  Rng select_rng = rng.fork(1);
  const SelectionOutcome sel =
      position_centric_select(x, cfg.selection, db, oracle, budget, select_rng);
  for (const auto& t : sel.trials) {
    result.trace.push_back({t.query_index, "selection", t.object_count, t.linf, {}});
  }

  Rng project_rng = rng.fork(2);
  const ManipulationOutcome man =
      color_manipulate(x, sel.x_init, cfg.schedule, cfg.projection, cfg.selection,
                       db, oracle, budget, project_rng);
  for (const auto& s : man.trace) {
    result.trace.push_back(
        {s.query_index, "projection", s.object_count, s.linf, s.tolerance});
  }

  std::optional<Checkpoint> best = man.best;
  if (!budget.exhausted()) {
    const DetectionSet fin = detect(oracle, man.x_out, budget, "final");
    const int count = static_cast<int>(fin.size());
    const int linf = linf_distance(man.x_out, x);
    result.trace.push_back({fin.query_index, "final", count, linf, 1.0});
    if (!best || count > best->object_count) {
      best = Checkpoint{man.x_out, count, 1.0, fin.query_index};
    }
  }

  if (!best) {
    result.failure = "budget";
    return finish();
  }
  result.adv_image = best->image;
  result.best_count = best->object_count;
  return finish();
}

std::string trace_jsonl(const std::vector<TraceRecord>& trace) {
  std::string out;
  for (const auto& r : trace) {
    nlohmann::ordered_json j;
    j["query_index"] = r.query_index;
    j["phase"] = r.phase;
    j["object_count"] = r.object_count;
    j["linf"] = r.linf;
    j["d"] = r.tolerance ? nlohmann::ordered_json(*r.tolerance)
                         : nlohmann::ordered_json(nullptr);
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_trace(const std::vector<TraceRecord>& trace,
                 const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << trace_jsonl(trace);
  if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace ghostpatch
