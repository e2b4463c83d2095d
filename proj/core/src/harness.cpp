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

#include "ghostpatch/harness.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "ghostpatch/codec.hpp"
#include "ghostpatch/config.hpp"
#include "ghostpatch/digest.hpp"
#include "ghostpatch/errors.hpp"
#include "ghostpatch/parallel.hpp"
#include "ghostpatch/rng.hpp"
#include "json.hpp"

namespace ghostpatch {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string output_stem(const std::string& image_id, int epsilon) {
  std::string stem = fs::path(image_id).stem().string();
  if (stem.empty()) stem = "image";
  return stem + "_eps" + std::to_string(epsilon);
}

ImageSummary summarize_attack(const std::string& id, const AttackConfig& cfg,
                              const ImageTensor& x, const AttackResult& r) {
  ImageSummary s;
  s.image_id = id;
  s.epsilon = cfg.epsilon;
  s.seed = cfg.seed;
  s.baseline_count = r.baseline_count;
  s.best_count = r.best_count;
  s.increment = r.increment;
  s.queries_used = r.queries_used;
  s.trace_length = r.trace.size();
  s.linf = linf_distance(r.adv_image, x);
  s.success = r.success;
  s.failure = r.failure;
  return s;
}

}  // namespace

std::uint64_t per_image_seed(std::uint64_t seed, std::string_view image_id) {
  return seed ^ stable_hash(image_id);
}

std::vector<EvalItem> load_eval_items(const fs::path& dir) {
  std::vector<EvalItem> items;
  for (const auto& f : list_image_files(dir)) {
    items.push_back({f.filename().string(), load_image(f)});
  }
  return items;
}

EvalReport run_eval(const std::vector<EvalItem>& items, const PatchIndex& db,
                    const std::vector<AttackConfig>& cfgs, Oracle& oracle,
                    const EvalOptions& options) {
  if (items.empty()) throw InvalidArgument("run_eval: no images");
  if (cfgs.empty()) throw InvalidArgument("run_eval: no attack configs");
  for (const auto& c : cfgs) c.validate();

  for (const auto& dir : {options.adv_dir, options.trace_dir}) {
    if (!dir) continue;
    std::error_code ec;
    fs::create_directories(*dir, ec);
    if (ec) throw IoError("cannot create " + dir->string() + ": " + ec.message());
  }

  const std::size_t n = items.size() * cfgs.size();
  std::vector<ImageSummary> summaries(n);
  parallel_for(n, options.workers, [&](std::size_t t) {
    const EvalItem& item = items[t / cfgs.size()];
    AttackConfig cfg = cfgs[t % cfgs.size()];
    cfg.seed = per_image_seed(cfg.seed, item.id);
    try {
      const AttackResult r = run_attack(item.image, db, cfg, oracle);
      summaries[t] = summarize_attack(item.id, cfg, item.image, r);
      const std::string stem = output_stem(item.id, cfg.epsilon);
      if (options.adv_dir) save_image(r.adv_image, *options.adv_dir / (stem + ".png"));
      if (options.trace_dir) write_trace(r.trace, *options.trace_dir / (stem + ".jsonl"));
    } catch (const std::exception& e) {
      ImageSummary s;
      s.image_id = item.id;
      s.epsilon = cfg.epsilon;
      s.seed = cfg.seed;
      s.failure = "error";
      s.error = e.what();
      summaries[t] = std::move(s);
    }
  });

  EvalReport report;
  report.oracle_id = oracle.id();
  report.harvest_queries = db.harvest_queries;
  std::string all;
  for (const auto& c : cfgs) all += attack_config_json(c) + "\n";
  report.config_digest = sha256_hex(all);
  report.results = std::move(summaries);
  summarize(report);
  return report;
}

void summarize(EvalReport& report) {
  std::map<int, EpsilonSummary> by_eps;
  std::vector<std::uint64_t> used;
  for (const auto& s : report.results) {
    auto& e = by_eps[s.epsilon];
    e.epsilon = s.epsilon;
    ++e.attempts;
    if (s.success) ++e.successes;
    used.push_back(s.queries_used);
  }
  report.asr.clear();
  for (auto& [eps, e] : by_eps) {
    e.asr = static_cast<double>(e.successes) / static_cast<double>(e.attempts);
    report.asr.push_back(e);
  }
  QueryStats q;
  if (!used.empty()) {
    for (auto u : used) q.total += u;
    q.mean = static_cast<double>(q.total) / static_cast<double>(used.size());
    std::sort(used.begin(), used.end());
    const std::size_t m = used.size() / 2;
    q.median = used.size() % 2 == 1
                   ? static_cast<double>(used[m])
                   : (static_cast<double>(used[m - 1]) + static_cast<double>(used[m])) / 2.0;
    q.max = used.back();
  }
  report.queries = q;
}

std::string report_json(const EvalReport& report) {
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["oracle_id"] = report.oracle_id;
  j["config_digest"] = report.config_digest;
  j["harvest_queries"] = report.harvest_queries;
  ojson asr = ojson::array();
  for (const auto& e : report.asr) {
    ojson row;
    row["epsilon"] = e.epsilon;
    row["attempts"] = e.attempts;
    row["successes"] = e.successes;
    row["asr"] = e.asr;
    asr.push_back(std::move(row));
  }
  j["asr"] = std::move(asr);
  ojson q;
  q["total"] = report.queries.total;
  q["mean"] = report.queries.mean;
  q["median"] = report.queries.median;
  q["max"] = report.queries.max;
  j["queries"] = std::move(q);
  ojson results = ojson::array();
  for (const auto& s : report.results) {
    ojson r;
    r["image_id"] = s.image_id;
    r["epsilon"] = s.epsilon;
    r["seed"] = s.seed;
    r["baseline_count"] = s.baseline_count;
    r["best_count"] = s.best_count;
    r["increment"] = s.increment;
    r["queries_used"] = s.queries_used;
    r["trace_length"] = s.trace_length;
    r["linf"] = s.linf;
    r["success"] = s.success;
    r["failure"] = s.failure;
    r["error"] = s.error;
    results.push_back(std::move(r));
  }
  j["results"] = std::move(results);
  return j.dump(2) + "\n";
}

EvalReport parse_report_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DecodeError("report is not valid JSON");
  EvalReport report;
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kReportSchemaVersion) {
      throw VersionMismatch("report schema version " + std::to_string(version) +
                            " is not supported");
    }
    report.oracle_id = j.at("oracle_id").get<std::string>();
    report.config_digest = j.at("config_digest").get<std::string>();
    report.harvest_queries = j.at("harvest_queries").get<std::uint64_t>();
    for (const auto& r : j.at("results")) {
      ImageSummary s;
      s.image_id = r.at("image_id").get<std::string>();
      s.epsilon = r.at("epsilon").get<int>();
      s.seed = r.at("seed").get<std::uint64_t>();
      s.baseline_count = r.at("baseline_count").get<int>();
      s.best_count = r.at("best_count").get<int>();
      s.increment = r.at("increment").get<int>();
      s.queries_used = r.at("queries_used").get<std::uint64_t>();
      s.trace_length = r.at("trace_length").get<std::size_t>();
      s.linf = r.at("linf").get<int>();
      s.success = r.at("success").get<bool>();
      s.failure = r.at("failure").get<std::string>();
      s.error = r.at("error").get<std::string>();
      report.results.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("report is malformed: ") + e.what());
  }
  summarize(report);
  return report;
}

EvalReport load_report(const fs::path& path) {
  const auto bytes = read_file(path);
  return parse_report_json(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "oracle";
  for (const auto& e : report.asr) out << ",eps_" << e.epsilon;
  out << "\n" << report.oracle_id;
  for (const auto& e : report.asr) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", e.asr);
    out << "," << buf;
  }
  out << "\n";
  return out.str();
}

}  // namespace ghostpatch
