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

// End-to-end acceptance checks against the mock detector. Prints one
// PASS/FAIL line per criterion and exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ghostpatch/attack.hpp"
#include "ghostpatch/codec.hpp"
#include "ghostpatch/cost.hpp"
#include "ghostpatch/errors.hpp"
#include "ghostpatch/harness.hpp"
#include "ghostpatch/mock_detector.hpp"
#include "ghostpatch/patchdb.hpp"
#include "ghostpatch/projection.hpp"
#include "ghostpatch/selection.hpp"
#include "ghostpatch/synth.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace ghostpatch;

namespace {

constexpr int kTargets = 20;
constexpr int kImageSize = 640;
constexpr int kHarvestCollages = 30;
constexpr int kCollageObjects = 20;
constexpr std::uint64_t kSuiteSeed = 2026;
constexpr double kMinAsrAt32 = 0.80;
constexpr double kMaxSecondsAt32 = 300.0;
constexpr std::uint64_t kBudget = 4000;
const std::vector<int> kEpsilons = {8, 16, 24, 32};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string target_id(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "target_%02d.png", i);
  return buf;
}

std::vector<EvalItem> suite() {
  std::vector<EvalItem> items;
  for (int i = 0; i < kTargets; ++i) {
    items.push_back({target_id(i), synthetic_target(100 + static_cast<std::uint64_t>(i),
                                                    kImageSize, kImageSize)});
  }
  return items;
}

std::vector<AttackConfig> configs_for(const std::vector<int>& eps) {
  std::vector<AttackConfig> out;
  for (int e : eps) {
    AttackConfig c;
    c.epsilon = e;
    c.max_queries = kBudget;
    c.seed = kSuiteSeed;
    out.push_back(c);
  }
  return out;
}

PatchIndex harvest_collages(const MockDetectorConfig& cfg) {
  std::vector<CorpusImage> corpus;
  for (int i = 0; i < kHarvestCollages; ++i) {
    corpus.push_back({"collage_" + std::to_string(i),
                      synthetic_collage(500 + static_cast<std::uint64_t>(i), cfg.templates,
                                        kImageSize, kImageSize, kCollageObjects)
                          .image});
  }
  MockDetector det(cfg);
  QueryBudget budget(static_cast<std::uint64_t>(kHarvestCollages));
  Rng rng(kSuiteSeed);
  return harvest(corpus, det, {}, budget, rng).index;
}

double asr_at(const EvalReport& r, int eps) {
  for (const auto& e : r.asr) {
    if (e.epsilon == eps) return e.asr;
  }
  throw std::runtime_error("no ASR entry for epsilon " + std::to_string(eps));
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Suite {
  fs::path workdir;
  std::string cli;
  std::vector<EvalItem> targets;
  MockDetectorConfig detector = MockDetectorConfig::defaults();
  PatchIndex db;
  EvalReport at32;
  EvalReport lower;
  double seconds_at32 = 0.0;
  EvalReport min_size;
  std::vector<EvalReport> all_reports;
  std::vector<fs::path> adv_dirs;
};

Outcome criterion_asr(Suite& s) {
  MockDetector det(s.detector);
  EvalOptions opt;
  opt.adv_dir = s.workdir / "adv_main";
  const auto t0 = std::chrono::steady_clock::now();
  s.at32 = run_eval(s.targets, s.db, configs_for({32}), det, opt);
  s.seconds_at32 =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  s.all_reports.push_back(s.at32);
  s.adv_dirs.push_back(*opt.adv_dir);
  const double asr = asr_at(s.at32, 32);
  return {asr >= kMinAsrAt32 && s.seconds_at32 <= kMaxSecondsAt32,
          "ASR(32) = " + fmt("%.2f", asr) + " over " + std::to_string(kTargets) +
              " targets, " + fmt("%.1f", s.seconds_at32) + " s"};
}

Outcome criterion_monotone(Suite& s) {
  MockDetector det(s.detector);
  EvalOptions opt;
  opt.adv_dir = s.workdir / "adv_main";
  s.lower = run_eval(s.targets, s.db, configs_for({8, 16, 24}), det, opt);
  s.all_reports.push_back(s.lower);
  std::vector<double> asr;
  std::string detail;
  for (int e : kEpsilons) {
    asr.push_back(e == 32 ? asr_at(s.at32, 32) : asr_at(s.lower, e));
    detail += (detail.empty() ? "" : ", ") + ("ASR(" + std::to_string(e) + ") = ") +
              fmt("%.2f", asr.back());
  }
  return {std::is_sorted(asr.begin(), asr.end()), detail};
}

Outcome criterion_min_size(Suite& s) {
  MockDetectorConfig cfg = s.detector;
  cfg.min_size_fraction = 0.05;
  MockDetector det(cfg);
  EvalOptions opt;
  opt.adv_dir = s.workdir / "adv_min_size";
  s.min_size = run_eval(s.targets, s.db, configs_for(kEpsilons), det, opt);
  s.all_reports.push_back(s.min_size);
  s.adv_dirs.push_back(*opt.adv_dir);
  std::size_t successes = 0, attempts = 0;
  for (const auto& e : s.min_size.asr) {
    successes += e.successes;
    attempts += e.attempts;
  }
  return {attempts == kEpsilons.size() * kTargets && successes == 0,
          std::to_string(successes) + " successes in " + std::to_string(attempts) +
              " attacks with min_size_fraction 0.05"};
}

Outcome criterion_ball(Suite& s) {
  std::size_t checked = 0, violations = 0;
  std::map<std::string, const ImageTensor*> by_id;
  for (const auto& t : s.targets) by_id[t.id] = &t.image;
  for (std::size_t r = 0; r < s.all_reports.size(); ++r) {
    for (const auto& res : s.all_reports[r].results) {
      if (!res.success) continue;
      const fs::path stem = fs::path(res.image_id).stem();
      const std::string name = stem.string() + "_eps" + std::to_string(res.epsilon) + ".png";
      fs::path file;
      for (const auto& d : s.adv_dirs) {
        if (fs::exists(d / name)) file = d / name;
      }
      if (file.empty()) {
        ++violations;
        continue;
      }
      const ImageTensor adv = load_image(file);
      ++checked;
      if (testing::scan_linf(adv, *by_id.at(res.image_id)) > res.epsilon) ++violations;
    }
  }
  return {checked > 0 && violations == 0,
          std::to_string(checked) + " successful images rescanned, " +
              std::to_string(violations) + " outside their ball"};
}

Outcome criterion_budget(Suite& s) {
  std::size_t runs = 0, longest = 0;
  bool within = true;
  for (const auto& r : s.all_reports) {
    for (const auto& res : r.results) {
      ++runs;
      longest = std::max(longest, res.trace_length);
      within = within && res.trace_length <= kBudget && res.queries_used <= kBudget;
    }
  }
  MockDetector det(s.detector);
  testing::CountingOracle counting(det);
  QueryBudget budget(kBudget);
  const ImageTensor small(32, 32, 90);
  for (std::uint64_t i = 0; i < kBudget; ++i) detect(counting, small, budget);
  bool raised = false;
  try {
    detect(counting, small, budget);
  } catch (const BudgetExhausted&) {
    raised = true;
  }
  const bool no_call = counting.calls() == kBudget;
  return {within && raised && no_call,
          std::to_string(runs) + " runs, longest trace " + std::to_string(longest) +
              "; query " + std::to_string(kBudget + 1) +
              (raised ? " raised" : " did not raise") +
              (no_call ? " with no oracle call" : " and reached the oracle")};
}

Outcome criterion_bcount(Suite&) {
  Rng rng(kSuiteSeed);
  std::size_t mismatches = 0;
  for (int set = 0; set < 1000; ++set) {
    const int cell = 8 * rng.between(1, 16);
    const int n_w = rng.between(1, 10), n_h = rng.between(1, 10);
    const Grid grid = make_grid(n_h * cell, n_w * cell, cell);
    const auto n = static_cast<std::size_t>(rng.between(0, 300));
    const auto dets = testing::random_detections(rng, n, n_w * cell, n_h * cell);
    const auto counts = cell_counts(dets, grid);
    long long total = 0;
    for (int j = 0; j < n_h; ++j) {
      for (int i = 0; i < n_w; ++i) {
        int brute = 0;
        for (const auto& d : dets) {
          const double cx = 0.5 * (d.box.x0 + d.box.x1);
          const double cy = 0.5 * (d.box.y0 + d.box.y1);
          brute += cx >= i * cell && cx < (i + 1) * cell && cy >= j * cell &&
                   cy < (j + 1) * cell;
        }
        const int b = bcount(dets, grid, i, j);
        if (b != brute || counts[static_cast<std::size_t>(grid.flat(i, j))] != brute) {
          ++mismatches;
        }
        total += b;
      }
    }
    if (total != static_cast<long long>(n)) ++mismatches;
  }
  return {mismatches == 0, "1000 random sets, " + std::to_string(mismatches) + " mismatches"};
}

std::int16_t clamp255(long long v) {
  return static_cast<std::int16_t>(std::max(-255LL, std::min(255LL, v)));
}

Outcome criterion_projection(Suite&) {
  Rng rng(kSuiteSeed + 7);
  // 100 x 334 pixels x 3 channels = 100200 positions.
  const Perturbation xp = testing::random_perturbation(rng, 100, 334, 255);
  const int eps = 32;
  const PixelMask eligible = eligible_mask(xp, eps);
  const PixelMask keep = sample_dropout_mask(xp, 0.5, rng);
  const double s_i = 0.35, s_e = 0.9;
  const double b_e = recenter_offset(xp, eligible, s_e);
  const Perturbation composed = compose_projection(xp, eligible, keep, s_i, s_e, b_e);
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < xp.size(); ++i) {
    const int v = xp.data()[i];
    const std::int16_t want =
        std::abs(v) <= eps ? clamp255(std::llround(s_e * v + b_e))
                           : (keep.flat(i) ? clamp255(std::llround(s_i * v)) : 0);
    mismatches += composed.data()[i] != want;
  }

  ProjectionParams identity;
  identity.ineligible_scale = 1.0;
  identity.dropout_density = 1.0;
  identity.eligible_scale = 1.0;
  identity.offset_policy = OffsetPolicy::kFixed;
  identity.fixed_offset = 0.0;
  const bool identity_ok = project(xp, eps, identity, rng) == xp;

  ProjectionParams dropout;
  dropout.ineligible_scale = 0.0;
  dropout.dropout_density = 0.5;
  const Perturbation dropped = project(xp, eps, dropout, rng);
  std::size_t leaked = 0;
  for (std::size_t i = 0; i < xp.size(); ++i) {
    if (std::abs(int{xp.data()[i]}) > eps && dropped.data()[i] != 0) ++leaked;
  }
  return {mismatches == 0 && identity_ok && leaked == 0,
          std::to_string(xp.size()) + " positions, " + std::to_string(mismatches) +
              " mismatches; identity " + (identity_ok ? "holds" : "fails") + "; " +
              std::to_string(leaked) + " ineligible positions survive s_i = 0"};
}

int run_cli(const std::string& cli, const std::vector<std::string>& args) {
  std::string cmd = "\"" + cli + "\"";
  for (const auto& a : args) cmd += " \"" + a + "\"";
  cmd += " > /dev/null";
  return std::system(cmd.c_str());
}

Outcome criterion_determinism(Suite& s) {
  const fs::path root = s.workdir / "determinism";
  const fs::path images = root / "images";
  const fs::path db = root / "db";
  fs::create_directories(images);
  for (int i = 0; i < 3; ++i) save_image(s.targets[static_cast<std::size_t>(i)].image,
                                         images / s.targets[static_cast<std::size_t>(i)].id);
  save_index(s.db, db);

  std::vector<std::string> reports;
  std::vector<std::map<std::string, std::string>> adv;
  for (int run = 0; run < 2; ++run) {
    const fs::path out = root / ("run" + std::to_string(run));
    fs::create_directories(out);
    if (!s.cli.empty()) {
      const int rc = run_cli(s.cli, {"eval", "--images", images.string(), "--db", db.string(),
                                     "--oracle", "mock", "--epsilons", "16,32", "--budget",
                                     std::to_string(kBudget), "--seed",
                                     std::to_string(kSuiteSeed), "--report",
                                     (out / "report.json").string(), "--adv-dir",
                                     (out / "adv").string()});
      if (rc != 0) return {false, "eval exited with status " + std::to_string(rc)};
    } else {
      MockDetector det(s.detector);
      EvalOptions opt;
      opt.adv_dir = out / "adv";
      const auto items = load_eval_items(images);
      const EvalReport r = run_eval(items, load_index(db), configs_for({16, 32}), det, opt);
      std::ofstream(out / "report.json", std::ios::binary) << report_json(r);
    }
    reports.push_back(read_bytes(out / "report.json"));
    std::map<std::string, std::string> files;
    for (const auto& f : fs::directory_iterator(out / "adv")) {
      files[f.path().filename().string()] = read_bytes(f.path());
    }
    adv.push_back(std::move(files));
    s.adv_dirs.push_back(out / "adv");
    s.all_reports.push_back(parse_report_json(reports.back()));
  }
  const bool same = !reports[0].empty() && reports[0] == reports[1] && adv[0] == adv[1] &&
                    adv[0].size() == 6;
  return {same, std::string(s.cli.empty() ? "library" : "CLI") + " eval twice: report " +
                    (reports[0] == reports[1] ? "identical" : "differs") + ", " +
                    std::to_string(adv[0].size()) + " adversarial images " +
                    (adv[0] == adv[1] ? "identical" : "differ")};
}

Outcome criterion_harvest(Suite& s) {
  std::vector<CorpusImage> corpus;
  for (int i = 0; i < 500; ++i) {
    corpus.push_back({"corpus_" + std::to_string(i),
                      synthetic_collage(10000 + static_cast<std::uint64_t>(i),
                                        s.detector.templates, 320, 320, 8)
                          .image});
  }
  MockDetector det(s.detector);
  testing::CountingOracle counting(det);
  QueryBudget budget(kBudget);
  HarvestOptions opt;
  opt.augment = {ColorTransform::jitter(0.2, 0.2), ColorTransform::posterize(4)};
  Rng rng(kSuiteSeed);
  const PatchIndex idx = harvest(corpus, counting, opt, budget, rng).index;
  const CostBreakdown cost = estimate_cost(500, PricingModel{});
  const bool exact = budget.used() == 1500 && counting.calls() == 1500 &&
                     idx.harvest_queries == 1500 && cost.api_cost == 0.75;
  return {exact, "500 images x (1 + 2 augmentations): " + std::to_string(budget.used()) +
                     " queries; 500 queries at $1.5/1k = $" + fmt("%.2f", cost.api_cost)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ghostpatch acceptance suite"};
  Suite s;
  std::string workdir = (fs::temp_directory_path() / "ghostpatch_acceptance").string();
  app.add_option("--workdir", workdir, "scratch directory (recreated)");
  app.add_option("--cli", s.cli, "ghostpatch executable used for the eval runs");
  CLI11_PARSE(app, argc, argv);

  s.workdir = workdir;
  fs::remove_all(s.workdir);
  fs::create_directories(s.workdir);
  s.targets = suite();
  s.db = harvest_collages(s.detector);
  std::printf("setup: %zu records harvested from %d collages\n", s.db.records.size(),
              kHarvestCollages);
  std::fflush(stdout);

  const std::vector<std::pair<const char*, std::function<Outcome(Suite&)>>> criteria = {
      {"mock end-to-end ASR at eps 32", criterion_asr},
      {"ASR non-decreasing in eps", criterion_monotone},
      {"min-size detector gives 0% ASR", criterion_min_size},
      {"successful images lie in their eps ball", criterion_ball},
      {"budget soundness", criterion_budget},
      {"bcount partition", criterion_bcount},
      {"projection algebra", criterion_projection},
      {"eval determinism", criterion_determinism},
      {"harvest accounting and cost", criterion_harvest},
  };

  // Criterion 4 and 5 inspect the runs of every other criterion, so they
  // are evaluated after the rest and printed in order.
  const std::vector<std::size_t> order = {0, 1, 2, 5, 6, 7, 8, 3, 4};
  std::vector<Outcome> results(criteria.size());
  for (std::size_t k : order) {
    try {
      results[k] = criteria[k].second(s);
    } catch (const std::exception& e) {
      results[k] = {false, std::string("exception: ") + e.what()};
    }
  }
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    std::printf("%s criterion %zu (%s): %s\n", results[k].pass ? "PASS" : "FAIL", k + 1,
                criteria[k].first, results[k].detail.c_str());
    failed += results[k].pass ? 0 : 1;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed),
              criteria.size());
  return failed == 0 ? 0 : 1;
}
