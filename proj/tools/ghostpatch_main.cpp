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

// ghostpatch command line: harvest, attack, eval, drift, cost, serve-mock,
// synth.
//
// Exit codes: 0 ok, 1 usage or invalid input, 2 oracle unreachable,
// 3 budget exhausted with no result.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ghostpatch/attack.hpp"
#include "ghostpatch/codec.hpp"
#include "ghostpatch/config.hpp"
#include "ghostpatch/cost.hpp"
#include "ghostpatch/errors.hpp"
#include "ghostpatch/harness.hpp"
#include "ghostpatch/http_oracle.hpp"
#include "ghostpatch/mock_detector.hpp"
#include "ghostpatch/mock_server.hpp"
#include "ghostpatch/patchdb.hpp"
#include "ghostpatch/synth.hpp"
#include "json.hpp"

namespace gp = ghostpatch;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitUnreachable = 2;
constexpr int kExitBudget = 3;

// Failure that maps straight onto an exit code.
struct ExitError : std::runtime_error {
  ExitError(int code, const std::string& what)
      : std::runtime_error(what), code(code) {}
  int code;
};

struct OracleArgs {
  std::string oracle;
  std::string mock_config;
  double timeout = 30.0;
};

void add_oracle_options(CLI::App* cmd, OracleArgs& a) {
  cmd->add_option("--oracle", a.oracle, "detection service URL, or 'mock'")->required();
  cmd->add_option("--mock-config", a.mock_config,
                  "JSON settings for the built-in mock detector");
  cmd->add_option("--timeout", a.timeout, "per-request timeout in seconds");
}

std::unique_ptr<gp::Oracle> make_oracle(const OracleArgs& a) {
  if (a.oracle == "mock") {
    gp::MockDetectorConfig cfg = a.mock_config.empty()
                                     ? gp::MockDetectorConfig::defaults()
                                     : gp::load_mock_config(a.mock_config).detector;
    return std::make_unique<gp::MockDetector>(std::move(cfg));
  }
  if (!a.mock_config.empty()) {
    throw gp::InvalidArgument("--mock-config only applies to --oracle mock");
  }
  try {
    return std::make_unique<gp::HttpOracle>(gp::HttpOracleOptions{a.oracle, a.timeout, {}});
  } catch (const gp::TransportError& e) {
    throw ExitError(kExitUnreachable, e.what());
  }
}

std::vector<gp::ColorTransform> parse_transforms(const std::string& list) {
  std::vector<gp::ColorTransform> out;
  std::size_t start = 0;
  while (start <= list.size() && !list.empty()) {
    const std::size_t comma = list.find(',', start);
    const std::string tag =
        list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tag.empty()) out.push_back(gp::ColorTransform::parse(tag));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

gp::ImageTensor ingest(const fs::path& path, int input_size) {
  gp::ImageTensor img = gp::load_image(path);
  if (input_size > 0 && (img.height() != input_size || img.width() != input_size)) {
    img = gp::resize_bilinear(img, input_size, input_size);
  }
  return img;
}

void print_json(const nlohmann::ordered_json& j) { std::cout << j.dump(2) << '\n'; }

// ---------------------------------------------------------------- harvest

struct HarvestArgs {
  std::string corpus;
  OracleArgs oracle;
  std::string augment;
  std::string out;
  std::uint64_t budget = gp::kDefaultMaxQueries;
  std::uint64_t seed = 0;
  std::size_t probes = 4;
  std::size_t workers = 1;
  int min_robustness = 0;
};

int run_harvest(const HarvestArgs& a) {
  auto oracle = make_oracle(a.oracle);
  gp::HarvestOptions opts;
  opts.augment = parse_transforms(a.augment);
  opts.probe_count = a.probes;
  opts.workers = a.workers;
  const auto corpus = gp::load_corpus(a.corpus);
  if (corpus.empty()) throw gp::InvalidArgument("no PNG/JPEG images in " + a.corpus);

  gp::QueryBudget budget(a.budget);
  gp::Rng rng(a.seed);
  gp::HarvestResult result;
  try {
    result = gp::harvest(corpus, *oracle, opts, budget, rng);
  } catch (const gp::EmptyIndex& e) {
    if (budget.exhausted()) throw ExitError(kExitBudget, e.what());
    throw;
  }
  gp::PatchIndex index = gp::consistency_filter(result.index, a.min_robustness);
  gp::save_index(index, a.out);

  nlohmann::ordered_json j;
  j["records"] = index.records.size();
  j["fingerprints"] = index.fingerprints.size();
  j["queries"] = budget.used();
  j["budget_exhausted"] = result.budget_exhausted;
  j["out"] = a.out;
  print_json(j);
  return kExitOk;
}

// ----------------------------------------------------------------- attack

struct AttackArgs {
  std::string image;
  std::string db;
  OracleArgs oracle;
  std::string config;
  int epsilon = 32;
  std::uint64_t budget = gp::kDefaultMaxQueries;
  std::uint64_t seed = 0;
  std::string out = "adv.png";
  std::string trace;
  int input_size = gp::kDefaultInputSize;
};

gp::AttackConfig attack_config(const std::string& path, CLI::App* cmd, int epsilon,
                               std::uint64_t budget, std::uint64_t seed) {
  gp::AttackConfig cfg = path.empty() ? gp::AttackConfig{} : gp::load_attack_config(path);
  if (path.empty() || cmd->count("--epsilon")) cfg.epsilon = epsilon;
  if (path.empty() || cmd->count("--budget")) cfg.max_queries = budget;
  if (path.empty() || cmd->count("--seed")) cfg.seed = seed;
  cfg.validate();
  return cfg;
}

int run_attack_cmd(const AttackArgs& a, CLI::App* cmd) {
  const gp::AttackConfig cfg = attack_config(a.config, cmd, a.epsilon, a.budget, a.seed);
  auto oracle = make_oracle(a.oracle);
  const gp::PatchIndex db = gp::load_index(a.db);
  const gp::ImageTensor x = ingest(a.image, a.input_size);

  const gp::AttackResult r = gp::run_attack(x, db, cfg, *oracle);
  gp::save_image(r.adv_image, a.out);
  if (!a.trace.empty()) gp::write_trace(r.trace, a.trace);

  nlohmann::ordered_json j;
  j["success"] = r.success;
  j["baseline_count"] = r.baseline_count;
  j["best_count"] = r.best_count;
  j["increment"] = r.increment;
  j["queries_used"] = r.queries_used;
  j["linf"] = gp::linf_distance(r.adv_image, x);
  j["failure"] = r.failure;
  j["wall_time_s"] = r.wall_time_s;
  print_json(j);
  return r.failure == "budget" ? kExitBudget : kExitOk;
}

// ------------------------------------------------------------------- eval

struct EvalArgs {
  std::string images;
  std::string db;
  OracleArgs oracle;
  std::string config;
  std::vector<int> epsilons = {8, 16, 24, 32};
  std::uint64_t budget = gp::kDefaultMaxQueries;
  std::uint64_t seed = 0;
  std::string report = "report.json";
  std::string csv;
  std::string plot;
  std::string adv_dir;
  std::string trace_dir;
  std::size_t workers = 1;
  int input_size = gp::kDefaultInputSize;
};

int run_eval_cmd(const EvalArgs& a, CLI::App* cmd) {
  const gp::AttackConfig base = attack_config(a.config, cmd, 32, a.budget, a.seed);
  std::vector<gp::AttackConfig> cfgs;
  for (int eps : a.epsilons) {
    gp::AttackConfig c = base;
    c.epsilon = eps;
    cfgs.push_back(c);
  }
  auto oracle = make_oracle(a.oracle);
  const gp::PatchIndex db = gp::load_index(a.db);
  std::vector<gp::EvalItem> items = gp::load_eval_items(a.images);
  if (items.empty()) throw gp::InvalidArgument("no PNG/JPEG images in " + a.images);
  if (a.input_size > 0) {
    for (auto& it : items) {
      if (it.image.height() != a.input_size || it.image.width() != a.input_size) {
        it.image = gp::resize_bilinear(it.image, a.input_size, a.input_size);
      }
    }
  }

  gp::EvalOptions opts;
  opts.workers = a.workers;
  if (!a.adv_dir.empty()) opts.adv_dir = fs::path(a.adv_dir);
  if (!a.trace_dir.empty()) opts.trace_dir = fs::path(a.trace_dir);
  const gp::EvalReport report = gp::run_eval(items, db, cfgs, *oracle, opts);

  const std::string json = gp::report_json(report);
  gp::write_file(a.report, {reinterpret_cast<const std::uint8_t*>(json.data()), json.size()});
  if (!a.csv.empty()) {
    const std::string csv = gp::report_csv(report);
    gp::write_file(a.csv, {reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()});
  }
  if (!a.plot.empty()) gp::save_image(gp::plot_asr(report), a.plot);
  std::cout << gp::report_csv(report);
  return kExitOk;
}

// ------------------------------------------------------------------ drift

struct DriftArgs {
  std::string db;
  OracleArgs oracle;
  double threshold = gp::kDefaultDriftThreshold;
  std::uint64_t budget = gp::kDefaultMaxQueries;
};

int run_drift(const DriftArgs& a) {
  auto oracle = make_oracle(a.oracle);
  const gp::PatchIndex db = gp::load_index(a.db);
  gp::QueryBudget budget(a.budget);
  gp::DriftReport report;
  try {
    report = gp::probe_drift(db, *oracle, budget, a.threshold);
  } catch (const gp::BudgetExhausted& e) {
    throw ExitError(kExitBudget, e.what());
  }
  nlohmann::ordered_json j;
  j["changed"] = report.changed;
  j["agreement"] = report.agreement;
  j["per_probe"] = report.per_probe;
  j["harvest_oracle"] = db.oracle_id;
  j["current_oracle"] = oracle->id();
  print_json(j);
  return kExitOk;
}

// ------------------------------------------------------------------- cost

struct CostArgs {
  std::string report;
  std::optional<std::uint64_t> queries;
  gp::PricingModel pricing;
};

int run_cost(const CostArgs& a) {
  if (a.report.empty() == !a.queries.has_value()) {
    throw gp::InvalidArgument("give exactly one of --report or --queries");
  }
  const gp::CostBreakdown c = a.queries
                                  ? gp::estimate_cost(*a.queries, a.pricing)
                                  : gp::estimate_cost(gp::load_report(a.report), a.pricing);
  std::cout << gp::cost_json(c) << '\n';
  return kExitOk;
}

// ------------------------------------------------------------- serve-mock

gp::MockServer* g_server = nullptr;

extern "C" void handle_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

struct ServeArgs {
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string config;
};

int run_serve(const ServeArgs& a) {
  gp::MockServiceConfig cfg;
  if (!a.config.empty()) cfg = gp::load_mock_config(a.config);
  gp::MockServer server(cfg.detector, cfg.server);
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  std::cerr << "serving " << cfg.detector.model_id << " on " << a.host << ":" << a.port
            << '\n';
  const bool ok = server.listen(a.host, a.port);
  g_server = nullptr;
  if (!ok) throw gp::IoError("cannot listen on " + a.host + ":" + std::to_string(a.port));
  return kExitOk;
}

// ------------------------------------------------------------------ synth

struct SynthArgs {
  std::string out;
  std::string kind = "target";
  int count = 20;
  std::uint64_t seed = 0;
  int objects = 20;
  int size = gp::kDefaultInputSize;
};

int run_synth(const SynthArgs& a) {
  fs::create_directories(a.out);
  const auto templates = gp::MockDetectorConfig::defaults().templates;
  for (int i = 0; i < a.count; ++i) {
    const std::uint64_t s = a.seed + static_cast<std::uint64_t>(i);
    char name[32];
    std::snprintf(name, sizeof name, "%s_%04d.png", a.kind.c_str(), i);
    const gp::ImageTensor img =
        a.kind == "collage"
            ? gp::synthetic_collage(s, templates, a.size, a.size, a.objects).image
            : gp::synthetic_target(s, a.size, a.size);
    gp::save_image(img, fs::path(a.out) / name);
  }
  std::cout << "wrote " << a.count << " images to " << a.out << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-budgeted black-box latency attacks on object detectors"};
  app.require_subcommand(1);

  HarvestArgs harvest_args;
  auto* harvest = app.add_subcommand("harvest", "query a corpus and build a patch index");
  harvest->add_option("--corpus", harvest_args.corpus, "directory of images")->required();
  add_oracle_options(harvest, harvest_args.oracle);
  harvest->add_option("--augment", harvest_args.augment,
                      "comma separated transforms: jitter, posterize, equalize");
  harvest->add_option("--out", harvest_args.out, "index directory")->required();
  harvest->add_option("--budget", harvest_args.budget, "maximum oracle queries");
  harvest->add_option("--seed", harvest_args.seed);
  harvest->add_option("--probes", harvest_args.probes, "drift probes to store");
  harvest->add_option("--workers", harvest_args.workers);
  harvest->add_option("--min-robustness", harvest_args.min_robustness,
                      "drop records that survive fewer augmentations");

  AttackArgs attack_args;
  auto* attack = app.add_subcommand("attack", "attack one image");
  attack->add_option("--image", attack_args.image)->required();
  attack->add_option("--db", attack_args.db, "index directory")->required();
  add_oracle_options(attack, attack_args.oracle);
  attack->add_option("--config", attack_args.config, "attack config JSON");
  attack->add_option("--epsilon", attack_args.epsilon);
  attack->add_option("--budget", attack_args.budget);
  attack->add_option("--seed", attack_args.seed);
  attack->add_option("--out", attack_args.out, "adversarial PNG");
  attack->add_option("--trace", attack_args.trace, "JSON-lines query trace");
  attack->add_option("--input-size", attack_args.input_size,
                     "resize input to this square size; 0 keeps it");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "attack a directory of images at several epsilons");
  eval->add_option("--images", eval_args.images)->required();
  eval->add_option("--db", eval_args.db)->required();
  add_oracle_options(eval, eval_args.oracle);
  eval->add_option("--config", eval_args.config, "attack config JSON");
  eval->add_option("--epsilons", eval_args.epsilons)->delimiter(',');
  eval->add_option("--budget", eval_args.budget);
  eval->add_option("--seed", eval_args.seed);
  eval->add_option("--report", eval_args.report, "report JSON");
  eval->add_option("--csv", eval_args.csv, "ASR table");
  eval->add_option("--plot", eval_args.plot, "ASR chart PNG");
  eval->add_option("--adv-dir", eval_args.adv_dir, "write adversarial images here");
  eval->add_option("--trace-dir", eval_args.trace_dir, "write query traces here");
  eval->add_option("--workers", eval_args.workers);
  eval->add_option("--input-size", eval_args.input_size);

  DriftArgs drift_args;
  auto* drift = app.add_subcommand("drift", "check whether the oracle changed since harvest");
  drift->add_option("--db", drift_args.db)->required();
  add_oracle_options(drift, drift_args.oracle);
  drift->add_option("--threshold", drift_args.threshold);
  drift->add_option("--budget", drift_args.budget);

  CostArgs cost_args;
  auto* cost = app.add_subcommand("cost", "estimate the monetary cost of an evaluation");
  cost->add_option("--report", cost_args.report);
  cost->add_option("--queries", cost_args.queries);
  cost->add_option("--per-1k", cost_args.pricing.per_1k_queries);
  cost->add_option("--gpu-hour", cost_args.pricing.per_gpu_hour);
  cost->add_option("--seconds-per-query", cost_args.pricing.seconds_per_query);
  cost->add_option("--init-hours", cost_args.pricing.init_hours);

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve-mock", "serve the mock detector over HTTP");
  serve->add_option("--port", serve_args.port);
  serve->add_option("--host", serve_args.host);
  serve->add_option("--config", serve_args.config, "mock detector JSON");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "write synthetic targets or collages");
  synth->add_option("--out", synth_args.out)->required();
  synth->add_option("--kind", synth_args.kind)->check(CLI::IsMember({"target", "collage"}));
  synth->add_option("--count", synth_args.count);
  synth->add_option("--seed", synth_args.seed);
  synth->add_option("--objects", synth_args.objects, "templates per collage");
  synth->add_option("--size", synth_args.size);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*harvest) return run_harvest(harvest_args);
    if (*attack) return run_attack_cmd(attack_args, attack);
    if (*eval) return run_eval_cmd(eval_args, eval);
    if (*drift) return run_drift(drift_args);
    if (*cost) return run_cost(cost_args);
    if (*serve) return run_serve(serve_args);
    if (*synth) return run_synth(synth_args);
  } catch (const ExitError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code;
  } catch (const gp::TransportError& e) {
    std::cerr << "error: oracle unreachable: " << e.what() << '\n';
    return kExitUnreachable;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
