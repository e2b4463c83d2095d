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

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include "ghostpatch/errors.hpp"
#include "ghostpatch/oracle.hpp"
#include "test_support.hpp"

namespace ghostpatch {
namespace {

using testing::CountingOracle;
using testing::ScriptedOracle;

Detection box(int x0, int y0, int x1, int y1, double score,
              std::string label = "obj") {
  return {{x0, y0, x1, y1}, std::move(label), score};
}

// IoU by counting covered pixels.
double raster_iou(const RegionRect& a, const RegionRect& b) {
  long long inter = 0;
  long long uni = 0;
  const int x0 = std::min(a.x0, b.x0), x1 = std::max(a.x1, b.x1);
  const int y0 = std::min(a.y0, b.y0), y1 = std::max(a.y1, b.y1);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const bool ia = a.contains(x, y);
      const bool ib = b.contains(x, y);
      inter += ia && ib;
      uni += ia || ib;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// A box survives iff no earlier-ranked survivor overlaps it past the
// threshold. Quadratic, by definition.
std::vector<Detection> reference_nms(std::vector<Detection> dets, double thr) {
  std::vector<std::size_t> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const auto& a = dets[i];
    const auto& b = dets[j];
    if (a.score != b.score) return a.score > b.score;
    if (a.box.x0 != b.box.x0) return a.box.x0 < b.box.x0;
    if (a.box.y0 != b.box.y0) return a.box.y0 < b.box.y0;
    return i < j;
  });
  std::vector<bool> alive(dets.size(), false);
  std::vector<Detection> out;
  for (std::size_t r = 0; r < order.size(); ++r) {
    bool keep = true;
    for (std::size_t q = 0; q < r; ++q) {
      if (alive[order[q]] &&
          raster_iou(dets[order[q]].box, dets[order[r]].box) > thr) {
        keep = false;
        break;
      }
    }
    alive[order[r]] = keep;
    if (keep) out.push_back(dets[order[r]]);
  }
  return out;
}

TEST(QueryBudget, ChargesOneUnitPerCall) {
  QueryBudget budget(10);
  EXPECT_EQ(budget.charge("a"), 1u);
  EXPECT_EQ(budget.used(), 1u);
  EXPECT_EQ(budget.remaining(), 9u);
  EXPECT_EQ(budget.charge("b"), 2u);
  EXPECT_EQ(budget.charge("a"), 3u);
  const auto tallies = budget.tallies();
  EXPECT_EQ(tallies.at("a"), 2u);
  EXPECT_EQ(tallies.at("b"), 1u);
}

TEST(QueryBudget, DefaultCapIsFourThousand) {
  QueryBudget budget;
  EXPECT_EQ(budget.max_queries(), 4000u);
  for (int i = 0; i < 4000; ++i) budget.charge("attack");
  EXPECT_TRUE(budget.exhausted());
  EXPECT_THROW(budget.charge("attack"), BudgetExhausted);
  EXPECT_EQ(budget.used(), 4000u);
}

TEST(QueryBudget, ZeroCapIsExhaustedImmediately) {
  QueryBudget budget(0);
  EXPECT_TRUE(budget.exhausted());
  EXPECT_THROW(budget.charge("x"), BudgetExhausted);
}

TEST(QueryBudget, ConcurrentChargesNeverOvershoot) {
  QueryBudget budget(1000);
  std::atomic<int> granted{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      const std::string phase = "p" + std::to_string(t % 3);
      for (int i = 0; i < 400; ++i) {
        try {
          budget.charge(phase);
          ++granted;
        } catch (const BudgetExhausted&) {
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(granted.load(), 1000);
  EXPECT_EQ(budget.used(), 1000u);
  std::uint64_t sum = 0;
  for (const auto& [phase, n] : budget.tallies()) sum += n;
  EXPECT_EQ(sum, budget.used());
}

TEST(Detect, StampsQueryIndexAndOracleId) {
  ScriptedOracle oracle([](const ImageTensor&) {
    return std::vector<Detection>{box(0, 0, 4, 4, 0.9)};
  }, "scripted-7");
  QueryBudget budget(3);
  const ImageTensor img(8, 8);
  EXPECT_EQ(detect(oracle, img, budget).query_index, 1u);
  const DetectionSet second = detect(oracle, img, budget, "probe");
  EXPECT_EQ(second.query_index, 2u);
  EXPECT_EQ(second.oracle_id, "scripted-7");
  EXPECT_EQ(second.size(), 1u);
  EXPECT_EQ(budget.tallies().at("probe"), 1u);
}

TEST(Detect, ExhaustedBudgetNeverReachesTheOracle) {
  ScriptedOracle oracle([](const ImageTensor&) { return std::vector<Detection>{}; });
  QueryBudget budget(2);
  const ImageTensor img(8, 8);
  detect(oracle, img, budget);
  detect(oracle, img, budget);
  EXPECT_THROW(detect(oracle, img, budget), BudgetExhausted);
  EXPECT_THROW(detect(oracle, img, budget), BudgetExhausted);
  EXPECT_EQ(oracle.calls(), 2u);
}

TEST(Iou, KnownValues) {
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {10, 0, 20, 10}), 0.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {5, 0, 15, 10}), 50.0 / 150.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 4, 4}, {1, 1, 3, 3}), 4.0 / 16.0);
  EXPECT_DOUBLE_EQ(iou({0, 0, 0, 0}, {0, 0, 0, 0}), 0.0);
}

TEST(Iou, MatchesRasterCountOnRandomBoxes) {
  Rng rng(21);
  const auto dets = testing::random_detections(rng, 60, 48, 48);
  for (std::size_t i = 0; i < dets.size(); ++i) {
    for (std::size_t j = i; j < dets.size(); ++j) {
      ASSERT_NEAR(iou(dets[i].box, dets[j].box), raster_iou(dets[i].box, dets[j].box),
                  1e-12);
      ASSERT_DOUBLE_EQ(iou(dets[i].box, dets[j].box), iou(dets[j].box, dets[i].box));
    }
  }
}

TEST(Nms, DisjointBoxesAllSurviveInScoreOrder) {
  std::vector<Detection> dets = {box(0, 0, 10, 10, 0.5), box(20, 0, 30, 10, 0.9),
                                 box(40, 0, 50, 10, 0.7)};
  const auto kept = nms(dets, 0.5);
  ASSERT_EQ(kept.size(), 3u);
  EXPECT_EQ(kept[0].score, 0.9);
  EXPECT_EQ(kept[1].score, 0.7);
  EXPECT_EQ(kept[2].score, 0.5);
}

TEST(Nms, DuplicatesCollapseToOne) {
  std::vector<Detection> dets(5, box(3, 3, 13, 13, 0.8));
  EXPECT_EQ(nms(dets, 0.5).size(), 1u);
}

TEST(Nms, OverlapExactlyAtThresholdIsKept) {
  // IoU of these two is exactly 1/3.
  std::vector<Detection> dets = {box(0, 0, 10, 10, 0.9), box(5, 0, 15, 10, 0.8)};
  EXPECT_EQ(nms(dets, 1.0 / 3.0).size(), 2u);
  EXPECT_EQ(nms(dets, 0.3).size(), 1u);
}

TEST(Nms, ScoreTiesBreakOnTopLeftCorner) {
  std::vector<Detection> dets = {box(2, 0, 12, 10, 0.8, "b"),
                                 box(1, 0, 11, 10, 0.8, "a")};
  const auto kept = nms(dets, 0.5);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].label, "a");
}

TEST(Nms, MatchesQuadraticReferenceOnRandomSets) {
  Rng rng(99);
  for (int round = 0; round < 20; ++round) {
    auto dets = testing::random_detections(rng, 50, 64, 64);
    const double thr = 0.2 + 0.6 * rng.uniform();
    EXPECT_EQ(nms(dets, thr), reference_nms(dets, thr)) << "round " << round;
  }
}

TEST(Nms, KeptBoxesArePairwiseBelowThreshold) {
  Rng rng(5);
  const auto kept = nms(testing::random_detections(rng, 200, 128, 128), 0.45);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t j = i + 1; j < kept.size(); ++j) {
      ASSERT_LE(iou(kept[i].box, kept[j].box), 0.45);
    }
  }
}

TEST(Nms, DetectionSetOverloadKeepsMetadata) {
  DetectionSet in;
  in.detections = {box(0, 0, 4, 4, 0.9), box(0, 0, 4, 4, 0.5)};
  in.oracle_id = "m";
  in.query_index = 12;
  const DetectionSet out = nms(in, 0.5);
  EXPECT_EQ(out.size(), 1u);
  EXPECT_EQ(out.oracle_id, "m");
  EXPECT_EQ(out.query_index, 12u);
}

}  // namespace
}  // namespace ghostpatch
