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

#include <numeric>

#include "ghostpatch/errors.hpp"
#include "ghostpatch/mock_detector.hpp"
#include "ghostpatch/selection.hpp"
#include "ghostpatch/synth.hpp"
#include "test_support.hpp"

namespace ghostpatch {
namespace {

using testing::collage_index;

Detection centered(int cx, int cy, int half = 4) {
  return {{cx - half, cy - half, cx + half, cy + half}, "o", 0.9};
}

// Brute force: the cell whose pixel square contains the real-valued center.
int brute_bcount(const std::vector<Detection>& dets, const Grid& grid, int i, int j) {
  int n = 0;
  for (const auto& d : dets) {
    const double cx = (d.box.x0 + d.box.x1) / 2.0;
    const double cy = (d.box.y0 + d.box.y1) / 2.0;
    const double lo_x = i * grid.cell_size, hi_x = (i + 1) * grid.cell_size;
    const double lo_y = j * grid.cell_size, hi_y = (j + 1) * grid.cell_size;
    if (cx >= lo_x && cx < hi_x && cy >= lo_y && cy < hi_y) ++n;
  }
  return n;
}

TEST(Grid, CellCounts) {
  const Grid g = make_grid(640, 640, 64);
  EXPECT_EQ(g.n_w, 10);
  EXPECT_EQ(g.n_h, 10);
  EXPECT_EQ(g.cell_count(), 100);
  EXPECT_EQ(make_grid(640, 640, 640).cell_count(), 1);
  EXPECT_EQ(make_grid(480, 640, 32).n_h, 15);
  EXPECT_THROW(make_grid(640, 640, 100), InvalidArgument);
  EXPECT_THROW(make_grid(640, 640, 0), InvalidArgument);
}

TEST(Grid, CellRectangles) {
  const Grid g = make_grid(128, 192, 64);
  EXPECT_EQ(g.cell(2, 1), (RegionRect{128, 64, 192, 128}));
  EXPECT_EQ(g.flat(2, 1), 5);
  EXPECT_THROW(g.cell(3, 0), InvalidArgument);
  EXPECT_THROW(g.cell(0, 2), InvalidArgument);
}

TEST(BCount, Cases) {
  const Grid g = make_grid(128, 128, 64);
  EXPECT_EQ(bcount(std::vector<Detection>{}, g, 0, 0), 0);
  const std::vector<Detection> dets = {centered(10, 10), centered(70, 10), centered(70, 20),
                                       centered(64, 64)};
  EXPECT_EQ(bcount(dets, g, 0, 0), 1);
  EXPECT_EQ(bcount(dets, g, 1, 0), 2);
  // A center exactly on a cell border belongs to the lower-right cell.
  EXPECT_EQ(bcount(dets, g, 1, 1), 1);
  EXPECT_EQ(bcount(dets, g, 0, 1), 0);
  // A box spanning two cells counts only where its center falls.
  const std::vector<Detection> wide = {{{40, 0, 100, 20}, "o", 0.5}};
  EXPECT_EQ(bcount(wide, g, 1, 0), 1);
  EXPECT_EQ(bcount(wide, g, 0, 0), 0);
}

TEST(BCount, HalfPixelCentersUseTheContainingCell) {
  const Grid g = make_grid(128, 128, 64);
  // Center (63.5, 0.5) lies in cell (0, 0).
  const std::vector<Detection> dets = {{{63, 0, 64, 1}, "o", 0.5}};
  EXPECT_EQ(bcount(dets, g, 0, 0), 1);
  EXPECT_EQ(bcount(dets, g, 1, 0), 0);
}

TEST(BCount, PartitionsRandomSetsLikeBruteForce) {
  Rng rng(3);
  const int sizes[] = {16, 32, 64, 80, 128};
  for (int round = 0; round < 50; ++round) {
    const int cell = sizes[rng.below(5)];
    const int n_w = rng.between(1, 6), n_h = rng.between(1, 6);
    const Grid g = make_grid(n_h * cell, n_w * cell, cell);
    const auto dets = testing::random_detections(rng, 200, g.n_w * cell, g.n_h * cell);
    const auto counts = cell_counts(dets, g);
    int total = 0;
    for (int j = 0; j < g.n_h; ++j) {
      for (int i = 0; i < g.n_w; ++i) {
        const int b = bcount(dets, g, i, j);
        ASSERT_EQ(b, brute_bcount(dets, g, i, j));
        ASSERT_EQ(counts[static_cast<std::size_t>(g.flat(i, j))], b);
        total += b;
      }
    }
    EXPECT_EQ(total, 200);
  }
}

TEST(SelectionConfig, Validation) {
  EXPECT_NO_THROW(SelectionConfig{}.validate());
  SelectionConfig c;
  c.trials = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.revert_probability = -0.1;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.max_objects = 5;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.candidate_pool = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(PatchGen, SingletonIndexFillsTheCell) {
  PatchIndex idx;
  PatchRecord r;
  r.patch = ImageTensor::filled(8, 8, {200, 10, 30});
  r.score = 0.9;
  r.stats = color_stats(r.patch, r.patch.bounds());
  idx.records.push_back(r);
  SelectionConfig cfg;
  cfg.min_objects = cfg.max_objects = 1;
  cfg.transform_probability = 0.0;
  Rng rng(1);
  const ImageTensor tile = patchgen({0, 0, 32, 32}, idx, ColorStats{}, cfg, rng);
  EXPECT_EQ(tile, ImageTensor::filled(32, 32, {200, 10, 30}));
}

TEST(PatchGen, DeterministicAndCacheNeutral) {
  const PatchIndex& idx = collage_index();
  ColorStats target;
  target.mean = {90, 120, 150};
  const SelectionConfig cfg;
  Rng a(5), b(5);
  ResizeCache cache;
  for (int i = 0; i < 10; ++i) {
    ASSERT_EQ(patchgen({0, 0, 64, 64}, idx, target, cfg, a),
              patchgen({0, 0, 64, 64}, idx, target, cfg, b, &cache));
  }
}

TEST(PatchGen, TwoTemplateTileIsDetected) {
  const auto det_cfg = MockDetectorConfig::defaults();
  PatchIndex idx;
  for (int t = 0; t < 2; ++t) {
    PatchRecord r;
    r.patch = resize_bilinear(det_cfg.templates[static_cast<std::size_t>(t)].pattern, 32, 32);
    r.label = det_cfg.templates[static_cast<std::size_t>(t)].label;
    r.score = 0.95;
    r.stats = color_stats(r.patch, r.patch.bounds());
    idx.records.push_back(r);
  }
  SelectionConfig cfg;
  cfg.min_objects = cfg.max_objects = 2;
  cfg.transform_probability = 0.0;
  Rng rng(2);
  ImageTensor img = ImageTensor::filled(128, 128, {120, 124, 128});
  const RegionRect cell{64, 64, 128, 128};
  paste_into(img, patchgen(cell, idx, color_stats(img, cell), cfg, rng), cell);
  const auto dets = mock_detect(img, det_cfg).detections;
  const Grid g = make_grid(img, 64);
  EXPECT_EQ(bcount(dets, g, 1, 1), 2);
  EXPECT_EQ(dets.size(), 2u);
}

TEST(PatchGen, Errors) {
  Rng rng(1);
  EXPECT_THROW(patchgen({0, 0, 8, 8}, PatchIndex{}, ColorStats{}, SelectionConfig{}, rng),
               EmptyIndex);
  EXPECT_THROW(patchgen({0, 0, 0, 8}, collage_index(), ColorStats{}, SelectionConfig{}, rng),
               InvalidArgument);
}

TEST(PositionCentricSelect, ZeroThresholdChangesNothing) {
  const ImageTensor x = synthetic_target(1, 256, 256);
  MockDetector det(MockDetectorConfig::defaults());
  QueryBudget budget(100);
  Rng rng(1);
  SelectionConfig cfg;
  cfg.count_threshold = 0;
  cfg.trials = 3;
  const auto out = position_centric_select(x, cfg, collage_index(), det, budget, rng);
  EXPECT_EQ(out.x_init, x);
  EXPECT_EQ(budget.used(), 3u);
  for (const auto& t : out.trials) {
    EXPECT_TRUE(t.replaced.empty());
    EXPECT_TRUE(t.reverted.empty());
  }
}

TEST(PositionCentricSelect, BlankTargetGainsObjectsAcrossTheGrid) {
  const ImageTensor x = synthetic_target(2);
  MockDetector det(MockDetectorConfig::defaults());
  QueryBudget budget(100);
  Rng rng(7);
  SelectionConfig cfg;
  cfg.trials = 3;
  const auto out = position_centric_select(x, cfg, collage_index(), det, budget, rng);
  EXPECT_EQ(budget.used(), 3u);
  ASSERT_EQ(out.trials.size(), 3u);
  EXPECT_EQ(out.trials[0].object_count, 0);
  EXPECT_EQ(out.trials[0].linf, 0);
  // The first trial refills or reverts every empty cell.
  EXPECT_EQ(out.trials[0].replaced.size() + out.trials[0].reverted.size(), 100u);

  const auto dets = mock_detect(out.x_init, det.config()).detections;
  const auto counts = cell_counts(dets, out.grid);
  const int covered = static_cast<int>(
      std::count_if(counts.begin(), counts.end(), [](int c) { return c >= 1; }));
  EXPECT_GE(covered, 50);
  EXPECT_GT(static_cast<int>(dets.size()), 20);
}

TEST(PositionCentricSelect, CellStatesDescribeTheirContent) {
  const ImageTensor x = synthetic_target(3, 256, 256);
  MockDetector det(MockDetectorConfig::defaults());
  QueryBudget budget(100);
  Rng rng(3);
  SelectionConfig cfg;
  cfg.trials = 4;
  cfg.epsilon = 64;
  const auto out = position_centric_select(x, cfg, collage_index(), det, budget, rng);
  ASSERT_EQ(out.cells.size(), 16u);
  for (int j = 0; j < out.grid.n_h; ++j) {
    for (int i = 0; i < out.grid.n_w; ++i) {
      const CellState& s = out.cells[static_cast<std::size_t>(out.grid.flat(i, j))];
      const RegionRect rect = out.grid.cell(i, j);
      const ImageTensor orig = crop(x, rect);
      EXPECT_EQ(s.color_distance, testing::scan_linf(s.patch, orig));
      EXPECT_EQ(s.eligible, s.object_count >= 1 && s.color_distance <= 64);
      std::size_t changed = 0;
      for (std::size_t k = 0; k < orig.size(); ++k) changed += s.patch.data()[k] != orig.data()[k];
      EXPECT_EQ(s.active_pixels.count(), changed);
      if (s.object_count >= 1) {
        EXPECT_EQ(crop(out.x_init, rect), s.patch);
      }
    }
  }
}

TEST(PositionCentricSelect, BudgetSmallerThanTrialsThrows) {
  const ImageTensor x = synthetic_target(4, 128, 128);
  MockDetector det(MockDetectorConfig::defaults());
  QueryBudget budget(2);
  Rng rng(1);
  SelectionConfig cfg;
  cfg.trials = 3;
  EXPECT_THROW(position_centric_select(x, cfg, collage_index(), det, budget, rng),
               BudgetExhausted);
  EXPECT_EQ(budget.used(), 2u);
}

TEST(PositionCentricSelect, FixedSeedIsReproducible) {
  const ImageTensor x = synthetic_target(5, 256, 256);
  MockDetector det(MockDetectorConfig::defaults());
  auto run = [&] {
    QueryBudget budget(100);
    Rng rng(11);
    return position_centric_select(x, SelectionConfig{}, collage_index(), det, budget, rng)
        .x_init;
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace ghostpatch
