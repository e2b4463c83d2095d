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

// Position-centric object selection: the image is cut into a square grid,
// and every cell in which the detector reports too few objects is refilled
// with harvested patches until the detector sees objects spread across the
// whole frame. The resulting image is deliberately over budget; the
// projection stage pulls it back into the epsilon ball.

#pragma once

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "ghostpatch/image.hpp"
#include "ghostpatch/oracle.hpp"
#include "ghostpatch/patchdb.hpp"
#include "ghostpatch/rng.hpp"
#include "ghostpatch/transform.hpp"

namespace ghostpatch {

struct Grid {
  int cell_size = 0;
  int n_w = 0;
  int n_h = 0;

  int cell_count() const noexcept { return n_w * n_h; }
  // Cell in column i, row j.
  RegionRect cell(int i, int j) const;
  // Flat index j * n_w + i.
  int flat(int i, int j) const noexcept { return j * n_w + i; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

// Throws InvalidArgument unless cell_size divides both dimensions.
Grid make_grid(int height, int width, int cell_size);
Grid make_grid(const ImageTensor& img, int cell_size);

// Detections whose box center lies in cell (i, j). Centers use doubled
// integer coordinates and half-open cells, so every detection with a center
// inside the image lands in exactly one cell.
int bcount(const std::vector<Detection>& dets, const Grid& grid, int i, int j);
int bcount(const DetectionSet& dets, const Grid& grid, int i, int j);

// bcount for every cell at once, indexed by Grid::flat.
std::vector<int> cell_counts(const std::vector<Detection>& dets,
                             const Grid& grid);

struct CellState {
  ImageTensor patch;  // cell content at the recorded trial
  int object_count = 0;
  int color_distance = 0;  // L-inf distance from the original cell content
  PixelMask active_pixels;  // nonzero perturbation positions within the cell
  bool eligible = false;  // object_count >= 1 and color_distance <= epsilon
};

struct SelectionConfig {
  int cell_size = 64;
  int count_threshold = 1;  // cells with fewer detections are refilled
  int trials = 10;
  double revert_probability = 0.1;
  double min_score = kDefaultMinScore;
  // Radius used for cell eligibility. The attack driver overwrites it.
  int epsilon = 32;
  // Nearest-color records considered per refill.
  std::size_t candidate_pool = 4;
  int min_objects = 1;
  int max_objects = 3;
  double transform_probability = 0.2;
  ColorTransform patch_transform = ColorTransform::jitter(0.2, 0.2);

  void validate() const;
};

// Memoizes record patches resized to slot dimensions. Bound to one index;
// not thread safe.
class ResizeCache {
 public:
  const ImageTensor& get(const PatchIndex& db, std::size_t record, int height,
                         int width);

 private:
  std::unordered_map<std::uint64_t, ImageTensor> entries_;
};

// A fresh tile for `cell`: draws min_objects..max_objects candidates whose
// colors best match `target`, resizes each to its slot, optionally
// color-transforms it, and lays them out in the cell (one candidate fills it; several share quadrants,
// with unused quadrants painted the target's mean color). Throws EmptyIndex
// or NoCandidates. A cache, if given, changes speed only.
ImageTensor patchgen(const RegionRect& cell, const PatchIndex& db,
                     const ColorStats& target, const SelectionConfig& cfg,
                     Rng& rng, ResizeCache* cache = nullptr);

struct SelectionTrial {
  std::uint64_t query_index = 0;
  int object_count = 0;
  int linf = 0;  // queried image vs. original
  std::vector<int> replaced;  // flat cell indices refilled after this query
  std::vector<int> reverted;  // flat cell indices restored to the original
};

struct SelectionOutcome {
  ImageTensor x_init;
  Grid grid;
  std::vector<CellState> cells;  // indexed by Grid::flat
  std::vector<SelectionTrial> trials;
};

// Runs cfg.trials rounds of query, count, refill. Each cell keeps the best
// content it was observed with (most objects, then smallest distance), and
// x_init is assembled from those; cells never refilled equal x exactly.
// Performs exactly cfg.trials queries under phase "selection".
SelectionOutcome position_centric_select(const ImageTensor& x,
                                         const SelectionConfig& cfg,
                                         const PatchIndex& db, Oracle& oracle,
                                         QueryBudget& budget, Rng& rng);

}  // namespace ghostpatch
