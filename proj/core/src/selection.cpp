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

#include "ghostpatch/selection.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "ghostpatch/errors.hpp"

namespace ghostpatch {
namespace {

PixelMask nonzero_mask(const ImageTensor& content, const ImageTensor& orig) {
  PixelMask m(content.height(), content.width());
  auto a = content.data();
  auto b = orig.data();
  for (std::size_t i = 0; i < a.size(); ++i) m.set_flat(i, a[i] != b[i]);
  return m;
}

CellState observe(const ImageTensor& content, const ImageTensor& orig,
                  int object_count, int epsilon) {
  CellState s;
  s.patch = content;
  s.object_count = object_count;
  s.color_distance = linf_distance(content, orig);
  s.active_pixels = nonzero_mask(content, orig);
  s.eligible = object_count >= 1 && s.color_distance <= epsilon;
  return s;
}

bool better(const CellState& a, const CellState& b) {
  if (a.object_count != b.object_count) return a.object_count > b.object_count;
  return a.color_distance < b.color_distance;
}

}  // namespace

RegionRect Grid::cell(int i, int j) const {
  if (i < 0 || i >= n_w || j < 0 || j >= n_h) {
    throw InvalidArgument("grid cell (" + std::to_string(i) + ", " +
                          std::to_string(j) + ") out of range");
  }
  return {i * cell_size, j * cell_size, (i + 1) * cell_size,
          (j + 1) * cell_size};
}

Grid make_grid(int height, int width, int cell_size) {
  if (cell_size <= 0 || height <= 0 || width <= 0) {
    throw InvalidArgument("make_grid: sizes must be positive");
  }
  if (height % cell_size != 0 || width % cell_size != 0) {
    throw InvalidArgument("make_grid: cell size " + std::to_string(cell_size) +
                          " does not divide " + std::to_string(height) + "x" +
                          std::to_string(width));
  }
  return {cell_size, width / cell_size, height / cell_size};
}

Grid make_grid(const ImageTensor& img, int cell_size) {
  return make_grid(img.height(), img.width(), cell_size);
}

std::vector<int> cell_counts(const std::vector<Detection>& dets,
                             const Grid& grid) {
  std::vector<int> counts(static_cast<std::size_t>(grid.cell_count()), 0);
  const int s2 = 2 * grid.cell_size;
  for (const auto& d : dets) {
    // doubled center: integral, and floor division by 2s gives the cell
    const int cx2 = d.box.x0 + d.box.x1;
    const int cy2 = d.box.y0 + d.box.y1;
    if (cx2 < 0 || cy2 < 0) continue;
    const int i = cx2 / s2;
    const int j = cy2 / s2;
    if (i >= grid.n_w || j >= grid.n_h) continue;
    ++counts[static_cast<std::size_t>(grid.flat(i, j))];
  }
  return counts;
}

int bcount(const std::vector<Detection>& dets, const Grid& grid, int i,
           int j) {
  const RegionRect c = grid.cell(i, j);
  int n = 0;
  for (const auto& d : dets) {
    const int cx2 = d.box.x0 + d.box.x1;
    const int cy2 = d.box.y0 + d.box.y1;
    if (cx2 >= 2 * c.x0 && cx2 < 2 * c.x1 && cy2 >= 2 * c.y0 &&
        cy2 < 2 * c.y1) {
      ++n;
    }
  }
  return n;
}

int bcount(const DetectionSet& dets, const Grid& grid, int i, int j) {
  return bcount(dets.detections, grid, i, j);
}

void SelectionConfig::validate() const {
  if (cell_size <= 0) throw InvalidArgument("selection: cell_size must be > 0");
  if (count_threshold < 0) {
    throw InvalidArgument("selection: count threshold must be >= 0");
  }
  if (trials < 1) throw InvalidArgument("selection: trials must be >= 1");
  if (!(revert_probability >= 0.0 && revert_probability <= 1.0)) {
    throw InvalidArgument("selection: revert_probability must be in [0, 1]");
  }
  if (!(min_score >= 0.0 && min_score <= 1.0)) {
    throw InvalidArgument("selection: min_score must be in [0, 1]");
  }
  if (epsilon <= 0) throw InvalidArgument("selection: epsilon must be > 0");
  if (candidate_pool == 0) {
    throw InvalidArgument("selection: candidate_pool must be >= 1");
  }
  if (min_objects < 1 || max_objects < min_objects || max_objects > 4) {
    throw InvalidArgument("selection: need 1 <= min_objects <= max_objects <= 4");
  }
  if (!(transform_probability >= 0.0 && transform_probability <= 1.0)) {
    throw InvalidArgument("selection: transform_probability must be in [0, 1]");
  }
}

const ImageTensor& ResizeCache::get(const PatchIndex& db, std::size_t record,
                                    int height, int width) {
  const std::uint64_t key = (static_cast<std::uint64_t>(record) << 32) |
                            (static_cast<std::uint64_t>(height) << 16) |
                            static_cast<std::uint64_t>(width);
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    it = entries_.emplace(key, resize_bilinear(db.records.at(record).patch, height, width))
             .first;
  }
  return it->second;
}

ImageTensor patchgen(const RegionRect& cell, const PatchIndex& db,
                     const ColorStats& target, const SelectionConfig& cfg,
                     Rng& rng, ResizeCache* cache) {
  if (cell.empty()) throw InvalidArgument("patchgen: empty cell");
  if (db.empty()) throw EmptyIndex("patchgen: empty patch index");
  const int w = cell.width();
  const int h = cell.height();
  const int count = rng.between(cfg.min_objects, cfg.max_objects);

  // tiles: whole cell for a single object, quadrants otherwise
  std::vector<RegionRect> slots;
  if (count == 1) {
    slots.push_back({0, 0, w, h});
  } else {
    const int hw = w / 2;
    const int hh = h / 2;
    slots = {{0, 0, hw, hh}, {hw, 0, w, hh}, {0, hh, hw, h}, {hw, hh, w, h}};
    for (std::size_t k = slots.size() - 1; k > 0; --k) {
      std::swap(slots[k], slots[rng.below(k + 1)]);
    }
  }

  const auto pool =
      rank_candidates(db, target, cfg.candidate_pool, cfg.min_score, rng);

  std::array<std::uint8_t, 3> fill{};
  for (int c = 0; c < kChannels; ++c) {
    fill[static_cast<std::size_t>(c)] = clamp_u8(round_half_away(target.mean[static_cast<std::size_t>(c)]));
  }
  ImageTensor tile = ImageTensor::filled(h, w, fill);
  for (int k = 0; k < count; ++k) {
    const RegionRect slot = slots[static_cast<std::size_t>(k)];
    const std::size_t chosen = pool[rng.below(pool.size())];
    ImageTensor piece =
        cache != nullptr
            ? cache->get(db, chosen, slot.height(), slot.width())
            : resize_bilinear(db.records[chosen].patch, slot.height(), slot.width());
    if (rng.bernoulli(cfg.transform_probability)) {
      piece = color_transform(piece, cfg.patch_transform, rng);
    }
    paste_into(tile, piece, slot);
  }
  return tile;
}

SelectionOutcome position_centric_select(const ImageTensor& x,
                                         const SelectionConfig& cfg,
                                         const PatchIndex& db, Oracle& oracle,
                                         QueryBudget& budget, Rng& rng) {
  cfg.validate();
  if (db.empty()) throw EmptyIndex("position_centric_select: empty patch index");

  SelectionOutcome out;
  out.grid = make_grid(x, cfg.cell_size);
  const Grid& grid = out.grid;
  const auto n_cells = static_cast<std::size_t>(grid.cell_count());

  std::vector<RegionRect> rects(n_cells);
  std::vector<ImageTensor> originals(n_cells);
  std::vector<ColorStats> targets(n_cells);
  for (int j = 0; j < grid.n_h; ++j) {
    for (int i = 0; i < grid.n_w; ++i) {
      const auto f = static_cast<std::size_t>(grid.flat(i, j));
      rects[f] = grid.cell(i, j);
      originals[f] = crop(x, rects[f]);
      targets[f] = color_stats(x, rects[f]);
    }
  }

  std::vector<bool> observed(n_cells, false);
  out.cells.resize(n_cells);
  ImageTensor current = x;
  ResizeCache cache;

  for (int t = 0; t < cfg.trials; ++t) {
    const DetectionSet dets = detect(oracle, current, budget, "selection");
    const std::vector<int> counts = cell_counts(dets.detections, grid);

    SelectionTrial trial;
    trial.query_index = dets.query_index;
    trial.object_count = static_cast<int>(dets.size());
    trial.linf = linf_distance(current, x);

    for (std::size_t f = 0; f < n_cells; ++f) {
      CellState seen = observe(crop(current, rects[f]), originals[f], counts[f],
                               cfg.epsilon);
      if (!observed[f] || better(seen, out.cells[f])) {
        out.cells[f] = std::move(seen);
        observed[f] = true;
      }
      if (counts[f] >= cfg.count_threshold) continue;
      if (rng.bernoulli(cfg.revert_probability)) {
        paste_into(current, originals[f], rects[f]);
        trial.reverted.push_back(static_cast<int>(f));
      } else {
        paste_into(current, patchgen(rects[f], db, targets[f], cfg, rng, &cache),
                   rects[f]);
        trial.replaced.push_back(static_cast<int>(f));
      }
    }
    out.trials.push_back(std::move(trial));
  }

  // Cells that held objects start from their best observed content; the
  // rest keep whatever the last trial left in them.
  out.x_init = current;
  for (std::size_t f = 0; f < n_cells; ++f) {
    if (out.cells[f].object_count >= 1) {
      paste_into(out.x_init, out.cells[f].patch, rects[f]);
    }
  }
  return out;
}

}  // namespace ghostpatch
