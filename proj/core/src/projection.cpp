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

#include "ghostpatch/projection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "ghostpatch/errors.hpp"

namespace ghostpatch {
namespace {

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw DimensionMismatch(std::string(what) + ": shape mismatch");
  }
}

std::int16_t clamp_delta(long long v) {
  return static_cast<std::int16_t>(std::clamp<long long>(v, -255, 255));
}

int stage_radius(int eps, double d) {
  return static_cast<int>(std::floor(eps * d + 1e-9));
}

}  // namespace

void ProjectionParams::validate() const {
  if (!(dropout_density >= 0.0 && dropout_density <= 1.0)) {
    throw InvalidArgument("projection: dropout density must be in [0, 1]");
  }
  if (epsilon <= 0) throw InvalidArgument("projection: epsilon must be > 0");
  if (iterations < 1) throw InvalidArgument("projection: iterations must be >= 1");
  if (max_stage_retries < 0) {
    throw InvalidArgument("projection: max_stage_retries must be >= 0");
  }
  if (!std::isfinite(ineligible_scale) || !std::isfinite(eligible_scale) ||
      !std::isfinite(fixed_offset)) {
    throw InvalidArgument("projection: scales and offset must be finite");
  }
}

void ToleranceSchedule::validate() const {
  if (stages.empty()) throw InvalidArgument("tolerance schedule is empty");
  for (std::size_t k = 0; k < stages.size(); ++k) {
    if (!(stages[k] >= 1.0)) {
      throw InvalidArgument("tolerance stages must be >= 1");
    }
    if (k > 0 && !(stages[k] < stages[k - 1])) {
      throw InvalidArgument("tolerance stages must be strictly decreasing");
    }
  }
  if (stages.back() != 1.0) {
    throw InvalidArgument("tolerance schedule must end at 1.0");
  }
}

PixelMask eligible_mask(const Perturbation& xp, int eps) {
  if (eps <= 0) throw InvalidArgument("eligible_mask: eps must be > 0");
  PixelMask m(xp.height(), xp.width());
  auto v = xp.data();
  for (std::size_t i = 0; i < v.size(); ++i) m.set_flat(i, std::abs(int{v[i]}) <= eps);
  return m;
}

Perturbation f_i(const Perturbation& xp, double s_i, const PixelMask& keep) {
  require_same_shape(xp, keep, "f_i");
  Perturbation out(xp.height(), xp.width());
  auto in = xp.data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) {
    o[i] = keep.flat(i) ? clamp_delta(round_half_away(s_i * in[i])) : 0;
  }
  return out;
}

Perturbation f_e(const Perturbation& xp, double s_e, double b_e) {
  Perturbation out(xp.height(), xp.width());
  auto in = xp.data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) {
    o[i] = clamp_delta(round_half_away(s_e * in[i] + b_e));
  }
  return out;
}

PixelMask sample_dropout_mask(const Perturbation& xp, double rho, Rng& rng) {
  PixelMask m(xp.height(), xp.width());
  auto v = xp.data();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0) m.set_flat(i, rng.bernoulli(rho));
  }
  return m;
}

double recenter_offset(const Perturbation& xp, const PixelMask& eligible,
                       double s_e) {
  require_same_shape(xp, eligible, "recenter_offset");
  auto v = xp.data();
  long long sum = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!eligible.flat(i)) continue;
    sum += v[i];
    ++n;
  }
  if (n == 0) return 0.0;
  return -s_e * static_cast<double>(sum) / static_cast<double>(n);
}

Perturbation compose_projection(const Perturbation& xp,
                                const PixelMask& eligible,
                                const PixelMask& keep, double s_i, double s_e,
                                double b_e) {
  require_same_shape(xp, eligible, "compose_projection");
  require_same_shape(xp, keep, "compose_projection");
  Perturbation out(xp.height(), xp.width());
  auto in = xp.data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (eligible.flat(i)) {
      o[i] = clamp_delta(round_half_away(s_e * in[i] + b_e));
    } else {
      o[i] = keep.flat(i) ? clamp_delta(round_half_away(s_i * in[i])) : 0;
    }
  }
  return out;
}

Perturbation project(const Perturbation& xp, int eps,
                     const ProjectionParams& params, Rng& rng) {
  if (eps <= 0) throw InvalidArgument("project: eps must be > 0");
  // Single fused pass equivalent to compose_projection(xp, M_e, M_r, ...).
  // M_r only matters where M_e is false, and every such position is active
  // (|v| > eps > 0), so one Bernoulli draw is spent per ineligible position.
  const auto v = xp.data();
  const double s_e = params.eligible_scale;
  const double s_i = params.ineligible_scale;
  double b_e = params.fixed_offset;
  if (params.offset_policy == OffsetPolicy::kRecenter) {
    long long sum = 0;
    std::size_t n = 0;
    for (auto d : v) {
      if (std::abs(int{d}) > eps) continue;
      sum += d;
      ++n;
    }
    b_e = n == 0 ? 0.0 : -s_e * static_cast<double>(sum) / static_cast<double>(n);
  }
  Perturbation out(xp.height(), xp.width());
  auto o = out.data();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(int{v[i]}) <= eps) {
      o[i] = clamp_delta(round_half_away(s_e * v[i] + b_e));
    } else if (rng.bernoulli(params.dropout_density)) {
      o[i] = clamp_delta(round_half_away(s_i * v[i]));
    }
  }
  return out;
}

void project_region(ImageTensor& adv, const ImageTensor& orig,
                    const RegionRect& region, int eps,
                    const ProjectionParams& params, Rng& rng) {
  require_same_shape(adv, orig, "project_region");
  if (eps <= 0) throw InvalidArgument("project_region: eps must be > 0");
  if (!region.fits_within(adv.width(), adv.height())) {
    throw InvalidArgument("project_region: region out of bounds");
  }
  const std::size_t stride = static_cast<std::size_t>(adv.width()) * kChannels;
  const std::size_t row_len = static_cast<std::size_t>(region.width()) * kChannels;
  const std::size_t first =
      static_cast<std::size_t>(region.y0) * stride +
      static_cast<std::size_t>(region.x0) * kChannels;
  std::uint8_t* a = adv.data().data() + first;
  const std::uint8_t* o = orig.data().data() + first;

  const double s_e = params.eligible_scale;
  const double s_i = params.ineligible_scale;
  double b_e = params.fixed_offset;
  if (params.offset_policy == OffsetPolicy::kRecenter) {
    long long sum = 0;
    std::size_t n = 0;
    for (int y = 0; y < region.height(); ++y) {
      const std::uint8_t* ar = a + y * stride;
      const std::uint8_t* orr = o + y * stride;
      for (std::size_t k = 0; k < row_len; ++k) {
        const int d = int{ar[k]} - int{orr[k]};
        if (std::abs(d) > eps) continue;
        sum += d;
        ++n;
      }
    }
    b_e = n == 0 ? 0.0 : -s_e * static_cast<double>(sum) / static_cast<double>(n);
  }
  // Both maps depend only on the integer delta, so tabulate them once.
  std::array<std::int16_t, 511> eligible_map{};
  std::array<std::int16_t, 511> kept_map{};
  for (int d = -255; d <= 255; ++d) {
    const auto k = static_cast<std::size_t>(d + 255);
    eligible_map[k] = std::abs(d) <= eps ? clamp_delta(round_half_away(s_e * d + b_e)) : 0;
    kept_map[k] = clamp_delta(round_half_away(s_i * d));
  }
  for (int y = 0; y < region.height(); ++y) {
    std::uint8_t* ar = a + y * stride;
    const std::uint8_t* orr = o + y * stride;
    for (std::size_t k = 0; k < row_len; ++k) {
      const int d = int{ar[k]} - int{orr[k]};
      const auto idx = static_cast<std::size_t>(d + 255);
      int p = 0;
      if (std::abs(d) <= eps) {
        p = eligible_map[idx];
      } else if (rng.bernoulli(params.dropout_density)) {
        p = kept_map[idx];
      }
      ar[k] = clamp_u8(int{orr[k]} + p);
    }
  }
}

ManipulationOutcome color_manipulate(const ImageTensor& x,
                                     const ImageTensor& x_adv,
                                     const ToleranceSchedule& schedule,
                                     const ProjectionParams& params,
                                     const SelectionConfig& cfg,
                                     const PatchIndex& db, Oracle& oracle,
                                     QueryBudget& budget, Rng& rng) {
  require_same_shape(x, x_adv, "color_manipulate");
  schedule.validate();
  params.validate();
  const int eps = params.epsilon;
  const Grid grid = make_grid(x, cfg.cell_size);
  const auto n_cells = static_cast<std::size_t>(grid.cell_count());

  std::vector<RegionRect> rects(n_cells);
  std::vector<ColorStats> targets(n_cells);
  for (int j = 0; j < grid.n_h; ++j) {
    for (int i = 0; i < grid.n_w; ++i) {
      const auto f = static_cast<std::size_t>(grid.flat(i, j));
      rects[f] = grid.cell(i, j);
      targets[f] = color_stats(x, rects[f]);
    }
  }

  ManipulationOutcome out;
  ImageTensor current = x_adv;
  ResizeCache cache;

  // One pass over a stage; returns its best iterate. Throws BudgetExhausted.
  auto run_stage = [&](int stage, int attempt, double d,
                       std::optional<Checkpoint>& stage_best) {
    const int radius = stage_radius(eps, d);
    clamp_ball_into(current, x, radius);
    for (int it = 0; it < params.iterations; ++it) {
      const DetectionSet dets = detect(oracle, current, budget, "projection");
      const int count = static_cast<int>(dets.size());

      ManipulationStep step;
      step.query_index = dets.query_index;
      step.tolerance = d;
      step.stage = stage;
      step.attempt = attempt;
      step.iteration = it;
      step.object_count = count;
      step.linf = linf_distance(current, x);

      if (!stage_best || count > stage_best->object_count) {
        stage_best = Checkpoint{current, count, d, dets.query_index};
      }
      if (d == 1.0 && (!out.best || count > out.best->object_count)) {
        out.best = Checkpoint{current, count, d, dets.query_index};
      }

      const std::vector<int> counts = cell_counts(dets.detections, grid);
      for (std::size_t f = 0; f < n_cells; ++f) {
        if (counts[f] < 1) {
          try {
            paste_into(current, patchgen(rects[f], db, targets[f], cfg, rng, &cache),
                       rects[f]);
            ++step.cells_regenerated;
          } catch (const EmptyIndex&) {
          } catch (const NoCandidates&) {
          }
          continue;
        }
        project_region(current, x, rects[f], eps, params, rng);
      }
      clamp_ball_into(current, x, radius);
      out.trace.push_back(step);
    }
  };

  try {
    for (std::size_t s = 0; s < schedule.stages.size(); ++s) {
      const double d = schedule.stages[s];
      std::optional<Checkpoint> best;
      run_stage(static_cast<int>(s), 0, d, best);
      for (int attempt = 1; attempt <= params.max_stage_retries && s > 0 &&
                            best->object_count <
                                out.stage_checkpoints.back().object_count;
           ++attempt) {
        current = out.stage_checkpoints.back().image;
        std::optional<Checkpoint> retry;
        run_stage(static_cast<int>(s), attempt, d, retry);
        if (retry->object_count > best->object_count) best = std::move(retry);
      }
      out.stage_checkpoints.push_back(std::move(*best));
    }
  } catch (const BudgetExhausted&) {
    out.budget_exhausted = true;
  }

  out.x_out = clamp_ball(current, x, eps);
  return out;
}

}  // namespace ghostpatch
