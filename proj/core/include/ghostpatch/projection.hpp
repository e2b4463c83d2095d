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

// Color manipulation: shrinks an over-budget perturbation into the epsilon
// ball while keeping the ghost objects it creates. Each application splits
// the perturbation into eligible positions (|delta| <= eps), which get an
// affine rescale, and ineligible ones, which get scaled dropout:
//
//   out = M_e * F_e(X) + (1 - M_e) * F_i(X)
//   F_i(X) = s_i * M_r * X        F_e(X) = s_e * X + b_e
//
// M_r keeps each active (nonzero) position with probability rho.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ghostpatch/image.hpp"
#include "ghostpatch/oracle.hpp"
#include "ghostpatch/patchdb.hpp"
#include "ghostpatch/rng.hpp"
#include "ghostpatch/selection.hpp"

namespace ghostpatch {

enum class OffsetPolicy {
  kRecenter,  // b_e = -s_e * mean of the eligible perturbation, per cell
  kFixed,     // b_e = fixed_offset
};

struct ProjectionParams {
  double ineligible_scale = 0.0;  // s_i
  double dropout_density = 0.5;   // rho
  double eligible_scale = 0.9;    // s_e
  OffsetPolicy offset_policy = OffsetPolicy::kRecenter;
  double fixed_offset = 0.0;
  int epsilon = 32;
  int iterations = 40;  // k_a, per tolerance stage
  int max_stage_retries = 1;

  void validate() const;
};

struct ToleranceSchedule {
  std::vector<double> stages = {2.0, 1.5, 1.25, 1.0};

  // Strictly decreasing, all >= 1, last exactly 1.
  void validate() const;
};

struct Checkpoint {
  ImageTensor image;
  int object_count = 0;
  double tolerance = 1.0;
  std::uint64_t queries_at = 0;
};

// True exactly where |X_p| <= eps.
PixelMask eligible_mask(const Perturbation& xp, int eps);

// round(s_i * M_r * X_p).
Perturbation f_i(const Perturbation& xp, double s_i, const PixelMask& keep);

// clamp(round(s_e * X_p + b_e), -255, 255).
Perturbation f_e(const Perturbation& xp, double s_e, double b_e);

// Bernoulli(rho) over nonzero positions; zero positions are never kept.
PixelMask sample_dropout_mask(const Perturbation& xp, double rho, Rng& rng);

// Offset that moves the eligible positions to zero mean after scaling.
// 0 when nothing is eligible.
double recenter_offset(const Perturbation& xp, const PixelMask& eligible,
                       double s_e);

// The composition with all randomness and offsets already fixed.
Perturbation compose_projection(const Perturbation& xp,
                                const PixelMask& eligible,
                                const PixelMask& keep, double s_i, double s_e,
                                double b_e);

// One projection of a whole perturbation (one cell, in the attack loop).
Perturbation project(const Perturbation& xp, int eps,
                     const ProjectionParams& params, Rng& rng);

// In place: adv[region] = clamp(orig[region] + project(adv - orig)). Draws
// the same random numbers in the same order as project on the cropped cell.
void project_region(ImageTensor& adv, const ImageTensor& orig,
                    const RegionRect& region, int eps,
                    const ProjectionParams& params, Rng& rng);

struct ManipulationStep {
  std::uint64_t query_index = 0;
  double tolerance = 1.0;
  int stage = 0;
  int attempt = 0;
  int iteration = 0;
  int object_count = 0;
  int linf = 0;  // queried image vs. original
  int cells_regenerated = 0;
};

struct ManipulationOutcome {
  ImageTensor x_out;  // inside the final (d = 1) ball
  // Highest-count iterate queried at d = 1, if any was queried.
  std::optional<Checkpoint> best;
  std::vector<Checkpoint> stage_checkpoints;
  std::vector<ManipulationStep> trace;
  bool budget_exhausted = false;
};

// Iterative color manipulation starting from x_adv. For each tolerance d the
// image is clamped into the eps*d ball, then for k_a iterations: query the
// current image, refill cells that hold no objects, project the perturbation
// of every other cell, and clamp back into the eps*d ball. A stage whose best
// count falls below the previous stage's is retried from the previous
// checkpoint image, at most max_stage_retries times. Queries use phase
// "projection". Budget exhaustion ends the run early with the output still
// clamped into the eps ball.
ManipulationOutcome color_manipulate(const ImageTensor& x,
                                     const ImageTensor& x_adv,
                                     const ToleranceSchedule& schedule,
                                     const ProjectionParams& params,
                                     const SelectionConfig& cfg,
                                     const PatchIndex& db, Oracle& oracle,
                                     QueryBudget& budget, Rng& rng);

}  // namespace ghostpatch
