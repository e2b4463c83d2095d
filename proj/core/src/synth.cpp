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

#include "ghostpatch/synth.hpp"

#include <algorithm>
#include <cmath>

#include "ghostpatch/errors.hpp"
#include "ghostpatch/rng.hpp"

namespace ghostpatch {
namespace {

// Smooth value noise: random lattice values every `cell` pixels, bilinearly
// interpolated. Values in [-1, 1].
std::vector<float> value_noise(Rng& rng, int height, int width, int cell) {
  const int gh = height / cell + 2;
  const int gw = width / cell + 2;
  std::vector<float> lattice(static_cast<std::size_t>(gh) * gw);
  for (auto& v : lattice) v = static_cast<float>(rng.uniform(-1.0, 1.0));

  std::vector<float> out(static_cast<std::size_t>(height) * width);
  for (int y = 0; y < height; ++y) {
    const double fy = static_cast<double>(y) / cell;
    const int y0 = static_cast<int>(fy);
    const double ty = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = static_cast<double>(x) / cell;
      const int x0 = static_cast<int>(fx);
      const double tx = fx - x0;
      auto at = [&](int yy, int xx) {
        return lattice[static_cast<std::size_t>(yy) * gw + xx];
      };
      const double top = at(y0, x0) * (1 - tx) + at(y0, x0 + 1) * tx;
      const double bot = at(y0 + 1, x0) * (1 - tx) + at(y0 + 1, x0 + 1) * tx;
      out[static_cast<std::size_t>(y) * width + x] =
          static_cast<float>(top * (1 - ty) + bot * ty);
    }
  }
  return out;
}

std::array<double, 3> random_color(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

ImageTensor textured_background(Rng& rng, int height, int width,
                                double texture, double grain) {
  // Corner colors of a bilinear gradient.
  const auto c00 = random_color(rng, 70, 190);
  const auto c01 = random_color(rng, 70, 190);
  const auto c10 = random_color(rng, 70, 190);
  const auto c11 = random_color(rng, 70, 190);

  constexpr int kOctaves = 5;
  std::vector<double> tex_sum(static_cast<std::size_t>(height) * width, 0.0);
  for (int cell : {4, 8, 16, 32, 64}) {
    const auto octave = value_noise(rng, height, width, cell);
    for (std::size_t i = 0; i < tex_sum.size(); ++i) tex_sum[i] += octave[i];
  }
  const auto tint = random_color(rng, 0.6, 1.0);

  ImageTensor img(height, width);
  for (int y = 0; y < height; ++y) {
    const double v = static_cast<double>(y) / std::max(1, height - 1);
    for (int x = 0; x < width; ++x) {
      const double u = static_cast<double>(x) / std::max(1, width - 1);
      const double tex = tex_sum[static_cast<std::size_t>(y) * width + x] *
                         (texture / std::sqrt(static_cast<double>(kOctaves)));
      for (int c = 0; c < kChannels; ++c) {
        const double base = c00[c] * (1 - u) * (1 - v) + c01[c] * u * (1 - v) +
                            c10[c] * (1 - u) * v + c11[c] * u * v;
        const double noise = grain * rng.uniform(-1.0, 1.0);
        img.at(y, x, c) = clamp_u8(round_half_away(base + tint[c] * tex + noise));
      }
    }
  }
  return img;
}

}  // namespace

ImageTensor synthetic_target(std::uint64_t seed, int height, int width,
                             const TargetStyle& style) {
  Rng rng(splitmix64(seed ^ 0x7a26e7ULL));
  const double texture = rng.uniform(style.texture_min, style.texture_max);
  return textured_background(rng, height, width, texture, style.grain);
}

Collage synthetic_collage(std::uint64_t seed,
                          const std::vector<DetectorTemplate>& templates,
                          int height, int width, int count,
                          const std::vector<int>& sizes) {
  if (templates.empty() || sizes.empty()) {
    throw InvalidArgument("synthetic_collage needs templates and sizes");
  }
  Rng rng(splitmix64(seed ^ 0xc011a9eULL));
  Collage out;
  out.image = textured_background(rng, height, width, 2.0, 1.0);

  constexpr int kAlign = 8;
  constexpr int kGap = 16;
  std::vector<RegionRect> taken;
  for (int placed = 0, attempts = 0; placed < count && attempts < 200 * count;
       ++attempts) {
    const int size = sizes[rng.below(sizes.size())];
    if (size > width || size > height) continue;
    const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(
                      (width - size) / kAlign + 1))) * kAlign;
    const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(
                      (height - size) / kAlign + 1))) * kAlign;
    const RegionRect box{x, y, x + size, y + size};
    const RegionRect padded{x - kGap, y - kGap, x + size + kGap, y + size + kGap};
    const bool clash = std::any_of(taken.begin(), taken.end(), [&](const RegionRect& t) {
      return padded.x0 < t.x1 && t.x0 < padded.x1 && padded.y0 < t.y1 &&
             t.y0 < padded.y1;
    });
    if (clash) continue;
    const auto& tpl = templates[rng.below(templates.size())];
    paste_into(out.image, resize_bilinear(tpl.pattern, size, size), box);
    out.planted.push_back({box, tpl.label, 1.0});
    taken.push_back(box);
    ++placed;
  }
  return out;
}

}  // namespace ghostpatch
