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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <string>

#include "ghostpatch/errors.hpp"
#include "ghostpatch/harness.hpp"

namespace ghostpatch {
namespace {

using Rgb = std::array<std::uint8_t, 3>;

constexpr Rgb kWhite{255, 255, 255};
constexpr Rgb kAxis{40, 40, 40};
constexpr Rgb kGridLine{220, 220, 220};
constexpr Rgb kSeries{200, 60, 40};

// 3x5 digit glyphs, one row per 3-bit group, top row first.
constexpr std::array<std::array<std::uint8_t, 5>, 10> kDigits{{
    {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7},
    {5, 5, 7, 1, 1}, {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1},
    {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7},
}};

void put(ImageTensor& img, int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
  for (int k = 0; k < kChannels; ++k) img.at(y, x, k) = c[static_cast<std::size_t>(k)];
}

void line(ImageTensor& img, int x0, int y0, int x1, int y1, Rgb c) {
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    put(img, x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

// Digits at 2x scale, horizontally centered on cx, top at y.
void text(ImageTensor& img, const std::string& s, int cx, int y, Rgb c) {
  constexpr int kScale = 2;
  const int w = static_cast<int>(s.size()) * 4 * kScale - kScale;
  int x = cx - w / 2;
  for (char ch : s) {
    if (ch >= '0' && ch <= '9') {
      const auto& g = kDigits[static_cast<std::size_t>(ch - '0')];
      for (int r = 0; r < 5; ++r) {
        for (int col = 0; col < 3; ++col) {
          if (!((g[static_cast<std::size_t>(r)] >> (2 - col)) & 1)) continue;
          for (int a = 0; a < kScale; ++a) {
            for (int b = 0; b < kScale; ++b) {
              put(img, x + col * kScale + b, y + r * kScale + a, c);
            }
          }
        }
      }
    }
    x += 4 * kScale;
  }
}

}  // namespace

ImageTensor plot_asr(const EvalReport& report, int height, int width) {
  if (height < 80 || width < 120) throw InvalidArgument("plot_asr: canvas too small");
  ImageTensor img = ImageTensor::filled(height, width, kWhite);
  const int left = 48;
  const int right = width - 16;
  const int top = 16;
  const int bottom = height - 32;

  // y axis: ASR in percent, gridline every 25
  for (int pct = 0; pct <= 100; pct += 25) {
    const int y = bottom - (bottom - top) * pct / 100;
    line(img, left, y, right, y, pct == 0 ? kAxis : kGridLine);
    text(img, std::to_string(pct), left - 20, y - 5, kAxis);
  }
  line(img, left, top, left, bottom, kAxis);

  const auto& pts = report.asr;
  if (pts.empty()) return img;
  auto px = [&](std::size_t k) {
    if (pts.size() == 1) return (left + right) / 2;
    return left + 16 +
           static_cast<int>((right - left - 32) * k / (pts.size() - 1));
  };
  auto py = [&](double asr) {
    return bottom - static_cast<int>(std::lround((bottom - top) * std::clamp(asr, 0.0, 1.0)));
  };
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const int x = px(k);
    const int y = py(pts[k].asr);
    line(img, x, bottom, x, bottom + 4, kAxis);
    text(img, std::to_string(pts[k].epsilon), x, bottom + 10, kAxis);
    if (k > 0) line(img, px(k - 1), py(pts[k - 1].asr), x, y, kSeries);
    for (int a = -2; a <= 2; ++a) {
      for (int b = -2; b <= 2; ++b) put(img, x + b, y + a, kSeries);
    }
  }
  return img;
}

}  // namespace ghostpatch
