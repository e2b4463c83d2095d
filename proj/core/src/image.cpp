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

#include "ghostpatch/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "ghostpatch/errors.hpp"

namespace ghostpatch {
namespace {

void require_positive(int height, int width) {
  if (height <= 0 || width <= 0) {
    throw InvalidArgument("image dimensions must be positive, got " +
                          std::to_string(height) + "x" + std::to_string(width));
  }
}

std::size_t element_count(int height, int width) {
  return static_cast<std::size_t>(height) * width * kChannels;
}

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw DimensionMismatch(std::string(what) + ": " +
                            std::to_string(a.height()) + "x" +
                            std::to_string(a.width()) + " vs " +
                            std::to_string(b.height()) + "x" +
                            std::to_string(b.width()));
  }
}

}  // namespace

ImageTensor::ImageTensor(int height, int width)
    : ImageTensor(height, width, std::uint8_t{0}) {}

ImageTensor::ImageTensor(int height, int width, std::uint8_t fill)
    : height_(height), width_(width) {
  require_positive(height, width);
  data_.assign(element_count(height, width), fill);
}

ImageTensor::ImageTensor(int height, int width, std::vector<std::uint8_t> data)
    : height_(height), width_(width), data_(std::move(data)) {
  require_positive(height, width);
  if (data_.size() != element_count(height, width)) {
    throw InvalidArgument("pixel buffer size does not match dimensions");
  }
}

ImageTensor ImageTensor::filled(int height, int width,
                                std::array<std::uint8_t, 3> rgb) {
  ImageTensor img(height, width);
  auto px = img.data();
  for (std::size_t i = 0; i < px.size(); i += kChannels) {
    px[i] = rgb[0];
    px[i + 1] = rgb[1];
    px[i + 2] = rgb[2];
  }
  return img;
}

Perturbation::Perturbation(int height, int width)
    : height_(height), width_(width) {
  require_positive(height, width);
  data_.assign(element_count(height, width), 0);
}

Perturbation::Perturbation(int height, int width,
                           std::vector<std::int16_t> data)
    : height_(height), width_(width), data_(std::move(data)) {
  require_positive(height, width);
  if (data_.size() != element_count(height, width)) {
    throw InvalidArgument("perturbation buffer size does not match dimensions");
  }
  for (auto v : data_) {
    if (v < -255 || v > 255) {
      throw InvalidArgument("perturbation value outside [-255, 255]");
    }
  }
}

Perturbation Perturbation::between(const ImageTensor& adv,
                                   const ImageTensor& base) {
  require_same_shape(adv, base, "Perturbation::between");
  Perturbation p(adv.height(), adv.width());
  auto a = adv.data();
  auto b = base.data();
  auto out = p.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::int16_t>(int{a[i]} - int{b[i]});
  }
  return p;
}

ImageTensor Perturbation::apply_to(const ImageTensor& base) const {
  require_same_shape(*this, base, "Perturbation::apply_to");
  ImageTensor out = base;
  auto px = out.data();
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = clamp_u8(static_cast<long long>(px[i]) + data_[i]);
  }
  return out;
}

PixelMask::PixelMask(int height, int width, bool fill)
    : height_(height), width_(width) {
  require_positive(height, width);
  data_.assign(element_count(height, width), fill ? 1 : 0);
}

std::size_t PixelMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), 1));
}

int linf_distance(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "linf_distance");
  const std::uint8_t* pa = a.data().data();
  const std::uint8_t* pb = b.data().data();
  const std::size_t n = a.size();
  std::uint8_t best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t d = pa[i] > pb[i] ? static_cast<std::uint8_t>(pa[i] - pb[i])
                                         : static_cast<std::uint8_t>(pb[i] - pa[i]);
    best = d > best ? d : best;
  }
  return best;
}

int linf_norm(const Perturbation& p) noexcept {
  int best = 0;
  for (auto v : p.data()) best = std::max(best, std::abs(int{v}));
  return best;
}

ImageTensor clamp_ball(const ImageTensor& adv, const ImageTensor& orig,
                       int radius) {
  require_same_shape(adv, orig, "clamp_ball");
  if (radius < 0) throw InvalidArgument("clamp_ball: negative radius");
  ImageTensor out = adv;
  clamp_ball_into(out, orig, radius);
  return out;
}

void clamp_ball_into(ImageTensor& adv, const ImageTensor& orig, int radius) {
  require_same_shape(adv, orig, "clamp_ball");
  if (radius < 0) throw InvalidArgument("clamp_ball: negative radius");
  std::uint8_t* po = adv.data().data();
  const std::uint8_t* pr = orig.data().data();
  const std::size_t n = adv.size();
  if (radius >= 255) return;
  const auto r = static_cast<std::uint8_t>(radius);
  // Saturating byte arithmetic keeps the loop vectorizable.
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t v = pr[i];
    const std::uint8_t lo = v > r ? static_cast<std::uint8_t>(v - r) : 0;
    const std::uint8_t hi = v < 255 - r ? static_cast<std::uint8_t>(v + r) : 255;
    std::uint8_t p = po[i];
    p = p < lo ? lo : p;
    p = p > hi ? hi : p;
    po[i] = p;
  }
}

ImageTensor paste_patch(const ImageTensor& img, const ImageTensor& patch,
                        const RegionRect& region) {
  ImageTensor out = img;
  paste_into(out, patch, region);
  return out;
}

void paste_into(ImageTensor& img, const ImageTensor& patch,
                const RegionRect& region) {
  if (!region.fits_within(img.width(), img.height())) {
    throw InvalidArgument("paste_patch: region out of bounds");
  }
  if (patch.width() != region.width() || patch.height() != region.height()) {
    throw DimensionMismatch("paste_patch: patch does not match region size");
  }
  auto dst = img.data();
  auto src = patch.data();
  const std::size_t row_bytes =
      static_cast<std::size_t>(region.width()) * kChannels;
  for (int y = 0; y < region.height(); ++y) {
    const std::size_t d =
        (static_cast<std::size_t>(region.y0 + y) * img.width() + region.x0) *
        kChannels;
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(y * row_bytes),
                row_bytes, dst.begin() + static_cast<std::ptrdiff_t>(d));
  }
}

ImageTensor crop(const ImageTensor& img, const RegionRect& region) {
  if (!region.fits_within(img.width(), img.height())) {
    throw InvalidArgument("crop: region out of bounds");
  }
  ImageTensor out(region.height(), region.width());
  auto dst = out.data();
  auto src = img.data();
  const std::size_t row_bytes =
      static_cast<std::size_t>(region.width()) * kChannels;
  for (int y = 0; y < region.height(); ++y) {
    const std::size_t s =
        (static_cast<std::size_t>(region.y0 + y) * img.width() + region.x0) *
        kChannels;
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(s), row_bytes,
                dst.begin() + static_cast<std::ptrdiff_t>(y * row_bytes));
  }
  return out;
}

ImageTensor resize_bilinear(const ImageTensor& img, int height, int width) {
  if (height == img.height() && width == img.width()) return img;
  ImageTensor out(height, width);
  const double sy = static_cast<double>(img.height()) / height;
  const double sx = static_cast<double>(img.width()) / width;

  struct Tap {
    int lo, hi;
    double frac;
  };
  auto taps = [](int n_out, int n_in, double scale) {
    std::vector<Tap> t(static_cast<std::size_t>(n_out));
    for (int i = 0; i < n_out; ++i) {
      double src = (i + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(n_in - 1));
      const int lo = static_cast<int>(std::floor(src));
      const int hi = std::min(lo + 1, n_in - 1);
      t[static_cast<std::size_t>(i)] = {lo, hi, src - lo};
    }
    return t;
  };
  const auto ty = taps(height, img.height(), sy);
  const auto tx = taps(width, img.width(), sx);

  // Horizontal pass per source row, then a vertical blend. Same arithmetic
  // as blending four taps directly, so results are unchanged bit for bit.
  const std::size_t row_len = static_cast<std::size_t>(width) * kChannels;
  const std::size_t src_stride = static_cast<std::size_t>(img.width()) * kChannels;
  const std::uint8_t* src = img.data().data();
  auto horizontal = [&](int sy_row, std::vector<double>& buf) {
    const std::uint8_t* row = src + static_cast<std::size_t>(sy_row) * src_stride;
    for (int x = 0; x < width; ++x) {
      const Tap& b = tx[static_cast<std::size_t>(x)];
      const std::uint8_t* l = row + static_cast<std::size_t>(b.lo) * kChannels;
      const std::uint8_t* h = row + static_cast<std::size_t>(b.hi) * kChannels;
      for (int c = 0; c < kChannels; ++c) {
        buf[static_cast<std::size_t>(x) * kChannels + c] =
            l[c] * (1.0 - b.frac) + h[c] * b.frac;
      }
    }
  };
  std::vector<double> top(row_len), bot(row_len);
  int top_row = -1, bot_row = -1;
  std::uint8_t* dst = out.data().data();
  for (int y = 0; y < height; ++y) {
    const Tap& a = ty[static_cast<std::size_t>(y)];
    if (a.lo != top_row) {
      if (a.lo == bot_row) {
        std::swap(top, bot);
        std::swap(top_row, bot_row);
      } else {
        horizontal(a.lo, top);
        top_row = a.lo;
      }
    }
    if (a.hi != bot_row) {
      horizontal(a.hi, bot);
      bot_row = a.hi;
    }
    std::uint8_t* o = dst + static_cast<std::size_t>(y) * row_len;
    for (std::size_t k = 0; k < row_len; ++k) {
      o[k] = clamp_u8(round_half_away(top[k] * (1.0 - a.frac) + bot[k] * a.frac));
    }
  }
  return out;
}

ColorStats color_stats(const ImageTensor& img, const RegionRect& region) {
  if (region.empty()) throw InvalidArgument("color_stats: empty region");
  if (!region.fits_within(img.width(), img.height())) {
    throw InvalidArgument("color_stats: region out of bounds");
  }
  // Integer sums are exact, so the moments are exact up to the final division.
  std::array<std::uint64_t, 3> sum{};
  std::array<std::uint64_t, 3> sum_sq{};
  for (int y = region.y0; y < region.y1; ++y) {
    for (int x = region.x0; x < region.x1; ++x) {
      for (int c = 0; c < kChannels; ++c) {
        const std::uint64_t v = img.at(y, x, c);
        sum[c] += v;
        sum_sq[c] += v * v;
      }
    }
  }
  const auto n = static_cast<std::uint64_t>(region.area());
  ColorStats s;
  for (int c = 0; c < kChannels; ++c) {
    s.mean[c] = static_cast<double>(sum[c]) / static_cast<double>(n);
    // n * sum_sq - sum^2 is n^2 * variance; stays within 64 bits for any
    // image below ~2^24 pixels in the region.
    const std::uint64_t num = n * sum_sq[c] - sum[c] * sum[c];
    s.stddev[c] = std::sqrt(static_cast<double>(num)) / static_cast<double>(n);
  }
  return s;
}

double color_mean_distance(const ColorStats& a, const ColorStats& b) noexcept {
  double d = 0.0;
  for (int c = 0; c < kChannels; ++c) d += std::abs(a.mean[c] - b.mean[c]);
  return d / kChannels;
}

}  // namespace ghostpatch
