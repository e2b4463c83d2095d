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

// Pixel-level primitives shared by every stage of the attack: RGB images,
// signed perturbations, channel masks, region rectangles and the handful of
// pure operations defined over them.
//
// All intensities live in the integer domain [0, 255]. Perturbations are
// integer deltas in [-255, 255]. Data is stored row-major, interleaved RGB
// (index = (y * width + x) * 3 + c).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace ghostpatch {

inline constexpr int kChannels = 3;

// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct RegionRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const noexcept { return x1 - x0; }
  int height() const noexcept { return y1 - y0; }
  long long area() const noexcept {
    return static_cast<long long>(width()) * height();
  }
  bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }
  bool contains(int x, int y) const noexcept {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }
  bool fits_within(int img_width, int img_height) const noexcept {
    return 0 <= x0 && x0 < x1 && x1 <= img_width && 0 <= y0 && y0 < y1 &&
           y1 <= img_height;
  }

  friend bool operator==(const RegionRect&, const RegionRect&) = default;
};

class ImageTensor {
 public:
  ImageTensor() = default;
  // Zero-filled image. Throws InvalidArgument unless both dims are positive.
  ImageTensor(int height, int width);
  ImageTensor(int height, int width, std::uint8_t fill);
  ImageTensor(int height, int width, std::vector<std::uint8_t> data);

  static ImageTensor filled(int height, int width,
                            std::array<std::uint8_t, 3> rgb);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  RegionRect bounds() const noexcept { return {0, 0, width_, height_}; }

  std::uint8_t at(int y, int x, int c) const {
    return data_[index(y, x, c)];
  }
  std::uint8_t& at(int y, int x, int c) { return data_[index(y, x, c)]; }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> data_;
};

// Signed per-channel delta between two images of the same shape.
class Perturbation {
 public:
  Perturbation() = default;
  Perturbation(int height, int width);
  Perturbation(int height, int width, std::vector<std::int16_t> data);

  // adv - base, channel-wise.
  static Perturbation between(const ImageTensor& adv, const ImageTensor& base);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::int16_t at(int y, int x, int c) const {
    return data_[index(y, x, c)];
  }
  std::int16_t& at(int y, int x, int c) { return data_[index(y, x, c)]; }

  std::span<const std::int16_t> data() const noexcept { return data_; }
  std::span<std::int16_t> data() noexcept { return data_; }

  // base + delta, clamped into [0, 255].
  ImageTensor apply_to(const ImageTensor& base) const;

  friend bool operator==(const Perturbation&, const Perturbation&) = default;

 private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::int16_t> data_;
};

// Per-pixel-per-channel boolean mask. Stored as bytes (0/1).
class PixelMask {
 public:
  PixelMask() = default;
  PixelMask(int height, int width, bool fill = false);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }

  bool at(int y, int x, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c] !=
           0;
  }
  void set(int y, int x, int c, bool v) {
    data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c] =
        v ? 1 : 0;
  }
  bool flat(std::size_t i) const { return data_[i] != 0; }
  void set_flat(std::size_t i, bool v) { data_[i] = v ? 1 : 0; }

  std::size_t count() const noexcept;

  friend bool operator==(const PixelMask&, const PixelMask&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> data_;
};

struct ColorStats {
  std::array<double, 3> mean{};
  std::array<double, 3> stddev{};

  friend bool operator==(const ColorStats&, const ColorStats&) = default;
};

// Rounds half away from zero. Every pixel computation goes through this so
// results are bit-stable across platforms and rounding modes.
inline long long round_half_away(double v) noexcept {
  return static_cast<long long>(v < 0.0 ? -std::floor(-v + 0.5)
                                        : std::floor(v + 0.5));
}

inline std::uint8_t clamp_u8(long long v) noexcept {
  return static_cast<std::uint8_t>(std::clamp<long long>(v, 0, 255));
}

// max |a - b| over every pixel-channel position.
int linf_distance(const ImageTensor& a, const ImageTensor& b);
int linf_norm(const Perturbation& p) noexcept;

// Clamps adv channel-wise into [orig - radius, orig + radius] ∩ [0, 255].
ImageTensor clamp_ball(const ImageTensor& adv, const ImageTensor& orig,
                       int radius);
void clamp_ball_into(ImageTensor& adv, const ImageTensor& orig, int radius);

// Copy of img with region overwritten by patch. The patch must already have
// the region's dimensions.
ImageTensor paste_patch(const ImageTensor& img, const ImageTensor& patch,
                        const RegionRect& region);

// In-place variant of paste_patch.
void paste_into(ImageTensor& img, const ImageTensor& patch,
                const RegionRect& region);

ImageTensor crop(const ImageTensor& img, const RegionRect& region);

// Bilinear resize with half-pixel centers (align_corners = false): output
// pixel (x, y) samples source coordinate ((x + 0.5) * sx - 0.5, ...), edges
// replicate. Same-size resize is an exact copy.
ImageTensor resize_bilinear(const ImageTensor& img, int height, int width);

// Per-channel mean and population standard deviation over region.
ColorStats color_stats(const ImageTensor& img, const RegionRect& region);

// Mean over channels of |a.mean[c] - b.mean[c]|.
double color_mean_distance(const ColorStats& a, const ColorStats& b) noexcept;

}  // namespace ghostpatch
