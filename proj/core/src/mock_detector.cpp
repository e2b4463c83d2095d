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

#include "ghostpatch/mock_detector.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "ghostpatch/errors.hpp"
#include "ghostpatch/rng.hpp"

namespace ghostpatch {
namespace {

constexpr int kWindowValues = kTemplateSize * kTemplateSize * kChannels;
constexpr int kBlocks = 4;  // template is a 4x4 grid of 2x2-pixel blocks

constexpr int kBlock = kTemplateSize / kBlocks;
constexpr int kBlockValues = kBlocks * kBlocks * kChannels;

struct PreparedTemplate {
  // Zero-mean, unit-norm pattern, one weight per (block, channel). Every
  // pixel of a block carries the same weight, so a window's dot product is
  // the weighted sum of its 2x2 block sums.
  std::array<float, kBlockValues> weights{};
};

PreparedTemplate prepare(const ImageTensor& pattern) {
  PreparedTemplate t;
  const auto px = pattern.data();
  double mean = 0.0;
  for (auto v : px) mean += v;
  mean /= static_cast<double>(px.size());
  double norm = 0.0;
  for (auto v : px) norm += (v - mean) * (v - mean);
  norm = std::sqrt(norm);
  if (norm == 0.0) throw InvalidArgument("detector template has no contrast");
  for (int by = 0; by < kBlocks; ++by) {
    for (int bx = 0; bx < kBlocks; ++bx) {
      for (int c = 0; c < kChannels; ++c) {
        t.weights[static_cast<std::size_t>((by * kBlocks + bx) * kChannels + c)] =
            static_cast<float>((pattern.at(by * kBlock, bx * kBlock, c) - mean) / norm);
      }
    }
  }
  return t;
}

// Box-averaged level image stored as floats, plus integral images of the
// per-pixel channel sum and sum of squares.
struct Level {
  int factor = 1;
  int height = 0;
  int width = 0;
  std::vector<float> pixels;
  // blocks[(y * width + x) * 3 + c]: sum of the 2x2 pixels at (x, y).
  std::vector<float> blocks;
  std::vector<double> integral;
  std::vector<double> integral_sq;

  double box(const std::vector<double>& ii, int x, int y, int w, int h) const {
    const auto at = [&](int yy, int xx) {
      return ii[static_cast<std::size_t>(yy) * (width + 1) + xx];
    };
    return at(y + h, x + w) - at(y, x + w) - at(y + h, x) + at(y, x);
  }
};

// Averages k x k groups of an RGB buffer. With power-of-two factors every
// level value is a dyadic fraction held exactly in a float, so chaining
// levels (2 -> 4 -> 8) gives the same values as averaging the image directly.
template <typename T, typename Acc>
std::vector<float> downsample(const T* src, int src_w, int k, int out_h,
                              int out_w) {
  std::vector<float> out(static_cast<std::size_t>(out_h) * out_w * kChannels);
  std::vector<Acc> acc(static_cast<std::size_t>(out_w) * kChannels);
  const float inv = 1.0f / static_cast<float>(k * k);
  const std::size_t src_row = static_cast<std::size_t>(src_w) * kChannels;
  const int span = k * kChannels;
  for (int y = 0; y < out_h; ++y) {
    std::fill(acc.begin(), acc.end(), Acc{0});
    for (int dy = 0; dy < k; ++dy) {
      const T* row = src + (static_cast<std::size_t>(y) * k + dy) * src_row;
      for (int x = 0; x < out_w; ++x) {
        const T* p = row + static_cast<std::size_t>(x) * span;
        Acc r = 0, g = 0, b = 0;
        for (int i = 0; i < span; i += kChannels) {
          r += p[i];
          g += p[i + 1];
          b += p[i + 2];
        }
        acc[x * kChannels] += r;
        acc[x * kChannels + 1] += g;
        acc[x * kChannels + 2] += b;
      }
    }
    float* dst = out.data() + static_cast<std::size_t>(y) * out_w * kChannels;
    for (int i = 0; i < out_w * kChannels; ++i) {
      dst[i] = static_cast<float>(acc[static_cast<std::size_t>(i)]) * inv;
    }
  }
  return out;
}

// `finer` (may be null) is an already built level whose factor divides
// `factor`.
Level build_level(const ImageTensor& img, const Level* finer, int factor) {
  Level lv;
  lv.factor = factor;
  lv.height = img.height() / factor;
  lv.width = img.width() / factor;
  if (finer != nullptr) {
    lv.pixels = downsample<float, float>(finer->pixels.data(), finer->width,
                           factor / finer->factor, lv.height, lv.width);
  } else {
    lv.pixels = downsample<std::uint8_t, int>(img.data().data(), img.width(), factor,
                           lv.height, lv.width);
  }

  lv.blocks.assign(lv.pixels.size(), 0.0f);
  const std::size_t row = static_cast<std::size_t>(lv.width) * kChannels;
  for (int y = 0; y + 1 < lv.height; ++y) {
    for (int x = 0; x + 1 < lv.width; ++x) {
      for (int c = 0; c < kChannels; ++c) {
        const std::size_t i = (static_cast<std::size_t>(y) * lv.width + x) * kChannels + c;
        lv.blocks[i] = lv.pixels[i] + lv.pixels[i + kChannels] + lv.pixels[i + row] +
                       lv.pixels[i + row + kChannels];
      }
    }
  }

  const std::size_t stride = static_cast<std::size_t>(lv.width) + 1;
  lv.integral.assign(stride * (lv.height + 1), 0.0);
  lv.integral_sq.assign(stride * (lv.height + 1), 0.0);
  for (int y = 0; y < lv.height; ++y) {
    double row = 0.0;
    double row_sq = 0.0;
    for (int x = 0; x < lv.width; ++x) {
      for (int c = 0; c < kChannels; ++c) {
        const double v =
            lv.pixels[(static_cast<std::size_t>(y) * lv.width + x) * kChannels + c];
        row += v;
        row_sq += v * v;
      }
      lv.integral[(y + 1) * stride + x + 1] = lv.integral[y * stride + x + 1] + row;
      lv.integral_sq[(y + 1) * stride + x + 1] =
          lv.integral_sq[y * stride + x + 1] + row_sq;
    }
  }
  return lv;
}

// Template weights transposed to [value][template] with the template axis
// padded to a multiple of 8, so one window is scored against every template
// in a single vectorizable pass.
struct TemplateBank {
  static constexpr int kLanes = 8;
  int count = 0;
  int padded = 0;
  std::vector<float> weights;

  explicit TemplateBank(const std::vector<PreparedTemplate>& templates)
      : count(static_cast<int>(templates.size())),
        padded((count + kLanes - 1) / kLanes * kLanes),
        weights(static_cast<std::size_t>(kBlockValues) * padded, 0.0f) {
    for (int t = 0; t < count; ++t) {
      for (int i = 0; i < kBlockValues; ++i) {
        weights[static_cast<std::size_t>(i) * padded + t] =
            templates[static_cast<std::size_t>(t)].weights[static_cast<std::size_t>(i)];
      }
    }
  }
};

struct Candidate {
  float ncc = -1.0f;
  int label = -1;
};

void scan_level(const Level& lv, const TemplateBank& bank,
                const MockDetectorConfig& cfg, int box_size,
                const std::vector<DetectorTemplate>& src,
                std::vector<Detection>& out) {
  if (lv.height < kTemplateSize || lv.width < kTemplateSize) return;
  const int step = std::max(1, cfg.stride / lv.factor);
  const int ny = (lv.height - kTemplateSize) / step + 1;
  const int nx = (lv.width - kTemplateSize) / step + 1;
  const double n = kWindowValues;
  const double min_var_sum = cfg.min_contrast * cfg.min_contrast * n;
  const std::size_t row_stride = static_cast<std::size_t>(lv.width) * kChannels;

  std::vector<Candidate> grid(static_cast<std::size_t>(ny) * nx);
  std::vector<float> dots(static_cast<std::size_t>(bank.padded));
  for (int gy = 0; gy < ny; ++gy) {
    for (int gx = 0; gx < nx; ++gx) {
      const int x = gx * step;
      const int y = gy * step;
      const double sum = lv.box(lv.integral, x, y, kTemplateSize, kTemplateSize);
      const double sum_sq =
          lv.box(lv.integral_sq, x, y, kTemplateSize, kTemplateSize);
      const double var_sum = sum_sq - sum * sum / n;
      if (var_sum < min_var_sum || var_sum <= 0.0) continue;

      // Gather the 16 block sums of this window.
      std::array<float, kBlockValues> window;
      for (int by = 0; by < kBlocks; ++by) {
        const float* src = lv.blocks.data() + (y + by * kBlock) * row_stride +
                           static_cast<std::size_t>(x) * kChannels;
        for (int bx = 0; bx < kBlocks; ++bx) {
          for (int c = 0; c < kChannels; ++c) {
            window[static_cast<std::size_t>((by * kBlocks + bx) * kChannels + c)] =
                src[bx * kBlock * kChannels + c];
          }
        }
      }
      // Template weights are zero-mean, so the window mean drops out of the
      // numerator.
      for (int t0 = 0; t0 < bank.padded; t0 += TemplateBank::kLanes) {
        float acc[TemplateBank::kLanes] = {};
        for (int i = 0; i < kBlockValues; ++i) {
          const float v = window[static_cast<std::size_t>(i)];
          const float* w =
              bank.weights.data() + static_cast<std::size_t>(i) * bank.padded + t0;
          for (int t = 0; t < TemplateBank::kLanes; ++t) acc[t] += v * w[t];
        }
        std::copy_n(acc, TemplateBank::kLanes, dots.begin() + t0);
      }
      Candidate best;
      const double inv_norm = 1.0 / std::sqrt(var_sum);
      for (int t = 0; t < bank.count; ++t) {
        const auto ncc = static_cast<float>(dots[static_cast<std::size_t>(t)] * inv_norm);
        if (ncc > best.ncc) best = {ncc, t};
      }
      grid[static_cast<std::size_t>(gy) * nx + gx] = best;
    }
  }

  const auto threshold = static_cast<float>(cfg.correlation_threshold);
  for (int gy = 0; gy < ny; ++gy) {
    for (int gx = 0; gx < nx; ++gx) {
      const Candidate& c = grid[static_cast<std::size_t>(gy) * nx + gx];
      if (c.label < 0 || c.ncc < threshold) continue;
      bool is_peak = true;
      for (int dy = -1; dy <= 1 && is_peak; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = gy + dy;
          const int xx = gx + dx;
          if ((dy == 0 && dx == 0) || yy < 0 || xx < 0 || yy >= ny || xx >= nx) {
            continue;
          }
          if (grid[static_cast<std::size_t>(yy) * nx + xx].ncc > c.ncc) {
            is_peak = false;
            break;
          }
        }
      }
      if (!is_peak) continue;
      Detection d;
      d.box.x0 = gx * step * lv.factor;
      d.box.y0 = gy * step * lv.factor;
      d.box.x1 = d.box.x0 + box_size;
      d.box.y1 = d.box.y0 + box_size;
      d.label = src[static_cast<std::size_t>(c.label)].label;
      d.score = std::min(1.0, static_cast<double>(c.ncc));
      out.push_back(std::move(d));
    }
  }
}

}  // namespace

MockDetectorConfig MockDetectorConfig::defaults() {
  MockDetectorConfig cfg;
  cfg.templates = default_templates();
  return cfg;
}

void MockDetectorConfig::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(correlation_threshold) || !in_unit(score_threshold) ||
      !in_unit(nms_iou) || !in_unit(min_size_fraction)) {
    throw InvalidArgument("mock detector thresholds must lie in [0, 1]");
  }
  if (templates.empty()) throw InvalidArgument("mock detector has no templates");
  for (const auto& t : templates) {
    if (t.pattern.height() != kTemplateSize || t.pattern.width() != kTemplateSize) {
      throw InvalidArgument("detector templates must be 8x8");
    }
    for (int y = 0; y < kTemplateSize; ++y) {
      for (int x = 0; x < kTemplateSize; ++x) {
        for (int c = 0; c < kChannels; ++c) {
          if (t.pattern.at(y, x, c) !=
              t.pattern.at(y - y % kBlock, x - x % kBlock, c)) {
            throw InvalidArgument("detector templates must be constant on 2x2 blocks");
          }
        }
      }
    }
  }
  if (stride < 1) throw InvalidArgument("stride must be positive");
  if (box_sizes.empty()) throw InvalidArgument("no box sizes configured");
  for (int s : box_sizes) {
    if (s < kTemplateSize || s % kTemplateSize != 0) {
      throw InvalidArgument("box sizes must be positive multiples of 8");
    }
  }
  if (min_contrast < 0.0) throw InvalidArgument("min_contrast must be >= 0");
}

std::vector<DetectorTemplate> default_templates(std::uint64_t seed) {
  static const char* const kLabels[] = {"person", "car",   "dog",
                                        "bottle", "chair", "cup"};
  Rng rng(seed);
  std::vector<std::array<int, kBlocks * kBlocks>> layouts;
  std::vector<DetectorTemplate> out;

  auto correlation = [](const auto& a, const auto& b) {
    int agree = 0;
    for (std::size_t i = 0; i < a.size(); ++i) agree += (a[i] == b[i]) ? 1 : -1;
    return static_cast<double>(agree) / static_cast<double>(a.size());
  };

  while (out.size() < std::size(kLabels)) {
    // Balanced layout: exactly half the blocks are foreground.
    std::array<int, kBlocks * kBlocks> layout{};
    for (int i = 0; i < kBlocks * kBlocks / 2; ++i) layout[i] = 1;
    for (int i = kBlocks * kBlocks - 1; i > 0; --i) {
      std::swap(layout[i], layout[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    }
    const bool distinct = std::all_of(
        layouts.begin(), layouts.end(),
        [&](const auto& other) { return std::abs(correlation(layout, other)) <= 0.5; });
    if (!distinct) continue;

    std::array<std::uint8_t, 3> fg{};
    std::array<std::uint8_t, 3> bg{};
    auto lum = [](const std::array<std::uint8_t, 3>& c) {
      return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2];
    };
    do {
      for (int c = 0; c < 3; ++c) {
        fg[c] = static_cast<std::uint8_t>(rng.between(30, 225));
        bg[c] = static_cast<std::uint8_t>(rng.between(30, 225));
      }
    } while (std::abs(lum(fg) - lum(bg)) < 90.0);

    ImageTensor pattern(kTemplateSize, kTemplateSize);
    const int block = kTemplateSize / kBlocks;
    for (int y = 0; y < kTemplateSize; ++y) {
      for (int x = 0; x < kTemplateSize; ++x) {
        const auto& col = layout[(y / block) * kBlocks + x / block] ? fg : bg;
        for (int c = 0; c < 3; ++c) pattern.at(y, x, c) = col[c];
      }
    }
    layouts.push_back(layout);
    out.push_back({kLabels[out.size()], std::move(pattern)});
  }
  return out;
}

DetectionSet mock_detect(const ImageTensor& image, const MockDetectorConfig& cfg) {
  cfg.validate();
  std::vector<PreparedTemplate> prepared;
  prepared.reserve(cfg.templates.size());
  for (const auto& t : cfg.templates) prepared.push_back(prepare(t.pattern));

  const TemplateBank bank(prepared);
  std::vector<int> sizes = cfg.box_sizes;
  std::sort(sizes.begin(), sizes.end());
  std::vector<Level> levels;
  levels.reserve(sizes.size());
  std::vector<Detection> candidates;
  for (int size : sizes) {
    const int factor = size / kTemplateSize;
    const Level* finer = nullptr;
    for (const auto& lv : levels) {
      if (factor % lv.factor == 0 && (finer == nullptr || lv.factor > finer->factor)) {
        finer = &lv;
      }
    }
    Level lv = build_level(image, finer, factor);
    scan_level(lv, bank, cfg, size, cfg.templates, candidates);
    levels.push_back(std::move(lv));
  }

  auto kept = nms(std::move(candidates), cfg.nms_iou);
  const double min_area = cfg.min_size_fraction *
                          static_cast<double>(image.height()) * image.width();
  std::erase_if(kept, [&](const Detection& d) {
    return static_cast<double>(d.box.area()) < min_area ||
           d.score < cfg.score_threshold;
  });

  DetectionSet out;
  out.detections = std::move(kept);
  out.oracle_id = cfg.model_id;
  return out;
}

MockDetector::MockDetector(MockDetectorConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
}

std::vector<Detection> MockDetector::forward(const ImageTensor& image) {
  return mock_detect(image, cfg_).detections;
}

}  // namespace ghostpatch
