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

#include "ghostpatch/transform.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <vector>

#include "ghostpatch/errors.hpp"

namespace ghostpatch {
namespace {

constexpr double kDefaultJitter = 0.4;
constexpr int kDefaultPosterizeBits = 3;

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view s) {
  // from_chars for double is not available in every libstdc++ we target.
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw InvalidArgument("bad number in transform tag: " + tmp);
  }
  return v;
}

int parse_int(std::string_view s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument("bad integer in transform tag: " + std::string(s));
  }
  return v;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

ImageTensor jitter(const ImageTensor& img, double brightness, double contrast,
                   Rng& rng) {
  if (brightness < 0.0 || contrast < 0.0) {
    throw InvalidArgument("jitter factors must be non-negative");
  }
  const double b = rng.uniform(std::max(0.0, 1.0 - brightness), 1.0 + brightness);
  const double c = rng.uniform(std::max(0.0, 1.0 - contrast), 1.0 + contrast);

  ImageTensor out = img;
  auto px = out.data();
  for (auto& v : px) v = clamp_u8(round_half_away(v * b));

  // Contrast blends toward the mean luminance of the brightened image.
  double lum = 0.0;
  for (std::size_t i = 0; i < px.size(); i += kChannels) {
    lum += 0.299 * px[i] + 0.587 * px[i + 1] + 0.114 * px[i + 2];
  }
  lum /= static_cast<double>(px.size() / kChannels);
  for (auto& v : px) v = clamp_u8(round_half_away((v - lum) * c + lum));
  return out;
}

// Per-channel histogram equalization, same lookup construction as PIL's
// ImageOps.equalize.
ImageTensor equalize(const ImageTensor& img) {
  ImageTensor out = img;
  auto px = out.data();
  for (int ch = 0; ch < kChannels; ++ch) {
    std::array<long long, 256> hist{};
    for (std::size_t i = ch; i < px.size(); i += kChannels) ++hist[px[i]];

    long long total = 0;
    long long last_nonzero = 0;
    int nonzero_bins = 0;
    for (long long h : hist) {
      if (h == 0) continue;
      total += h;
      last_nonzero = h;
      ++nonzero_bins;
    }
    if (nonzero_bins <= 1) continue;
    const long long step = (total - last_nonzero) / 255;
    if (step == 0) continue;

    std::array<std::uint8_t, 256> lut{};
    long long n = step / 2;
    for (int i = 0; i < 256; ++i) {
      lut[static_cast<std::size_t>(i)] =
          static_cast<std::uint8_t>(std::min<long long>(255, n / step));
      n += hist[static_cast<std::size_t>(i)];
    }
    for (std::size_t i = ch; i < px.size(); i += kChannels) px[i] = lut[px[i]];
  }
  return out;
}

ImageTensor posterize(const ImageTensor& img, int bits) {
  if (bits < 1 || bits > 8) {
    throw InvalidArgument("posterize bits must be in [1, 8], got " +
                          std::to_string(bits));
  }
  const auto mask = static_cast<std::uint8_t>(0xFF << (8 - bits));
  ImageTensor out = img;
  for (auto& v : out.data()) v &= mask;
  return out;
}

}  // namespace

ColorTransform ColorTransform::parse(std::string_view tag) {
  const auto parts = split(tag, ':');
  const auto name = parts.front();
  if ((name == "identity" || name == "none") && parts.size() == 1) {
    return identity();
  }
  if (name == "equalize" && parts.size() == 1) return equalize();
  if (name == "posterize") {
    if (parts.size() == 1) return posterize(kDefaultPosterizeBits);
    if (parts.size() == 2) return posterize(parse_int(parts[1]));
  }
  if (name == "jitter") {
    if (parts.size() == 1) return jitter(kDefaultJitter, kDefaultJitter);
    if (parts.size() == 3) {
      return jitter(parse_double(parts[1]), parse_double(parts[2]));
    }
  }
  throw InvalidArgument("unknown transform tag: " + std::string(tag));
}

std::string ColorTransform::tag() const {
  switch (kind) {
    case Kind::kIdentity:
      return "none";
    case Kind::kJitter:
      return "jitter:" + fmt_double(brightness) + ":" + fmt_double(contrast);
    case Kind::kEqualize:
      return "equalize";
    case Kind::kPosterize:
      return "posterize:" + std::to_string(bits);
  }
  return "none";
}

ImageTensor color_transform(const ImageTensor& img, const ColorTransform& t,
                            Rng& rng) {
  switch (t.kind) {
    case ColorTransform::Kind::kIdentity:
      return img;
    case ColorTransform::Kind::kJitter:
      return jitter(img, t.brightness, t.contrast, rng);
    case ColorTransform::Kind::kEqualize:
      return equalize(img);
    case ColorTransform::Kind::kPosterize:
      return posterize(img, t.bits);
  }
  return img;
}

}  // namespace ghostpatch
