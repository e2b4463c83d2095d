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

#include <gtest/gtest.h>

#include "ghostpatch/errors.hpp"
#include "ghostpatch/transform.hpp"
#include "test_support.hpp"

namespace ghostpatch {
namespace {

using testing::random_image;

ImageTensor gradient_strip() {
  ImageTensor img(1, 256);
  for (int x = 0; x < 256; ++x) {
    for (int c = 0; c < kChannels; ++c) img.at(0, x, c) = static_cast<std::uint8_t>(x);
  }
  return img;
}

TEST(ColorTransform, IdentityLeavesImageUnchanged) {
  Rng rng(1);
  const ImageTensor img = random_image(rng, 12, 12);
  EXPECT_EQ(color_transform(img, ColorTransform::identity(), rng), img);
}

TEST(ColorTransform, PosterizeFullDepthIsIdentity) {
  Rng rng(2);
  const ImageTensor img = random_image(rng, 12, 12);
  EXPECT_EQ(color_transform(img, ColorTransform::posterize(8), rng), img);
}

TEST(ColorTransform, PosterizeOneBitGivesTwoLevels) {
  Rng rng(3);
  const ImageTensor out =
      color_transform(gradient_strip(), ColorTransform::posterize(1), rng);
  for (int x = 0; x < 256; ++x) {
    const int expected = x < 128 ? 0 : 128;
    for (int c = 0; c < kChannels; ++c) ASSERT_EQ(out.at(0, x, c), expected) << x;
  }
}

TEST(ColorTransform, PosterizeKeepsTopBits) {
  Rng rng(4);
  const ImageTensor img = random_image(rng, 10, 10);
  for (int bits = 1; bits <= 8; ++bits) {
    const ImageTensor out = color_transform(img, ColorTransform::posterize(bits), rng);
    const int step = 1 << (8 - bits);
    for (std::size_t i = 0; i < img.size(); ++i) {
      ASSERT_EQ(out.data()[i], img.data()[i] / step * step);
    }
  }
}

TEST(ColorTransform, PosterizeRejectsBadBitCount) {
  Rng rng(5);
  const ImageTensor img(2, 2);
  EXPECT_THROW(color_transform(img, ColorTransform::posterize(0), rng), InvalidArgument);
  EXPECT_THROW(color_transform(img, ColorTransform::posterize(9), rng), InvalidArgument);
}

TEST(ColorTransform, EqualizeUniformHistogramIsIdentity) {
  Rng rng(6);
  ImageTensor img(4, 256);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 256; ++x) {
      for (int c = 0; c < kChannels; ++c) img.at(y, x, c) = static_cast<std::uint8_t>(x);
    }
  }
  EXPECT_EQ(color_transform(img, ColorTransform::equalize(), rng), img);
}

TEST(ColorTransform, EqualizeConstantImageUnchanged) {
  Rng rng(7);
  const ImageTensor img = ImageTensor::filled(5, 5, {9, 99, 199});
  EXPECT_EQ(color_transform(img, ColorTransform::equalize(), rng), img);
}

TEST(ColorTransform, EqualizePreservesOrderAndSpreadsRange) {
  Rng rng(8);
  ImageTensor img(32, 32);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(100 + rng.below(20));
  const ImageTensor out = color_transform(img, ColorTransform::equalize(), rng);
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (std::size_t j = i % kChannels; j < img.size(); j += kChannels * 7) {
      if (img.data()[i] < img.data()[j]) {
        ASSERT_LE(out.data()[i], out.data()[j]);
      }
    }
  }
  int lo = 255;
  int hi = 0;
  for (auto v : out.data()) {
    lo = std::min<int>(lo, v);
    hi = std::max<int>(hi, v);
  }
  EXPECT_GT(hi - lo, 150);
}

TEST(ColorTransform, ZeroJitterIsIdentity) {
  Rng rng(9);
  const ImageTensor img = random_image(rng, 16, 16);
  EXPECT_EQ(color_transform(img, ColorTransform::jitter(0.0, 0.0), rng), img);
}

TEST(ColorTransform, JitterIsDeterministicPerRngState) {
  Rng seed_a(10);
  Rng seed_b(10);
  Rng data(11);
  const ImageTensor img = random_image(data, 16, 16);
  const auto t = ColorTransform::jitter(0.4, 0.4);
  EXPECT_EQ(color_transform(img, t, seed_a), color_transform(img, t, seed_b));
}

TEST(ColorTransform, JitterScalesAGrayImageUniformly) {
  Rng rng(12);
  const ImageTensor gray = ImageTensor::filled(8, 8, {100, 100, 100});
  const ImageTensor out = color_transform(gray, ColorTransform::jitter(0.5, 0.0), rng);
  const std::uint8_t v = out.at(0, 0, 0);
  EXPECT_GE(v, 50);
  EXPECT_LE(v, 150);
  for (auto p : out.data()) ASSERT_EQ(p, v);
}

TEST(ColorTransform, JitterRejectsNegativeFactors) {
  Rng rng(13);
  EXPECT_THROW(color_transform(ImageTensor(2, 2), ColorTransform::jitter(-0.1, 0.0), rng),
               InvalidArgument);
}

TEST(ColorTransform, TagsRoundTrip) {
  for (const auto& t : {ColorTransform::identity(), ColorTransform::equalize(),
                        ColorTransform::posterize(3), ColorTransform::jitter(0.25, 0.5)}) {
    EXPECT_EQ(ColorTransform::parse(t.tag()), t) << t.tag();
  }
  EXPECT_EQ(ColorTransform::parse("none"), ColorTransform::identity());
  EXPECT_EQ(ColorTransform::parse("posterize:2"), ColorTransform::posterize(2));
  EXPECT_EQ(ColorTransform::parse("jitter").kind, ColorTransform::Kind::kJitter);
}

TEST(ColorTransform, ParseRejectsUnknownTags) {
  EXPECT_THROW(ColorTransform::parse("blur"), InvalidArgument);
  EXPECT_THROW(ColorTransform::parse("posterize:x"), InvalidArgument);
  EXPECT_THROW(ColorTransform::parse("jitter:1"), InvalidArgument);
  EXPECT_THROW(ColorTransform::parse(""), InvalidArgument);
}

}  // namespace
}  // namespace ghostpatch
