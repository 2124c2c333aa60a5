#include <gtest/gtest.h>

#include <cmath>

#include "rgbt/error.hpp"
#include "rgbt/fusion.hpp"
#include "rgbt/rng.hpp"

using namespace rgbt;
using namespace rgbt::fusion;

namespace {

Map random_map(int w, int h, std::uint64_t seed) {
  Map m(w, h);
  Rng rng(seed);
  for (auto& v : m.data) v = rng.uniform(-0.2, 1.0);
  return m;
}

Image random_gray(int w, int h, std::uint64_t seed) {
  Image img(w, h, 1);
  Rng rng(seed);
  for (auto& v : img.data) v = static_cast<float>(rng.uniform());
  return img;
}

}  // namespace

TEST(Fuse, EndpointsAreExact) {
  const Map a = random_map(11, 9, 1), b = random_map(11, 9, 2);
  EXPECT_EQ(fuse_responses(a, b, constant_fuse(1.0, 11, 9)), a);
  EXPECT_EQ(fuse_responses(a, b, constant_fuse(0.0, 11, 9)), b);
  const Map h = fuse_responses(a, b, constant_fuse(0.5, 11, 9));
  for (std::size_t i = 0; i < h.data.size(); ++i) EXPECT_DOUBLE_EQ(h.data[i], 0.5 * a.data[i] + 0.5 * b.data[i]);
}

TEST(Fuse, Errors) {
  EXPECT_THROW(constant_fuse(1.5, 3, 3), RangeError);
  EXPECT_THROW(fuse_responses(Map(3, 3), Map(3, 4), Map(3, 3)), DimensionError);
}

TEST(Compose, ProductOfParts) {
  Map wl(2, 1);
  wl.data = {0.5, 1.0};
  const FusionWeights w = compose(0.4, wl);
  EXPECT_DOUBLE_EQ(w.w_f.data[0], 0.2);
  EXPECT_DOUBLE_EQ(w.w_f.data[1], 0.4);
}

TEST(Intensity, PenaltyAndFuse) {
  const Image hot(8, 8, 1, 0.8f);
  const Map p = intensity_penalty(hot, 0.4, 4, 4);
  for (double v : p.data) EXPECT_NEAR(v, 0.5, 1e-6);
  const Map same = intensity_penalty(hot, 0.8, 4, 4);
  for (double v : same.data) EXPECT_NEAR(v, 1.0, 1e-6);
  const Map a(4, 4, 1, 1.0), b(4, 4, 1, 0.0);
  for (double v : intensity_fuse(a, b, 0.4, hot).data) EXPECT_NEAR(v, 0.25, 1e-6);
  EXPECT_THROW(intensity_fuse(a, b, 0.0, hot), RangeError);
}

TEST(Quality, WeightsFollowQuality) {
  Map peaked(9, 9), flat(9, 9, 1, 0.1);
  peaked.at(4, 4) = 1.0;
  const QualityWeights q = quality_weights(peaked, flat);
  EXPECT_GT(q.rgb, 0.99);
  EXPECT_NEAR(q.rgb + q.t, 1.0, 1e-12);
  const QualityWeights z = quality_weights(Map(3, 3), Map(3, 3));
  EXPECT_DOUBLE_EQ(z.rgb, 0.5);
}

TEST(ImageFusion, IdentityAndRange) {
  const Image a = random_gray(16, 12, 3), b = random_gray(16, 12, 4);
  EXPECT_EQ(fuse_images(a, b, Map(16, 12, 1, 1.0)), a);
  EXPECT_EQ(fuse_images(a, b, Map(16, 12, 1, 0.0)), b);
  const Image f = fuse_images(a, b, random_map(16, 12, 5));
  for (float v : f.data) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Metrics, EntropyOfBinaryImage) {
  Image img(10, 10, 1);
  for (int i = 0; i < 50; ++i) img.data[static_cast<std::size_t>(i)] = 1.0f;
  EXPECT_NEAR(entropy(img), 1.0, 1e-12);
  EXPECT_NEAR(entropy(Image(4, 4, 1, 0.3f)), 0.0, 1e-12);
}

TEST(Metrics, MutualInformation) {
  Image img(10, 10, 1);
  for (int i = 0; i < 50; ++i) img.data[static_cast<std::size_t>(i)] = 1.0f;
  EXPECT_NEAR(mutual_information(img, img), 1.0, 1e-12);
  EXPECT_NEAR(mutual_information(img, Image(10, 10, 1, 0.5f)), 0.0, 1e-12);
  const Image r = random_gray(32, 32, 6);
  EXPECT_NEAR(mutual_information(r, r), entropy(r), 1e-9);
}

TEST(Metrics, Ssim) {
  const Image a = random_gray(24, 24, 7);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  const Image b = random_gray(24, 24, 8);
  EXPECT_LT(ssim(a, b), 0.5);
  EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
}
