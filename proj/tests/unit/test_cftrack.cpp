#include <gtest/gtest.h>

#include <cmath>

#include "rgbt/cftrack.hpp"
#include "rgbt/error.hpp"
#include "rgbt/rng.hpp"

using namespace rgbt;

namespace {

// Smooth random texture; shifting the sampling origin moves the content.
Image texture(int w, int h, double ox, double oy, std::uint64_t seed = 3) {
  Rng rng(seed);
  double a[8], fx[8], fy[8], ph[8];
  for (int k = 0; k < 8; ++k) {
    a[k] = rng.uniform(0.2, 1.0);
    fx[k] = rng.uniform(-0.3, 0.3);
    fy[k] = rng.uniform(-0.3, 0.3);
    ph[k] = rng.uniform(0, 6.28);
  }
  Image img(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = 0.0;
      for (int k = 0; k < 8; ++k) v += a[k] * std::sin(fx[k] * (x - ox) + fy[k] * (y - oy) + ph[k]);
      img.at(x, y) = static_cast<float>(0.5 + 0.1 * v);
    }
  }
  return img;
}

}  // namespace

TEST(CfConfig, Validation) {
  cf::CfConfig c;
  EXPECT_NO_THROW(cf::validate(c));
  c.scales = 4;
  EXPECT_THROW(cf::validate(c), ConfigError);
  c = {};
  c.lambda = 0;
  EXPECT_THROW(cf::validate(c), ConfigError);
  c = {};
  c.padding = 0.5;
  EXPECT_THROW(cf::validate(c), ConfigError);
}

TEST(Cf, InitShapes) {
  const Image img = texture(200, 160, 0, 0);
  const cf::CfState s = cf::cf_init(img, {80, 60, 40, 30}, {});
  EXPECT_TRUE(s.initialized());
  EXPECT_EQ(s.map_w % 2, 1);
  EXPECT_EQ(s.map_h % 2, 1);
  EXPECT_EQ(s.channels(), feature_channels(FeatureConfig{}));
  EXPECT_EQ(s.window.width, s.map_w);
  EXPECT_LE(std::max(s.tmpl_w, s.tmpl_h), s.cfg.max_template_px);
}

TEST(Cf, RespondOnTrainingFramePeaksAtCentre) {
  const Image img = texture(200, 160, 0, 0);
  const Box box{80, 60, 40, 40};
  const cf::CfState s = cf::cf_init(img, box, {});
  const cf::CfResponse r = cf::cf_respond(s, img, box.center());
  ASSERT_EQ(r.maps.size(), 5u);
  EXPECT_EQ(r.best, 2);
  const Point p = cf::subcell_peak(r.maps[2]);
  EXPECT_NEAR(p.x, (s.map_w - 1) / 2.0, 0.25);
  EXPECT_NEAR(p.y, (s.map_h - 1) / 2.0, 0.25);
  const Box loc = cf::locate(s, r.maps[2], box.center(), 1.0);
  EXPECT_LT(center_error(loc, box), 1.0);
  for (std::size_t k = 1; k < r.scales.size(); ++k) EXPECT_GT(r.scales[k], r.scales[k - 1]);
}

TEST(Cf, FollowsTranslation) {
  const Box box{80, 60, 40, 40};
  const cf::CfState s = cf::cf_init(texture(220, 180, 0, 0), box, {});
  for (auto [dx, dy] : {std::pair{5.0, 0.0}, std::pair{-4.0, 6.0}, std::pair{7.0, -3.0}}) {
    const Image moved = texture(220, 180, dx, dy);
    const cf::CfResponse r = cf::cf_respond(s, moved, box.center());
    const Box loc = cf::locate(s, r.maps[static_cast<std::size_t>(r.best)], box.center(), r.scales[static_cast<std::size_t>(r.best)]);
    EXPECT_NEAR(loc.center().x, box.center().x + dx, 1.5);
    EXPECT_NEAR(loc.center().y, box.center().y + dy, 1.5);
  }
}

TEST(Cf, UpdateBlendsAndKeepsShape) {
  const Box box{80, 60, 40, 40};
  cf::CfState s = cf::cf_init(texture(200, 160, 0, 0), box, {});
  const cf::CfState before = s;
  cf::cf_update(s, texture(200, 160, 2, 1), box, 0.0);
  EXPECT_EQ(s.num, before.num);
  cf::cf_update(s, texture(200, 160, 2, 1), box);
  EXPECT_NE(s.num, before.num);
  EXPECT_EQ(s.map_w, before.map_w);
  cf::CfState empty;
  EXPECT_THROW(cf::cf_respond(empty, texture(50, 50, 0, 0), {25, 25}), StateError);
}

TEST(Cf, QualityMetrics) {
  ResponseMap r(5, 5);
  r.at(2, 2) = 1.0;
  const double mean = 1.0 / 25.0;
  const double var = (1.0 - mean) * (1.0 - mean) / 25.0 + 24.0 * mean * mean / 25.0;
  EXPECT_NEAR(cf::psr(r), (1.0 - mean) / (var + 1e-12), 1e-9);
  EXPECT_NEAR(cf::quality(r), cf::psr(r), 1e-12);
  EXPECT_DOUBLE_EQ(cf::max_value(r), 1.0);
  EXPECT_THROW(cf::psr(ResponseMap{}), RangeError);
}

TEST(Cf, SubcellPeakParabolic) {
  ResponseMap r(5, 5);
  // symmetric parabola along x with vertex at 2.25
  for (int x = 0; x < 5; ++x) r.at(x, 2) = 10.0 - (x - 2.25) * (x - 2.25);
  r.at(2, 1) = r.at(2, 3) = 5.0;
  const Point p = cf::subcell_peak(r);
  EXPECT_NEAR(p.x, 2.25, 1e-9);
  EXPECT_NEAR(p.y, 2.0, 1e-9);
}
