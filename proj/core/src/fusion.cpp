#include "rgbt/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "rgbt/cftrack.hpp"
#include "rgbt/error.hpp"

namespace rgbt::fusion {

FusionWeights compose(double w_g, Map w_l) {
  FusionWeights fw;
  fw.w_g = w_g;
  fw.w_f = w_l;
  for (auto& v : fw.w_f.data) v *= w_g;
  fw.w_l = std::move(w_l);
  return fw;
}

ResponseMap fuse_responses(const ResponseMap& r_rgb, const ResponseMap& r_t, const Map& w_f) {
  if (!r_rgb.same_shape(r_t) || !r_rgb.same_shape(w_f)) {
    throw DimensionError("fuse_responses: maps must share dimensions");
  }
  ResponseMap out(r_rgb.width, r_rgb.height, r_rgb.channels);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double w = w_f.data[i];
    out.data[i] = w * r_rgb.data[i] + (1.0 - w) * r_t.data[i];
  }
  return out;
}

Map constant_fuse(double w, int width, int height) {
  if (!(w >= 0.0 && w <= 1.0)) throw RangeError("constant fusion weight must lie in [0, 1]");
  return Map(width, height, 1, w);
}

Map intensity_penalty(const Image& patch_t, double i_1, int width, int height) {
  if (!(i_1 > 0.0)) throw RangeError("intensity_fuse: reference intensity must be positive");
  const Image small = resize_bilinear(to_gray(patch_t), width, height);
  Map p(width, height);
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    const double it = std::max(static_cast<double>(small.data[i]), 1e-6);
    p.data[i] = std::min(it / i_1, i_1 / it);
  }
  return p;
}

ResponseMap intensity_fuse(const ResponseMap& r_rgb, const ResponseMap& r_t, double i_1, const Image& patch_t) {
  if (!r_rgb.same_shape(r_t)) throw DimensionError("intensity_fuse: maps must share dimensions");
  const Map p = intensity_penalty(patch_t, i_1, r_rgb.width, r_rgb.height);
  ResponseMap out(r_rgb.width, r_rgb.height);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = 0.5 * p.data[i] * (r_rgb.data[i] + r_t.data[i]);
  return out;
}

QualityWeights quality_weights(const ResponseMap& r_rgb, const ResponseMap& r_t) {
  // Negative quality (a map whose peak is below its mean) carries no confidence.
  const double q_rgb = std::max(0.0, cf::quality(r_rgb));
  const double q_t = std::max(0.0, cf::quality(r_t));
  const double s = q_rgb + q_t;
  if (s < 1e-9) return {};
  return {q_rgb / s, q_t / s};
}

ResponseMap quality_fuse(const ResponseMap& r_rgb, const ResponseMap& r_t) {
  if (!r_rgb.same_shape(r_t)) throw DimensionError("quality_fuse: maps must share dimensions");
  const QualityWeights w = quality_weights(r_rgb, r_t);
  ResponseMap out(r_rgb.width, r_rgb.height, r_rgb.channels);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = w.rgb * r_rgb.data[i] + w.t * r_t.data[i];
  return out;
}

}  // namespace rgbt::fusion
