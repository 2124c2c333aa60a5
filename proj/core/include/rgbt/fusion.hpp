#pragma once

#include "rgbt/image.hpp"

namespace rgbt::fusion {

/// Global scalar, local map and their product W_F = w_G * W_L.
struct FusionWeights {
  double w_g = 0.5;
  Map w_l;
  Map w_f;
};

/// Composes W_F from the two parts.
FusionWeights compose(double w_g, Map w_l);

/// R_F = W_F * R_RGB + (1 - W_F) * R_T, elementwise.
ResponseMap fuse_responses(const ResponseMap& r_rgb, const ResponseMap& r_t, const Map& w_f);

/// Uniform weight map; throws RangeError outside [0, 1].
Map constant_fuse(double w, int width, int height);

/// Thermal-intensity penalty P = min(i_t / i_1, i_1 / i_t) at response
/// resolution (i_t clamped to >= 1e-6).
Map intensity_penalty(const Image& patch_t, double i_1, int width, int height);

/// 0.5 * P * (R_RGB + R_T).
ResponseMap intensity_fuse(const ResponseMap& r_rgb, const ResponseMap& r_t, double i_1, const Image& patch_t);

/// Weights proportional to each map's quality q; equal weights when both vanish.
struct QualityWeights {
  double rgb = 0.5;
  double t = 0.5;
};
QualityWeights quality_weights(const ResponseMap& r_rgb, const ResponseMap& r_t);
ResponseMap quality_fuse(const ResponseMap& r_rgb, const ResponseMap& r_t);

/// I_F = W_F * I_RGB + (1 - W_F) * I_T on grayscale images.
Image fuse_images(const Image& i_rgb, const Image& i_t, const Map& wf_full);

/// Shannon entropy (bits) of the 256-bin histogram.
double entropy(const Image& img);

/// Mutual information (bits) from the 256x256 joint histogram.
double mutual_information(const Image& a, const Image& b);

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2, C2 = 0.03^2.
double ssim(const Image& a, const Image& b);

}  // namespace rgbt::fusion
