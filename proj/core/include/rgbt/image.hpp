#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rgbt/geom.hpp"

namespace rgbt {

/// Row-major interleaved image with samples in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f);

  bool empty() const { return data.empty(); }
  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels) +
           static_cast<std::size_t>(c);
  }
  float& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
  float at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }

  /// Edge-replicating access.
  float clamped(int x, int y, int c = 0) const;

  friend bool operator==(const Image&, const Image&) = default;
};

/// Channel-planar real grid: feature maps, response maps, weight maps.
struct Map {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  Map() = default;
  Map(int w, int h, int c = 1, double fill = 0.0);

  std::size_t plane() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  double& at(int x, int y, int c = 0) {
    return data[static_cast<std::size_t>(c) * plane() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x)];
  }
  double at(int x, int y, int c = 0) const {
    return data[static_cast<std::size_t>(c) * plane() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x)];
  }
  bool same_shape(const Map& o) const { return width == o.width && height == o.height && channels == o.channels; }

  friend bool operator==(const Map&, const Map&) = default;
};

using FeatureMap = Map;
using ResponseMap = Map;

/// Luminance 0.299 R + 0.587 G + 0.114 B; identity for single-channel input.
Image to_gray(const Image& img);

/// Replicates a gray image into three identical channels.
Image gray_to_rgb(const Image& gray);

/// Integer crop of exactly `w`x`h` pixels whose centre is `center`
/// (top-left = round(center - size/2)); outside samples replicate the edge.
Image crop_patch(const Image& img, Point center, int w, int h);

/// Bilinear resampling with the align-corners-false convention.
Image resize_bilinear(const Image& img, int new_w, int new_h);
Map resize_bilinear(const Map& map, int new_w, int new_h);

/// Bilinear sample of a `src_w`x`src_h` pixel region centred at `center`,
/// resampled to `out_w`x`out_h`, edge replicated.
Image sample_patch(const Image& img, Point center, double src_w, double src_h, int out_w, int out_h);

/// Outer product of 1-D Hann windows; 1x1 gives 1.
Map hann2d(int w, int h);

/// Fraction of pixels whose absolute difference exceeds `pixel_thresh`.
double frame_diff_ratio(const Image& prev, const Image& cur, double pixel_thresh);

/// Quantizes every sample to the nearest multiple of 1/255.
void quantize8(Image& img);

struct FeatureConfig {
  int cell = 4;
  int orientations = 9;
  double eps = 1e-3;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Per-cell channels: [mean gray, orientation histogram (L2 normalised),
/// gradient energy (normalised)]; 2 + orientations channels in total.
FeatureMap extract_features(const Image& img, const FeatureConfig& cfg = {});

inline int feature_channels(const FeatureConfig& cfg) { return cfg.orientations + 2; }

// I/O: 8-bit PNG and binary PGM/PPM (P5/P6). Samples are scaled by 1/255.
Image load_image(const std::string& path);
void save_image(const Image& img, const std::string& path);

}  // namespace rgbt
