#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "rgbt/error.hpp"
#include "rgbt/fusion.hpp"

namespace rgbt::fusion {

namespace {

int bin(float v) { return static_cast<int>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)); }

void require_gray(const Image& img, const char* what) {
  if (img.channels != 1) throw RangeError(std::string(what) + ": grayscale input required");
}

void require_same(const Image& a, const Image& b, const char* what) {
  if (a.width != b.width || a.height != b.height) throw DimensionError(std::string(what) + ": image sizes differ");
}

// Valid-region separable Gaussian filter.
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = w - n + 1, oh = h - n + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i)] * src[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x + i)];
      tmp[static_cast<std::size_t>(y) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(x)] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * static_cast<std::size_t>(oh));
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i)] * tmp[static_cast<std::size_t>(y + i) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(x)];
      out[static_cast<std::size_t>(y) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(x)] = s;
    }
  }
  return out;
}

}  // namespace

Image fuse_images(const Image& i_rgb, const Image& i_t, const Map& wf_full) {
  require_gray(i_rgb, "fuse_images");
  require_gray(i_t, "fuse_images");
  require_same(i_rgb, i_t, "fuse_images");
  if (wf_full.width != i_rgb.width || wf_full.height != i_rgb.height || wf_full.channels != 1) {
    throw DimensionError("fuse_images: weight map must match the image resolution");
  }
  Image out(i_rgb.width, i_rgb.height, 1);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double w = wf_full.data[i];
    if (w == 1.0) {
      out.data[i] = i_rgb.data[i];
    } else if (w == 0.0) {
      out.data[i] = i_t.data[i];
    } else {
      const double v = w * i_rgb.data[i] + (1.0 - w) * i_t.data[i];
      out.data[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

double entropy(const Image& img) {
  require_gray(img, "entropy");
  std::array<double, 256> hist{};
  for (float v : img.data) hist[static_cast<std::size_t>(bin(v))] += 1.0;
  const double n = static_cast<double>(img.data.size());
  double e = 0.0;
  for (double c : hist) {
    if (c > 0.0) e -= (c / n) * std::log2(c / n);
  }
  return e;
}

double mutual_information(const Image& a, const Image& b) {
  require_gray(a, "mutual_information");
  require_gray(b, "mutual_information");
  require_same(a, b, "mutual_information");
  std::vector<double> joint(256 * 256, 0.0);
  std::array<double, 256> ha{}, hb{};
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const int x = bin(a.data[i]), y = bin(b.data[i]);
    joint[static_cast<std::size_t>(x * 256 + y)] += 1.0;
    ha[static_cast<std::size_t>(x)] += 1.0;
    hb[static_cast<std::size_t>(y)] += 1.0;
  }
  const double n = static_cast<double>(a.data.size());
  double mi = 0.0;
  for (int x = 0; x < 256; ++x) {
    for (int y = 0; y < 256; ++y) {
      const double c = joint[static_cast<std::size_t>(x * 256 + y)];
      if (c == 0.0) continue;
      mi += (c / n) * std::log2(c * n / (ha[static_cast<std::size_t>(x)] * hb[static_cast<std::size_t>(y)]));
    }
  }
  return mi;
}

double ssim(const Image& a, const Image& b) {
  require_gray(a, "ssim");
  require_gray(b, "ssim");
  require_same(a, b, "ssim");
  constexpr int kSize = 11;
  constexpr double kSigma = 1.5;
  if (a.width < kSize || a.height < kSize) throw RangeError("ssim: images must be at least 11x11");
  std::vector<double> k(kSize);
  double ks = 0.0;
  for (int i = 0; i < kSize; ++i) {
    const double d = i - (kSize - 1) / 2.0;
    k[static_cast<std::size_t>(i)] = std::exp(-0.5 * d * d / (kSigma * kSigma));
    ks += k[static_cast<std::size_t>(i)];
  }
  for (auto& v : k) v /= ks;
  const std::size_t n = a.data.size();
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = a.data[i];
    y[i] = b.data[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = filter_valid(x, a.width, a.height, k);
  const auto my = filter_valid(y, a.width, a.height, k);
  const auto sxx = filter_valid(xx, a.width, a.height, k);
  const auto syy = filter_valid(yy, a.width, a.height, k);
  const auto sxy = filter_valid(xy, a.width, a.height, k);
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cxy = sxy[i] - mx[i] * my[i];
    total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cxy + c2)) / ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

}  // namespace rgbt::fusion
