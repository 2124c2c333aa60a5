#include "rgbt/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rgbt/error.hpp"

namespace rgbt {

Image::Image(int w, int h, int c, float fill)
    : width(w), height(h), channels(c),
      data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), fill) {
  if (w <= 0 || h <= 0 || (c != 1 && c != 3)) throw RangeError("image dimensions must be positive with 1 or 3 channels");
}

float Image::clamped(int x, int y, int c) const {
  return at(std::clamp(x, 0, width - 1), std::clamp(y, 0, height - 1), c);
}

Map::Map(int w, int h, int c, double fill)
    : width(w), height(h), channels(c),
      data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), fill) {
  if (w <= 0 || h <= 0 || c <= 0) throw RangeError("map dimensions must be positive");
}

Image to_gray(const Image& img) {
  if (img.channels == 1) return img;
  Image out(img.width, img.height, 1);
  const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  for (std::size_t i = 0; i < n; ++i) {
    const float* p = &img.data[3 * i];
    out.data[i] = static_cast<float>(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]);
  }
  return out;
}

Image gray_to_rgb(const Image& gray) {
  if (gray.channels == 3) return gray;
  Image out(gray.width, gray.height, 3);
  for (std::size_t i = 0; i < gray.data.size(); ++i) {
    out.data[3 * i] = out.data[3 * i + 1] = out.data[3 * i + 2] = gray.data[i];
  }
  return out;
}

Image crop_patch(const Image& img, Point center, int w, int h) {
  if (w <= 0 || h <= 0) throw RangeError("crop size must be positive");
  const int x0 = static_cast<int>(std::lround(center.x - 0.5 * w));
  const int y0 = static_cast<int>(std::lround(center.y - 0.5 * h));
  Image out(w, h, img.channels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.clamped(x0 + x, y0 + y, c);
    }
  }
  return out;
}

namespace {

struct Tap {
  int i0;
  int i1;
  double f;
};

// Index-space position -> clamped linear interpolation taps.
Tap tap(double pos, int n) {
  if (pos <= 0.0) return {0, 0, 0.0};
  if (pos >= n - 1) return {n - 1, n - 1, 0.0};
  const int i0 = static_cast<int>(std::floor(pos));
  return {i0, std::min(i0 + 1, n - 1), pos - i0};
}

std::vector<Tap> resize_taps(int in, int out) {
  std::vector<Tap> taps(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) taps[static_cast<std::size_t>(i)] = tap((i + 0.5) * scale - 0.5, in);
  return taps;
}

}  // namespace

Image resize_bilinear(const Image& img, int new_w, int new_h) {
  if (new_w <= 0 || new_h <= 0) throw RangeError("resize target must be positive");
  if (new_w == img.width && new_h == img.height) return img;
  const auto tx = resize_taps(img.width, new_w);
  const auto ty = resize_taps(img.height, new_h);
  Image out(new_w, new_h, img.channels);
  for (int y = 0; y < new_h; ++y) {
    const Tap& vy = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < new_w; ++x) {
      const Tap& vx = tx[static_cast<std::size_t>(x)];
      for (int c = 0; c < img.channels; ++c) {
        const double top = (1.0 - vx.f) * img.at(vx.i0, vy.i0, c) + vx.f * img.at(vx.i1, vy.i0, c);
        const double bot = (1.0 - vx.f) * img.at(vx.i0, vy.i1, c) + vx.f * img.at(vx.i1, vy.i1, c);
        out.at(x, y, c) = static_cast<float>((1.0 - vy.f) * top + vy.f * bot);
      }
    }
  }
  return out;
}

Map resize_bilinear(const Map& map, int new_w, int new_h) {
  if (new_w <= 0 || new_h <= 0) throw RangeError("resize target must be positive");
  if (new_w == map.width && new_h == map.height) return map;
  const auto tx = resize_taps(map.width, new_w);
  const auto ty = resize_taps(map.height, new_h);
  Map out(new_w, new_h, map.channels);
  for (int c = 0; c < map.channels; ++c) {
    for (int y = 0; y < new_h; ++y) {
      const Tap& vy = ty[static_cast<std::size_t>(y)];
      for (int x = 0; x < new_w; ++x) {
        const Tap& vx = tx[static_cast<std::size_t>(x)];
        const double top = (1.0 - vx.f) * map.at(vx.i0, vy.i0, c) + vx.f * map.at(vx.i1, vy.i0, c);
        const double bot = (1.0 - vx.f) * map.at(vx.i0, vy.i1, c) + vx.f * map.at(vx.i1, vy.i1, c);
        out.at(x, y, c) = (1.0 - vy.f) * top + vy.f * bot;
      }
    }
  }
  return out;
}

Image sample_patch(const Image& img, Point center, double src_w, double src_h, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0 || !(src_w > 0.0) || !(src_h > 0.0)) throw RangeError("patch size must be positive");
  Image out(out_w, out_h, img.channels);
  const double sx = src_w / out_w, sy = src_h / out_h;
  const double left = center.x - 0.5 * src_w, top = center.y - 0.5 * src_h;
  std::vector<Tap> tx(static_cast<std::size_t>(out_w)), ty(static_cast<std::size_t>(out_h));
  for (int x = 0; x < out_w; ++x) tx[static_cast<std::size_t>(x)] = tap(left + (x + 0.5) * sx - 0.5, img.width);
  for (int y = 0; y < out_h; ++y) ty[static_cast<std::size_t>(y)] = tap(top + (y + 0.5) * sy - 0.5, img.height);
  for (int y = 0; y < out_h; ++y) {
    const Tap& vy = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < out_w; ++x) {
      const Tap& vx = tx[static_cast<std::size_t>(x)];
      for (int c = 0; c < img.channels; ++c) {
        const double a = (1.0 - vx.f) * img.at(vx.i0, vy.i0, c) + vx.f * img.at(vx.i1, vy.i0, c);
        const double b = (1.0 - vx.f) * img.at(vx.i0, vy.i1, c) + vx.f * img.at(vx.i1, vy.i1, c);
        out.at(x, y, c) = static_cast<float>((1.0 - vy.f) * a + vy.f * b);
      }
    }
  }
  return out;
}

Map hann2d(int w, int h) {
  if (w < 1 || h < 1) throw RangeError("window size must be >= 1");
  auto hann = [](int n) {
    std::vector<double> v(static_cast<std::size_t>(n), 1.0);
    if (n == 1) return v;
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (n - 1)));
    return v;
  };
  const auto wx = hann(w), wy = hann(h);
  Map out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.at(x, y) = wy[static_cast<std::size_t>(y)] * wx[static_cast<std::size_t>(x)];
  }
  return out;
}

double frame_diff_ratio(const Image& prev, const Image& cur, double pixel_thresh) {
  if (prev.width != cur.width || prev.height != cur.height) throw DimensionError("frame_diff_ratio: frame sizes differ");
  const Image a = to_gray(prev), b = to_gray(cur);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    if (std::abs(static_cast<double>(b.data[i]) - a.data[i]) > pixel_thresh) ++changed;
  }
  return static_cast<double>(changed) / static_cast<double>(a.data.size());
}

void quantize8(Image& img) {
  for (auto& v : img.data) v = static_cast<float>(std::round(std::clamp(v, 0.0f, 1.0f) * 255.0f) / 255.0);
}

FeatureMap extract_features(const Image& img, const FeatureConfig& cfg) {
  if (cfg.cell < 1 || cfg.orientations < 1) throw RangeError("feature cell and orientation count must be positive");
  const Image g = to_gray(img);
  const int cw = g.width / cfg.cell, ch = g.height / cfg.cell;
  if (cw < 1 || ch < 1) throw RangeError("image smaller than one feature cell");
  const int nb = cfg.orientations;
  FeatureMap out(cw, ch, nb + 2);
  const double bin_width = std::numbers::pi / nb;
  const double inv_n = 1.0 / (cfg.cell * cfg.cell);
  std::vector<double> hist(static_cast<std::size_t>(nb));
  for (int cy = 0; cy < ch; ++cy) {
    for (int cx = 0; cx < cw; ++cx) {
      std::fill(hist.begin(), hist.end(), 0.0);
      double sum = 0.0, energy = 0.0;
      for (int yy = 0; yy < cfg.cell; ++yy) {
        const int y = cy * cfg.cell + yy;
        for (int xx = 0; xx < cfg.cell; ++xx) {
          const int x = cx * cfg.cell + xx;
          sum += g.at(x, y);
          const double gx = 0.5 * (static_cast<double>(g.clamped(x + 1, y)) - g.clamped(x - 1, y));
          const double gy = 0.5 * (static_cast<double>(g.clamped(x, y + 1)) - g.clamped(x, y - 1));
          const double mag2 = gx * gx + gy * gy;
          if (mag2 == 0.0) continue;
          energy += mag2;
          const double mag = std::sqrt(mag2);
          double theta = std::atan2(gy, gx);
          if (theta < 0.0) theta += std::numbers::pi;
          const double pos = theta / bin_width;
          int b0 = static_cast<int>(std::floor(pos));
          const double frac = pos - b0;
          b0 %= nb;
          hist[static_cast<std::size_t>(b0)] += (1.0 - frac) * mag;
          hist[static_cast<std::size_t>((b0 + 1) % nb)] += frac * mag;
        }
      }
      double norm2 = 0.0;
      for (auto& v : hist) {
        v *= inv_n;
        norm2 += v * v;
      }
      const double denom = std::sqrt(norm2 + cfg.eps * cfg.eps);
      out.at(cx, cy, 0) = sum * inv_n;
      for (int b = 0; b < nb; ++b) out.at(cx, cy, 1 + b) = hist[static_cast<std::size_t>(b)] / denom;
      const double e = std::sqrt(energy * inv_n);
      out.at(cx, cy, nb + 1) = e / std::sqrt(e * e + cfg.eps * cfg.eps);
    }
  }
  return out;
}

}  // namespace rgbt
