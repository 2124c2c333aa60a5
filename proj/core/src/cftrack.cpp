#include "rgbt/cftrack.hpp"

#include <limits>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "rgbt/error.hpp"

namespace rgbt::cf {

void validate(const CfConfig& cfg) {
  if (!(cfg.padding >= 1.0)) throw ConfigError("cf.padding must be >= 1");
  if (!(cfg.lambda > 0.0)) throw ConfigError("cf.lambda must be > 0");
  if (!(cfg.eta >= 0.0 && cfg.eta <= 1.0)) throw ConfigError("cf.eta must lie in [0, 1]");
  if (cfg.scales < 1 || cfg.scales % 2 == 0) throw ConfigError("cf.scales must be a positive odd count");
  if (!(cfg.scale_step >= 1.0)) throw ConfigError("cf.scale_step must be >= 1");
  if (!(cfg.sigma_factor > 0.0)) throw ConfigError("cf.sigma_factor must be > 0");
  if (cfg.features.cell < 1 || cfg.features.orientations < 1) throw ConfigError("feature cell/orientations must be >= 1");
  if (cfg.max_template_px < 3 * cfg.features.cell) throw ConfigError("cf.max_template_px must cover at least 3 cells");
}

namespace {

int odd_cells(double px, int cell) {
  int n = std::max(3, static_cast<int>(std::lround(px / cell)));
  if (n % 2 == 0) ++n;
  return n;
}

Spectrum gaussian_label(int m, int n, double sigma) {
  std::vector<double> y(static_cast<std::size_t>(m) * static_cast<std::size_t>(n));
  const double cx = 0.5 * (m - 1), cy = 0.5 * (n - 1);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) {
      const double dx = i - cx, dy = j - cy;
      y[static_cast<std::size_t>(j) * static_cast<std::size_t>(m) + static_cast<std::size_t>(i)] =
          std::exp(-0.5 * (dx * dx + dy * dy) / (sigma * sigma));
    }
  }
  return fft2(y, m, n);
}

std::span<const double> channel(const FeatureMap& f, int c) {
  return {f.data.data() + static_cast<std::size_t>(c) * f.plane(), f.plane()};
}

// Model numerator and denominator of one training patch.
void learn(const CfState& s, const FeatureMap& f, std::vector<Spectrum>& num, Spectrum& den) {
  num.assign(static_cast<std::size_t>(f.channels), {});
  den.assign(f.plane(), {s.cfg.lambda, 0.0});
  for (int c = 0; c < f.channels; ++c) {
    Spectrum x = fft2(channel(f, c), f.width, f.height);
    Spectrum& nc = num[static_cast<std::size_t>(c)];
    nc.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      nc[i] = std::conj(x[i]) * s.label[i];
      den[i] += std::norm(x[i]);
    }
  }
}

}  // namespace

FeatureMap search_features(const CfState& s, const Image& frame, Point center, double scale) {
  const double ww = s.target_w * scale * s.window_ratio_x;
  const double wh = s.target_h * scale * s.window_ratio_y;
  const Image patch = sample_patch(frame, center, ww, wh, s.tmpl_w, s.tmpl_h);
  FeatureMap f = extract_features(patch, s.cfg.features);
  // The raw intensity channel is centred so a flat patch carries no energy.
  const std::size_t plane = f.plane();
  const double mean = std::accumulate(f.data.begin(), f.data.begin() + static_cast<std::ptrdiff_t>(plane), 0.0) / plane;
  for (std::size_t i = 0; i < plane; ++i) f.data[i] -= mean;
  for (int c = 0; c < f.channels; ++c) {
    double* p = f.data.data() + static_cast<std::size_t>(c) * plane;
    for (std::size_t i = 0; i < plane; ++i) p[i] *= s.window.data[i];
  }
  return f;
}

CfState cf_init(const Image& frame, const Box& box, const CfConfig& cfg) {
  validate(cfg);
  if (!box.valid()) throw DegenerateError("cf_init: degenerate target box");
  CfState s;
  s.cfg = cfg;
  s.target_w = box.w;
  s.target_h = box.h;
  const int cell = cfg.features.cell;
  const double ww = cfg.padding * box.w, wh = cfg.padding * box.h;
  const double r = std::min(1.0, cfg.max_template_px / std::max(ww, wh));
  s.map_w = odd_cells(ww * r, cell);
  s.map_h = odd_cells(wh * r, cell);
  s.tmpl_w = s.map_w * cell;
  s.tmpl_h = s.map_h * cell;
  s.window_ratio_x = s.tmpl_w / (r * box.w);
  s.window_ratio_y = s.tmpl_h / (r * box.h);
  s.window = hann2d(s.map_w, s.map_h);
  const double sigma = cfg.sigma_factor * std::sqrt(box.w * box.h) * r / cell;
  s.label = gaussian_label(s.map_w, s.map_h, sigma);
  learn(s, search_features(s, frame, box.center(), 1.0), s.num, s.den);
  return s;
}

CfResponse cf_respond(const CfState& s, const Image& frame, Point center) {
  if (!s.initialized()) throw StateError("cf_respond: tracker not initialised");
  CfResponse out;
  const int half = s.cfg.scales / 2;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int k = -half; k <= half; ++k) {
    const double a = std::pow(s.cfg.scale_step, k);
    const FeatureMap f = search_features(s, frame, center, a);
    Spectrum acc(f.plane(), {0.0, 0.0});
    for (int c = 0; c < f.channels; ++c) {
      const Spectrum z = fft2(channel(f, c), f.width, f.height);
      const Spectrum& nc = s.num[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < z.size(); ++i) acc[i] += nc[i] * z[i];
    }
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] /= s.den[i];
    ResponseMap r(s.map_w, s.map_h);
    r.data = ifft2_real(acc, s.map_w, s.map_h);
    const double m = max_value(r);
    if (m > best_val) {
      best_val = m;
      out.best = static_cast<int>(out.maps.size());
    }
    out.maps.push_back(std::move(r));
    out.scales.push_back(a);
  }
  return out;
}

void cf_update(CfState& s, const Image& frame, const Box& box) { cf_update(s, frame, box, s.cfg.eta); }

void cf_update(CfState& s, const Image& frame, const Box& box, double eta) {
  if (!s.initialized()) throw StateError("cf_update: tracker not initialised");
  if (!box.valid()) throw DegenerateError("cf_update: degenerate box");
  s.target_w = box.w;
  s.target_h = box.h;
  if (eta == 0.0) return;
  std::vector<Spectrum> num;
  Spectrum den;
  learn(s, search_features(s, frame, box.center(), 1.0), num, den);
  for (std::size_t c = 0; c < num.size(); ++c) {
    for (std::size_t i = 0; i < num[c].size(); ++i) s.num[c][i] = (1.0 - eta) * s.num[c][i] + eta * num[c][i];
  }
  for (std::size_t i = 0; i < den.size(); ++i) s.den[i] = (1.0 - eta) * s.den[i] + eta * den[i];
}

Point subcell_peak(const ResponseMap& r) {
  const auto it = std::max_element(r.data.begin(), r.data.begin() + static_cast<std::ptrdiff_t>(r.plane()));
  const auto idx = static_cast<int>(it - r.data.begin());
  const int px = idx % r.width, py = idx / r.width;
  auto refine = [](double l, double c, double rr) {
    const double d = l - 2.0 * c + rr;
    if (!(d < 0.0)) return 0.0;
    return std::clamp(0.5 * (l - rr) / d, -0.5, 0.5);
  };
  Point p{static_cast<double>(px), static_cast<double>(py)};
  if (px > 0 && px < r.width - 1) p.x += refine(r.at(px - 1, py), r.at(px, py), r.at(px + 1, py));
  if (py > 0 && py < r.height - 1) p.y += refine(r.at(px, py - 1), r.at(px, py), r.at(px, py + 1));
  return p;
}

Box locate(const CfState& s, const ResponseMap& r, Point center, double scale) {
  const Point p = subcell_peak(r);
  const double px_per_cell_x = s.cfg.features.cell * s.target_w * scale * s.window_ratio_x / s.tmpl_w;
  const double px_per_cell_y = s.cfg.features.cell * s.target_h * scale * s.window_ratio_y / s.tmpl_h;
  const Point c{center.x + (p.x - 0.5 * (r.width - 1)) * px_per_cell_x, center.y + (p.y - 0.5 * (r.height - 1)) * px_per_cell_y};
  return Box::from_center(c, s.target_w * scale, s.target_h * scale);
}

double max_value(const ResponseMap& r) {
  if (r.data.empty()) throw RangeError("empty response map");
  return *std::max_element(r.data.begin(), r.data.end());
}

double psr(const ResponseMap& r) {
  if (r.data.empty()) throw RangeError("empty response map");
  const double n = static_cast<double>(r.data.size());
  double mean = 0.0;
  for (double v : r.data) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : r.data) var += (v - mean) * (v - mean);
  var /= n;
  return (max_value(r) - mean) / (var + 1e-12);
}

double quality(const ResponseMap& r) { return psr(r) * max_value(r); }

}  // namespace rgbt::cf
