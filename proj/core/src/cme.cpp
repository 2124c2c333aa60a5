#include "rgbt/cme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rgbt/error.hpp"
#include "rgbt/rng.hpp"

namespace rgbt::cme {

void validate(const CmeConfig& c) {
  if (c.max_keypoints < 4) throw ConfigError("cme.max_keypoints must be >= 4");
  if (!(c.harris_sigma > 0.0) || !(c.harris_k > 0.0)) throw ConfigError("cme.harris_k and cme.harris_sigma must be > 0");
  if (!(c.rel_threshold >= 0.0 && c.rel_threshold < 1.0)) throw ConfigError("cme.rel_threshold must lie in [0, 1)");
  if (!(c.ratio > 0.0 && c.ratio <= 1.0)) throw ConfigError("cme.ratio must lie in (0, 1]");
  if (c.iters < 1 || !(c.tau > 0.0)) throw ConfigError("cme.iters and cme.tau must be positive");
  if (c.min_matches < 1) throw ConfigError("cme.min_matches must be >= 1");
  if (!(c.gate_pixel >= 0.0) || !(c.gate_ratio >= 0.0 && c.gate_ratio <= 1.0)) throw ConfigError("invalid cme gate thresholds");
  if (!(c.drastic_fraction > 0.0)) throw ConfigError("cme.drastic_fraction must be > 0");
}

namespace {

using Grid = std::vector<double>;

Grid gaussian_blur(const Grid& src, int w, int h, double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double ks = 0.0;
  for (int i = -r; i <= r; ++i) ks += k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& v : k) v /= ks;
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x); };
  Grid tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[static_cast<std::size_t>(i + r)] * src[idx(std::clamp(x + i, 0, w - 1), y)];
      tmp[idx(x, y)] = s;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[static_cast<std::size_t>(i + r)] * tmp[idx(x, std::clamp(y + i, 0, h - 1))];
      out[idx(x, y)] = s;
    }
  }
  return out;
}

double refine(double l, double c, double r) {
  const double d = l - 2.0 * c + r;
  if (!(d < 0.0)) return 0.0;
  return std::clamp(0.5 * (l - r) / d, -0.5, 0.5);
}

}  // namespace

std::vector<Keypoint> detect(const Image& img, int max_n, double k, double sigma, double rel_threshold) {
  const Image g = to_gray(img);
  const int w = g.width, h = g.height;
  std::vector<Keypoint> out;
  if (w < 3 || h < 3 || max_n <= 0) return out;
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x); };
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  Grid ixx(n), iyy(n), ixy(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = 0.5 * (static_cast<double>(g.clamped(x + 1, y)) - g.clamped(x - 1, y));
      const double gy = 0.5 * (static_cast<double>(g.clamped(x, y + 1)) - g.clamped(x, y - 1));
      ixx[idx(x, y)] = gx * gx;
      iyy[idx(x, y)] = gy * gy;
      ixy[idx(x, y)] = gx * gy;
    }
  }
  ixx = gaussian_blur(ixx, w, h, sigma);
  iyy = gaussian_blur(iyy, w, h, sigma);
  ixy = gaussian_blur(ixy, w, h, sigma);
  Grid resp(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double tr = ixx[i] + iyy[i];
    resp[i] = ixx[i] * iyy[i] - ixy[i] * ixy[i] - k * tr * tr;
    peak = std::max(peak, resp[i]);
  }
  const double thresh = std::max(1e-12, rel_threshold * peak);
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const double v = resp[idx(x, y)];
      if (!(v > thresh)) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const double u = resp[idx(x + dx, y + dy)];
          // Ties go to the first pixel in raster order.
          const bool before = dy < 0 || (dy == 0 && dx < 0);
          if (u > v || (before && u == v)) {
            is_max = false;
            break;
          }
        }
      }
      if (!is_max) continue;
      const double ox = refine(resp[idx(x - 1, y)], v, resp[idx(x + 1, y)]);
      const double oy = refine(resp[idx(x, y - 1)], v, resp[idx(x, y + 1)]);
      out.push_back({{x + 0.5 + ox, y + 0.5 + oy}, v});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Keypoint& a, const Keypoint& b) { return a.response > b.response; });
  if (out.size() > static_cast<std::size_t>(max_n)) out.resize(static_cast<std::size_t>(max_n));
  return out;
}

std::optional<Descriptor> describe(const Image& img, const Keypoint& kp) {
  const int half = kDescriptorSide / 2;
  const int x0 = static_cast<int>(std::lround(kp.pos.x)) - half;
  const int y0 = static_cast<int>(std::lround(kp.pos.y)) - half;
  if (x0 < 0 || y0 < 0 || x0 + kDescriptorSide > img.width || y0 + kDescriptorSide > img.height) return std::nullopt;
  const bool color = img.channels == 3;
  Descriptor d(static_cast<std::size_t>(kDescriptorSide * kDescriptorSide));
  double mean = 0.0;
  for (int y = 0; y < kDescriptorSide; ++y) {
    for (int x = 0; x < kDescriptorSide; ++x) {
      double v = img.at(x0 + x, y0 + y);
      if (color) v = 0.299 * img.at(x0 + x, y0 + y, 0) + 0.587 * img.at(x0 + x, y0 + y, 1) + 0.114 * img.at(x0 + x, y0 + y, 2);
      d[static_cast<std::size_t>(y * kDescriptorSide + x)] = v;
      mean += v;
    }
  }
  mean /= static_cast<double>(d.size());
  double norm = 0.0;
  for (auto& v : d) {
    v -= mean;
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm < 1e-6) {
    std::fill(d.begin(), d.end(), 0.0);
  } else {
    for (auto& v : d) v /= norm;
  }
  return d;
}

std::vector<std::pair<int, int>> match_descriptors(const std::vector<Descriptor>& ref, const std::vector<Descriptor>& cur,
                                                   double ratio) {
  std::vector<std::pair<int, int>> out;
  if (ref.empty() || cur.empty()) return out;
  const std::size_t nr = ref.size(), nc = cur.size();
  std::vector<double> dist(nr * nc);
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < ref[i].size(); ++k) {
        const double d = ref[i][k] - cur[j][k];
        s += d * d;
      }
      dist[i * nc + j] = std::sqrt(s);
    }
  }
  std::vector<std::size_t> best_ref(nc);
  for (std::size_t j = 0; j < nc; ++j) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < nr; ++i) {
      if (dist[i * nc + j] < dist[arg * nc + j]) arg = i;
    }
    best_ref[j] = arg;
  }
  for (std::size_t i = 0; i < nr; ++i) {
    double b1 = std::numeric_limits<double>::infinity(), b2 = b1;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < nc; ++j) {
      const double d = dist[i * nc + j];
      if (d < b1) {
        b2 = b1;
        b1 = d;
        arg = j;
      } else if (d < b2) {
        b2 = d;
      }
    }
    if (best_ref[arg] != i) continue;
    // A lone candidate has no second-best and passes the ratio test.
    if (std::isfinite(b2) && !(b1 < ratio * b2)) continue;
    out.emplace_back(static_cast<int>(i), static_cast<int>(arg));
  }
  return out;
}

double msac_score(const Transform2D& t, const std::vector<Match>& matches, double tau) {
  const double t2 = tau * tau;
  double s = 0.0;
  for (const auto& m : matches) {
    const double r = reprojection_error(t, {m.ref, m.cur});
    s += std::isfinite(r) ? std::min(r * r, t2) : t2;
  }
  return s;
}

namespace {

bool degenerate_sample(MotionModel model, const std::vector<Correspondence>& s) {
  auto coincident = [](Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y) < 1e-6; };
  std::vector<Point> src, dst;
  for (const auto& c : s) {
    src.push_back(c.src);
    dst.push_back(c.dst);
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (coincident(src[i], src[j]) || coincident(dst[i], dst[j])) return true;
    }
  }
  if (model == MotionModel::affine || model == MotionModel::projective) {
    return has_collinear_triplet(src) || has_collinear_triplet(dst);
  }
  return false;
}

}  // namespace

MsacResult msac_fit(const std::vector<Match>& matches, MotionModel model, int iters, double tau, std::uint64_t seed) {
  const int m = minimal_sample_size(model);
  if (static_cast<int>(matches.size()) < m) {
    throw RangeError("msac_fit: " + std::to_string(matches.size()) + " matches, " + std::to_string(m) + " required");
  }
  Rng rng(seed);
  MsacResult best;
  best.transform = Transform2D::identity(model);
  best.score = msac_score(best.transform, matches, tau);
  bool any_valid = false;
  std::vector<Correspondence> sample(static_cast<std::size_t>(m));
  std::vector<std::size_t> picked;
  for (int it = 0; it < iters; ++it) {
    picked.clear();
    while (static_cast<int>(picked.size()) < m) {
      const std::size_t k = static_cast<std::size_t>(rng.below(matches.size()));
      if (std::find(picked.begin(), picked.end(), k) == picked.end()) picked.push_back(k);
    }
    for (int i = 0; i < m; ++i) {
      const Match& mt = matches[picked[static_cast<std::size_t>(i)]];
      sample[static_cast<std::size_t>(i)] = {mt.ref, mt.cur};
    }
    if (degenerate_sample(model, sample)) continue;
    Transform2D t;
    try {
      t = fit(model, sample);
    } catch (const DegenerateError&) {
      continue;
    }
    any_valid = true;
    const double s = msac_score(t, matches, tau);
    if (s < best.score) {
      best.transform = t;
      best.score = s;
    }
  }
  if (!any_valid) throw DegenerateError("msac_fit: every sample was degenerate");

  auto inlier_set = [&](const Transform2D& t) {
    std::vector<Correspondence> in;
    for (const auto& mt : matches) {
      if (reprojection_error(t, {mt.ref, mt.cur}) < tau) in.push_back({mt.ref, mt.cur});
    }
    return in;
  };
  // Refit on the consensus set until it stops improving.
  for (int round = 0; round < 3; ++round) {
    const auto in = inlier_set(best.transform);
    if (static_cast<int>(in.size()) < m) break;
    Transform2D t;
    try {
      t = fit(model, in);
    } catch (const DegenerateError&) {
      break;
    }
    const double s = msac_score(t, matches, tau);
    if (!(s <= best.score)) break;
    const bool same = t.matrix() == best.transform.matrix();
    best.transform = t;
    best.score = s;
    if (same) break;
  }
  best.inliers.resize(matches.size());
  for (std::size_t i = 0; i < matches.size(); ++i) {
    best.inliers[i] = reprojection_error(best.transform, {matches[i].ref, matches[i].cur}) < tau;
  }
  return best;
}

CmeResult estimate_camera_motion(const Image& ref, const Image& cur, const CmeConfig& cfg) {
  if (ref.width != cur.width || ref.height != cur.height) throw DimensionError("estimate_camera_motion: frame sizes differ");
  CmeResult res;
  res.transform = Transform2D::identity(cfg.model);
  const Image a = to_gray(ref), b = to_gray(cur);
  auto described = [&](const Image& img, std::vector<Point>& pts, std::vector<Descriptor>& desc) {
    for (const auto& kp : detect(img, cfg.max_keypoints, cfg.harris_k, cfg.harris_sigma, cfg.rel_threshold)) {
      if (auto d = describe(img, kp)) {
        pts.push_back(kp.pos);
        desc.push_back(std::move(*d));
      }
    }
  };
  std::vector<Point> pa, pb;
  std::vector<Descriptor> da, db;
  described(a, pa, da);
  described(b, pb, db);
  res.keypoints = static_cast<int>(std::min(pa.size(), pb.size()));
  const auto pairs = match_descriptors(da, db, cfg.ratio);
  std::vector<Match> matches;
  for (const auto& [i, j] : pairs) {
    const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
    double d = 0.0;
    for (std::size_t k = 0; k < da[ui].size(); ++k) d += (da[ui][k] - db[uj][k]) * (da[ui][k] - db[uj][k]);
    matches.push_back({pa[ui], pb[uj], std::sqrt(d)});
  }
  res.matches = static_cast<int>(matches.size());
  const int m = minimal_sample_size(cfg.model);
  if (res.matches < std::max(cfg.min_matches, m)) return res;
  try {
    const MsacResult fitres = msac_fit(matches, cfg.model, cfg.iters, cfg.tau, cfg.seed);
    res.inliers = static_cast<int>(std::count(fitres.inliers.begin(), fitres.inliers.end(), true));
    if (res.inliers < std::max(m + 2, cfg.min_matches / 2)) return res;
    res.transform = fitres.transform;
    res.estimated = true;
  } catch (const Error&) {
    res.inliers = 0;
  }
  return res;
}

bool motion_gate(const Image& prev, const Image& cur, double pixel_thresh, double ratio_thresh) {
  return frame_diff_ratio(prev, cur, pixel_thresh) > ratio_thresh;
}

double corner_displacement(const Transform2D& t, int width, int height) {
  const Point corners[] = {{0.0, 0.0}, {static_cast<double>(width), 0.0}, {0.0, static_cast<double>(height)},
                           {static_cast<double>(width), static_cast<double>(height)}};
  double s = 0.0;
  for (const Point& c : corners) {
    Point q;
    try {
      q = t.apply(c);
    } catch (const DegenerateError&) {
      return std::numeric_limits<double>::infinity();
    }
    s += std::hypot(q.x - c.x, q.y - c.y);
  }
  return s / 4.0;
}

bool drastic_motion(const Transform2D& t, int width, int height, double fraction) {
  return corner_displacement(t, width, height) > fraction * std::hypot(static_cast<double>(width), static_cast<double>(height));
}

Box compensate(const Box& box, const Transform2D& t) { return Box::from_center(t.apply(box.center()), box.w, box.h); }

}  // namespace rgbt::cme
