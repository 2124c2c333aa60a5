#include "rgbt/geom.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rgbt/error.hpp"

namespace rgbt {

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kProjectionEps = 1e-9;

bool rank_deficient(const Eigen::MatrixXd& a, int needed_rank) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() < needed_rank || s(0) <= 0.0) return true;
  return s(needed_rank - 1) < kRankTol * s(0);
}

std::vector<Point> sources(std::span<const Correspondence> pairs) {
  std::vector<Point> out;
  out.reserve(pairs.size());
  for (const auto& c : pairs) out.push_back(c.src);
  return out;
}

struct Centroids {
  Point src;
  Point dst;
};

Centroids centroids(std::span<const Correspondence> pairs) {
  Centroids c;
  for (const auto& p : pairs) {
    c.src.x += p.src.x;
    c.src.y += p.src.y;
    c.dst.x += p.dst.x;
    c.dst.y += p.dst.y;
  }
  const double n = static_cast<double>(pairs.size());
  c.src.x /= n;
  c.src.y /= n;
  c.dst.x /= n;
  c.dst.y /= n;
  return c;
}

// Linear part fitted on centred coordinates; translation recovered from centroids.
Eigen::Matrix3d with_translation(const Eigen::Matrix2d& lin, const Centroids& c) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m.topLeftCorner<2, 2>() = lin;
  const Eigen::Vector2d t = Eigen::Vector2d(c.dst.x, c.dst.y) - lin * Eigen::Vector2d(c.src.x, c.src.y);
  m(0, 2) = t(0);
  m(1, 2) = t(1);
  return m;
}

Transform2D fit_translation(std::span<const Correspondence> pairs) {
  const auto c = centroids(pairs);
  return Transform2D::translation(c.dst.x - c.src.x, c.dst.y - c.src.y);
}

Transform2D fit_similarity(std::span<const Correspondence> pairs) {
  const auto c = centroids(pairs);
  const auto n = static_cast<Eigen::Index>(pairs.size());
  // x' = a x - b y ; y' = b x + a y (centred)
  Eigen::MatrixXd a(2 * n, 2);
  Eigen::VectorXd rhs(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = pairs[i].src.x - c.src.x;
    const double y = pairs[i].src.y - c.src.y;
    a(2 * i, 0) = x;
    a(2 * i, 1) = -y;
    a(2 * i + 1, 0) = y;
    a(2 * i + 1, 1) = x;
    rhs(2 * i) = pairs[i].dst.x - c.dst.x;
    rhs(2 * i + 1) = pairs[i].dst.y - c.dst.y;
  }
  if (rank_deficient(a, 2)) throw DegenerateError("similarity fit: coincident source points");
  const Eigen::Vector2d ab = a.colPivHouseholderQr().solve(rhs);
  if (std::hypot(ab(0), ab(1)) < kRankTol) throw DegenerateError("similarity fit: zero scale");
  Eigen::Matrix2d lin;
  lin << ab(0), -ab(1), ab(1), ab(0);
  return Transform2D(MotionModel::similarity, with_translation(lin, c));
}

Transform2D fit_affine(std::span<const Correspondence> pairs) {
  const auto c = centroids(pairs);
  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::MatrixXd rhs(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = pairs[i].src.x - c.src.x;
    a(i, 1) = pairs[i].src.y - c.src.y;
    rhs(i, 0) = pairs[i].dst.x - c.dst.x;
    rhs(i, 1) = pairs[i].dst.y - c.dst.y;
  }
  if (rank_deficient(a, 2)) throw DegenerateError("affine fit: collinear source points");
  const Eigen::Matrix2d sol = a.colPivHouseholderQr().solve(rhs);
  const Eigen::Matrix2d lin = sol.transpose();
  if (std::abs(lin.determinant()) < kRankTol) throw DegenerateError("affine fit: singular linear part");
  return Transform2D(MotionModel::affine, with_translation(lin, c));
}

// Translate to centroid, scale so the mean distance is sqrt(2).
Eigen::Matrix3d normalizer(const std::vector<Point>& pts) {
  double cx = 0.0, cy = 0.0;
  for (const auto& p : pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(pts.size());
  cy /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += std::hypot(p.x - cx, p.y - cy);
  mean_dist /= static_cast<double>(pts.size());
  if (mean_dist < kRankTol) throw DegenerateError("projective fit: coincident points");
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 0) = s;
  t(1, 1) = s;
  t(0, 2) = -s * cx;
  t(1, 2) = -s * cy;
  return t;
}

Point hmul(const Eigen::Matrix3d& m, Point p) {
  const Eigen::Vector3d v = m * Eigen::Vector3d(p.x, p.y, 1.0);
  return {v(0) / v(2), v(1) / v(2)};
}

// Gauss-Newton on the forward reprojection error, h33 fixed at 1.
Eigen::Matrix3d refine_projective(const Eigen::Matrix3d& h0, std::span<const Correspondence> pairs) {
  auto cost = [&](const Eigen::Matrix3d& h) {
    double c = 0.0;
    for (const auto& p : pairs) {
      const Eigen::Vector3d v = h * Eigen::Vector3d(p.src.x, p.src.y, 1.0);
      if (std::abs(v(2)) < kProjectionEps) return std::numeric_limits<double>::infinity();
      const double ex = v(0) / v(2) - p.dst.x;
      const double ey = v(1) / v(2) - p.dst.y;
      c += ex * ex + ey * ey;
    }
    return c;
  };
  Eigen::Matrix3d h = h0 / h0(2, 2);
  double best = cost(h);
  const auto n = static_cast<Eigen::Index>(pairs.size());
  for (int iter = 0; iter < 10 && best > 0.0; ++iter) {
    Eigen::MatrixXd jac(2 * n, 8);
    Eigen::VectorXd res(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = pairs[i].src.x, y = pairs[i].src.y;
      const Eigen::Vector3d v = h * Eigen::Vector3d(x, y, 1.0);
      const double w = v(2);
      const double u = v(0) / w, q = v(1) / w;
      res(2 * i) = u - pairs[i].dst.x;
      res(2 * i + 1) = q - pairs[i].dst.y;
      jac.row(2 * i) << x / w, y / w, 1.0 / w, 0, 0, 0, -u * x / w, -u * y / w;
      jac.row(2 * i + 1) << 0, 0, 0, x / w, y / w, 1.0 / w, -q * x / w, -q * y / w;
    }
    const Eigen::VectorXd delta = jac.colPivHouseholderQr().solve(-res);
    Eigen::Matrix3d cand = h;
    cand(0, 0) += delta(0);
    cand(0, 1) += delta(1);
    cand(0, 2) += delta(2);
    cand(1, 0) += delta(3);
    cand(1, 1) += delta(4);
    cand(1, 2) += delta(5);
    cand(2, 0) += delta(6);
    cand(2, 1) += delta(7);
    const double c = cost(cand);
    if (!(c < best)) break;
    const double gain = best - c;
    h = cand;
    best = c;
    if (gain < 1e-14 * (1.0 + best)) break;
  }
  return h;
}

Transform2D fit_projective(std::span<const Correspondence> pairs) {
  std::vector<Point> src, dst;
  for (const auto& p : pairs) {
    src.push_back(p.src);
    dst.push_back(p.dst);
  }
  const Eigen::Matrix3d ts = normalizer(src);
  const Eigen::Matrix3d td = normalizer(dst);
  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(2 * n, 9), 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point s = hmul(ts, src[static_cast<std::size_t>(i)]);
    const Point d = hmul(td, dst[static_cast<std::size_t>(i)]);
    a.row(2 * i) << -s.x, -s.y, -1, 0, 0, 0, d.x * s.x, d.x * s.y, d.x;
    a.row(2 * i + 1) << 0, 0, 0, -s.x, -s.y, -1, d.y * s.x, d.y * s.y, d.y;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(7) < kRankTol * sv(0)) throw DegenerateError("projective fit: rank-deficient system");
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  Eigen::Matrix3d hm = td.inverse() * hn * ts;
  if (std::abs(hm(2, 2)) > kRankTol) {
    hm /= hm(2, 2);
  } else {
    hm /= hm.norm();
  }
  if (std::abs(hm.determinant()) < kRankTol * std::pow(hm.norm(), 3)) {
    throw DegenerateError("projective fit: singular homography");
  }
  if (n > 4 && std::abs(hm(2, 2)) > kRankTol) hm = refine_projective(hm, pairs);
  return Transform2D(MotionModel::projective, hm);
}

}  // namespace

bool Box::valid() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) && w > 0.0 && h > 0.0;
}

double iou(const Box& a, const Box& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double center_error(const Box& a, const Box& b) {
  const Point ca = a.center(), cb = b.center();
  return std::hypot(ca.x - cb.x, ca.y - cb.y);
}

std::string_view to_string(MotionModel model) {
  switch (model) {
    case MotionModel::translation: return "translation";
    case MotionModel::similarity: return "similarity";
    case MotionModel::affine: return "affine";
    case MotionModel::projective: return "projective";
  }
  return "affine";
}

MotionModel parse_motion_model(std::string_view name) {
  if (name == "translation") return MotionModel::translation;
  if (name == "similarity") return MotionModel::similarity;
  if (name == "affine") return MotionModel::affine;
  if (name == "projective") return MotionModel::projective;
  throw RangeError("unknown motion model '" + std::string(name) + "'");
}

int minimal_sample_size(MotionModel model) {
  switch (model) {
    case MotionModel::translation: return 1;
    case MotionModel::similarity: return 2;
    case MotionModel::affine: return 3;
    case MotionModel::projective: return 4;
  }
  return 3;
}

Transform2D::Transform2D(MotionModel model, const Eigen::Matrix3d& m) : model_(model), m_(m) {
  if (!m_.allFinite()) throw DegenerateError("transform has non-finite entries");
  if (model_ != MotionModel::projective) {
    m_(2, 0) = 0.0;
    m_(2, 1) = 0.0;
    m_(2, 2) = 1.0;
  }
  if (model_ == MotionModel::translation) m_.topLeftCorner<2, 2>().setIdentity();
  if (std::abs(m_.determinant()) < 1e-12) throw DegenerateError("transform is not invertible");
}

Transform2D Transform2D::identity(MotionModel model) { return Transform2D(model, Eigen::Matrix3d::Identity()); }

Transform2D Transform2D::translation(double dx, double dy) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 2) = dx;
  m(1, 2) = dy;
  return Transform2D(MotionModel::translation, m);
}

Transform2D Transform2D::similarity(double scale, double angle_rad, double dx, double dy) {
  if (!(scale > 0.0)) throw RangeError("similarity scale must be positive");
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  const double c = scale * std::cos(angle_rad), s = scale * std::sin(angle_rad);
  m(0, 0) = c;
  m(0, 1) = -s;
  m(1, 0) = s;
  m(1, 1) = c;
  m(0, 2) = dx;
  m(1, 2) = dy;
  return Transform2D(MotionModel::similarity, m);
}

Point Transform2D::apply(Point p) const {
  const double xw = m_(0, 0) * p.x + m_(0, 1) * p.y + m_(0, 2);
  const double yw = m_(1, 0) * p.x + m_(1, 1) * p.y + m_(1, 2);
  const double w = m_(2, 0) * p.x + m_(2, 1) * p.y + m_(2, 2);
  if (std::abs(w) < kProjectionEps) throw DegenerateError("point projects to infinity");
  return {xw / w, yw / w};
}

Transform2D Transform2D::inverse() const { return Transform2D(model_, m_.inverse()); }

Transform2D Transform2D::operator*(const Transform2D& rhs) const {
  return Transform2D(std::max(model_, rhs.model_), m_ * rhs.m_);
}

bool has_collinear_triplet(std::span<const Point> pts, double tol) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        const double ux = pts[j].x - pts[i].x, uy = pts[j].y - pts[i].y;
        const double vx = pts[k].x - pts[i].x, vy = pts[k].y - pts[i].y;
        const double cross = std::abs(ux * vy - uy * vx);
        const double scale = std::max({ux * ux + uy * uy, vx * vx + vy * vy, 1e-300});
        if (cross <= tol * scale) return true;
      }
    }
  }
  return false;
}

Transform2D fit(MotionModel model, std::span<const Correspondence> pairs) {
  const auto need = static_cast<std::size_t>(minimal_sample_size(model));
  if (pairs.size() < need) {
    throw RangeError("fit(" + std::string(to_string(model)) + ") needs at least " + std::to_string(need) +
                     " correspondences, got " + std::to_string(pairs.size()));
  }
  if ((model == MotionModel::affine || model == MotionModel::projective) && pairs.size() == need) {
    const auto pts = sources(pairs);
    if (has_collinear_triplet(pts)) throw DegenerateError("fit: collinear minimal sample");
  }
  switch (model) {
    case MotionModel::translation: return fit_translation(pairs);
    case MotionModel::similarity: return fit_similarity(pairs);
    case MotionModel::affine: return fit_affine(pairs);
    case MotionModel::projective: return fit_projective(pairs);
  }
  return fit_affine(pairs);
}

double reprojection_error(const Transform2D& t, const Correspondence& c) {
  const Eigen::Matrix3d& m = t.matrix();
  const double w = m(2, 0) * c.src.x + m(2, 1) * c.src.y + m(2, 2);
  if (std::abs(w) < kProjectionEps) return std::numeric_limits<double>::infinity();
  const double x = (m(0, 0) * c.src.x + m(0, 1) * c.src.y + m(0, 2)) / w;
  const double y = (m(1, 0) * c.src.x + m(1, 1) * c.src.y + m(1, 2)) / w;
  return std::hypot(x - c.dst.x, y - c.dst.y);
}

}  // namespace rgbt
