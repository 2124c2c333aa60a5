#include "rgbt/motion.hpp"

#include <Eigen/LU>
#include <cmath>

#include "rgbt/error.hpp"

namespace rgbt::motion {

Mat4 transition() {
  Mat4 a;
  a << 1, 1, 0, 0,
       0, 1, 0, 0,
       0, 0, 1, 1,
       0, 0, 0, 1;
  return a;
}

Mat24 measurement() {
  Mat24 h;
  h << 1, 0, 0, 0,
       0, 0, 1, 0;
  return h;
}

Mat4 process_noise() { return Vec4(25, 10, 25, 10).asDiagonal(); }

Mat2 measurement_noise() { return Eigen::Vector2d(25, 25).asDiagonal(); }

KalmanState kf_init(Point center, const KalmanConfig& cfg) {
  if (!std::isfinite(center.x) || !std::isfinite(center.y)) throw RangeError("kf_init: non-finite centre");
  KalmanState s;
  s.x << center.x, 0.0, center.y, 0.0;
  s.P = Vec4(cfg.p0_pos, cfg.p0_vel, cfg.p0_pos, cfg.p0_vel).asDiagonal();
  return s;
}

Point kf_predict(KalmanState& s) {
  const Mat4 a = transition();
  s.x = a * s.x;
  s.P = a * s.P * a.transpose() + process_noise();
  s.predicted = true;
  return s.center();
}

void kf_update(KalmanState& s, Point z) {
  if (!s.predicted) throw StateError("kf_update called without a preceding kf_predict");
  const Mat24 h = measurement();
  const Mat2 innovation_cov = h * s.P * h.transpose() + measurement_noise();
  Eigen::FullPivLU<Mat2> lu(innovation_cov);
  if (!lu.isInvertible()) throw DegenerateError("kf_update: singular innovation covariance");
  const Eigen::Matrix<double, 4, 2> k = s.P * h.transpose() * lu.inverse();
  const Eigen::Vector2d innovation = Eigen::Vector2d(z.x, z.y) - h * s.x;
  s.x += k * innovation;
  s.P = (Mat4::Identity() - k * h) * s.P;
  s.predicted = false;
}

void kf_compensate(KalmanState& s, const Transform2D& t) {
  const Point p{s.x(0), s.x(2)};
  const Point q = t.apply(p);
  // Finite-difference Jacobian handles the projective case too.
  const double h = 1.0;
  const Point qx = t.apply({p.x + h, p.y});
  const Point qy = t.apply({p.x, p.y + h});
  Eigen::Matrix2d j;
  j << (qx.x - q.x) / h, (qy.x - q.x) / h, (qx.y - q.y) / h, (qy.y - q.y) / h;
  const Eigen::Vector2d v = j * Eigen::Vector2d(s.x(1), s.x(3));
  s.x << q.x, v(0), q.y, v(1);
}

}  // namespace rgbt::motion
