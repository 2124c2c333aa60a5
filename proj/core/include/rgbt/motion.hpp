#pragma once

#include <Eigen/Core>

#include "rgbt/geom.hpp"

namespace rgbt::motion {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat24 = Eigen::Matrix<double, 2, 4>;
using Mat2 = Eigen::Matrix2d;

/// Constant-velocity transition over state (p_x, v_x, p_y, v_y).
Mat4 transition();
/// Position measurement.
Mat24 measurement();
/// Process noise diag(25, 10, 25, 10).
Mat4 process_noise();
/// Measurement noise diag(25, 25).
Mat2 measurement_noise();

struct KalmanConfig {
  double p0_pos = 25.0;
  double p0_vel = 100.0;

  friend bool operator==(const KalmanConfig&, const KalmanConfig&) = default;
};

struct KalmanState {
  Vec4 x = Vec4::Zero();
  Mat4 P = Mat4::Zero();
  bool predicted = false;  // a predict is pending its (optional) update

  Point center() const { return {x(0), x(2)}; }
};

KalmanState kf_init(Point center, const KalmanConfig& cfg = {});

/// x <- A x, P <- A P A^T + Q; returns the predicted centre.
Point kf_predict(KalmanState& s);

/// Standard correction with the measured centre. Throws StateError if no
/// predict preceded it in this frame.
void kf_update(KalmanState& s, Point z);

/// Moves the filter into the current camera frame: position through `t`,
/// velocity through the linear part of `t` at the current position.
void kf_compensate(KalmanState& s, const Transform2D& t);

}  // namespace rgbt::motion
