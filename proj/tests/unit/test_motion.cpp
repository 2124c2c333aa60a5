#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "rgbt/error.hpp"
#include "rgbt/motion.hpp"
#include "rgbt/rng.hpp"

using namespace rgbt;
using namespace rgbt::motion;

TEST(Kalman, Matrices) {
  Mat4 a;
  a << 1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 1;
  EXPECT_EQ(transition(), a);
  Mat24 h;
  h << 1, 0, 0, 0, 0, 0, 1, 0;
  EXPECT_EQ(measurement(), h);
  EXPECT_EQ(process_noise(), Vec4(25, 10, 25, 10).asDiagonal().toDenseMatrix());
  EXPECT_EQ(measurement_noise(), Eigen::Vector2d(25, 25).asDiagonal().toDenseMatrix());
}

TEST(Kalman, InitState) {
  const KalmanState s = kf_init({3, 4});
  EXPECT_EQ(s.x, Vec4(3, 0, 4, 0));
  EXPECT_DOUBLE_EQ(s.P(0, 0), 25.0);
  EXPECT_DOUBLE_EQ(s.P(1, 1), 100.0);
  EXPECT_THROW(kf_init({std::nan(""), 0}), RangeError);
}

TEST(Kalman, UpdateNeedsPredict) {
  KalmanState s = kf_init({0, 0});
  EXPECT_THROW(kf_update(s, {1, 1}), StateError);
  kf_predict(s);
  EXPECT_NO_THROW(kf_update(s, {1, 1}));
  EXPECT_THROW(kf_update(s, {1, 1}), StateError);
}

TEST(Kalman, ConvergesToConstantVelocity) {
  KalmanState s = kf_init({0, 0});
  for (int t = 1; t <= 60; ++t) {
    kf_predict(s);
    kf_update(s, {2.0 * t, -1.0 * t});
  }
  EXPECT_NEAR(s.x(1), 2.0, 1e-3);
  EXPECT_NEAR(s.x(3), -1.0, 1e-3);
  const Point p = kf_predict(s);
  EXPECT_NEAR(p.x, 122.0, 1e-2);
}

TEST(Kalman, PredictWithoutUpdateFollowsTransitionPowers) {
  KalmanState s = kf_init({1, 2});
  kf_predict(s);
  kf_update(s, {3, 3});
  const Vec4 x0 = s.x;
  for (int k = 1; k <= 5; ++k) {
    kf_predict(s);
    Mat4 ak = Mat4::Identity();
    for (int i = 0; i < k; ++i) ak = transition() * ak;
    EXPECT_TRUE(s.x.isApprox(ak * x0, 1e-12));
  }
}

TEST(Kalman, CameraCompensation) {
  KalmanState s = kf_init({10, 20});
  s.x(1) = 1.0;
  s.x(3) = 0.0;
  kf_compensate(s, Transform2D::translation(5, -2));
  EXPECT_DOUBLE_EQ(s.x(0), 15.0);
  EXPECT_DOUBLE_EQ(s.x(2), 18.0);
  EXPECT_DOUBLE_EQ(s.x(1), 1.0);
  KalmanState r = kf_init({0, 0});
  r.x(1) = 1.0;
  kf_compensate(r, Transform2D::similarity(2.0, 0.0, 0, 0));
  EXPECT_NEAR(r.x(1), 2.0, 1e-12);
}
