#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <string_view>

namespace rgbt {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned box in continuous pixel coordinates: (left, top, width, height).
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  Point center() const { return {x + 0.5 * w, y + 0.5 * h}; }
  double area() const { return w * h; }
  bool valid() const;

  static Box from_center(Point c, double w, double h) { return {c.x - 0.5 * w, c.y - 0.5 * h, w, h}; }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Intersection over union; 0 for disjoint boxes.
double iou(const Box& a, const Box& b);

/// Euclidean distance between box centers.
double center_error(const Box& a, const Box& b);

enum class MotionModel { translation, similarity, affine, projective };

std::string_view to_string(MotionModel model);
MotionModel parse_motion_model(std::string_view name);

/// Number of correspondences that exactly determine the model.
int minimal_sample_size(MotionModel model);

/// Homogeneous 2-D transform tagged with the model class it belongs to.
/// Non-projective transforms keep the bottom row at exactly (0, 0, 1).
class Transform2D {
 public:
  Transform2D() = default;
  Transform2D(MotionModel model, const Eigen::Matrix3d& m);

  static Transform2D identity(MotionModel model = MotionModel::affine);
  static Transform2D translation(double dx, double dy);
  static Transform2D similarity(double scale, double angle_rad, double dx, double dy);

  MotionModel model() const { return model_; }
  const Eigen::Matrix3d& matrix() const { return m_; }

  Point apply(Point p) const;
  Transform2D inverse() const;

  /// Matrix product `*this · rhs`; the model is the more general of the two.
  Transform2D operator*(const Transform2D& rhs) const;

 private:
  MotionModel model_ = MotionModel::affine;
  Eigen::Matrix3d m_ = Eigen::Matrix3d::Identity();
};

inline Point apply(const Transform2D& t, Point p) { return t.apply(p); }

struct Correspondence {
  Point src;
  Point dst;
};

/// True if any three of the points are (numerically) collinear.
bool has_collinear_triplet(std::span<const Point> pts, double tol = 1e-6);

/// Least-squares transform of the given class mapping src -> dst.
/// Throws DegenerateError for rank-deficient configurations and RangeError
/// when fewer than minimal_sample_size(model) pairs are given.
Transform2D fit(MotionModel model, std::span<const Correspondence> pairs);

/// Reprojection distance |t(src) - dst|; +inf if the projection degenerates.
double reprojection_error(const Transform2D& t, const Correspondence& c);

}  // namespace rgbt
