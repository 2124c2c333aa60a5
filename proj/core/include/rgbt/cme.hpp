#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rgbt/geom.hpp"
#include "rgbt/image.hpp"

namespace rgbt::cme {

struct Keypoint {
  Point pos;  // continuous pixel coordinates
  double response = 0.0;
};

using Descriptor = std::vector<double>;

struct Match {
  Point ref;
  Point cur;
  double distance = 0.0;
};

struct CmeConfig {
  MotionModel model = MotionModel::affine;
  int max_keypoints = 400;
  double harris_k = 0.04;
  double harris_sigma = 1.0;
  double rel_threshold = 0.01;  // keypoints must exceed this fraction of the strongest response
  double ratio = 0.8;
  int iters = 500;
  double tau = 3.0;
  int min_matches = 8;
  std::uint64_t seed = 1;
  double gate_pixel = 0.1;
  double gate_ratio = 0.05;
  double drastic_fraction = 0.2;
  bool use_thermal = true;

  friend bool operator==(const CmeConfig&, const CmeConfig&) = default;
};

void validate(const CmeConfig& cfg);

/// Harris corners after 3x3 non-maximum suppression, strongest first,
/// with separable quadratic sub-pixel refinement.
std::vector<Keypoint> detect(const Image& img, int max_n, double k = 0.04, double sigma = 1.0,
                             double rel_threshold = 0.01);

constexpr int kDescriptorSide = 16;

/// 16x16 mean-subtracted unit descriptor; nullopt within 8 px of the border.
std::optional<Descriptor> describe(const Image& img, const Keypoint& kp);

/// Mutual nearest neighbours passing best / second-best < ratio.
std::vector<std::pair<int, int>> match_descriptors(const std::vector<Descriptor>& ref, const std::vector<Descriptor>& cur,
                                                   double ratio = 0.8);

struct MsacResult {
  Transform2D transform;
  std::vector<bool> inliers;
  double score = 0.0;
};

/// Truncated-quadratic consensus: score = sum min(r^2, tau^2); the best
/// hypothesis is refit on its inliers (r < tau). Throws RangeError with too
/// few matches and DegenerateError when every sample is degenerate.
MsacResult msac_fit(const std::vector<Match>& matches, MotionModel model, int iters = 500, double tau = 3.0,
                    std::uint64_t seed = 1);

double msac_score(const Transform2D& t, const std::vector<Match>& matches, double tau);

struct CmeResult {
  Transform2D transform;  // maps reference-frame points into the current frame
  bool estimated = false;  // false: identity fallback
  int keypoints = 0;
  int matches = 0;
  int inliers = 0;
};

CmeResult estimate_camera_motion(const Image& ref, const Image& cur, const CmeConfig& cfg = {});

/// True iff the fraction of changed pixels strictly exceeds ratio_thresh.
bool motion_gate(const Image& prev, const Image& cur, double pixel_thresh = 0.1, double ratio_thresh = 0.05);

/// Mean displacement of the four frame corners, px.
double corner_displacement(const Transform2D& t, int width, int height);

/// True iff corner_displacement exceeds fraction x frame diagonal.
bool drastic_motion(const Transform2D& t, int width, int height, double fraction = 0.2);

/// Box centre mapped through t; size kept.
Box compensate(const Box& box, const Transform2D& t);

}  // namespace rgbt::cme
