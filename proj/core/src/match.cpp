#include "rgbt/match.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rgbt/error.hpp"

namespace rgbt::tm {

std::vector<std::vector<double>> grid_descriptors(const Image& patch64) {
  if (patch64.width != kTemplateSize || patch64.height != kTemplateSize || patch64.channels != 1) {
    throw DimensionError("template matching expects a 64x64 gray patch");
  }
  std::vector<std::vector<double>> out(kCells, std::vector<double>(kPatchSize * kPatchSize));
  for (int gy = 0; gy < kGrid; ++gy) {
    for (int gx = 0; gx < kGrid; ++gx) {
      auto& d = out[static_cast<std::size_t>(gy * kGrid + gx)];
      double mean = 0.0;
      for (int y = 0; y < kPatchSize; ++y) {
        for (int x = 0; x < kPatchSize; ++x) {
          const double v = patch64.at(gx * kPatchSize + x, gy * kPatchSize + y);
          d[static_cast<std::size_t>(y * kPatchSize + x)] = v;
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
      // Flat patches (up to float rounding) describe as the zero vector.
      if (norm < 1e-6) {
        std::fill(d.begin(), d.end(), 0.0);
      } else {
        for (auto& v : d) v /= norm;
      }
    }
  }
  return out;
}

Image candidate_patch(const Image& frame, const Box& box) {
  if (!box.valid()) throw DegenerateError("template matching: degenerate box");
  return to_gray(sample_patch(frame, box.center(), box.w, box.h, kTemplateSize, kTemplateSize));
}

Template build_template(const Image& frame, const Box& box) {
  Template t;
  t.patch = candidate_patch(frame, box);
  t.descriptors = grid_descriptors(t.patch);
  return t;
}

double ddis_similarity(const Template& tpl, const Image& candidate) {
  if (candidate.width != kTemplateSize || candidate.height != kTemplateSize) {
    throw DimensionError("ddis_similarity: candidate must be resampled to 64x64");
  }
  const auto cand = grid_descriptors(to_gray(candidate));
  std::vector<int> nn(kCells);
  std::vector<int> hits(kCells, 0);
  for (int i = 0; i < kCells; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    const auto& c = cand[static_cast<std::size_t>(i)];
    for (int j = 0; j < kCells; ++j) {
      const auto& t = tpl.descriptors[static_cast<std::size_t>(j)];
      double d = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) d += (c[k] - t[k]) * (c[k] - t[k]);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    nn[static_cast<std::size_t>(i)] = arg;
    ++hits[static_cast<std::size_t>(arg)];
  }
  double score = 0.0;
  for (int i = 0; i < kCells; ++i) {
    const int j = nn[static_cast<std::size_t>(i)];
    const double dx = (i % kGrid) - (j % kGrid), dy = (i / kGrid) - (j / kGrid);
    score += (1.0 / hits[static_cast<std::size_t>(j)]) / (1.0 + std::sqrt(dx * dx + dy * dy));
  }
  return score;
}

double similarity(const Template& tpl, const Image& frame, const Box& box) {
  return rescale(ddis_similarity(tpl, candidate_patch(frame, box)));
}

}  // namespace rgbt::tm
