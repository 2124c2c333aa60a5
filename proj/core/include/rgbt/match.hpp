#pragma once

#include <vector>

#include "rgbt/geom.hpp"
#include "rgbt/image.hpp"

namespace rgbt::tm {

constexpr int kTemplateSize = 64;
constexpr int kPatchSize = 8;
constexpr int kGrid = kTemplateSize / kPatchSize;
constexpr int kCells = kGrid * kGrid;

/// Fixed-resolution target template split into an 8x8 grid of descriptors.
struct Template {
  Image patch;  // 64x64 gray
  std::vector<std::vector<double>> descriptors;  // kCells unit (or zero) vectors, row-major grid
};

/// Mean-subtracted, L2-normalised descriptors of a 64x64 gray patch.
std::vector<std::vector<double>> grid_descriptors(const Image& patch64);

/// Crop at `box`, resample to 64x64 gray, describe.
Template build_template(const Image& frame, const Box& box);

/// Candidate region resampled to the template resolution.
Image candidate_patch(const Image& frame, const Box& box);

/// Diversity-weighted nearest-neighbour similarity; the maximum (identity
/// match) equals kCells. Candidate must be 64x64.
double ddis_similarity(const Template& tpl, const Image& candidate);

/// Maps the raw score from [0, kCells] onto [0, 25].
inline double rescale(double raw) { return raw * 25.0 / kCells; }

/// rescale(ddis_similarity(tpl, candidate_patch(frame, box))).
double similarity(const Template& tpl, const Image& frame, const Box& box);

}  // namespace rgbt::tm
