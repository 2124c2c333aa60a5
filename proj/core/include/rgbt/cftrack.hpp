#pragma once

#include <vector>

#include "rgbt/fft.hpp"
#include "rgbt/geom.hpp"
#include "rgbt/image.hpp"

namespace rgbt::cf {

struct CfConfig {
  double padding = 2.5;       // search window / target size
  double lambda = 1e-2;       // ridge regulariser
  double eta = 0.02;          // model learning rate
  int scales = 5;
  double scale_step = 1.02;
  double sigma_factor = 0.06; // label sigma = sigma_factor * sqrt(w h) px
  int max_template_px = 128;  // longest template side after resampling
  FeatureConfig features;

  friend bool operator==(const CfConfig&, const CfConfig&) = default;
};

/// Validates ranges; throws ConfigError.
void validate(const CfConfig& cfg);

/// Frequency-domain correlation filter for one modality.
struct CfState {
  CfConfig cfg;
  std::vector<Spectrum> num;  // per channel: conj(F(x_c)) F(y)
  Spectrum den;               // sum_c |F(x_c)|^2 + lambda
  Spectrum label;             // F(y)
  double target_w = 0.0;      // current target size, px
  double target_h = 0.0;
  double window_ratio_x = 0.0;  // search window / target size, per axis
  double window_ratio_y = 0.0;
  int tmpl_w = 0;  // template pixels
  int tmpl_h = 0;
  int map_w = 0;  // response cells (odd)
  int map_h = 0;
  Map window;     // cosine window at map resolution

  bool initialized() const { return !den.empty(); }
  int channels() const { return static_cast<int>(num.size()); }

  friend bool operator==(const CfState&, const CfState&) = default;
};

CfState cf_init(const Image& frame, const Box& box, const CfConfig& cfg);

struct CfResponse {
  std::vector<ResponseMap> maps;  // one per scale, previous centre at the map centre
  std::vector<double> scales;     // a^k, ascending
  int best = 0;                   // argmax of map maxima
};

CfResponse cf_respond(const CfState& state, const Image& frame, Point center);

/// Blends in the model learned at `box` with rate cfg.eta; adopts the box size.
void cf_update(CfState& state, const Image& frame, const Box& box);
/// Same with an explicit rate.
void cf_update(CfState& state, const Image& frame, const Box& box, double eta);

/// Windowed feature channels of the search region, M x N cells.
FeatureMap search_features(const CfState& state, const Image& frame, Point center, double scale);

/// Peak location in cell index space, refined by a parabolic fit over the
/// 3x3 neighbourhood of the integer argmax.
Point subcell_peak(const ResponseMap& r);

/// Box implied by a response map computed around `center` at pyramid `scale`.
Box locate(const CfState& state, const ResponseMap& r, Point center, double scale);

/// (max - mean) / (variance + 1e-12).
double psr(const ResponseMap& r);

/// psr(r) * max(r).
double quality(const ResponseMap& r);

double max_value(const ResponseMap& r);

}  // namespace rgbt::cf
