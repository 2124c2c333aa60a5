#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rgbt/cftrack.hpp"
#include "rgbt/cme.hpp"
#include "rgbt/match.hpp"
#include "rgbt/mfnet.hpp"
#include "rgbt/motion.hpp"

namespace rgbt {

struct SwitcherThresholds {
  double q_hi = 210.0;
  double s_hi = 15.0;
  double q_low = 135.0;
  double s_low = 17.0;
  double t_diff = 3.0;
  double t_disable = 2.0;
  double q_skip = 250.0;

  friend bool operator==(const SwitcherThresholds&, const SwitcherThresholds&) = default;
};

void validate(const SwitcherThresholds& th);

enum class Source { appearance, motion };

std::string_view to_string(Source s);

/// Appearance iff (q > q_hi and s_A > s_hi)
///          or (q > q_low and s_A > s_low and s_A - s_M > t_diff)
///          or max(s_A, s_M) < t_disable.
Source decide(double q, double s_a, double s_m, const SwitcherThresholds& th);

/// How the two response maps are combined.
enum class FusionMode { mfnet, constant, intensity, quality, rgb_only, thermal_only };

std::string_view to_string(FusionMode m);
FusionMode parse_fusion_mode(std::string_view s);

/// Module ladder: MF, MF+CME, MF+CME+TMP, FULL (adds box refinement).
enum class Ablation { mf, mf_cme, mf_cme_tmp, full };

std::string_view to_string(Ablation a);
Ablation parse_ablation(std::string_view s);

struct TrackerConfig {
  cf::CfConfig cf;
  cme::CmeConfig cme;
  motion::KalmanConfig kf;
  SwitcherThresholds switcher;
  FusionMode fusion = FusionMode::mfnet;
  double constant_weight = 0.5;
  bool enable_cme = true;
  bool enable_tmp = true;
  bool enable_refine = false;
  int kf_zero_velocity_after = 0;  // consecutive motion frames before velocity is dropped; 0 = never

  friend bool operator==(const TrackerConfig&, const TrackerConfig&) = default;
};

/// Switches the module flags to the given rung of the ladder.
void apply_ablation(TrackerConfig& cfg, Ablation a);

/// Provider of candidate boxes around a region of the visible frame.
using RefineHook = std::function<std::vector<Box>(const Image& rgb, const Box& region)>;

/// Highest-IoU detection if it overlaps `box` by more than 0.5, else `box`.
Box refine_box(const Box& box, const std::vector<Box>& detections);

struct FrameResult {
  Box box;
  Source source = Source::appearance;
  bool suspended = false;     // drastic camera motion: thermal tracker alone
  bool cme_gate = false;      // frame difference large enough to run CME
  bool cme_estimated = false;
  Transform2D camera = Transform2D::identity();
  double q = 0.0;
  double s_a = 0.0;
  double s_m = 0.0;
  bool tm_skipped = false;    // q above q_skip, template matching not run
  bool decided = false;       // the switcher was consulted
  double w_g = 0.0;
  double mean_wf = 0.0;
  bool refined = false;
  Box appearance_box;
  Box motion_box;
};

/// One tracking session over a paired RGB/thermal stream.
class Tracker {
 public:
  Tracker(TrackerConfig cfg, fusion::MfNet net);
  explicit Tracker(TrackerConfig cfg);

  void set_refine_hook(RefineHook hook) { hook_ = std::move(hook); }

  void init(const Image& rgb, const Image& t, const Box& box);

  /// Localises the target in the next frame pair without touching the models.
  FrameResult step(const Image& rgb, const Image& t);

  /// Update scheme for the frame passed to the last step().
  void update_models(const FrameResult& r);

  /// step() followed by update_models().
  FrameResult track(const Image& rgb, const Image& t);

  bool initialized() const { return initialized_; }
  const cf::CfState& cf_rgb() const { return cf_rgb_; }
  const cf::CfState& cf_t() const { return cf_t_; }
  const motion::KalmanState& kalman() const { return kf_; }
  const TrackerConfig& config() const { return cfg_; }
  int frame_index() const { return frame_; }

 private:
  fusion::FusionWeights weights(const Image& rgb, const Image& t, Point center);

  TrackerConfig cfg_;
  fusion::MfNet net_;
  RefineHook hook_;
  bool initialized_ = false;
  int frame_ = 0;
  cf::CfState cf_rgb_;
  cf::CfState cf_t_;
  motion::KalmanState kf_;
  tm::Template template_;
  double thermal_ref_ = 1.0;  // mean target intensity in the first thermal frame
  Box box_;
  Image prev_rgb_, prev_t_;
  Image cur_rgb_, cur_t_;
  int motion_run_ = 0;
  bool stepped_ = false;
};

}  // namespace rgbt
