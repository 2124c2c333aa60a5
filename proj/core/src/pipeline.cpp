#include "rgbt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rgbt/error.hpp"

namespace rgbt {

void validate(const SwitcherThresholds& th) {
  const double v[] = {th.q_hi, th.s_hi, th.q_low, th.s_low, th.t_diff, th.t_disable, th.q_skip};
  for (double x : v) {
    if (!std::isfinite(x)) throw ConfigError("switcher thresholds must be finite");
  }
  if (!(th.q_hi > th.q_low && th.q_low >= 0.0)) throw ConfigError("switcher thresholds need q_hi > q_low >= 0");
}

std::string_view to_string(Source s) { return s == Source::appearance ? "appearance" : "motion"; }

Source decide(double q, double s_a, double s_m, const SwitcherThresholds& th) {
  if (q > th.q_hi && s_a > th.s_hi) return Source::appearance;
  if (q > th.q_low && s_a > th.s_low && (s_a - s_m) > th.t_diff) return Source::appearance;
  if (std::max(s_a, s_m) < th.t_disable) return Source::appearance;
  return Source::motion;
}

std::string_view to_string(FusionMode m) {
  switch (m) {
    case FusionMode::mfnet: return "mfnet";
    case FusionMode::constant: return "constant";
    case FusionMode::intensity: return "intensity";
    case FusionMode::quality: return "quality";
    case FusionMode::rgb_only: return "rgb";
    case FusionMode::thermal_only: return "thermal";
  }
  return "unknown";
}

FusionMode parse_fusion_mode(std::string_view s) {
  for (FusionMode m : {FusionMode::mfnet, FusionMode::constant, FusionMode::intensity, FusionMode::quality,
                       FusionMode::rgb_only, FusionMode::thermal_only}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown fusion mode '" + std::string(s) + "'");
}

std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::mf: return "MF";
    case Ablation::mf_cme: return "MF+CME";
    case Ablation::mf_cme_tmp: return "MF+CME+TMP";
    case Ablation::full: return "FULL";
  }
  return "unknown";
}

Ablation parse_ablation(std::string_view s) {
  for (Ablation a : {Ablation::mf, Ablation::mf_cme, Ablation::mf_cme_tmp, Ablation::full}) {
    if (to_string(a) == s) return a;
  }
  throw ConfigError("unknown ablation '" + std::string(s) + "' (expected MF, MF+CME, MF+CME+TMP or FULL)");
}

void apply_ablation(TrackerConfig& cfg, Ablation a) {
  cfg.enable_cme = a != Ablation::mf;
  cfg.enable_tmp = a == Ablation::mf_cme_tmp || a == Ablation::full;
  cfg.enable_refine = a == Ablation::full;
}

Box refine_box(const Box& box, const std::vector<Box>& detections) {
  const Box* best = nullptr;
  double best_iou = 0.5;
  for (const Box& d : detections) {
    if (!d.valid()) continue;
    const double v = iou(box, d);
    if (v > best_iou) {
      best_iou = v;
      best = &d;
    }
  }
  return best ? *best : box;
}

Tracker::Tracker(TrackerConfig cfg, fusion::MfNet net) : cfg_(std::move(cfg)), net_(std::move(net)) {
  cf::validate(cfg_.cf);
  cme::validate(cfg_.cme);
  validate(cfg_.switcher);
  if (!(cfg_.constant_weight >= 0.0 && cfg_.constant_weight <= 1.0)) throw ConfigError("constant fusion weight must lie in [0, 1]");
}

Tracker::Tracker(TrackerConfig cfg) : Tracker(std::move(cfg), fusion::MfNet(fusion::MfNetConfig{})) {}

void Tracker::init(const Image& rgb, const Image& t, const Box& box) {
  if (rgb.width != t.width || rgb.height != t.height) throw DimensionError("RGB and thermal frames differ in size");
  if (!box.valid()) throw DegenerateError("tracker init: invalid box");
  const Image tg = to_gray(t);
  cf_rgb_ = cf::cf_init(rgb, box, cfg_.cf);
  cf_t_ = cf::cf_init(tg, box, cfg_.cf);
  kf_ = motion::kf_init(box.center(), cfg_.kf);
  template_ = tm::build_template(rgb, box);
  const Image tp = sample_patch(tg, box.center(), box.w, box.h, std::max(1, static_cast<int>(std::lround(box.w))),
                                std::max(1, static_cast<int>(std::lround(box.h))));
  thermal_ref_ = std::max(1e-6, std::accumulate(tp.data.begin(), tp.data.end(), 0.0) / static_cast<double>(tp.data.size()));
  box_ = box;
  prev_rgb_ = rgb;
  prev_t_ = tg;
  cur_rgb_ = rgb;
  cur_t_ = tg;
  frame_ = 0;
  motion_run_ = 0;
  stepped_ = false;
  initialized_ = true;
}

fusion::FusionWeights Tracker::weights(const Image& rgb, const Image& t, Point center) {
  const int m = cf_rgb_.map_w, n = cf_rgb_.map_h;
  switch (cfg_.fusion) {
    case FusionMode::mfnet: {
      const double ww = cf_rgb_.target_w * cf_rgb_.window_ratio_x;
      const double wh = cf_rgb_.target_h * cf_rgb_.window_ratio_y;
      const int p = net_.patch();
      return fusion::mfnet_forward(net_, sample_patch(rgb, center, ww, wh, p, p), sample_patch(t, center, ww, wh, p, p), m, n);
    }
    case FusionMode::constant: return fusion::compose(1.0, fusion::constant_fuse(cfg_.constant_weight, m, n));
    case FusionMode::rgb_only: return fusion::compose(1.0, fusion::constant_fuse(1.0, m, n));
    case FusionMode::thermal_only: return fusion::compose(1.0, fusion::constant_fuse(0.0, m, n));
    default: return fusion::compose(1.0, Map(m, n, 1, 0.5));  // per-map modes fill in below
  }
}

FrameResult Tracker::step(const Image& rgb, const Image& t) {
  if (!initialized_) throw StateError("tracker step before init");
  if (rgb.width != prev_rgb_.width || rgb.height != prev_rgb_.height || t.width != rgb.width || t.height != rgb.height) {
    throw DimensionError("frame size differs from the initial frame");
  }
  ++frame_;
  stepped_ = true;
  prev_rgb_ = std::move(cur_rgb_);
  prev_t_ = std::move(cur_t_);
  cur_rgb_ = rgb;
  cur_t_ = to_gray(t);
  const Image& tg = cur_t_;

  FrameResult r;
  Box search = box_;

  // (1) camera motion
  if (cfg_.enable_cme) {
    const Image& prev = cfg_.cme.use_thermal ? prev_t_ : prev_rgb_;
    const Image& cur = cfg_.cme.use_thermal ? cur_t_ : cur_rgb_;
    r.cme_gate = cme::motion_gate(prev, cur, cfg_.cme.gate_pixel, cfg_.cme.gate_ratio);
    if (r.cme_gate) {
      const cme::CmeResult est = cme::estimate_camera_motion(prev, cur, cfg_.cme);
      r.cme_estimated = est.estimated;
      if (est.estimated) {
        r.camera = est.transform;
        search = cme::compensate(box_, r.camera);
        motion::kf_compensate(kf_, r.camera);
        r.suspended = cme::drastic_motion(r.camera, rgb.width, rgb.height, cfg_.cme.drastic_fraction);
      }
    }
  }
  const Point center = search.center();
  const Point predicted = motion::kf_predict(kf_);
  r.motion_box = Box::from_center(predicted, box_.w, box_.h);

  // (2) drastic motion: thermal tracker alone, no fusion / TMP / refinement
  if (r.suspended) {
    const cf::CfResponse resp = cf::cf_respond(cf_t_, tg, center);
    const auto k = static_cast<std::size_t>(resp.best);
    r.box = cf::locate(cf_t_, resp.maps[k], center, resp.scales[k]);
    r.q = cf::quality(resp.maps[k]);
    r.source = Source::appearance;
    r.appearance_box = r.box;
    return r;
  }

  // (3) dual appearance trackers + fusion
  const cf::CfResponse ra = cf::cf_respond(cf_rgb_, rgb, center);
  const cf::CfResponse rt = cf::cf_respond(cf_t_, tg, center);
  const fusion::FusionWeights fw = weights(rgb, tg, center);
  r.w_g = fw.w_g;
  r.mean_wf = std::accumulate(fw.w_f.data.begin(), fw.w_f.data.end(), 0.0) / static_cast<double>(fw.w_f.data.size());
  Image patch_t;
  if (cfg_.fusion == FusionMode::intensity) {
    patch_t = sample_patch(tg, center, cf_t_.target_w * cf_t_.window_ratio_x, cf_t_.target_h * cf_t_.window_ratio_y,
                           cf_t_.tmpl_w, cf_t_.tmpl_h);
  }
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  std::vector<ResponseMap> fused;
  fused.reserve(ra.maps.size());
  for (std::size_t k = 0; k < ra.maps.size(); ++k) {
    switch (cfg_.fusion) {
      case FusionMode::quality: fused.push_back(fusion::quality_fuse(ra.maps[k], rt.maps[k])); break;
      case FusionMode::intensity: fused.push_back(fusion::intensity_fuse(ra.maps[k], rt.maps[k], thermal_ref_, patch_t)); break;
      default: fused.push_back(fusion::fuse_responses(ra.maps[k], rt.maps[k], fw.w_f)); break;
    }
    const double v = cf::max_value(fused.back());
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  r.appearance_box = cf::locate(cf_rgb_, fused[best], center, ra.scales[best]);
  r.q = cf::quality(fused[best]);
  r.box = r.appearance_box;
  r.source = Source::appearance;

  // target motion prediction
  if (cfg_.enable_tmp) {
    if (r.q > cfg_.switcher.q_skip) {
      r.tm_skipped = true;
    } else {
      r.s_a = tm::similarity(template_, rgb, r.appearance_box);
      r.s_m = tm::similarity(template_, rgb, r.motion_box);
      r.decided = true;
      r.source = decide(r.q, r.s_a, r.s_m, cfg_.switcher);
      if (r.source == Source::motion) r.box = r.motion_box;
    }
  }

  // box refinement on the visible frame
  if (r.source == Source::appearance && cfg_.enable_refine && hook_) {
    const Box refined = refine_box(r.box, hook_(rgb, r.box));
    r.refined = !(refined == r.box);
    r.box = refined;
  }
  return r;
}

void Tracker::update_models(const FrameResult& r) {
  if (!initialized_ || !stepped_) throw StateError("update_models without a preceding step");
  if (r.source == Source::appearance) {
    cf::cf_update(cf_rgb_, cur_rgb_, r.box);
    cf::cf_update(cf_t_, cur_t_, r.box);
    motion::kf_update(kf_, r.box.center());
    motion_run_ = 0;
  } else {
    ++motion_run_;
    if (cfg_.kf_zero_velocity_after > 0 && motion_run_ >= cfg_.kf_zero_velocity_after) {
      kf_.x(1) = 0.0;
      kf_.x(3) = 0.0;
    }
  }
  box_ = r.box;
  stepped_ = false;
}

FrameResult Tracker::track(const Image& rgb, const Image& t) {
  FrameResult r = step(rgb, t);
  update_models(r);
  return r;
}

}  // namespace rgbt
