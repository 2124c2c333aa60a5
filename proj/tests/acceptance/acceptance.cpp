// Acceptance suite: one PASS/FAIL line per criterion.
//
//   rgbt_acceptance [--cli <path to rgbt>] [--only N[,N...]]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rgbt/bench.hpp"
#include "rgbt/cme.hpp"
#include "rgbt/error.hpp"
#include "rgbt/fusion.hpp"
#include "rgbt/geom.hpp"
#include "rgbt/mfnet.hpp"
#include "rgbt/motion.hpp"
#include "rgbt/nnet.hpp"
#include "rgbt/pipeline.hpp"
#include "rgbt/rng.hpp"
#include "rgbt/synth.hpp"

using namespace rgbt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

std::string cli_path;

// ---------------------------------------------------------------- 1

Outcome constants() {
  Outcome o;
  motion::Mat4 a;
  a << 1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 1;
  motion::Mat24 h;
  h << 1, 0, 0, 0, 0, 0, 1, 0;
  motion::Mat4 q = motion::Mat4::Zero();
  q.diagonal() << 25, 10, 25, 10;
  motion::Mat2 r = motion::Mat2::Zero();
  r.diagonal() << 25, 25;
  o.check(motion::transition() == a, "A differs");
  o.check(motion::measurement() == h, "H differs");
  o.check(motion::process_noise() == q, "Q differs");
  o.check(motion::measurement_noise() == r, "R differs");

  const SwitcherThresholds th;
  o.check(th.q_hi == 210 && th.s_hi == 15 && th.q_low == 135 && th.s_low == 17 && th.t_diff == 3 && th.q_skip == 250,
          "switcher thresholds differ");

  const fusion::MfNet net{fusion::MfNetConfig{}};
  const auto& g0 = dynamic_cast<const nn::Conv2d&>(net.global_head.layer(0));
  o.check(g0.kh == 3 && g0.kw == 3 && g0.cout == 256, "global conv is not 3x3x256");
  const auto& g3 = dynamic_cast<const nn::Conv2d&>(net.global_head.layer(3));
  o.check(g3.kh == 9 && g3.kw == 9 && g3.cout == 1, "global output conv is not 9x9x1");
  int deconvs = 0;
  for (std::size_t i = 0; i < net.local_head.size(); ++i)
    deconvs += net.local_head.layer(i).kind() == nn::LayerKind::deconv2d ? 1 : 0;
  o.check(deconvs == 2, "local head has " + std::to_string(deconvs) + " deconv layers");
  if (o.pass) o.detail = "A H Q R, thresholds 210/15/135/17/3/250, heads 3x3x256 / 9x9x1 / 2 deconv";
  return o;
}

// ---------------------------------------------------------------- 2

Outcome fusion_endpoints() {
  Outcome o;
  Rng rng(2);
  ResponseMap a(31, 23), b(31, 23);
  for (auto& v : a.data) v = rng.uniform(-0.3, 1.2);
  for (auto& v : b.data) v = rng.uniform(-0.3, 1.2);
  o.check(fusion::fuse_responses(a, b, fusion::constant_fuse(1.0, 31, 23)) == a, "W_F=1 is not R_RGB");
  o.check(fusion::fuse_responses(a, b, fusion::constant_fuse(0.0, 31, 23)) == b, "W_F=0 is not R_T");
  for (double w : {0.0, 0.5, 1.0}) {
    const ResponseMap f = fusion::fuse_responses(a, b, fusion::constant_fuse(w, 31, 23));
    bool exact = true;
    for (std::size_t i = 0; i < f.data.size(); ++i) exact = exact && f.data[i] == w * a.data[i] + (1.0 - w) * b.data[i];
    o.check(exact, "sweep mismatch at w=" + fmt(w));
  }
  if (o.pass) o.detail = "bit-exact at W_F in {0, 1}; sweep {0, 0.5, 1} exact";
  return o;
}

// ---------------------------------------------------------------- 3

nn::Tensor random_tensor(int c, int h, int w, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  nn::Tensor t(c, h, w);
  Rng rng(seed);
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

Outcome gradients() {
  Outcome o;
  double worst = 0.0;
  auto layer = [&](std::unique_ptr<nn::Layer> l, const nn::Tensor& x, bool params, const char* name) {
    nn::Network n;
    n.add(std::move(l));
    n.init_params(3);
    for (auto& p : n.layer(0).params()) p += 0.05;
    double e = nn::grad_check_input(n, x, 1e-5);
    if (params) e = std::max(e, nn::grad_check(n, x, 1e-5));
    worst = std::max(worst, e);
    o.check(e <= 1e-4, std::string(name) + " rel err " + fmt(e));
  };
  layer(std::make_unique<nn::Conv2d>(3, 3, 2, 3, 2, 1), random_tensor(2, 7, 7, 11), true, "conv");
  layer(std::make_unique<nn::Deconv2d>(3, 3, 3, 2, 2, 1), random_tensor(3, 4, 4, 12), true, "deconv");
  layer(std::make_unique<nn::Relu>(), random_tensor(2, 5, 5, 13, 0.1, 1.0), false, "relu");
  layer(std::make_unique<nn::Sigmoid>(), random_tensor(2, 5, 5, 14), false, "sigmoid");
  layer(std::make_unique<nn::Lrn>(5, 0.5, 0.75, 2.0), random_tensor(7, 3, 3, 15, -2, 2), false, "lrn");
  layer(std::make_unique<nn::BilinearResize>(9, 7), random_tensor(2, 4, 5, 16), false, "resize");

  // composed fusion loss through both heads
  fusion::MfNetConfig cfg;
  cfg.patch = 32;
  cfg.stem_channels = {4, 8, 8};
  cfg.head_channels = 6;
  fusion::MfNet net(cfg);
  Rng rng(2);
  for (nn::Network* n : {&net.global_head, &net.local_head})
    for (std::size_t i = 0; i < n->size(); ++i)
      for (auto& p : n->layer(i).params()) p += rng.uniform(-0.1, 0.1);
  fusion::TrainPair pair;
  pair.p_rgb = Image(32, 32, 3);
  pair.p_t = Image(32, 32, 3);
  for (auto& v : pair.p_rgb.data) v = static_cast<float>(rng.uniform());
  for (auto& v : pair.p_t.data) v = static_cast<float>(rng.uniform());
  for (Map* m : {&pair.y, &pair.r_rgb, &pair.r_t}) {
    *m = Map(7, 7);
    for (auto& v : m->data) v = rng.uniform();
  }
  const nn::Tensor f = fusion::stem_features(net, pair.p_rgb, pair.p_t);
  double composed = 0.0;
  double frozen_leak = 0.0;
  for (auto stage : {fusion::TrainStage::global, fusion::TrainStage::local, fusion::TrainStage::joint}) {
    net.global_head.zero_grad();
    net.local_head.zero_grad();
    fusion::pair_loss_backward(net, f, pair, stage);
    for (nn::Network* n : {&net.global_head, &net.local_head}) {
      // the frozen head still shapes the loss but must receive no gradient
      const bool trained =
          stage == fusion::TrainStage::joint || (stage == fusion::TrainStage::global) == (n == &net.global_head);
      for (std::size_t li = 0; li < n->size(); ++li) {
        auto params = n->layer(li).params();
        auto grads = n->layer(li).grads();
        if (!trained) {
          for (double g : grads) frozen_leak = std::max(frozen_leak, std::abs(g));
          continue;
        }
        for (std::size_t i = 0; i < params.size(); i += 5) {
          const double keep = params[i];
          params[i] = keep + 1e-5;
          const double up = fusion::pair_loss(net, f, pair, stage);
          params[i] = keep - 1e-5;
          const double down = fusion::pair_loss(net, f, pair, stage);
          params[i] = keep;
          composed = std::max(composed, nn::relative_error(grads[i], (up - down) / 2e-5, 1e-5));
        }
      }
    }
  }
  o.check(composed <= 1e-4, "composed loss rel err " + fmt(composed));
  o.check(frozen_leak == 0.0, "frozen head gradient " + fmt(frozen_leak));
  if (o.pass) o.detail = "max rel err: layers " + fmt(worst, 3) + ", composed loss " + fmt(composed, 3);
  return o;
}

// ---------------------------------------------------------------- 4

std::vector<fusion::TrainPair> fusion_dataset(int n, int patch, bool symmetric, Rng& rng) {
  std::vector<fusion::TrainPair> out;
  const int m = 25;
  for (int k = 0; k < n; ++k) {
    fusion::TrainPair t;
    t.p_rgb = Image(patch, patch, 1);
    t.p_t = Image(patch, patch, 1);
    for (auto& v : t.p_rgb.data) v = static_cast<float>(rng.uniform());
    for (auto& v : t.p_t.data) v = static_cast<float>(rng.uniform());
    t.y = t.r_rgb = t.r_t = Map(m, m);
    const double cx = rng.uniform(6, 18), cy = rng.uniform(6, 18);
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < m; ++i) {
        const double y = std::exp(-0.5 * ((i - cx) * (i - cx) + (j - cy) * (j - cy)) / 4.0);
        t.y.at(i, j) = y;
        const double noise = rng.uniform();
        // symmetric: each cell's informative modality is a coin flip
        const bool rgb_informative = !symmetric || rng.uniform() < 0.5;
        t.r_rgb.at(i, j) = rgb_informative ? y : noise;
        t.r_t.at(i, j) = rgb_informative ? noise : y;
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

Outcome trainability() {
  Outcome o;
  const fusion::TrainSchedule schedule;
  const int epochs = schedule.global.epochs + schedule.local.epochs + schedule.joint.epochs;
  o.check(epochs <= 10, "schedule runs " + std::to_string(epochs) + " epochs");
  Rng rng(5);
  fusion::MfNet sep{fusion::MfNetConfig{}};
  const auto train = fusion_dataset(48, sep.patch(), false, rng);
  const auto held = fusion_dataset(16, sep.patch(), false, rng);
  const fusion::TrainReport rep = fusion::mfnet_train(sep, train, schedule);
  const double w_sep = fusion::mean_weight(sep, held);
  o.check(rep.final_loss <= 0.5 * rep.initial_loss, "loss " + fmt(rep.initial_loss) + " -> " + fmt(rep.final_loss));
  o.check(w_sep > 0.9, "held-out W_F " + fmt(w_sep));

  fusion::MfNet sym{fusion::MfNetConfig{}};
  const auto strain = fusion_dataset(48, sym.patch(), true, rng);
  const auto sheld = fusion_dataset(16, sym.patch(), true, rng);
  fusion::mfnet_train(sym, strain, schedule);
  const double w_sym = fusion::mean_weight(sym, sheld);
  o.check(w_sym >= 0.4 && w_sym <= 0.6, "symmetric W_F " + fmt(w_sym));
  if (o.pass) {
    o.detail = "separable loss " + fmt(rep.initial_loss) + " -> " + fmt(rep.final_loss) + " in " + std::to_string(epochs) +
               " epochs, held-out W_F " + fmt(w_sep, 3) + "; symmetric W_F " + fmt(w_sym, 3);
  }
  return o;
}

// ---------------------------------------------------------------- 5

// Reference filter on plain arrays, row-major 4x4.
struct RefKf {
  double x[4];
  double P[16];
};

void ref_predict(RefKf& s) {
  const double A[16] = {1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 1};
  const double Q[4] = {25, 10, 25, 10};
  double nx[4] = {};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) nx[i] += A[i * 4 + k] * s.x[k];
  double AP[16] = {}, nP[16] = {};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) AP[i * 4 + j] += A[i * 4 + k] * s.P[k * 4 + j];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) nP[i * 4 + j] += AP[i * 4 + k] * A[j * 4 + k];
  for (int i = 0; i < 4; ++i) nP[i * 5] += Q[i];
  std::copy(nx, nx + 4, s.x);
  std::copy(nP, nP + 16, s.P);
}

void ref_update(RefKf& s, double zx, double zy) {
  // H picks rows 0 and 2
  const int hi[2] = {0, 2};
  double S[4];
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) S[a * 2 + b] = s.P[hi[a] * 4 + hi[b]] + (a == b ? 25.0 : 0.0);
  const double det = S[0] * S[3] - S[1] * S[2];
  const double Si[4] = {S[3] / det, -S[1] / det, -S[2] / det, S[0] / det};
  double K[8];  // 4x2 = P H^T S^-1
  for (int i = 0; i < 4; ++i)
    for (int b = 0; b < 2; ++b) K[i * 2 + b] = s.P[i * 4 + hi[0]] * Si[0 * 2 + b] + s.P[i * 4 + hi[1]] * Si[1 * 2 + b];
  const double innov[2] = {zx - s.x[0], zy - s.x[2]};
  for (int i = 0; i < 4; ++i) s.x[i] += K[i * 2] * innov[0] + K[i * 2 + 1] * innov[1];
  double nP[16];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) nP[i * 4 + j] = s.P[i * 4 + j] - (K[i * 2] * s.P[hi[0] * 4 + j] + K[i * 2 + 1] * s.P[hi[1] * 4 + j]);
  std::copy(nP, nP + 16, s.P);
}

Outcome kalman() {
  Outcome o;
  Rng rng(17);
  const Point c0{50, 80};
  motion::KalmanState kf = motion::kf_init(c0);
  RefKf ref{{c0.x, 0, c0.y, 0}, {}};
  ref.P[0] = ref.P[10] = 25.0;
  ref.P[5] = ref.P[15] = 100.0;
  double worst = 0.0;
  int gated = 0;
  bool gated_exact = true;
  motion::Vec4 last = kf.x;  // state after the most recent update
  int gate_k = 0;
  for (int t = 1; t <= 100; ++t) {
    motion::kf_predict(kf);
    ref_predict(ref);
    if ((t % 20) >= 14) {  // six-frame gaps without measurements
      ++gated;
      ++gate_k;
      motion::Vec4 ext = last;
      for (int k = 0; k < gate_k; ++k) ext = motion::transition() * ext;
      gated_exact = gated_exact && ext == kf.x;
    } else {
      gate_k = 0;
      const double zx = c0.x + 2.0 * t + rng.normal() * 3.0;
      const double zy = c0.y - 1.0 * t + rng.normal() * 3.0;
      motion::kf_update(kf, {zx, zy});
      ref_update(ref, zx, zy);
      last = kf.x;
    }
    for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(kf.x(i) - ref.x[i]));
    for (int i = 0; i < 16; ++i) worst = std::max(worst, std::abs(kf.P(i / 4, i % 4) - ref.P[i]));
  }
  // exact A^k: gated predictions without any update reproduce repeated multiplication
  motion::KalmanState coast = motion::kf_init(c0);
  coast.x << 10, 1.5, 20, -0.5;
  const motion::Vec4 x0 = coast.x;
  bool powers = true;
  motion::Vec4 ext = x0;
  for (int k = 1; k <= 10; ++k) {
    motion::kf_predict(coast);
    ext = motion::transition() * ext;
    powers = powers && coast.x == ext;
  }
  o.check(worst <= 1e-9, "max deviation from reference " + fmt(worst));
  o.check(gated_exact && powers, "gated frames do not follow A^k");
  if (o.pass) o.detail = "100 frames (" + std::to_string(gated) + " gated), max deviation " + fmt(worst, 3) + ", A^k exact";
  return o;
}

// ---------------------------------------------------------------- 6

Image textured(int w, int h, std::uint64_t seed) {
  Image img(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto cell = static_cast<std::uint64_t>((x / 10) * 7919 + (y / 10) * 104729) ^ (seed * 0x9E3779B97F4A7C15ULL);
      Rng r(cell);
      img.at(x, y) = static_cast<float>(r.uniform());
    }
  }
  return img;
}

double corner_error(const Transform2D& a, const Transform2D& b, int w, int h) {
  double e = 0.0;
  for (Point p : {Point{0, 0}, Point{static_cast<double>(w), 0}, Point{0, static_cast<double>(h)},
                  Point{static_cast<double>(w), static_cast<double>(h)}}) {
    const Point u = a.apply(p), v = b.apply(p);
    e += std::hypot(u.x - v.x, u.y - v.y) / 4.0;
  }
  return e;
}

Outcome camera_motion() {
  Outcome o;
  const int w = 320, h = 240;
  double sum = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(100 + static_cast<std::uint64_t>(trial));
    Eigen::Matrix3d m;
    m << 1 + rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), rng.uniform(-8, 8), rng.uniform(-0.05, 0.05),
        1 + rng.uniform(-0.05, 0.05), rng.uniform(-8, 8), 0, 0, 1;
    const Transform2D truth(MotionModel::affine, m);
    const auto kps = cme::detect(textured(w, h, static_cast<std::uint64_t>(trial)), 200);
    std::vector<cme::Match> matches;
    for (const auto& k : kps) {
      Point q = truth.apply(k.pos);
      if (rng.uniform() < 0.3) {
        q = {rng.uniform(0, w), rng.uniform(0, h)};
      } else {
        q.x += 0.5 * rng.normal();
        q.y += 0.5 * rng.normal();
      }
      matches.push_back({k.pos, q, 0.0});
    }
    const cme::MsacResult r = cme::msac_fit(matches, MotionModel::affine, 500, 3.0, static_cast<std::uint64_t>(trial) + 1);
    sum += corner_error(r.transform, truth, w, h);
  }
  const double mean = sum / 20.0;
  o.check(mean < 0.5, "mean corner error " + fmt(mean));

  Eigen::Matrix3d p;
  p << 1.03, 0.04, 6, -0.02, 0.97, -4, 3e-5, -2e-5, 1;
  Eigen::Matrix3d a;
  a << 1.04, -0.03, 3, 0.02, 0.96, 2, 0, 0, 1;
  double exact = 0.0;
  for (const Transform2D& t : {Transform2D::translation(4.5, -2.25), Transform2D::similarity(1.05, 0.08, 3, -1),
                               Transform2D(MotionModel::affine, a), Transform2D(MotionModel::projective, p)}) {
    Rng rng(7);
    std::vector<cme::Match> clean;
    for (int i = 0; i < 60; ++i) {
      const Point q{rng.uniform(0, w), rng.uniform(0, h)};
      clean.push_back({q, t.apply(q), 0.0});
    }
    const cme::MsacResult r = cme::msac_fit(clean, t.model(), 100, 3.0, 1);
    const double e = corner_error(r.transform, t, w, h);
    exact = std::max(exact, e);
    o.check(r.transform.model() == t.model() && e < 1e-6, std::string(to_string(t.model())) + " error " + fmt(e));
  }
  if (o.pass) o.detail = "30% outliers, sigma 0.5: mean corner error " + fmt(mean, 3) + " px; clean fits <= " + fmt(exact, 2);
  return o;
}

// ---------------------------------------------------------------- 7

Outcome switcher() {
  Outcome o;
  SwitcherThresholds th;
  th.t_disable = 5.0;
  o.check(decide(300, 20, 5, th) == Source::appearance, "example 1");
  o.check(decide(150, 18, 14, th) == Source::appearance, "example 2");
  o.check(decide(100, 10, 20, th) == Source::motion, "example 3");
  o.check(decide(100, 2, 3, th) == Source::appearance, "example 4");

  TrackerConfig cfg;
  cfg.fusion = FusionMode::constant;
  apply_ablation(cfg, Ablation::mf_cme_tmp);
  int good = 0;
  std::string lags;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const synth::Generated g = synth::generate(synth::preset("occlusion", seed), seed + 1);
    const int onset = g.occluded.front();
    const int back = g.occluded.back() + 1;
    Tracker tr(cfg);
    tr.init(g.seq.rgb(0), g.seq.thermal(0), g.seq.gt_t[0]);
    int to_motion = -1, to_appearance = -1;
    for (std::size_t i = 1; i < g.seq.size(); ++i) {
      const FrameResult r = tr.track(g.seq.rgb(i), g.seq.thermal(i));
      const int f = static_cast<int>(i);
      if (to_motion < 0 && f >= onset && r.source == Source::motion) to_motion = f;
      if (to_appearance < 0 && f >= back && r.source == Source::appearance) to_appearance = f;
    }
    const bool ok = to_motion >= 0 && to_motion - onset <= 2 && to_appearance >= 0 && to_appearance - back <= 3;
    good += ok ? 1 : 0;
    lags += (lags.empty() ? "" : " ") + std::to_string(to_motion - onset) + "/" + std::to_string(to_appearance - back);
  }
  o.check(good >= 8, "occlusion flips in " + std::to_string(good) + "/10 seeds (lags " + lags + ")");
  if (o.pass) o.detail = "truth table exact; occlusion flips in " + std::to_string(good) + "/10 seeds (onset/return lags " + lags + ")";
  return o;
}

// ---------------------------------------------------------------- 8

Outcome joint_cues() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  TrackerConfig base;
  apply_ablation(base, Ablation::full);

  // fusion network trained on crossover and illumination-drop sequences
  std::vector<fusion::TrainPair> pairs;
  std::uint64_t k = 0;
  for (const char* name : {"crossover", "illum"}) {
    for (std::uint64_t v = 100; v < 103; ++v, ++k) {
      const synth::Generated g = synth::generate(synth::preset(name, v), 1);
      bench::PairOptions po;
      po.stride = 3;
      po.seed = 1 + k;
      auto p = bench::make_pairs(g.seq, base, fusion::MfNetConfig{}.patch, po);
      pairs.insert(pairs.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
    }
  }
  fusion::MfNet net{fusion::MfNetConfig{}};
  const fusion::TrainReport rep = fusion::mfnet_train(net, pairs, fusion::TrainSchedule{});

  auto score = [&](const bench::Sequence& s, FusionMode mode, Ablation a) {
    TrackerConfig c = base;
    c.fusion = mode;
    apply_ablation(c, a);
    return bench::msr(bench::run_ope(s, c, net).boxes, s).summary;
  };

  int wins = 0;
  std::string margins;
  for (std::uint64_t v = 0; v < 10; ++v) {
    const synth::Generated g = synth::generate(synth::preset("mixed", v), 1);
    const double full = score(g.seq, FusionMode::mfnet, Ablation::full);
    const double rgb = score(g.seq, FusionMode::rgb_only, Ablation::full);
    const double thermal = score(g.seq, FusionMode::thermal_only, Ablation::full);
    const double best = std::max(rgb, thermal);
    wins += full >= best ? 1 : 0;
    margins += (margins.empty() ? "" : " ") + fmt(full - best, 2);
  }
  int wins_mf = 0;
  std::string margins_mf;
  for (std::uint64_t v = 0; v < 10; ++v) {
    const synth::Generated g = synth::generate(synth::preset("occlusion_pan", v), 1);
    const double full = score(g.seq, FusionMode::mfnet, Ablation::full);
    const double mf = score(g.seq, FusionMode::mfnet, Ablation::mf);
    wins_mf += full >= mf ? 1 : 0;
    margins_mf += (margins_mf.empty() ? "" : " ") + fmt(full - mf, 2);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.check(wins >= 8, "FULL >= best single modality in " + std::to_string(wins) + "/10 (" + margins + ")");
  o.check(wins_mf >= 8, "FULL >= MF on occlusion+pan in " + std::to_string(wins_mf) + "/10 (" + margins_mf + ")");
  if (o.pass) {
    o.detail = "FULL >= best single in " + std::to_string(wins) + "/10, FULL >= MF on occlusion+pan in " +
               std::to_string(wins_mf) + "/10 (" + std::to_string(pairs.size()) + " pairs, loss " + fmt(rep.initial_loss) +
               " -> " + fmt(rep.final_loss) + ", " + fmt(secs, 3) + " s)";
  }
  return o;
}

// ---------------------------------------------------------------- 9

struct BruteMetrics {
  double msr = 0.0;
  double mpr = 0.0;
};

// Counting straight from the definitions, with an independent IoU.
BruteMetrics brute(const std::vector<Box>& traj, const std::vector<Box>& g1, const std::vector<Box>& g2) {
  auto iou = [](const Box& a, const Box& b) {
    const double w = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double h = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = w * h;
    return inter / (a.w * a.h + b.w * b.h - inter);
  };
  auto err = [](const Box& a, const Box& b) {
    return std::hypot(a.x + a.w / 2 - b.x - b.w / 2, a.y + a.h / 2 - b.y - b.h / 2);
  };
  BruteMetrics m;
  const double n = static_cast<double>(traj.size());
  for (int k = 0; k <= 20; ++k) {
    double hits = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) hits += std::max(iou(traj[i], g1[i]), iou(traj[i], g2[i])) > k * 0.05 ? 1 : 0;
    m.msr += hits / n / 21.0;
  }
  for (std::size_t i = 0; i < traj.size(); ++i) m.mpr += std::min(err(traj[i], g1[i]), err(traj[i], g2[i])) <= 20.0 ? 1.0 / n : 0.0;
  return m;
}

Outcome metrics() {
  Outcome o;
  Rng rng(9);
  std::vector<Box> g1, g2;
  for (int i = 0; i < 40; ++i) {
    const double x = 50 + 2 * i, y = 60 + i;
    g1.push_back({x, y, 30, 20});
    g2.push_back({x + 3, y - 2, 30, 20});
  }
  bench::Sequence seq;
  seq.gt_rgb = g1;
  seq.gt_t = g2;
  std::vector<std::vector<Box>> trajs(3);
  trajs[0] = g1;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    trajs[1].push_back({g1[i].x + rng.uniform(-25, 25), g1[i].y + rng.uniform(-25, 25), 30 * rng.uniform(0.6, 1.4), 20});
    trajs[2].push_back(i < 20 ? g2[i] : Box{300, 300, 10, 10});
  }
  double worst = 0.0;
  bool monotone = true;
  for (const auto& t : trajs) {
    const BruteMetrics b = brute(t, g1, g2);
    const bench::Curve s = bench::msr(t, seq), p = bench::mpr(t, seq, 20.0);
    worst = std::max({worst, std::abs(s.summary - b.msr), std::abs(p.summary - b.mpr)});
    for (std::size_t i = 1; i < s.values.size(); ++i) monotone = monotone && s.values[i] <= s.values[i - 1];
    for (std::size_t i = 1; i < p.values.size(); ++i) monotone = monotone && p.values[i] >= p.values[i - 1];
  }
  o.check(worst <= 1e-12, "deviation " + fmt(worst));
  o.check(monotone, "curve not monotone");
  if (o.pass) o.detail = "3 trajectories, max deviation " + fmt(worst, 2) + ", curves monotone";
  return o;
}

// ---------------------------------------------------------------- 10

Outcome image_fusion() {
  Outcome o;
  Rng rng(10);
  Image a(48, 40, 1), b(48, 40, 1);
  for (auto& v : a.data) v = static_cast<float>(rng.uniform());
  for (auto& v : b.data) v = static_cast<float>(rng.uniform());
  o.check(fusion::fuse_images(a, b, Map(48, 40, 1, 1.0)) == a, "W_F=1 not identity");
  Image bin(10, 10, 1);
  for (int i = 0; i < 50; ++i) bin.data[static_cast<std::size_t>(i)] = 1.0f;
  const double en = fusion::entropy(bin);
  o.check(std::abs(en - 1.0) < 1e-12, "EN of binary image " + fmt(en));
  const double s = fusion::ssim(a, a);
  o.check(std::abs(s - 1.0) < 1e-12, "SSIM(x, x) " + fmt(s));
  bool in_range = true;
  for (int trial = 0; trial < 5; ++trial) {
    Map w(48, 40);
    for (auto& v : w.data) v = rng.uniform();
    for (float v : fusion::fuse_images(a, b, w).data) in_range = in_range && v >= 0.0f && v <= 1.0f;
  }
  o.check(in_range, "fused sample outside [0, 1]");
  if (o.pass) o.detail = "identity exact, EN " + fmt(en) + " bit, SSIM(x,x) " + fmt(s) + ", outputs in [0, 1]";
  return o;
}

// ---------------------------------------------------------------- 11

int shell(const std::string& cmd) {
  const int st = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  Outcome o;
  if (cli_path.empty()) {
    // library-level fallback
    synth::Scenario sc = synth::preset("occlusion", 3);
    const synth::Generated g = synth::generate(sc, 2);
    TrackerConfig c;
    c.fusion = FusionMode::constant;
    const fusion::MfNet none;
    o.check(bench::run_ope(g.seq, c, none).boxes == bench::run_ope(g.seq, c, none).boxes, "run_ope differs");
    o.detail = o.pass ? "library only (no --cli): tracking repeatable" : o.detail;
    return o;
  }
  const fs::path dir = fs::temp_directory_path() / "rgbt_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string r = cli_path;
  const std::string d = dir.string();
  std::ofstream(dir / "small.toml") << "[paper]\npatch = 32\n[mfnet]\nstem_channels = [4, 8, 8]\nhead_channels = 8\n";
  std::ofstream(dir / "track.toml") << "[tracker]\nfusion = \"constant\"\n";
  o.check(shell(r + " synth --preset occlusion_pan --variant 2 --seed 3 --out " + d + "/seq") == 0, "synth failed");
  const std::string m = d + "/seq/manifest.json";
  for (const char* run : {"a", "b"}) {
    o.check(shell(r + " track --config " + d + "/track.toml --manifest " + m + " --out " + d + "/" + run + ".txt") == 0,
            "track failed");
  }
  o.check(!slurp(dir / "a.txt").empty() && slurp(dir / "a.txt") == slurp(dir / "b.txt"), "track trajectories differ");
  o.check(!slurp(dir / "a.frames.csv").empty() && slurp(dir / "a.frames.csv") == slurp(dir / "b.frames.csv"),
          "track diagnostics differ");
  o.check(shell(r + " make-pairs --config " + d + "/small.toml --manifest " + m + " --stride 6 --out " + d + "/pairs") == 0,
          "make-pairs failed");
  for (const char* run : {"a", "b"}) {
    o.check(shell(r + " train-fusion --config " + d + "/small.toml --pairs " + d + "/pairs --out " + d + "/" + run + ".mfn") == 0,
            "train-fusion failed");
  }
  o.check(!slurp(dir / "a.mfn").empty() && slurp(dir / "a.mfn") == slurp(dir / "b.mfn"), "checkpoints differ");
  o.check(slurp(dir / "a.mfn.loss.csv") == slurp(dir / "b.mfn.loss.csv"), "loss traces differ");
  if (o.pass) o.detail = "track and train-fusion outputs byte-identical across two runs";
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--cli" && i + 1 < argc) {
      cli_path = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      std::stringstream s(argv[++i]);
      for (std::string item; std::getline(s, item, ',');) only.insert(std::stoi(item));
    } else {
      std::cerr << "usage: rgbt_acceptance [--cli <rgbt>] [--only N[,N...]]\n";
      return 2;
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"constants", constants},         {"fusion-endpoints", fusion_endpoints}, {"gradients", gradients},
      {"mfnet-trainability", trainability}, {"kalman-oracle", kalman},         {"camera-motion", camera_motion},
      {"switcher", switcher},           {"joint-cues", joint_cues},           {"metrics-oracle", metrics},
      {"image-fusion", image_fusion},   {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.contains(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[i].first << " (" << fmt(secs, 3) << " s): " << o.detail
              << std::endl;
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
