#include "rgbt/mfnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rgbt/error.hpp"

namespace rgbt::fusion {

namespace {

constexpr std::size_t kResizeLayer = 3;

int stem_out_size(int in) { return (in - 1) / 2 + 1; }  // 3x3, stride 2, pad 1
int global_mid_size(int in) { return (in - 1) / 3 + 1; }  // 3x3, stride 3, pad 1

void zero_params(nn::Layer& l) {
  std::fill(l.params().begin(), l.params().end(), 0.0);
  std::fill(l.velocity().begin(), l.velocity().end(), 0.0);
}

Map tensor_to_map(const nn::Tensor& t) {
  Map m(t.w, t.h);
  m.data = t.data;
  return m;
}

// Last parameter of a single-output layer is its bias.
void set_output_bias(nn::Layer& l, double b) { l.params().back() = b; }

double logit(double p) { return std::log(p / (1.0 - p)); }

// Keeps weights strictly inside (0, 1) when a sigmoid saturates in double precision.
double open_unit(double v) { return std::clamp(v, 1e-12, 1.0 - 1e-12); }

}  // namespace

MfNet::MfNet(const MfNetConfig& cfg) {
  if (cfg.stem_channels.empty() || cfg.head_channels < 1) throw ConfigError("mfnet: empty stem or head");
  int size = cfg.patch;
  int cin = 3;
  for (int c : cfg.stem_channels) {
    if (c < 1) throw ConfigError("mfnet: stem channel counts must be positive");
    stem.emplace<nn::Conv2d>(3, 3, cin, c, 2, 1);
    stem.emplace<nn::Relu>();
    stem.emplace<nn::Lrn>();
    size = stem_out_size(size);
    cin = c;
  }
  if (size << cfg.stem_channels.size() != cfg.patch || size % 3 != 1) {
    throw ConfigError("mfnet: patch must be f * 2^depth with f = 1 (mod 3); got " + std::to_string(cfg.patch));
  }
  patch_ = cfg.patch;
  feature_size_ = size;
  stem_out_ = cin;
  const int g = global_mid_size(size);

  global_head.emplace<nn::Conv2d>(3, 3, 2 * cin, cfg.head_channels, 3, 1);
  global_head.emplace<nn::Relu>();
  global_head.emplace<nn::Lrn>();
  global_head.emplace<nn::Conv2d>(g, g, cfg.head_channels, 1, 1, 0);
  global_head.emplace<nn::Sigmoid>();

  local_head.emplace<nn::Deconv2d>(3, 3, 2 * cin, cfg.head_channels, 2, 1);
  local_head.emplace<nn::Relu>();
  local_head.emplace<nn::Deconv2d>(3, 3, cfg.head_channels, 1, 2, 1);
  local_head.emplace<nn::BilinearResize>(size, size);
  local_head.emplace<nn::Sigmoid>();

  stem.init_params(cfg.seed);
  global_head.init_params(cfg.seed + 1);
  local_head.init_params(cfg.seed + 2);
  zero_params(global_head.layer(3));
  zero_params(local_head.layer(2));
  // untrained net fuses 50/50: W_L starts at 0.9, w_G at 0.5 / 0.9
  constexpr double kLocalPrior = 0.9;
  set_output_bias(local_head.layer(2), logit(kLocalPrior));
  set_output_bias(global_head.layer(3), logit(0.5 / kLocalPrior));
}

MfNet MfNet::from_networks(std::vector<nn::Network> nets) {
  if (nets.size() != 3) throw DataError("mfnet checkpoint must hold 3 networks (stem, global, local)");
  MfNet net;
  net.stem = std::move(nets[0]);
  net.global_head = std::move(nets[1]);
  net.local_head = std::move(nets[2]);
  auto conv = [](nn::Network& n, std::size_t i) -> nn::Conv2d& {
    if (i >= n.size() || n.layer(i).kind() != nn::LayerKind::conv2d) throw DataError("mfnet checkpoint: unexpected layer layout");
    return static_cast<nn::Conv2d&>(n.layer(i));
  };
  if (net.stem.size() == 0 || net.stem.size() % 3 != 0 || net.global_head.size() != 5 || net.local_head.size() != 5 ||
      net.local_head.layer(kResizeLayer).kind() != nn::LayerKind::bilinear_resize) {
    throw DataError("mfnet checkpoint: unexpected layer layout");
  }
  const std::size_t depth = net.stem.size() / 3;
  net.stem_out_ = conv(net.stem, 3 * (depth - 1)).cout;
  const int g = conv(net.global_head, 3).kh;
  net.feature_size_ = 3 * g - 2;
  net.patch_ = net.feature_size_ << depth;
  if (conv(net.global_head, 0).cin != 2 * net.stem_out_) throw DataError("mfnet checkpoint: head/stem channel mismatch");
  return net;
}

void save_mfnet(const MfNet& net, const std::string& path) {
  const nn::Network* nets[] = {&net.stem, &net.global_head, &net.local_head};
  nn::save_checkpoint(path, nets);
}

MfNet load_mfnet(const std::string& path) { return MfNet::from_networks(nn::load_checkpoint(path)); }

nn::Tensor to_tensor(const Image& patch) {
  nn::Tensor t(3, patch.height, patch.width);
  const std::size_t plane = t.plane();
  for (int y = 0; y < patch.height; ++y) {
    for (int x = 0; x < patch.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(patch.width) + static_cast<std::size_t>(x);
      for (int c = 0; c < 3; ++c) {
        const float v = patch.channels == 3 ? patch.at(x, y, c) : patch.at(x, y);
        t.data[static_cast<std::size_t>(c) * plane + i] = v - 0.5;
      }
    }
  }
  return t;
}

nn::Tensor stem_features(MfNet& net, const Image& p_rgb, const Image& p_t) {
  const int p = net.patch();
  if (p_rgb.width != p || p_rgb.height != p || p_t.width != p || p_t.height != p) {
    throw DimensionError("mfnet: patches must be " + std::to_string(p) + "x" + std::to_string(p));
  }
  const nn::Tensor a = net.stem.forward(to_tensor(p_rgb));
  const nn::Tensor b = net.stem.forward(to_tensor(p_t));
  net.stem.clear_cache();
  return nn::concat_channels(a, b);
}

namespace {

struct HeadOutputs {
  double w_g;
  Map w_l;
};

HeadOutputs run_heads(MfNet& net, const nn::Tensor& features, int map_w, int map_h) {
  if (map_w < 1 || map_h < 1) throw RangeError("mfnet: response size must be positive");
  auto& resize = static_cast<nn::BilinearResize&>(net.local_head.layer(kResizeLayer));
  resize.out_w = map_w;
  resize.out_h = map_h;
  const nn::Tensor g = net.global_head.forward(features);
  const nn::Tensor l = net.local_head.forward(features);
  return {g.data.at(0), tensor_to_map(l)};
}

}  // namespace

FusionWeights heads_forward(MfNet& net, const nn::Tensor& features, int map_w, int map_h) {
  HeadOutputs h = run_heads(net, features, map_w, map_h);
  for (auto& v : h.w_l.data) v = open_unit(v);
  return compose(open_unit(h.w_g), std::move(h.w_l));
}

FusionWeights mfnet_forward(MfNet& net, const Image& p_rgb, const Image& p_t, int map_w, int map_h) {
  const nn::Tensor f = stem_features(net, p_rgb, p_t);
  FusionWeights w = heads_forward(net, f, map_w, map_h);
  net.global_head.clear_cache();
  net.local_head.clear_cache();
  return w;
}

std::string_view to_string(TrainStage stage) {
  switch (stage) {
    case TrainStage::global: return "global";
    case TrainStage::local: return "local";
    case TrainStage::joint: return "joint";
  }
  return "unknown";
}

namespace {

void check_pair(const TrainPair& p) {
  if (!p.y.same_shape(p.r_rgb) || !p.y.same_shape(p.r_t) || p.y.channels != 1) {
    throw DimensionError("training pair maps must share one M x N shape");
  }
}

// Returns the loss and dL/dW_F.
double loss_terms(const HeadOutputs& h, const TrainPair& p, TrainStage stage, std::vector<double>* grad_wf) {
  double loss = 0.0;
  if (grad_wf) grad_wf->resize(p.y.data.size());
  for (std::size_t i = 0; i < p.y.data.size(); ++i) {
    const double wf = stage == TrainStage::global ? h.w_g : h.w_g * h.w_l.data[i];
    const double diff = p.r_rgb.data[i] - p.r_t.data[i];
    const double e = wf * p.r_rgb.data[i] + (1.0 - wf) * p.r_t.data[i] - p.y.data[i];
    loss += e * e;
    if (grad_wf) (*grad_wf)[i] = 2.0 * e * diff;
  }
  return loss;
}

}  // namespace

double pair_loss(MfNet& net, const nn::Tensor& features, const TrainPair& pair, TrainStage stage) {
  check_pair(pair);
  const HeadOutputs h = run_heads(net, features, pair.y.width, pair.y.height);
  return loss_terms(h, pair, stage, nullptr);
}

double pair_loss_backward(MfNet& net, const nn::Tensor& features, const TrainPair& pair, TrainStage stage, double scale) {
  check_pair(pair);
  const HeadOutputs h = run_heads(net, features, pair.y.width, pair.y.height);
  std::vector<double> g;
  const double loss = loss_terms(h, pair, stage, &g);
  if (stage == TrainStage::global || stage == TrainStage::joint) {
    double gw = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) gw += g[i] * (stage == TrainStage::global ? 1.0 : h.w_l.data[i]);
    net.global_head.backward(nn::Tensor(1, 1, 1, gw * scale), false);
  }
  if (stage == TrainStage::local || stage == TrainStage::joint) {
    nn::Tensor gl(1, pair.y.height, pair.y.width);
    for (std::size_t i = 0; i < g.size(); ++i) gl.data[i] = g[i] * h.w_g * scale;
    net.local_head.backward(gl, false);
  }
  return loss;
}

double mean_loss(MfNet& net, const std::vector<TrainPair>& data) {
  if (data.empty()) throw DataError("empty training set");
  double s = 0.0;
  for (const auto& p : data) s += pair_loss(net, stem_features(net, p.p_rgb, p.p_t), p, TrainStage::joint);
  return s / static_cast<double>(data.size());
}

double mean_weight(MfNet& net, const std::vector<TrainPair>& data) {
  if (data.empty()) throw DataError("empty training set");
  double s = 0.0;
  for (const auto& p : data) {
    const FusionWeights w = mfnet_forward(net, p.p_rgb, p.p_t, p.y.width, p.y.height);
    s += std::accumulate(w.w_f.data.begin(), w.w_f.data.end(), 0.0) / static_cast<double>(w.w_f.data.size());
  }
  return s / static_cast<double>(data.size());
}

TrainReport mfnet_train(MfNet& net, const std::vector<TrainPair>& data, const TrainSchedule& sc) {
  if (data.empty()) throw DataError("mfnet_train: empty training set");
  if (sc.batch < 1) throw ConfigError("train.batch must be >= 1");
  std::vector<nn::Tensor> feats;
  feats.reserve(data.size());
  for (const auto& p : data) {
    check_pair(p);
    feats.push_back(stem_features(net, p.p_rgb, p.p_t));
  }
  auto full_loss = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) s += pair_loss(net, feats[i], data[i], TrainStage::joint);
    return s / static_cast<double>(data.size());
  };

  TrainReport report;
  report.initial_loss = full_loss();
  nn::Rng rng(sc.seed);
  std::vector<std::size_t> order(data.size());
  const std::pair<TrainStage, StageSchedule> stages[] = {
      {TrainStage::global, sc.global}, {TrainStage::local, sc.local}, {TrainStage::joint, sc.joint}};
  for (const auto& [stage, st] : stages) {
    const bool train_global = stage != TrainStage::local;
    const bool train_local = stage != TrainStage::global;
    for (int epoch = 0; epoch < st.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), 0);
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.next_u64() % i)]);
      }
      double epoch_loss = 0.0;
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(sc.batch)) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(sc.batch));
        const double scale = 1.0 / static_cast<double>(end - start);
        net.global_head.zero_grad();
        net.local_head.zero_grad();
        for (std::size_t k = start; k < end; ++k) {
          epoch_loss += pair_loss_backward(net, feats[order[k]], data[order[k]], stage, scale);
        }
        if (train_global) nn::sgd_step(net.global_head, st.lr * sc.lr_scale, sc.momentum, sc.weight_decay);
        if (train_local) nn::sgd_step(net.local_head, st.lr * sc.lr_scale, sc.momentum, sc.weight_decay);
      }
      report.epochs.push_back({stage, epoch, epoch_loss / static_cast<double>(data.size())});
    }
  }
  report.final_loss = full_loss();
  net.global_head.clear_cache();
  net.local_head.clear_cache();
  return report;
}

}  // namespace rgbt::fusion
