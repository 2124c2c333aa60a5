#include "rgbt/nnet.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rgbt/error.hpp"

namespace rgbt::nn {

namespace {

// s^-beta with a fast path for the usual beta = 0.75.
double neg_pow(double s, double beta) {
  if (beta == 0.75) {
    const double r = std::sqrt(s);
    return 1.0 / (r * std::sqrt(r));
  }
  return std::pow(s, -beta);
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

struct Geometry {
  int channels, height, width;  // source grid
  int kh, kw, stride, pad;
  int pos_h, pos_w;  // positions (columns of the patch matrix)
};

// cols[(c, ky, kx)][(py, px)] = src[c][py*s - p + ky][px*s - p + kx] (zero outside).
void gather(const double* src, const Geometry& g, double* cols) {
  const std::size_t npos = static_cast<std::size_t>(g.pos_h) * static_cast<std::size_t>(g.pos_w);
  std::size_t row = 0;
  for (int c = 0; c < g.channels; ++c) {
    const double* plane = src + static_cast<std::size_t>(c) * g.height * g.width;
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx, ++row) {
        double* out = cols + row * npos;
        for (int py = 0; py < g.pos_h; ++py) {
          const int sy = py * g.stride - g.pad + ky;
          double* o = out + static_cast<std::size_t>(py) * g.pos_w;
          if (sy < 0 || sy >= g.height) {
            std::fill(o, o + g.pos_w, 0.0);
            continue;
          }
          const double* line = plane + static_cast<std::size_t>(sy) * g.width;
          for (int px = 0; px < g.pos_w; ++px) {
            const int sx = px * g.stride - g.pad + kx;
            o[px] = (sx >= 0 && sx < g.width) ? line[sx] : 0.0;
          }
        }
      }
    }
  }
}

// Adjoint of gather: dst[c][sy][sx] += cols[...].
void scatter(const double* cols, const Geometry& g, double* dst) {
  const std::size_t npos = static_cast<std::size_t>(g.pos_h) * static_cast<std::size_t>(g.pos_w);
  std::size_t row = 0;
  for (int c = 0; c < g.channels; ++c) {
    double* plane = dst + static_cast<std::size_t>(c) * g.height * g.width;
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx, ++row) {
        const double* in = cols + row * npos;
        for (int py = 0; py < g.pos_h; ++py) {
          const int sy = py * g.stride - g.pad + ky;
          if (sy < 0 || sy >= g.height) continue;
          double* line = plane + static_cast<std::size_t>(sy) * g.width;
          const double* i = in + static_cast<std::size_t>(py) * g.pos_w;
          for (int px = 0; px < g.pos_w; ++px) {
            const int sx = px * g.stride - g.pad + kx;
            if (sx >= 0 && sx < g.width) line[sx] += i[px];
          }
        }
      }
    }
  }
}

struct Taps {
  std::vector<int> i0, i1;
  std::vector<double> f;
};

Taps bilinear_taps(int in, int out) {
  Taps t;
  t.i0.resize(static_cast<std::size_t>(out));
  t.i1.resize(static_cast<std::size_t>(out));
  t.f.resize(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    const double pos = (i + 0.5) * scale - 0.5;
    const auto k = static_cast<std::size_t>(i);
    if (pos <= 0.0) {
      t.i0[k] = t.i1[k] = 0;
      t.f[k] = 0.0;
    } else if (pos >= in - 1) {
      t.i0[k] = t.i1[k] = in - 1;
      t.f[k] = 0.0;
    } else {
      t.i0[k] = static_cast<int>(std::floor(pos));
      t.i1[k] = t.i0[k] + 1;
      t.f[k] = pos - t.i0[k];
    }
  }
  return t;
}

}  // namespace

Tensor::Tensor(int channels, int height, int width, double fill)
    : c(channels), h(height), w(width),
      data(static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill) {
  if (channels <= 0 || height <= 0 || width <= 0) throw RangeError("tensor dimensions must be positive");
}

std::string Tensor::shape_string() const {
  return "(" + std::to_string(c) + "," + std::to_string(h) + "," + std::to_string(w) + ")";
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.h != b.h || a.w != b.w) throw DimensionError("concat_channels: spatial sizes differ");
  Tensor out(a.c + b.c, a.h, a.w);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
  return out;
}

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::deconv2d: return "deconv2d";
    case LayerKind::relu: return "relu";
    case LayerKind::sigmoid: return "sigmoid";
    case LayerKind::lrn: return "lrn";
    case LayerKind::bilinear_resize: return "bilinear_resize";
  }
  return "unknown";
}

void Layer::allocate(std::size_t n) {
  params_.assign(n, 0.0);
  grads_.assign(n, 0.0);
  velocity_.assign(n, 0.0);
}

void Layer::clear_cache() {
  cached_ = false;
  input_ = Tensor();
  output_ = Tensor();
}

// ---------------------------------------------------------------------------

Conv2d::Conv2d(int kh_, int kw_, int cin_, int cout_, int stride_, int pad_)
    : kh(kh_), kw(kw_), cin(cin_), cout(cout_), stride(stride_), pad(pad_) {
  if (kh < 1 || kw < 1 || cin < 1 || cout < 1 || stride < 1 || pad < 0) throw RangeError("invalid conv2d geometry");
  allocate(static_cast<std::size_t>(cout) * cin * kh * kw + static_cast<std::size_t>(cout));
}

std::string Conv2d::describe() const {
  std::ostringstream os;
  os << "conv2d " << kh << "x" << kw << " " << cin << "->" << cout << " s" << stride << " p" << pad;
  return os.str();
}

std::vector<std::uint32_t> Conv2d::dims() const {
  return {static_cast<std::uint32_t>(kh), static_cast<std::uint32_t>(kw),     static_cast<std::uint32_t>(cin),
          static_cast<std::uint32_t>(cout), static_cast<std::uint32_t>(stride), static_cast<std::uint32_t>(pad)};
}

Tensor Conv2d::forward(const Tensor& x) {
  if (x.c != cin) throw DimensionError(describe() + ": expected " + std::to_string(cin) + " input channels, got " + std::to_string(x.c));
  out_h_ = (x.h + 2 * pad - kh) / stride + 1;
  out_w_ = (x.w + 2 * pad - kw) / stride + 1;
  if (x.h + 2 * pad < kh || x.w + 2 * pad < kw || out_h_ < 1 || out_w_ < 1) {
    throw DimensionError(describe() + ": input " + x.shape_string() + " smaller than kernel");
  }
  const int k = cin * kh * kw;
  const int npos = out_h_ * out_w_;
  cols_.resize(static_cast<std::size_t>(k) * npos);
  gather(x.data.data(), {cin, x.h, x.w, kh, kw, stride, pad, out_h_, out_w_}, cols_.data());
  Tensor y(cout, out_h_, out_w_);
  ConstMatMap wmat(params_.data(), cout, k);
  ConstMatMap cols(cols_.data(), k, npos);
  MatMap out(y.data.data(), cout, npos);
  out.noalias() = wmat * cols;
  const double* bias = params_.data() + static_cast<std::size_t>(cout) * k;
  for (int o = 0; o < cout; ++o) out.row(o).array() += bias[o];
  input_ = x;
  cached_ = true;
  return y;
}

Tensor Conv2d::backward(const Tensor& grad_out, bool need_input_grad) {
  if (!cached_) throw StateError(describe() + ": backward called before forward");
  if (grad_out.c != cout || grad_out.h != out_h_ || grad_out.w != out_w_) {
    throw DimensionError(describe() + ": gradient shape " + grad_out.shape_string() + " does not match output");
  }
  const int k = cin * kh * kw;
  const int npos = out_h_ * out_w_;
  ConstMatMap g(grad_out.data.data(), cout, npos);
  ConstMatMap cols(cols_.data(), k, npos);
  MatMap gw(grads_.data(), cout, k);
  gw.noalias() += g * cols.transpose();
  double* gb = grads_.data() + static_cast<std::size_t>(cout) * k;
  for (int o = 0; o < cout; ++o) gb[o] += g.row(o).sum();
  if (!need_input_grad) return {};
  ConstMatMap wmat(params_.data(), cout, k);
  RowMatrix gcols = wmat.transpose() * g;
  Tensor gx(input_.c, input_.h, input_.w);
  scatter(gcols.data(), {cin, input_.h, input_.w, kh, kw, stride, pad, out_h_, out_w_}, gx.data.data());
  return gx;
}

// ---------------------------------------------------------------------------

Deconv2d::Deconv2d(int kh_, int kw_, int cin_, int cout_, int stride_, int pad_)
    : kh(kh_), kw(kw_), cin(cin_), cout(cout_), stride(stride_), pad(pad_) {
  if (kh < 1 || kw < 1 || cin < 1 || cout < 1 || stride < 1 || pad < 0) throw RangeError("invalid deconv2d geometry");
  allocate(static_cast<std::size_t>(cin) * cout * kh * kw + static_cast<std::size_t>(cout));
}

std::string Deconv2d::describe() const {
  std::ostringstream os;
  os << "deconv2d " << kh << "x" << kw << " " << cin << "->" << cout << " s" << stride << " p" << pad;
  return os.str();
}

std::vector<std::uint32_t> Deconv2d::dims() const {
  return {static_cast<std::uint32_t>(kh), static_cast<std::uint32_t>(kw),     static_cast<std::uint32_t>(cin),
          static_cast<std::uint32_t>(cout), static_cast<std::uint32_t>(stride), static_cast<std::uint32_t>(pad)};
}

Tensor Deconv2d::forward(const Tensor& x) {
  if (x.c != cin) throw DimensionError(describe() + ": expected " + std::to_string(cin) + " input channels, got " + std::to_string(x.c));
  const int oh = (x.h - 1) * stride - 2 * pad + kh;
  const int ow = (x.w - 1) * stride - 2 * pad + kw;
  if (oh < 1 || ow < 1) throw DimensionError(describe() + ": input " + x.shape_string() + " too small");
  const int kout = cout * kh * kw;
  const int npos = x.h * x.w;
  ConstMatMap wmat(params_.data(), cin, kout);
  ConstMatMap xin(x.data.data(), cin, npos);
  RowMatrix cols = wmat.transpose() * xin;
  Tensor y(cout, oh, ow);
  scatter(cols.data(), {cout, oh, ow, kh, kw, stride, pad, x.h, x.w}, y.data.data());
  const double* bias = params_.data() + static_cast<std::size_t>(cin) * kout;
  const std::size_t plane = y.plane();
  for (int o = 0; o < cout; ++o) {
    double* p = y.data.data() + static_cast<std::size_t>(o) * plane;
    for (std::size_t i = 0; i < plane; ++i) p[i] += bias[o];
  }
  input_ = x;
  output_ = Tensor(cout, oh, ow);  // shape only
  cached_ = true;
  return y;
}

Tensor Deconv2d::backward(const Tensor& grad_out, bool need_input_grad) {
  if (!cached_) throw StateError(describe() + ": backward called before forward");
  if (!grad_out.same_shape(output_)) {
    throw DimensionError(describe() + ": gradient shape " + grad_out.shape_string() + " does not match output");
  }
  const int kout = cout * kh * kw;
  const int npos = input_.h * input_.w;
  RowMatrix gcols(kout, npos);
  gather(grad_out.data.data(), {cout, grad_out.h, grad_out.w, kh, kw, stride, pad, input_.h, input_.w}, gcols.data());
  ConstMatMap xin(input_.data.data(), cin, npos);
  MatMap gw(grads_.data(), cin, kout);
  gw.noalias() += xin * gcols.transpose();
  double* gb = grads_.data() + static_cast<std::size_t>(cin) * kout;
  const std::size_t plane = grad_out.plane();
  for (int o = 0; o < cout; ++o) {
    const double* p = grad_out.data.data() + static_cast<std::size_t>(o) * plane;
    gb[o] += std::accumulate(p, p + plane, 0.0);
  }
  if (!need_input_grad) return {};
  ConstMatMap wmat(params_.data(), cin, kout);
  Tensor gx(cin, input_.h, input_.w);
  MatMap gxm(gx.data.data(), cin, npos);
  gxm.noalias() = wmat * gcols;
  return gx;
}

// ---------------------------------------------------------------------------

Tensor Relu::forward(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data) v = v > 0.0 ? v : 0.0;
  input_ = x;
  cached_ = true;
  return y;
}

Tensor Relu::backward(const Tensor& grad_out, bool need_input_grad) {
  if (!cached_) throw StateError("relu: backward called before forward");
  if (!grad_out.same_shape(input_)) throw DimensionError("relu: gradient shape mismatch");
  if (!need_input_grad) return {};
  Tensor gx = grad_out;
  for (std::size_t i = 0; i < gx.data.size(); ++i) {
    if (!(input_.data[i] > 0.0)) gx.data[i] = 0.0;
  }
  return gx;
}

Tensor Sigmoid::forward(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data) v = 1.0 / (1.0 + std::exp(-v));
  output_ = y;
  cached_ = true;
  return y;
}

Tensor Sigmoid::backward(const Tensor& grad_out, bool need_input_grad) {
  if (!cached_) throw StateError("sigmoid: backward called before forward");
  if (!grad_out.same_shape(output_)) throw DimensionError("sigmoid: gradient shape mismatch");
  if (!need_input_grad) return {};
  Tensor gx = grad_out;
  for (std::size_t i = 0; i < gx.data.size(); ++i) {
    const double s = output_.data[i];
    gx.data[i] *= s * (1.0 - s);
  }
  return gx;
}

// ---------------------------------------------------------------------------

Lrn::Lrn(int n_, double alpha_, double beta_, double k_) : n(n_), alpha(alpha_), beta(beta_), k(k_) {
  if (n < 1 || !(k > 0.0)) throw RangeError("invalid lrn parameters");
}

std::string Lrn::describe() const {
  std::ostringstream os;
  os << "lrn n=" << n << " alpha=" << alpha << " beta=" << beta << " k=" << k;
  return os.str();
}

Tensor Lrn::forward(const Tensor& x) {
  const int half_lo = (n - 1) / 2;
  const int half_hi = n - 1 - half_lo;
  const std::size_t plane = x.plane();
  scale_.assign(x.data.size(), 0.0);
  Tensor y(x.c, x.h, x.w);
  const double an = alpha / n;
  for (int c = 0; c < x.c; ++c) {
    double* s = scale_.data() + static_cast<std::size_t>(c) * plane;
    for (int j = std::max(0, c - half_lo); j <= std::min(x.c - 1, c + half_hi); ++j) {
      const double* xj = x.data.data() + static_cast<std::size_t>(j) * plane;
      for (std::size_t i = 0; i < plane; ++i) s[i] += xj[i] * xj[i];
    }
    const double* xc = x.data.data() + static_cast<std::size_t>(c) * plane;
    double* yc = y.data.data() + static_cast<std::size_t>(c) * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      s[i] = k + an * s[i];
      yc[i] = xc[i] * neg_pow(s[i], beta);
    }
  }
  input_ = x;
  output_ = y;
  cached_ = true;
  return y;
}

Tensor Lrn::backward(const Tensor& grad_out, bool need_input_grad) {
  if (!cached_) throw StateError("lrn: backward called before forward");
  if (!grad_out.same_shape(input_)) throw DimensionError("lrn: gradient shape mismatch");
  if (!need_input_grad) return {};
  const int half_lo = (n - 1) / 2;
  const int half_hi = n - 1 - half_lo;
  const std::size_t plane = input_.plane();
  // t_j = dy_j * y_j / s_j
  std::vector<double> t(input_.data.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = grad_out.data[i] * output_.data[i] / scale_[i];
  Tensor gx(input_.c, input_.h, input_.w);
  const double coef = 2.0 * alpha * beta / n;
  for (int c = 0; c < input_.c; ++c) {
    const std::size_t off = static_cast<std::size_t>(c) * plane;
    std::vector<double> acc(plane, 0.0);
    // channel c lies in the window of j iff j - half_lo <= c <= j + half_hi
    for (int j = std::max(0, c - half_hi); j <= std::min(input_.c - 1, c + half_lo); ++j) {
      const double* tj = t.data() + static_cast<std::size_t>(j) * plane;
      for (std::size_t i = 0; i < plane; ++i) acc[i] += tj[i];
    }
    for (std::size_t i = 0; i < plane; ++i) {
      gx.data[off + i] = grad_out.data[off + i] * neg_pow(scale_[off + i], beta) - coef * input_.data[off + i] * acc[i];
    }
  }
  return gx;
}

// ---------------------------------------------------------------------------

BilinearResize::BilinearResize(int oh, int ow) : out_h(oh), out_w(ow) {
  if (oh < 1 || ow < 1) throw RangeError("bilinear_resize target must be positive");
}

std::string BilinearResize::describe() const {
  return "bilinear_resize " + std::to_string(out_h) + "x" + std::to_string(out_w);
}

Tensor BilinearResize::forward(const Tensor& x) {
  const Taps ty = bilinear_taps(x.h, out_h), tx = bilinear_taps(x.w, out_w);
  Tensor y(x.c, out_h, out_w);
  for (int c = 0; c < x.c; ++c) {
    for (int i = 0; i < out_h; ++i) {
      const auto yi = static_cast<std::size_t>(i);
      for (int j = 0; j < out_w; ++j) {
        const auto xj = static_cast<std::size_t>(j);
        const double fy = ty.f[yi], fx = tx.f[xj];
        y.at(c, i, j) = (1 - fy) * ((1 - fx) * x.at(c, ty.i0[yi], tx.i0[xj]) + fx * x.at(c, ty.i0[yi], tx.i1[xj])) +
                        fy * ((1 - fx) * x.at(c, ty.i1[yi], tx.i0[xj]) + fx * x.at(c, ty.i1[yi], tx.i1[xj]));
      }
    }
  }
  input_ = Tensor(x.c, x.h, x.w);  // shape only
  cached_ = true;
  return y;
}

Tensor BilinearResize::backward(const Tensor& grad_out, bool need_input_grad) {
  if (!cached_) throw StateError("bilinear_resize: backward called before forward");
  if (grad_out.c != input_.c || grad_out.h != out_h || grad_out.w != out_w) {
    throw DimensionError("bilinear_resize: gradient shape mismatch");
  }
  if (!need_input_grad) return {};
  const Taps ty = bilinear_taps(input_.h, out_h), tx = bilinear_taps(input_.w, out_w);
  Tensor gx(input_.c, input_.h, input_.w);
  for (int c = 0; c < input_.c; ++c) {
    for (int i = 0; i < out_h; ++i) {
      const auto yi = static_cast<std::size_t>(i);
      for (int j = 0; j < out_w; ++j) {
        const auto xj = static_cast<std::size_t>(j);
        const double g = grad_out.at(c, i, j);
        const double fy = ty.f[yi], fx = tx.f[xj];
        gx.at(c, ty.i0[yi], tx.i0[xj]) += g * (1 - fy) * (1 - fx);
        gx.at(c, ty.i0[yi], tx.i1[xj]) += g * (1 - fy) * fx;
        gx.at(c, ty.i1[yi], tx.i0[xj]) += g * fy * (1 - fx);
        gx.at(c, ty.i1[yi], tx.i1[xj]) += g * fy * fx;
      }
    }
  }
  return gx;
}

// ---------------------------------------------------------------------------

Network::Network(const Network& other) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network tmp(other);
    layers_ = std::move(tmp.layers_);
  }
  return *this;
}

Network& Network::add(std::unique_ptr<Layer> layer) {
  layers_.push_back(std::move(layer));
  return *this;
}

Tensor Network::forward(const Tensor& input) {
  Tensor x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    try {
      x = layers_[i]->forward(x);
    } catch (const DimensionError& e) {
      throw DimensionError("layer " + std::to_string(i) + " (" + layers_[i]->describe() + "): " + e.what());
    }
  }
  return x;
}

Tensor Network::backward(const Tensor& loss_grad, bool need_input_grad) {
  if (layers_.empty()) return loss_grad;
  for (const auto& l : layers_) {
    if (!l->has_cache()) throw StateError("backward called before forward");
  }
  Tensor g = loss_grad;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    // Layers below the first parameterised one need no input gradient.
    bool below_needs = need_input_grad;
    for (std::size_t j = 0; j < i && !below_needs; ++j) below_needs = !layers_[j]->params().empty();
    g = layers_[i]->backward(g, i > 0 ? below_needs : need_input_grad);
    if (i > 0 && !below_needs) break;
  }
  return need_input_grad ? g : Tensor{};
}

std::size_t Network::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l->params().size();
  return n;
}

void Network::zero_grad() {
  for (auto& l : layers_) std::fill(l->grads().begin(), l->grads().end(), 0.0);
}

void Network::init_params(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& l : layers_) {
    std::size_t nweights = 0;
    int fan_in = 0;
    if (auto* c = dynamic_cast<Conv2d*>(l.get())) {
      nweights = static_cast<std::size_t>(c->cout) * c->cin * c->kh * c->kw;
      fan_in = c->cin * c->kh * c->kw;
    } else if (auto* d = dynamic_cast<Deconv2d*>(l.get())) {
      nweights = static_cast<std::size_t>(d->cin) * d->cout * d->kh * d->kw;
      fan_in = d->cin * d->kh * d->kw;
    } else {
      continue;
    }
    const double bound = std::sqrt(6.0 / fan_in);
    auto p = l->params();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = i < nweights ? rng.uniform(-bound, bound) : 0.0;
    std::fill(l->velocity().begin(), l->velocity().end(), 0.0);
  }
}

void Network::clear_cache() {
  for (auto& l : layers_) l->clear_cache();
}

Tensor forward(Network& net, const Tensor& input) { return net.forward(input); }
Tensor backward(Network& net, const Tensor& loss_grad) { return net.backward(loss_grad); }

void sgd_step(Network& net, double lr, double momentum, double weight_decay) {
  for (std::size_t li = 0; li < net.size(); ++li) {
    Layer& l = net.layer(li);
    auto p = l.params();
    auto g = l.grads();
    auto v = l.velocity();
    for (std::size_t i = 0; i < p.size(); ++i) {
      v[i] = momentum * v[i] - lr * (g[i] + weight_decay * p[i]);
      p[i] += v[i];
      g[i] = 0.0;
    }
  }
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

Tensor projection(const Tensor& like, std::uint64_t seed) {
  Rng rng(seed ^ 0xa5a5a5a5ULL);
  Tensor r(like.c, like.h, like.w);
  for (auto& v : r.data) v = rng.uniform(-1.0, 1.0);
  return r;
}

double projected_loss(Network& net, const Tensor& input, const Tensor& r) {
  const Tensor y = net.forward(input);
  double s = 0.0;
  for (std::size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * r.data[i];
  return s;
}

std::vector<std::size_t> choose_indices(std::size_t total, std::size_t max_count, std::uint64_t seed) {
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  if (total <= max_count) return idx;
  Rng rng(seed);
  for (std::size_t i = 0; i < max_count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (total - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(max_count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

double grad_check(Network& net, const Tensor& input, double eps, const GradCheckOptions& opts) {
  if (net.param_count() == 0) throw RangeError("grad_check: network has no parameters");
  const Tensor y0 = net.forward(input);
  const Tensor r = projection(y0, opts.seed);
  net.zero_grad();
  net.backward(r, false);
  std::vector<std::pair<std::size_t, std::size_t>> slots;  // (layer, param)
  for (std::size_t li = 0; li < net.size(); ++li) {
    for (std::size_t pi = 0; pi < net.layer(li).params().size(); ++pi) slots.emplace_back(li, pi);
  }
  const auto chosen = choose_indices(slots.size(), opts.max_params, opts.seed);
  double worst = 0.0;
  for (std::size_t k : chosen) {
    auto [li, pi] = slots[k];
    auto p = net.layer(li).params();
    const double analytic = net.layer(li).grads()[pi];
    const double saved = p[pi];
    p[pi] = saved + eps;
    const double lp = projected_loss(net, input, r);
    p[pi] = saved - eps;
    const double lm = projected_loss(net, input, r);
    p[pi] = saved;
    const double numeric = (lp - lm) / (2.0 * eps);
    worst = std::max(worst, relative_error(analytic, numeric, opts.denom_floor));
  }
  net.zero_grad();
  return worst;
}

double grad_check_input(Network& net, const Tensor& input, double eps, const GradCheckOptions& opts) {
  const Tensor y0 = net.forward(input);
  const Tensor r = projection(y0, opts.seed);
  const Tensor gx = net.backward(r, true);
  net.zero_grad();
  Tensor x = input;
  const auto chosen = choose_indices(x.data.size(), opts.max_params, opts.seed);
  double worst = 0.0;
  for (std::size_t i : chosen) {
    const double saved = x.data[i];
    x.data[i] = saved + eps;
    const double lp = projected_loss(net, x, r);
    x.data[i] = saved - eps;
    const double lm = projected_loss(net, x, r);
    x.data[i] = saved;
    worst = std::max(worst, relative_error(gx.data[i], (lp - lm) / (2.0 * eps), opts.denom_floor));
  }
  return worst;
}

}  // namespace rgbt::nn
