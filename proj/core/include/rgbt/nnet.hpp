#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rgbt/rng.hpp"

namespace rgbt::nn {

/// Dense (channels, height, width) tensor, row-major.
struct Tensor {
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int channels, int height, int width, double fill = 0.0);

  std::size_t size() const { return data.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(h) * static_cast<std::size_t>(w); }
  double& at(int ch, int y, int x) { return data[static_cast<std::size_t>(ch) * plane() + static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)]; }
  double at(int ch, int y, int x) const { return data[static_cast<std::size_t>(ch) * plane() + static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)]; }
  bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }
  std::string shape_string() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Channel concatenation of equally sized tensors.
Tensor concat_channels(const Tensor& a, const Tensor& b);

enum class LayerKind : std::uint32_t {
  conv2d = 1,
  deconv2d = 2,
  relu = 3,
  sigmoid = 4,
  lrn = 5,
  bilinear_resize = 6,
};

std::string_view to_string(LayerKind kind);

class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual std::string describe() const = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;

  /// Validates the input shape and caches what backward needs.
  virtual Tensor forward(const Tensor& x) = 0;
  /// Accumulates parameter gradients; returns the input gradient when requested.
  virtual Tensor backward(const Tensor& grad_out, bool need_input_grad) = 0;

  /// Shape dims as written to checkpoints.
  virtual std::vector<std::uint32_t> dims() const = 0;

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::span<double> grads() { return grads_; }
  std::span<const double> grads() const { return grads_; }
  std::span<double> velocity() { return velocity_; }

  bool has_cache() const { return cached_; }
  void clear_cache();

 protected:
  void allocate(std::size_t n);

  std::vector<double> params_;
  std::vector<double> grads_;
  std::vector<double> velocity_;
  Tensor input_;
  Tensor output_;
  bool cached_ = false;
};

/// Square-or-rectangular kernel convolution with zero padding.
/// Parameters: weights [cout][cin][kh][kw] followed by bias [cout].
class Conv2d final : public Layer {
 public:
  Conv2d(int kh, int kw, int cin, int cout, int stride = 1, int pad = 0);

  LayerKind kind() const override { return LayerKind::conv2d; }
  std::string describe() const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, bool need_input_grad) override;
  std::vector<std::uint32_t> dims() const override;

  int kh, kw, cin, cout, stride, pad;

 private:
  std::vector<double> cols_;
  int out_h_ = 0, out_w_ = 0;
};

/// Transposed convolution (the input-gradient of Conv2d).
/// Output size (in - 1) * stride - 2 * pad + k.
/// Parameters: weights [cin][cout][kh][kw] followed by bias [cout].
class Deconv2d final : public Layer {
 public:
  Deconv2d(int kh, int kw, int cin, int cout, int stride = 2, int pad = 1);

  LayerKind kind() const override { return LayerKind::deconv2d; }
  std::string describe() const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Deconv2d>(*this); }
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, bool need_input_grad) override;
  std::vector<std::uint32_t> dims() const override;

  int kh, kw, cin, cout, stride, pad;
};

class Relu final : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::relu; }
  std::string describe() const override { return "relu"; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, bool need_input_grad) override;
  std::vector<std::uint32_t> dims() const override { return {}; }
};

class Sigmoid final : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::sigmoid; }
  std::string describe() const override { return "sigmoid"; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Sigmoid>(*this); }
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, bool need_input_grad) override;
  std::vector<std::uint32_t> dims() const override { return {}; }
};

/// Cross-channel local response normalisation:
/// y_c = x_c / (k + alpha/n * sum_{window} x^2)^beta.
class Lrn final : public Layer {
 public:
  explicit Lrn(int n = 5, double alpha = 1e-4, double beta = 0.75, double k = 2.0);

  LayerKind kind() const override { return LayerKind::lrn; }
  std::string describe() const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Lrn>(*this); }
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, bool need_input_grad) override;
  std::vector<std::uint32_t> dims() const override { return {static_cast<std::uint32_t>(n)}; }

  int n;
  double alpha, beta, k;

 private:
  std::vector<double> scale_;
};

/// Bilinear resampling to a fixed output size (align-corners-false).
class BilinearResize final : public Layer {
 public:
  BilinearResize(int out_h, int out_w);

  LayerKind kind() const override { return LayerKind::bilinear_resize; }
  std::string describe() const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BilinearResize>(*this); }
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, bool need_input_grad) override;
  std::vector<std::uint32_t> dims() const override {
    return {static_cast<std::uint32_t>(out_h), static_cast<std::uint32_t>(out_w)};
  }

  int out_h, out_w;
};

using rgbt::Rng;

/// Ordered layer stack with cached activations.
class Network {
 public:
  Network() = default;
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  Network& add(std::unique_ptr<Layer> layer);
  template <class L, class... Args>
  L& emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    add(std::move(layer));
    return ref;
  }

  std::size_t size() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_[i]; }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }

  Tensor forward(const Tensor& input);
  /// Backpropagates `loss_grad` (d loss / d output). Throws StateError without a prior forward.
  Tensor backward(const Tensor& loss_grad, bool need_input_grad = true);

  std::size_t param_count() const;
  void zero_grad();
  /// Kaiming-uniform (fan-in) weights, zero bias.
  void init_params(std::uint64_t seed);
  void clear_cache();

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

Tensor forward(Network& net, const Tensor& input);
Tensor backward(Network& net, const Tensor& loss_grad);

/// v <- momentum v - lr (g + weight_decay theta); theta <- theta + v; gradients cleared.
void sgd_step(Network& net, double lr, double momentum, double weight_decay);

struct GradCheckOptions {
  std::size_t max_params = 10000;
  std::uint64_t seed = 7;
  double denom_floor = 1e-5;
};

/// Max relative error between analytic and central-difference gradients of
/// the loss sum(r * net(input)) with a fixed random projection r.
double grad_check(Network& net, const Tensor& input, double eps, const GradCheckOptions& opts = {});

/// Same comparison for the gradient with respect to the input tensor.
double grad_check_input(Network& net, const Tensor& input, double eps, const GradCheckOptions& opts = {});

/// Relative error metric used by the gradient checks.
double relative_error(double analytic, double numeric, double floor);

// Checkpoint: "MFN1", u32 network count, then per network a u32 layer count
// and per layer: u32 kind tag, u32 dim count, u32 dims, u32 param count,
// float32 params. All integers little-endian.
void save_checkpoint(const std::string& path, std::span<const Network* const> nets);
std::vector<Network> load_checkpoint(const std::string& path);
std::vector<std::uint8_t> serialize(std::span<const Network* const> nets);
std::vector<Network> deserialize(std::span<const std::uint8_t> bytes);

}  // namespace rgbt::nn
