#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "rgbt/error.hpp"
#include "rgbt/nnet.hpp"

using namespace rgbt;
using namespace rgbt::nn;

namespace {

Tensor random_tensor(int c, int h, int w, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Tensor t(c, h, w);
  Rng rng(seed);
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

template <class L, class... Args>
Network single(Args&&... args) {
  Network n;
  n.emplace<L>(std::forward<Args>(args)...);
  n.init_params(3);
  // non-zero biases so their gradients are exercised
  for (std::size_t i = 0; i < n.size(); ++i)
    for (auto& p : n.layer(i).params()) p += 0.05;
  return n;
}

}  // namespace

TEST(Tensor, ConcatChannels) {
  const Tensor a = random_tensor(2, 3, 4, 1), b = random_tensor(3, 3, 4, 2);
  const Tensor c = concat_channels(a, b);
  EXPECT_EQ(c.c, 5);
  EXPECT_DOUBLE_EQ(c.at(0, 1, 2), a.at(0, 1, 2));
  EXPECT_DOUBLE_EQ(c.at(4, 2, 3), b.at(2, 2, 3));
  EXPECT_THROW(concat_channels(a, Tensor(1, 2, 4)), DimensionError);
}

TEST(Layers, OutputShapes) {
  Conv2d conv(3, 3, 2, 4, 2, 1);
  EXPECT_EQ(conv.forward(Tensor(2, 9, 9)).shape_string(), Tensor(4, 5, 5).shape_string());
  Deconv2d deconv(3, 3, 4, 2, 2, 1);
  const Tensor d = deconv.forward(Tensor(4, 5, 5));
  EXPECT_EQ(d.h, 9);
  EXPECT_EQ(d.w, 9);
  BilinearResize rs(7, 6);
  const Tensor r = rs.forward(Tensor(3, 4, 4));
  EXPECT_EQ(r.h, 7);
  EXPECT_EQ(r.w, 6);
  EXPECT_THROW(conv.forward(Tensor(3, 9, 9)), DimensionError);
}

TEST(Layers, ActivationValues) {
  Tensor x(1, 1, 3);
  x.data = {-2.0, 0.0, 3.0};
  Relu relu;
  EXPECT_EQ(relu.forward(x).data, (std::vector<double>{0.0, 0.0, 3.0}));
  Sigmoid sig;
  const Tensor s = sig.forward(x);
  EXPECT_DOUBLE_EQ(s.data[1], 0.5);
  EXPECT_NEAR(s.data[2], 1.0 / (1.0 + std::exp(-3.0)), 1e-15);
}

TEST(Layers, LrnMatchesFormula) {
  const Tensor x = random_tensor(7, 2, 2, 5);
  Lrn lrn(5, 1e-2, 0.75, 2.0);
  const Tensor y = lrn.forward(x);
  for (int c = 0; c < 7; ++c) {
    double sum = 0.0;
    for (int j = std::max(0, c - 2); j <= std::min(6, c + 2); ++j) sum += x.at(j, 1, 0) * x.at(j, 1, 0);
    EXPECT_NEAR(y.at(c, 1, 0), x.at(c, 1, 0) / std::pow(2.0 + 1e-2 / 5.0 * sum, 0.75), 1e-14);
  }
}

TEST(Layers, ConvMatchesDirectSum) {
  Conv2d conv(2, 2, 1, 1, 1, 0);
  const std::vector<double> p = {1, 2, 3, 4, 0.5};
  std::copy(p.begin(), p.end(), conv.params().begin());
  Tensor x(1, 2, 3);
  x.data = {1, 0, 2, 0, 1, 1};
  const Tensor y = conv.forward(x);
  ASSERT_EQ(y.w, 2);
  EXPECT_DOUBLE_EQ(y.data[0], 1 * 1 + 2 * 0 + 3 * 0 + 4 * 1 + 0.5);
  EXPECT_DOUBLE_EQ(y.data[1], 1 * 0 + 2 * 2 + 3 * 1 + 4 * 1 + 0.5);
}

TEST(Layers, DeconvIsConvAdjoint) {
  Conv2d conv(3, 3, 2, 3, 2, 1);
  Deconv2d deconv(3, 3, 3, 2, 2, 1);
  Rng rng(4);
  for (auto& v : conv.params()) v = rng.uniform(-1, 1);
  // Deconv weights [cin=3][cout=2] share the conv layout [cout=3][cin=2]; zero the biases.
  std::copy(conv.params().begin(), conv.params().end(), deconv.params().begin());
  std::fill(conv.params().end() - 3, conv.params().end(), 0.0);
  std::fill(deconv.params().end() - 2, deconv.params().end(), 0.0);
  const Tensor x = random_tensor(2, 9, 9, 6);
  const Tensor g = random_tensor(3, 5, 5, 7);
  const Tensor cx = conv.forward(x);
  const Tensor dg = deconv.forward(g);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < cx.size(); ++i) lhs += cx.data[i] * g.data[i];
  for (std::size_t i = 0; i < x.size(); ++i) rhs += x.data[i] * dg.data[i];
  EXPECT_NEAR(lhs, rhs, 1e-10);
}

TEST(GradCheck, EveryLayerType) {
  const double tol = 1e-4;
  {
    Network n = single<Conv2d>(3, 3, 2, 3, 2, 1);
    const Tensor x = random_tensor(2, 7, 7, 11);
    EXPECT_LT(grad_check(n, x, 1e-5), tol);
    EXPECT_LT(grad_check_input(n, x, 1e-5), tol);
  }
  {
    Network n = single<Deconv2d>(3, 3, 3, 2, 2, 1);
    const Tensor x = random_tensor(3, 4, 4, 12);
    EXPECT_LT(grad_check(n, x, 1e-5), tol);
    EXPECT_LT(grad_check_input(n, x, 1e-5), tol);
  }
  {
    Network n = single<Relu>();
    const Tensor x = random_tensor(2, 5, 5, 13, 0.1, 1.0);
    EXPECT_LT(grad_check_input(n, x, 1e-5), tol);
  }
  {
    Network n = single<Sigmoid>();
    EXPECT_LT(grad_check_input(n, random_tensor(2, 5, 5, 14), 1e-5), tol);
  }
  {
    Network n = single<Lrn>(5, 0.5, 0.75, 2.0);
    EXPECT_LT(grad_check_input(n, random_tensor(7, 3, 3, 15, -2, 2), 1e-5), tol);
  }
  {
    Network n = single<BilinearResize>(9, 7);
    EXPECT_LT(grad_check_input(n, random_tensor(2, 4, 5, 16), 1e-5), tol);
  }
}

TEST(GradCheck, ComposedNetwork) {
  Network n;
  n.emplace<Conv2d>(3, 3, 2, 4, 2, 1);
  n.emplace<Relu>();
  n.emplace<Lrn>(3, 0.5, 0.75, 2.0);
  n.emplace<Deconv2d>(3, 3, 4, 1, 2, 1);
  n.emplace<BilinearResize>(6, 6);
  n.emplace<Sigmoid>();
  n.init_params(21);
  const Tensor x = random_tensor(2, 8, 8, 22);
  EXPECT_LT(grad_check(n, x, 1e-5), 1e-4);
  EXPECT_LT(grad_check_input(n, x, 1e-5), 1e-4);
}

TEST(Network, BackwardBeforeForwardThrows) {
  Network n = single<Sigmoid>();
  EXPECT_THROW(n.backward(Tensor(1, 1, 1)), StateError);
}

TEST(Sgd, MomentumAndDecay) {
  Network n;
  n.emplace<Conv2d>(1, 1, 1, 1, 1, 0);
  auto& l = n.layer(0);
  l.params()[0] = 1.0;
  l.params()[1] = 0.0;
  l.grads()[0] = 2.0;
  sgd_step(n, 0.1, 0.9, 0.5);
  // v = -0.1 (2 + 0.5 * 1) = -0.25
  EXPECT_DOUBLE_EQ(l.params()[0], 0.75);
  EXPECT_DOUBLE_EQ(l.grads()[0], 0.0);
  sgd_step(n, 0.1, 0.9, 0.0);
  EXPECT_DOUBLE_EQ(l.params()[0], 0.75 - 0.225);
}

TEST(Checkpoint, RoundTripAndCorruption) {
  Network a;
  a.emplace<Conv2d>(3, 3, 2, 4, 2, 1);
  a.emplace<Relu>();
  a.emplace<Lrn>();
  Network b;
  b.emplace<Deconv2d>(3, 3, 4, 1, 2, 1);
  b.emplace<BilinearResize>(5, 5);
  b.emplace<Sigmoid>();
  a.init_params(1);
  b.init_params(2);
  const Network* nets[] = {&a, &b};
  const auto bytes = serialize(nets);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MFN1");
  auto back = deserialize(bytes);
  ASSERT_EQ(back.size(), 2u);
  ASSERT_EQ(back[0].size(), 3u);
  EXPECT_EQ(back[1].layer(1).kind(), LayerKind::bilinear_resize);
  for (std::size_t i = 0; i < a.layer(0).params().size(); ++i) {
    EXPECT_FLOAT_EQ(static_cast<float>(back[0].layer(0).params()[i]), static_cast<float>(a.layer(0).params()[i]));
  }
  // float32 payload: a second round trip is exact
  const Network* again[] = {&back[0], &back[1]};
  EXPECT_EQ(serialize(again), bytes);

  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(deserialize(bad), DataError);
  EXPECT_THROW(deserialize(std::span(bytes).first(bytes.size() - 3)), DataError);

  const auto path = (std::filesystem::temp_directory_path() / "rgbt_test.mfn").string();
  save_checkpoint(path, nets);
  EXPECT_EQ(load_checkpoint(path).size(), 2u);
  std::filesystem::remove(path);
}

TEST(Init, DeterministicPerSeed) {
  Network a, b;
  a.emplace<Conv2d>(3, 3, 2, 2);
  b.emplace<Conv2d>(3, 3, 2, 2);
  a.init_params(9);
  b.init_params(9);
  EXPECT_TRUE(std::equal(a.layer(0).params().begin(), a.layer(0).params().end(), b.layer(0).params().begin()));
  EXPECT_EQ(a.param_count(), 3u * 3 * 2 * 2 + 2);
}
