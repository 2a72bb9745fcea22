#include "doctest.h"

#include "semreid/core/rng.hpp"
#include "semreid/nn/activations.hpp"
#include "semreid/nn/basic.hpp"
#include "semreid/nn/batchnorm.hpp"
#include "semreid/nn/conv.hpp"
#include "semreid/nn/loss.hpp"
#include "semreid/nn/optim.hpp"
#include "semreid/nn/sequential.hpp"

#include <cmath>
#include <vector>

using namespace semreid;

namespace {

// Scalar objective L = sum_i w_i * out_i with fixed random weights, so every
// output element contributes to the checked gradient.
struct GradCheck {
  double max_rel = 0.0;

  static double rel_err(double a, double n) {
    double denom = std::max({std::fabs(a), std::fabs(n), 1e-6});
    return std::fabs(a - n) / denom;
  }

  void run(nn::Layer& layer, const Tensor& input, Rng& rng, bool train = true) {
    Tensor x = input;
    Tensor out = layer.forward(x, train);
    Tensor w(out.shape());
    rng.fill_normal(w, 0.0, 1.0);

    layer.zero_grad();
    layer.forward(x, train);
    Tensor gin = layer.backward(w);

    auto loss_at = [&](Tensor& xin) {
      Tensor o = layer.forward(xin, train);
      double s = 0.0;
      for (std::size_t i = 0; i < o.numel(); ++i) s += w[i] * o[i];
      return s;
    };

    const double h = 1e-5;
    for (std::size_t i = 0; i < x.numel(); ++i) {
      double orig = x[i];
      x[i] = orig + h;
      double lp = loss_at(x);
      x[i] = orig - h;
      double lm = loss_at(x);
      x[i] = orig;
      max_rel = std::max(max_rel, rel_err(gin[i], (lp - lm) / (2 * h)));
    }
    auto params = layer.params();
    auto grads = layer.grads();
    for (std::size_t p = 0; p < params.size(); ++p) {
      for (std::size_t i = 0; i < params[p]->numel(); ++i) {
        double orig = (*params[p])[i];
        (*params[p])[i] = orig + h;
        double lp = loss_at(x);
        (*params[p])[i] = orig - h;
        double lm = loss_at(x);
        (*params[p])[i] = orig;
        max_rel = std::max(max_rel, rel_err((*grads[p])[i], (lp - lm) / (2 * h)));
      }
    }
  }
};

Tensor randn(std::vector<int> shape, Rng& rng) {
  Tensor t(std::move(shape));
  rng.fill_normal(t, 0.0, 1.0);
  return t;
}

}  // namespace

TEST_CASE("conv2d gradient check") {
  Rng rng(11);
  nn::Conv2d conv(3, 4, 3, 1, 1, 1, true);
  conv.init(rng);
  GradCheck gc;
  gc.run(conv, randn({2, 3, 5, 5}, rng), rng);
  CHECK(gc.max_rel < 1e-4);
}

TEST_CASE("conv2d strided no-pad gradient check") {
  Rng rng(12);
  nn::Conv2d conv(2, 3, 4, 2, 1, 1, false);
  conv.init(rng);
  GradCheck gc;
  gc.run(conv, randn({2, 2, 8, 8}, rng), rng);
  CHECK(gc.max_rel < 1e-4);
}

TEST_CASE("grouped conv2d gradient check") {
  Rng rng(13);
  nn::Conv2d conv(4, 8, 1, 1, 0, 4, false);
  conv.init(rng);
  GradCheck gc;
  gc.run(conv, randn({2, 4, 4, 4}, rng), rng);
  CHECK(gc.max_rel < 1e-4);
}

TEST_CASE("masked conv2d gradient respects mask") {
  Rng rng(14);
  nn::Conv2d conv(4, 4, 1, 1, 0, 1, false);
  conv.init(rng);
  conv.enable_mask();
  Tensor& m = conv.mask();
  for (std::size_t i = 0; i < m.numel(); i += 2) m[i] = 0.0;
  conv.apply_mask();
  GradCheck gc;
  gc.run(conv, randn({2, 4, 3, 3}, rng), rng);
  CHECK(gc.max_rel < 1e-4);
  for (std::size_t i = 0; i < m.numel(); ++i)
    if (m[i] == 0.0) CHECK((*conv.grads()[0])[i] == 0.0);
}

TEST_CASE("conv transpose gradient check") {
  Rng rng(15);
  nn::ConvTranspose2d conv(4, 3, 4, 2, 1, false);
  conv.init(rng);
  GradCheck gc;
  gc.run(conv, randn({2, 4, 4, 4}, rng), rng);
  CHECK(gc.max_rel < 1e-4);
}

TEST_CASE("conv transpose doubles spatial size (k4 s2 p1)") {
  Rng rng(16);
  nn::ConvTranspose2d conv(3, 2, 4, 2, 1, false);
  conv.init(rng);
  Tensor x = randn({1, 3, 8, 8}, rng);
  Tensor y = conv.forward(x, true);
  CHECK(y.shape() == std::vector<int>{1, 2, 16, 16});
}

TEST_CASE("batchnorm gradient check (train mode)") {
  Rng rng(17);
  nn::BatchNorm2d bn(3);
  bn.init(rng);
  for (std::size_t i = 0; i < bn.params()[0]->numel(); ++i) (*bn.params()[0])[i] += 0.3;
  GradCheck gc;
  gc.run(bn, randn({4, 3, 5, 5}, rng), rng);
  CHECK(gc.max_rel < 1e-4);
}

TEST_CASE("batchnorm eval mode is deterministic") {
  Rng rng(18);
  nn::BatchNorm2d bn(2);
  bn.init(rng);
  Tensor x = randn({8, 2, 4, 4}, rng);
  bn.forward(x, true);
  Tensor y1 = bn.forward(x, false);
  Tensor y2 = bn.forward(x, false);
  CHECK(y1 == y2);
}

TEST_CASE("linear gradient check") {
  Rng rng(19);
  nn::Linear lin(6, 4);
  lin.init(rng);
  GradCheck gc;
  gc.run(lin, randn({3, 6}, rng), rng);
  CHECK(gc.max_rel < 1e-4);
}

TEST_CASE("activation gradient checks") {
  Rng rng(20);
  nn::ReLU relu;
  nn::LeakyReLU lrelu(0.2);
  nn::Tanh tanh_l;
  nn::Sigmoid sig;
  for (nn::Layer* l : std::vector<nn::Layer*>{&relu, &lrelu, &tanh_l, &sig}) {
    GradCheck gc;
    Tensor x = randn({2, 3, 4, 4}, rng);
    // keep inputs away from the ReLU kink relative to the fd step
    for (std::size_t i = 0; i < x.numel(); ++i)
      if (std::fabs(x[i]) < 1e-3) x[i] += 0.01;
    gc.run(*l, x, rng);
    CHECK(gc.max_rel < 1e-4);
  }
}

TEST_CASE("pooling gradient checks") {
  Rng rng(21);
  nn::AvgPool2x2 pool;
  GradCheck gc;
  gc.run(pool, randn({2, 3, 6, 6}, rng), rng);
  CHECK(gc.max_rel < 1e-4);

  nn::GlobalAvgPool gap;
  GradCheck gc2;
  gc2.run(gap, randn({2, 3, 4, 4}, rng), rng);
  CHECK(gc2.max_rel < 1e-4);
}

TEST_CASE("nll losses match finite differences") {
  Tensor p({4});
  for (int i = 0; i < 4; ++i) p[i] = 0.1 + 0.2 * i;
  const double h = 1e-6;
  Tensor grad, tmp;
  double loss = nn::nll_real(p, grad);
  CHECK(loss > 0.0);
  for (int i = 0; i < 4; ++i) {
    Tensor pp = p, pm = p;
    pp[i] += h;
    pm[i] -= h;
    double num = (nn::nll_real(pp, tmp) - nn::nll_real(pm, tmp)) / (2 * h);
    CHECK(std::fabs(grad[i] - num) < 1e-5);
  }
  loss = nn::nll_fake(p, grad);
  CHECK(loss > 0.0);
  for (int i = 0; i < 4; ++i) {
    Tensor pp = p, pm = p;
    pp[i] += h;
    pm[i] -= h;
    double num = (nn::nll_fake(pp, tmp) - nn::nll_fake(pm, tmp)) / (2 * h);
    CHECK(std::fabs(grad[i] - num) < 1e-5);
  }
}

TEST_CASE("cross entropy with soft targets matches finite differences") {
  Rng rng(23);
  Tensor logits = randn({3, 5}, rng);
  Tensor targets({3, 5});
  for (int n = 0; n < 3; ++n) {
    double s = 0.0;
    std::vector<double> r(5);
    for (int j = 0; j < 5; ++j) {
      r[j] = std::fabs(rng.normal()) + 0.1;
      s += r[j];
    }
    for (int j = 0; j < 5; ++j) targets.at(n, j) = r[j] / s;
  }
  Tensor grad, tmp;
  double loss = nn::cross_entropy(logits, targets, grad);
  CHECK(loss > 0.0);
  const double h = 1e-6;
  for (std::size_t i = 0; i < logits.numel(); ++i) {
    Tensor lp = logits, lm = logits;
    lp[i] += h;
    lm[i] -= h;
    double num = (nn::cross_entropy(lp, targets, tmp) - nn::cross_entropy(lm, targets, tmp)) /
                 (2 * h);
    CHECK(std::fabs(grad[i] - num) < 1e-5);
  }
}

TEST_CASE("softmax rows sum to one and are shift invariant") {
  Rng rng(24);
  Tensor logits = randn({4, 6}, rng);
  Tensor p = nn::softmax(logits);
  for (int n = 0; n < 4; ++n) {
    double s = 0.0;
    for (int j = 0; j < 6; ++j) s += p.at(n, j);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  Tensor shifted = logits;
  for (int n = 0; n < 4; ++n)
    for (int j = 0; j < 6; ++j) shifted.at(n, j) += 7.5;
  Tensor p2 = nn::softmax(shifted);
  for (std::size_t i = 0; i < p.numel(); ++i) CHECK(std::fabs(p[i] - p2[i]) < 1e-12);
}

TEST_CASE("adam step matches reference update") {
  Tensor w({1});
  w[0] = 1.0;
  Tensor g({1});
  g[0] = 0.5;
  nn::Adam opt({&w}, {&g}, 2e-4, 0.5, 0.999);
  opt.step();
  double mhat = 0.5 * 0.5 / (1 - 0.5);
  double vhat = 0.001 * 0.25 / (1 - 0.999);
  double expect = 1.0 - 2e-4 * mhat / (std::sqrt(vhat) + 1e-8);
  CHECK(w[0] == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("nesterov sgd matches reference update") {
  Tensor w({1});
  w[0] = 2.0;
  Tensor g({1});
  g[0] = 0.25;
  nn::SgdNesterov opt({&w}, {&g}, 0.1, 0.9);
  opt.step();
  double buf = 0.25;  // mu*0 + g
  double expect = 2.0 - 0.1 * (0.25 + 0.9 * buf);
  CHECK(w[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("cosine schedule endpoints") {
  CHECK(nn::cosine_lr(0.1, 0, 100) == doctest::Approx(0.1));
  CHECK(nn::cosine_lr(0.1, 100, 100) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(nn::cosine_lr(0.1, 50, 100) == doctest::Approx(0.05));
}

TEST_CASE("sequential composes layers and backprops through") {
  Rng rng(25);
  nn::Sequential net;
  net.add<nn::Conv2d>(2, 3, 3, 1, 1, 1, false);
  net.add<nn::BatchNorm2d>(3);
  net.add<nn::LeakyReLU>(0.2);
  net.add<nn::GlobalAvgPool>();
  net.add<nn::Linear>(3, 2);
  net.init(rng);
  GradCheck gc;
  gc.run(net, randn({2, 2, 6, 6}, rng), rng);
  CHECK(gc.max_rel < 1e-4);
}
