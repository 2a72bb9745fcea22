#pragma once

#include <cmath>

#include "semreid/nn/layer.hpp"

namespace semreid::nn {

class ReLU : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override {
    Tensor out = x;
    for (std::size_t i = 0; i < out.numel(); ++i)
      if (out[i] < 0.0) out[i] = 0.0;
    if (train) cached_ = x;
    return out;
  }
  Tensor backward(const Tensor& grad_out) override {
    Tensor g = grad_out;
    for (std::size_t i = 0; i < g.numel(); ++i)
      if (cached_[i] <= 0.0) g[i] = 0.0;
    return g;
  }

 private:
  Tensor cached_;
};

class LeakyReLU : public Layer {
 public:
  explicit LeakyReLU(double slope = 0.2) : slope_(slope) {}
  Tensor forward(const Tensor& x, bool train) override {
    Tensor out = x;
    for (std::size_t i = 0; i < out.numel(); ++i)
      if (out[i] < 0.0) out[i] *= slope_;
    if (train) cached_ = x;
    return out;
  }
  Tensor backward(const Tensor& grad_out) override {
    Tensor g = grad_out;
    for (std::size_t i = 0; i < g.numel(); ++i)
      if (cached_[i] <= 0.0) g[i] *= slope_;
    return g;
  }

 private:
  double slope_;
  Tensor cached_;
};

class Tanh : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override {
    Tensor out = x;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
    if (train) cached_out_ = out;
    return out;
  }
  Tensor backward(const Tensor& grad_out) override {
    Tensor g = grad_out;
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] *= 1.0 - cached_out_[i] * cached_out_[i];
    return g;
  }

 private:
  Tensor cached_out_;
};

class Sigmoid : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override {
    Tensor out = x;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
    if (train) cached_out_ = out;
    return out;
  }
  Tensor backward(const Tensor& grad_out) override {
    Tensor g = grad_out;
    for (std::size_t i = 0; i < g.numel(); ++i)
      g[i] *= cached_out_[i] * (1.0 - cached_out_[i]);
    return g;
  }

 private:
  Tensor cached_out_;
};

}  // namespace semreid::nn
