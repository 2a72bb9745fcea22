#pragma once

#include "semreid/nn/layer.hpp"

namespace semreid::nn {

// Per-channel batch normalization over N×H×W with running statistics.
class BatchNorm2d : public Layer {
 public:
  explicit BatchNorm2d(int channels, double eps = 1e-5, double momentum = 0.1);

  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad_out) override;

  std::vector<Tensor*> params() override { return {&gamma_, &beta_}; }
  std::vector<Tensor*> grads() override { return {&grad_gamma_, &grad_beta_}; }
  void init(Rng& rng) override;

  LayerStats stats(int, int) const override {
    LayerStats s;
    s.params = 2 * channels_;
    return s;
  }

  // running stats are state, not trainable parameters; checkpoints need them
  std::vector<Tensor*> buffers() { return {&running_mean_, &running_var_}; }

 private:
  int channels_;
  double eps_, momentum_;
  Tensor gamma_, beta_, grad_gamma_, grad_beta_;
  Tensor running_mean_, running_var_;
  // caches for backward
  Tensor xhat_, inv_std_;
};

}  // namespace semreid::nn
