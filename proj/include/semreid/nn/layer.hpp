#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "semreid/core/rng.hpp"
#include "semreid/core/tensor.hpp"

namespace semreid::nn {

struct LayerStats {
  std::int64_t params = 0;      // live (unmasked) parameters
  std::int64_t mult_adds = 0;   // multiply-adds per single input sample
};

class Layer {
 public:
  virtual ~Layer() = default;

  virtual Tensor forward(const Tensor& x, bool train) = 0;
  // grad w.r.t. this layer's input; parameter grads are accumulated internally
  virtual Tensor backward(const Tensor& grad_out) = 0;

  virtual std::vector<Tensor*> params() { return {}; }
  virtual std::vector<Tensor*> grads() { return {}; }
  virtual void zero_grad() {
    for (Tensor* g : grads()) g->zero();
  }
  virtual void init(Rng& rng) { (void)rng; }

  // param/mult-add accounting given the input spatial size this layer sees
  virtual LayerStats stats(int in_h, int in_w) const {
    (void)in_h;
    (void)in_w;
    return {};
  }
  // spatial size transform, used to thread H×W through stats()
  virtual void out_size(int in_h, int in_w, int& out_h, int& out_w) const {
    out_h = in_h;
    out_w = in_w;
  }
};

using LayerPtr = std::unique_ptr<Layer>;

}  // namespace semreid::nn
