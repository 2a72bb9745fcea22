#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "semreid/nn/layer.hpp"

namespace semreid::nn {

class Sequential : public Layer {
 public:
  Sequential() = default;

  template <typename L, typename... Args>
  L* add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L* raw = layer.get();
    layers_.push_back(std::move(layer));
    return raw;
  }

  void add_layer(LayerPtr layer) { layers_.push_back(std::move(layer)); }

  Tensor forward(const Tensor& x, bool train) override {
    Tensor h = x;
    for (auto& l : layers_) h = l->forward(h, train);
    return h;
  }

  Tensor backward(const Tensor& grad_out) override {
    Tensor g = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
  }

  std::vector<Tensor*> params() override {
    std::vector<Tensor*> out;
    for (auto& l : layers_)
      for (Tensor* p : l->params()) out.push_back(p);
    return out;
  }

  std::vector<Tensor*> grads() override {
    std::vector<Tensor*> out;
    for (auto& l : layers_)
      for (Tensor* g : l->grads()) out.push_back(g);
    return out;
  }

  void init(Rng& rng) override {
    for (auto& l : layers_) l->init(rng);
  }

  LayerStats stats(int in_h, int in_w) const override {
    LayerStats total;
    int h = in_h, w = in_w;
    for (const auto& l : layers_) {
      LayerStats s = l->stats(h, w);
      total.params += s.params;
      total.mult_adds += s.mult_adds;
      int nh, nw;
      l->out_size(h, w, nh, nw);
      h = nh;
      w = nw;
    }
    return total;
  }

  void out_size(int in_h, int in_w, int& out_h, int& out_w) const override {
    int h = in_h, w = in_w;
    for (const auto& l : layers_) {
      int nh, nw;
      l->out_size(h, w, nh, nw);
      h = nh;
      w = nw;
    }
    out_h = h;
    out_w = w;
  }

  std::size_t size() const { return layers_.size(); }
  Layer* layer(std::size_t i) { return layers_[i].get(); }
  const std::vector<LayerPtr>& layers() const { return layers_; }

 private:
  std::vector<LayerPtr> layers_;
};

}  // namespace semreid::nn
