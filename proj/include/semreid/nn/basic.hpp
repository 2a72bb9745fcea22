#pragma once

#include <Eigen/Core>

#include "semreid/core/errors.hpp"
#include "semreid/nn/layer.hpp"

namespace semreid::nn {

// Fully connected layer on flattened input (N, features).
class Linear : public Layer {
 public:
  Linear(int in_features, int out_features, bool bias = true)
      : in_(in_features), out_(out_features), has_bias_(bias) {
    weight_ = Tensor{out_, in_};
    grad_weight_ = Tensor{out_, in_};
    if (has_bias_) {
      bias_ = Tensor{out_};
      grad_bias_ = Tensor{out_};
    }
  }

  Tensor forward(const Tensor& x, bool train) override {
    Tensor flat = x;
    const int n = flat.dim(0);
    flat.reshape({n, static_cast<int>(flat.numel()) / n});
    if (flat.dim(1) != in_)
      throw ShapeError("Linear: expected " + std::to_string(in_) + " features, got " +
                       std::to_string(flat.dim(1)));
    if (train) cached_input_ = flat;
    Tensor out{n, out_};
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> xm(flat.data(), n, in_);
    Eigen::Map<const RowMat> wm(weight_.data(), out_, in_);
    Eigen::Map<RowMat> om(out.data(), n, out_);
    om.noalias() = xm * wm.transpose();
    if (has_bias_)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < out_; ++j) out.at(i, j) += bias_[j];
    return out;
  }

  Tensor backward(const Tensor& grad_out) override {
    const int n = grad_out.dim(0);
    Tensor grad_in{n, in_};
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> gm(grad_out.data(), n, out_);
    Eigen::Map<const RowMat> xm(cached_input_.data(), n, in_);
    Eigen::Map<const RowMat> wm(weight_.data(), out_, in_);
    Eigen::Map<RowMat> dwm(grad_weight_.data(), out_, in_);
    Eigen::Map<RowMat> gim(grad_in.data(), n, in_);
    dwm.noalias() += gm.transpose() * xm;
    gim.noalias() = gm * wm;
    if (has_bias_)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < out_; ++j) grad_bias_[j] += grad_out.at(i, j);
    return grad_in;
  }

  std::vector<Tensor*> params() override {
    std::vector<Tensor*> p{&weight_};
    if (has_bias_) p.push_back(&bias_);
    return p;
  }
  std::vector<Tensor*> grads() override {
    std::vector<Tensor*> g{&grad_weight_};
    if (has_bias_) g.push_back(&grad_bias_);
    return g;
  }
  void init(Rng& rng) override {
    rng.fill_normal(weight_, 0.0, std::sqrt(2.0 / in_));
    if (has_bias_) bias_.zero();
  }
  LayerStats stats(int, int) const override {
    LayerStats s;
    s.params = static_cast<std::int64_t>(weight_.numel()) + (has_bias_ ? out_ : 0);
    s.mult_adds = static_cast<std::int64_t>(weight_.numel());
    return s;
  }

 private:
  int in_, out_;
  bool has_bias_;
  Tensor weight_, bias_, grad_weight_, grad_bias_;
  Tensor cached_input_;
};

// Non-overlapping 2×2 average pooling.
class AvgPool2x2 : public Layer {
 public:
  Tensor forward(const Tensor& x, bool) override {
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    in_h_ = h;
    in_w_ = w;
    Tensor out{n, c, h / 2, w / 2};
    for (int i = 0; i < n; ++i)
      for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h / 2; ++y)
          for (int x2 = 0; x2 < w / 2; ++x2)
            out.at(i, ch, y, x2) = 0.25 * (x.at(i, ch, 2 * y, 2 * x2) +
                                           x.at(i, ch, 2 * y, 2 * x2 + 1) +
                                           x.at(i, ch, 2 * y + 1, 2 * x2) +
                                           x.at(i, ch, 2 * y + 1, 2 * x2 + 1));
    return out;
  }
  Tensor backward(const Tensor& grad_out) override {
    const int n = grad_out.dim(0), c = grad_out.dim(1);
    Tensor grad_in{n, c, in_h_, in_w_};
    for (int i = 0; i < n; ++i)
      for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < grad_out.dim(2); ++y)
          for (int x2 = 0; x2 < grad_out.dim(3); ++x2) {
            const double g = 0.25 * grad_out.at(i, ch, y, x2);
            grad_in.at(i, ch, 2 * y, 2 * x2) = g;
            grad_in.at(i, ch, 2 * y, 2 * x2 + 1) = g;
            grad_in.at(i, ch, 2 * y + 1, 2 * x2) = g;
            grad_in.at(i, ch, 2 * y + 1, 2 * x2 + 1) = g;
          }
    return grad_in;
  }
  void out_size(int in_h, int in_w, int& out_h, int& out_w) const override {
    out_h = in_h / 2;
    out_w = in_w / 2;
  }

 private:
  int in_h_ = 0, in_w_ = 0;
};

// Global average pooling to (N, C, 1, 1) emitted flat as (N, C).
class GlobalAvgPool : public Layer {
 public:
  Tensor forward(const Tensor& x, bool) override {
    const int n = x.dim(0), c = x.dim(1);
    in_h_ = x.dim(2);
    in_w_ = x.dim(3);
    const std::size_t plane = static_cast<std::size_t>(in_h_) * in_w_;
    Tensor out{n, c};
    for (int i = 0; i < n; ++i)
      for (int ch = 0; ch < c; ++ch) {
        const double* p = x.data() + (static_cast<std::size_t>(i) * c + ch) * plane;
        double s = 0.0;
        for (std::size_t j = 0; j < plane; ++j) s += p[j];
        out.at(i, ch) = s / static_cast<double>(plane);
      }
    return out;
  }
  Tensor backward(const Tensor& grad_out) override {
    const int n = grad_out.dim(0), c = grad_out.dim(1);
    const std::size_t plane = static_cast<std::size_t>(in_h_) * in_w_;
    Tensor grad_in{n, c, in_h_, in_w_};
    for (int i = 0; i < n; ++i)
      for (int ch = 0; ch < c; ++ch) {
        const double g = grad_out.at(i, ch) / static_cast<double>(plane);
        double* p = grad_in.data() + (static_cast<std::size_t>(i) * c + ch) * plane;
        for (std::size_t j = 0; j < plane; ++j) p[j] = g;
      }
    return grad_in;
  }
  void out_size(int, int, int& out_h, int& out_w) const override {
    out_h = 1;
    out_w = 1;
  }

 private:
  int in_h_ = 0, in_w_ = 0;
};

}  // namespace semreid::nn
