#pragma once

#include "semreid/core/errors.hpp"
#include "semreid/nn/layer.hpp"

namespace semreid::nn {

// im2col / col2im for kernel k, stride s, padding p. cols has shape
// (c_in * k * k, out_h * out_w).
void im2col(const double* im, int c_in, int h, int w, int k, int s, int p, double* cols);
void col2im(const double* cols, int c_in, int h, int w, int k, int s, int p, double* im);

inline int conv_out_size(int in, int k, int s, int p) { return (in + 2 * p - k) / s + 1; }

// 2-D convolution with optional channel grouping and an optional binary
// weight mask. Masked weights are pinned to zero: the mask is applied to the
// stored weights and to their gradients, so a masked connection stays dead
// through any further training.
class Conv2d : public Layer {
 public:
  Conv2d(int c_in, int c_out, int k, int stride, int pad, int groups = 1, bool bias = true);

  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad_out) override;

  std::vector<Tensor*> params() override;
  std::vector<Tensor*> grads() override;
  void init(Rng& rng) override;

  LayerStats stats(int in_h, int in_w) const override;
  void out_size(int in_h, int in_w, int& out_h, int& out_w) const override {
    out_h = conv_out_size(in_h, k_, stride_, pad_);
    out_w = conv_out_size(in_w, k_, stride_, pad_);
  }

  // mask support (used by the learned group convolutions)
  void enable_mask();
  bool masked() const { return use_mask_; }
  Tensor& mask() { return mask_; }
  const Tensor& mask() const { return mask_; }
  void apply_mask();  // zero out masked weight storage

  Tensor& weight() { return weight_; }
  const Tensor& weight() const { return weight_; }
  int in_channels() const { return c_in_; }
  int out_channels() const { return c_out_; }
  int groups() const { return groups_; }
  int kernel() const { return k_; }

 private:
  int c_in_, c_out_, k_, stride_, pad_, groups_;
  bool has_bias_;
  bool use_mask_ = false;
  Tensor weight_;  // (c_out, c_in/groups * k * k)
  Tensor bias_;    // (c_out)
  Tensor grad_weight_, grad_bias_;
  Tensor mask_;    // same shape as weight_, 1 = live
  Tensor cached_input_;
};

// Transposed 2-D convolution (fractionally strided), the DCGAN upsampler.
// out = (in - 1) * stride - 2 * pad + k.
class ConvTranspose2d : public Layer {
 public:
  ConvTranspose2d(int c_in, int c_out, int k, int stride, int pad, bool bias = true);

  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& grad_out) override;

  std::vector<Tensor*> params() override;
  std::vector<Tensor*> grads() override;
  void init(Rng& rng) override;

  LayerStats stats(int in_h, int in_w) const override;
  void out_size(int in_h, int in_w, int& out_h, int& out_w) const override {
    out_h = (in_h - 1) * stride_ - 2 * pad_ + k_;
    out_w = (in_w - 1) * stride_ - 2 * pad_ + k_;
  }

 private:
  int c_in_, c_out_, k_, stride_, pad_;
  bool has_bias_;
  Tensor weight_;  // (c_in, c_out * k * k)
  Tensor bias_;    // (c_out)
  Tensor grad_weight_, grad_bias_;
  Tensor cached_input_;
};

}  // namespace semreid::nn
