#include "semreid/nn/conv.hpp"

#include <Eigen/Core>
#include <cmath>

namespace semreid::nn {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

void im2col(const double* im, int c_in, int h, int w, int k, int s, int p, double* cols) {
  const int out_h = conv_out_size(h, k, s, p);
  const int out_w = conv_out_size(w, k, s, p);
  const int cols_w = out_h * out_w;
  for (int c = 0; c < c_in; ++c) {
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        double* row = cols + (static_cast<std::size_t>(c) * k * k + ki * k + kj) * cols_w;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * s - p + ki;
          if (iy < 0 || iy >= h) {
            for (int ox = 0; ox < out_w; ++ox) row[oy * out_w + ox] = 0.0;
            continue;
          }
          const double* im_row = im + (static_cast<std::size_t>(c) * h + iy) * w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * s - p + kj;
            row[oy * out_w + ox] = (ix >= 0 && ix < w) ? im_row[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const double* cols, int c_in, int h, int w, int k, int s, int p, double* im) {
  const int out_h = conv_out_size(h, k, s, p);
  const int out_w = conv_out_size(w, k, s, p);
  const int cols_w = out_h * out_w;
  std::fill(im, im + static_cast<std::size_t>(c_in) * h * w, 0.0);
  for (int c = 0; c < c_in; ++c) {
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        const double* row = cols + (static_cast<std::size_t>(c) * k * k + ki * k + kj) * cols_w;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * s - p + ki;
          if (iy < 0 || iy >= h) continue;
          double* im_row = im + (static_cast<std::size_t>(c) * h + iy) * w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * s - p + kj;
            if (ix >= 0 && ix < w) im_row[ix] += row[oy * out_w + ox];
          }
        }
      }
    }
  }
}

Conv2d::Conv2d(int c_in, int c_out, int k, int stride, int pad, int groups, bool bias)
    : c_in_(c_in),
      c_out_(c_out),
      k_(k),
      stride_(stride),
      pad_(pad),
      groups_(groups),
      has_bias_(bias) {
  if (c_in % groups != 0 || c_out % groups != 0)
    throw ArchitectureError("Conv2d: channels (" + std::to_string(c_in) + "," +
                            std::to_string(c_out) + ") not divisible by groups " +
                            std::to_string(groups));
  weight_ = Tensor{c_out, (c_in / groups) * k * k};
  grad_weight_ = Tensor{c_out, (c_in / groups) * k * k};
  if (has_bias_) {
    bias_ = Tensor{c_out};
    grad_bias_ = Tensor{c_out};
  }
}

void Conv2d::init(Rng& rng) {
  const double stddev = std::sqrt(2.0 / (static_cast<double>(c_in_ / groups_) * k_ * k_));
  rng.fill_normal(weight_, 0.0, stddev);
  if (has_bias_) bias_.zero();
  if (use_mask_) apply_mask();
}

void Conv2d::enable_mask() {
  use_mask_ = true;
  mask_ = Tensor{c_out_, (c_in_ / groups_) * k_ * k_};
  mask_.fill(1.0);
}

void Conv2d::apply_mask() {
  if (!use_mask_) return;
  for (std::size_t i = 0; i < weight_.numel(); ++i) weight_[i] *= mask_[i];
}

Tensor Conv2d::forward(const Tensor& x, bool train) {
  if (use_mask_) apply_mask();  // masked connections are structurally dead
  if (train) cached_input_ = x;
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int out_h = conv_out_size(h, k_, stride_, pad_);
  const int out_w = conv_out_size(w, k_, stride_, pad_);
  const int cg_in = c_in_ / groups_, cg_out = c_out_ / groups_;
  const int krows = cg_in * k_ * k_;
  Tensor out{n, c_out_, out_h, out_w};
  Tensor cols{c_in_ * k_ * k_, out_h * out_w};
  for (int i = 0; i < n; ++i) {
    im2col(x.data() + static_cast<std::size_t>(i) * c_in_ * h * w, c_in_, h, w, k_, stride_, pad_,
           cols.data());
    for (int g = 0; g < groups_; ++g) {
      CMapMat wg(weight_.data() + static_cast<std::size_t>(g) * cg_out * krows, cg_out, krows);
      CMapMat cg(cols.data() + static_cast<std::size_t>(g) * krows * out_h * out_w, krows,
                 out_h * out_w);
      MapMat og(out.data() + (static_cast<std::size_t>(i) * c_out_ + g * cg_out) * out_h * out_w,
                cg_out, out_h * out_w);
      og.noalias() = wg * cg;
    }
    if (has_bias_) {
      for (int c = 0; c < c_out_; ++c) {
        double* o = out.data() + (static_cast<std::size_t>(i) * c_out_ + c) * out_h * out_w;
        for (int j = 0; j < out_h * out_w; ++j) o[j] += bias_[c];
      }
    }
  }
  return out;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  const Tensor& x = cached_input_;
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int out_h = grad_out.dim(2), out_w = grad_out.dim(3);
  const int cg_in = c_in_ / groups_, cg_out = c_out_ / groups_;
  const int krows = cg_in * k_ * k_;
  Tensor grad_in{n, c_in_, h, w};
  Tensor cols{c_in_ * k_ * k_, out_h * out_w};
  Tensor dcols{c_in_ * k_ * k_, out_h * out_w};
  for (int i = 0; i < n; ++i) {
    im2col(x.data() + static_cast<std::size_t>(i) * c_in_ * h * w, c_in_, h, w, k_, stride_, pad_,
           cols.data());
    for (int g = 0; g < groups_; ++g) {
      CMapMat go(grad_out.data() +
                     (static_cast<std::size_t>(i) * c_out_ + g * cg_out) * out_h * out_w,
                 cg_out, out_h * out_w);
      CMapMat cg(cols.data() + static_cast<std::size_t>(g) * krows * out_h * out_w, krows,
                 out_h * out_w);
      MapMat dwg(grad_weight_.data() + static_cast<std::size_t>(g) * cg_out * krows, cg_out,
                 krows);
      dwg.noalias() += go * cg.transpose();
      CMapMat wg(weight_.data() + static_cast<std::size_t>(g) * cg_out * krows, cg_out, krows);
      MapMat dcg(dcols.data() + static_cast<std::size_t>(g) * krows * out_h * out_w, krows,
                 out_h * out_w);
      dcg.noalias() = wg.transpose() * go;
    }
    col2im(dcols.data(), c_in_, h, w, k_, stride_, pad_,
           grad_in.data() + static_cast<std::size_t>(i) * c_in_ * h * w);
    if (has_bias_) {
      for (int c = 0; c < c_out_; ++c) {
        const double* go = grad_out.data() +
                           (static_cast<std::size_t>(i) * c_out_ + c) * out_h * out_w;
        for (int j = 0; j < out_h * out_w; ++j) grad_bias_[c] += go[j];
      }
    }
  }
  if (use_mask_) {
    for (std::size_t i = 0; i < grad_weight_.numel(); ++i) grad_weight_[i] *= mask_[i];
  }
  return grad_in;
}

std::vector<Tensor*> Conv2d::params() {
  std::vector<Tensor*> p{&weight_};
  if (has_bias_) p.push_back(&bias_);
  return p;
}

std::vector<Tensor*> Conv2d::grads() {
  std::vector<Tensor*> g{&grad_weight_};
  if (has_bias_) g.push_back(&grad_bias_);
  return g;
}

LayerStats Conv2d::stats(int in_h, int in_w) const {
  const int out_h = conv_out_size(in_h, k_, stride_, pad_);
  const int out_w = conv_out_size(in_w, k_, stride_, pad_);
  std::int64_t live = 0;
  if (use_mask_) {
    for (std::size_t i = 0; i < mask_.numel(); ++i) live += mask_[i] != 0.0 ? 1 : 0;
  } else {
    live = static_cast<std::int64_t>(weight_.numel());
  }
  LayerStats s;
  s.params = live + (has_bias_ ? c_out_ : 0);
  // one multiply-add per live weight per output spatial position
  s.mult_adds = live * out_h * out_w;
  return s;
}

ConvTranspose2d::ConvTranspose2d(int c_in, int c_out, int k, int stride, int pad, bool bias)
    : c_in_(c_in), c_out_(c_out), k_(k), stride_(stride), pad_(pad), has_bias_(bias) {
  weight_ = Tensor{c_in, c_out * k * k};
  grad_weight_ = Tensor{c_in, c_out * k * k};
  if (has_bias_) {
    bias_ = Tensor{c_out};
    grad_bias_ = Tensor{c_out};
  }
}

void ConvTranspose2d::init(Rng& rng) {
  const double stddev = std::sqrt(2.0 / (static_cast<double>(c_in_) * k_ * k_));
  rng.fill_normal(weight_, 0.0, stddev);
  if (has_bias_) bias_.zero();
}

Tensor ConvTranspose2d::forward(const Tensor& x, bool train) {
  if (train) cached_input_ = x;
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int out_h = (h - 1) * stride_ - 2 * pad_ + k_;
  const int out_w = (w - 1) * stride_ - 2 * pad_ + k_;
  Tensor out{n, c_out_, out_h, out_w};
  Tensor cols{c_out_ * k_ * k_, h * w};
  for (int i = 0; i < n; ++i) {
    CMapMat xi(x.data() + static_cast<std::size_t>(i) * c_in_ * h * w, c_in_, h * w);
    CMapMat wm(weight_.data(), c_in_, c_out_ * k_ * k_);
    MapMat cm(cols.data(), c_out_ * k_ * k_, h * w);
    cm.noalias() = wm.transpose() * xi;
    // scatter: out plays the role of the "image" in the conv relationship
    col2im(cols.data(), c_out_, out_h, out_w, k_, stride_, pad_,
           out.data() + static_cast<std::size_t>(i) * c_out_ * out_h * out_w);
    if (has_bias_) {
      for (int c = 0; c < c_out_; ++c) {
        double* o = out.data() + (static_cast<std::size_t>(i) * c_out_ + c) * out_h * out_w;
        for (int j = 0; j < out_h * out_w; ++j) o[j] += bias_[c];
      }
    }
  }
  return out;
}

Tensor ConvTranspose2d::backward(const Tensor& grad_out) {
  const Tensor& x = cached_input_;
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int out_h = grad_out.dim(2), out_w = grad_out.dim(3);
  Tensor grad_in{n, c_in_, h, w};
  Tensor cols{c_out_ * k_ * k_, h * w};
  for (int i = 0; i < n; ++i) {
    im2col(grad_out.data() + static_cast<std::size_t>(i) * c_out_ * out_h * out_w, c_out_, out_h,
           out_w, k_, stride_, pad_, cols.data());
    CMapMat cm(cols.data(), c_out_ * k_ * k_, h * w);
    CMapMat wm(weight_.data(), c_in_, c_out_ * k_ * k_);
    MapMat gi(grad_in.data() + static_cast<std::size_t>(i) * c_in_ * h * w, c_in_, h * w);
    gi.noalias() = wm * cm;
    CMapMat xi(x.data() + static_cast<std::size_t>(i) * c_in_ * h * w, c_in_, h * w);
    MapMat dw(grad_weight_.data(), c_in_, c_out_ * k_ * k_);
    dw.noalias() += xi * cm.transpose();
    if (has_bias_) {
      const double* go = grad_out.data() + static_cast<std::size_t>(i) * c_out_ * out_h * out_w;
      for (int c = 0; c < c_out_; ++c)
        for (int j = 0; j < out_h * out_w; ++j)
          grad_bias_[c] += go[static_cast<std::size_t>(c) * out_h * out_w + j];
    }
  }
  return grad_in;
}

std::vector<Tensor*> ConvTranspose2d::params() {
  std::vector<Tensor*> p{&weight_};
  if (has_bias_) p.push_back(&bias_);
  return p;
}

std::vector<Tensor*> ConvTranspose2d::grads() {
  std::vector<Tensor*> g{&grad_weight_};
  if (has_bias_) g.push_back(&grad_bias_);
  return g;
}

LayerStats ConvTranspose2d::stats(int in_h, int in_w) const {
  LayerStats s;
  s.params = static_cast<std::int64_t>(weight_.numel()) + (has_bias_ ? c_out_ : 0);
  s.mult_adds = static_cast<std::int64_t>(weight_.numel()) * in_h * in_w;
  return s;
}

}  // namespace semreid::nn
