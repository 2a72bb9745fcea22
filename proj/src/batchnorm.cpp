#include "semreid/nn/batchnorm.hpp"

#include <cmath>

namespace semreid::nn {

BatchNorm2d::BatchNorm2d(int channels, double eps, double momentum)
    : channels_(channels), eps_(eps), momentum_(momentum) {
  gamma_ = Tensor{channels};
  beta_ = Tensor{channels};
  grad_gamma_ = Tensor{channels};
  grad_beta_ = Tensor{channels};
  running_mean_ = Tensor{channels};
  running_var_ = Tensor{channels};
  gamma_.fill(1.0);
  running_var_.fill(1.0);
}

void BatchNorm2d::init(Rng&) {
  gamma_.fill(1.0);
  beta_.zero();
  running_mean_.zero();
  running_var_.fill(1.0);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool train) {
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const double m = static_cast<double>(n) * plane;
  Tensor out = x;
  if (train) {
    xhat_ = Tensor{n, c, h, w};
    inv_std_ = Tensor{c};
  }
  for (int ch = 0; ch < c; ++ch) {
    double mean, var;
    if (train) {
      double sum = 0.0, sq = 0.0;
      for (int i = 0; i < n; ++i) {
        const double* p = x.data() + (static_cast<std::size_t>(i) * c + ch) * plane;
        for (std::size_t j = 0; j < plane; ++j) {
          sum += p[j];
          sq += p[j] * p[j];
        }
      }
      mean = sum / m;
      var = sq / m - mean * mean;
      if (var < 0.0) var = 0.0;
      running_mean_[ch] = (1.0 - momentum_) * running_mean_[ch] + momentum_ * mean;
      running_var_[ch] = (1.0 - momentum_) * running_var_[ch] + momentum_ * var;
    } else {
      mean = running_mean_[ch];
      var = running_var_[ch];
    }
    const double inv = 1.0 / std::sqrt(var + eps_);
    if (train) inv_std_[ch] = inv;
    for (int i = 0; i < n; ++i) {
      const double* p = x.data() + (static_cast<std::size_t>(i) * c + ch) * plane;
      double* o = out.data() + (static_cast<std::size_t>(i) * c + ch) * plane;
      double* xh = train ? xhat_.data() + (static_cast<std::size_t>(i) * c + ch) * plane : nullptr;
      for (std::size_t j = 0; j < plane; ++j) {
        const double norm = (p[j] - mean) * inv;
        if (xh) xh[j] = norm;
        o[j] = gamma_[ch] * norm + beta_[ch];
      }
    }
  }
  return out;
}

Tensor BatchNorm2d::backward(const Tensor& grad_out) {
  const int n = grad_out.dim(0), c = grad_out.dim(1), h = grad_out.dim(2), w = grad_out.dim(3);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const double m = static_cast<double>(n) * plane;
  Tensor grad_in{n, c, h, w};
  for (int ch = 0; ch < c; ++ch) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int i = 0; i < n; ++i) {
      const double* dy = grad_out.data() + (static_cast<std::size_t>(i) * c + ch) * plane;
      const double* xh = xhat_.data() + (static_cast<std::size_t>(i) * c + ch) * plane;
      for (std::size_t j = 0; j < plane; ++j) {
        sum_dy += dy[j];
        sum_dy_xhat += dy[j] * xh[j];
      }
    }
    grad_beta_[ch] += sum_dy;
    grad_gamma_[ch] += sum_dy_xhat;
    const double k = gamma_[ch] * inv_std_[ch];
    for (int i = 0; i < n; ++i) {
      const double* dy = grad_out.data() + (static_cast<std::size_t>(i) * c + ch) * plane;
      const double* xh = xhat_.data() + (static_cast<std::size_t>(i) * c + ch) * plane;
      double* dx = grad_in.data() + (static_cast<std::size_t>(i) * c + ch) * plane;
      for (std::size_t j = 0; j < plane; ++j)
        dx[j] = k * (dy[j] - sum_dy / m - xh[j] * sum_dy_xhat / m);
    }
  }
  return grad_in;
}

}  // namespace semreid::nn
