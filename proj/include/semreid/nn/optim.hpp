#pragma once

#include <cmath>
#include <vector>

#include "semreid/core/tensor.hpp"

namespace semreid::nn {

// Adam over a fixed parameter/gradient list. Moment buffers are exposed so
// checkpoints can capture the full optimizer state.
class Adam {
 public:
  Adam(std::vector<Tensor*> params, std::vector<Tensor*> grads, double lr, double beta1 = 0.5,
       double beta2 = 0.999, double eps = 1e-8)
      : params_(std::move(params)),
        grads_(std::move(grads)),
        lr_(lr),
        beta1_(beta1),
        beta2_(beta2),
        eps_(eps) {
    for (Tensor* p : params_) {
      m_.emplace_back(p->shape());
      v_.emplace_back(p->shape());
    }
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Tensor& p = *params_[i];
      const Tensor& g = *grads_[i];
      for (std::size_t j = 0; j < p.numel(); ++j) {
        m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g[j];
        v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g[j] * g[j];
        p[j] -= lr_ * (m_[i][j] / bc1) / (std::sqrt(v_[i][j] / bc2) + eps_);
      }
    }
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  std::int64_t steps() const { return t_; }
  std::vector<Tensor>& moment1() { return m_; }
  std::vector<Tensor>& moment2() { return v_; }
  void set_steps(std::int64_t t) { t_ = t; }

 private:
  std::vector<Tensor*> params_;
  std::vector<Tensor*> grads_;
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

// SGD with Nesterov momentum.
class SgdNesterov {
 public:
  SgdNesterov(std::vector<Tensor*> params, std::vector<Tensor*> grads, double lr,
              double momentum = 0.9)
      : params_(std::move(params)), grads_(std::move(grads)), lr_(lr), momentum_(momentum) {
    for (Tensor* p : params_) buf_.emplace_back(p->shape());
  }

  void step() {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Tensor& p = *params_[i];
      const Tensor& g = *grads_[i];
      for (std::size_t j = 0; j < p.numel(); ++j) {
        buf_[i][j] = momentum_ * buf_[i][j] + g[j];
        p[j] -= lr_ * (g[j] + momentum_ * buf_[i][j]);
      }
    }
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

 private:
  std::vector<Tensor*> params_;
  std::vector<Tensor*> grads_;
  double lr_, momentum_;
  std::vector<Tensor> buf_;
};

// Cosine annealing from lr0 to 0 over total steps.
inline double cosine_lr(double lr0, std::int64_t step, std::int64_t total) {
  if (total <= 0) return lr0;
  const double frac = static_cast<double>(step) / static_cast<double>(total);
  return 0.5 * lr0 * (1.0 + std::cos(frac * 3.14159265358979323846));
}

}  // namespace semreid::nn
