#pragma once

#include <cmath>

#include "semreid/core/tensor.hpp"

namespace semreid::nn {

inline constexpr double kLogEps = 1e-12;

// Binary cross-entropy terms on probabilities (N, 1). Each returns the mean
// loss and writes dL/dp into grad.

// -log(p), the real-sample discriminator term and the generator objective
inline double nll_real(const Tensor& p, Tensor& grad) {
  grad = Tensor{p.shape()};
  const double n = static_cast<double>(p.numel());
  double loss = 0.0;
  for (std::size_t i = 0; i < p.numel(); ++i) {
    const double pi = std::max(p[i], kLogEps);
    loss += -std::log(pi);
    grad[i] = -1.0 / (pi * n);
  }
  return loss / n;
}

// -log(1 - p), the fake-sample discriminator term
inline double nll_fake(const Tensor& p, Tensor& grad) {
  grad = Tensor{p.shape()};
  const double n = static_cast<double>(p.numel());
  double loss = 0.0;
  for (std::size_t i = 0; i < p.numel(); ++i) {
    const double q = std::max(1.0 - p[i], kLogEps);
    loss += -std::log(q);
    grad[i] = 1.0 / (q * n);
  }
  return loss / n;
}

// Softmax over logits (N, C); returns probabilities row-normalized to 1.
inline Tensor softmax(const Tensor& logits) {
  const int n = logits.dim(0), c = logits.dim(1);
  Tensor p{n, c};
  for (int i = 0; i < n; ++i) {
    double mx = logits.at(i, 0);
    for (int j = 1; j < c; ++j) mx = std::max(mx, logits.at(i, j));
    double z = 0.0;
    for (int j = 0; j < c; ++j) z += std::exp(logits.at(i, j) - mx);
    for (int j = 0; j < c; ++j) p.at(i, j) = std::exp(logits.at(i, j) - mx) / z;
  }
  return p;
}

// Cross-entropy with soft target distributions (N, C): mean over rows of
// -sum_j t_j log p_j. grad_logits = (p - t) / N.
inline double cross_entropy(const Tensor& logits, const Tensor& targets, Tensor& grad_logits) {
  const int n = logits.dim(0), c = logits.dim(1);
  Tensor p = softmax(logits);
  grad_logits = Tensor{n, c};
  double loss = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < c; ++j) {
      if (targets.at(i, j) != 0.0)
        loss += -targets.at(i, j) * std::log(std::max(p.at(i, j), kLogEps));
      grad_logits.at(i, j) = (p.at(i, j) - targets.at(i, j)) / n;
    }
  return loss / n;
}

}  // namespace semreid::nn
