// Copyright 2026 The leafkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Network layers: batch normalization, ReLU, dropout, global average
// pooling and the softmax cross-entropy loss.

#pragma once

#include <cstdint>

#include "leafkit/core/rng.hpp"
#include "leafkit/tensor/tensor.hpp"

namespace leafkit {

enum class Mode { kTrain, kEval };

/// Running mean/variance of a batchnorm layer.
struct RunningStats {
  std::vector<double> mean;
  std::vector<double> var;
  std::uint64_t updates = 0;  // 0 means never updated

  explicit RunningStats(std::size_t channels = 0) : mean(channels, 0.0), var(channels, 1.0) {}
};

/// Per-channel normalization of [batch, chan, h, w].
///
/// Train mode normalizes with the biased batch variance and folds the
/// unbiased variance into `stats`. The n-th update uses weight
/// max(momentum, 1/n): a plain average of the first batches, then an
/// exponential moving average, so the initial mean 0 / variance 1 does not
/// linger on short runs. Eval mode uses `stats` and throws if they were
/// never updated.
template <typename T>
Tensor<T> batchnorm2d(const Tensor<T>& input, const Tensor<T>& gamma, const Tensor<T>& beta, RunningStats& stats,
                      Mode mode, double epsilon = 1e-5, double momentum = 0.1) {
  if (input.dim() != 4) throw ShapeError("batchnorm2d: expected [B,C,H,W], got " + shape_str(input.shape()));
  const std::size_t B = input.size(0), C = input.size(1), HW = input.size(2) * input.size(3);
  if (gamma.numel() != C || beta.numel() != C || stats.mean.size() != C) {
    throw ShapeError("batchnorm2d: gamma/beta/stats length must equal channel count " + std::to_string(C));
  }
  const std::size_t per_chan = B * HW;
  const auto X = input.values();

  std::vector<T> mu(C), inv_std(C);
  if (mode == Mode::kTrain) {
    if (per_chan < 2) throw ShapeError("batchnorm2d: train mode needs more than one value per channel");
    const double w = std::max(momentum, 1.0 / static_cast<double>(stats.updates + 1));
    for (std::size_t c = 0; c < C; ++c) {
      double s = 0;
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t i = 0; i < HW; ++i) s += X[(b * C + c) * HW + i];
      const double m = s / static_cast<double>(per_chan);
      double v = 0;
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t i = 0; i < HW; ++i) {
          const double d = X[(b * C + c) * HW + i] - m;
          v += d * d;
        }
      const double var_biased = v / static_cast<double>(per_chan);
      const double var_unbiased = v / static_cast<double>(per_chan - 1);
      mu[c] = static_cast<T>(m);
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(var_biased + epsilon));
      stats.mean[c] = (1.0 - w) * stats.mean[c] + w * m;
      stats.var[c] = (1.0 - w) * stats.var[c] + w * var_unbiased;
    }
    ++stats.updates;
  } else {
    if (stats.updates == 0) throw std::logic_error("batchnorm2d: eval mode before any running-stat update");
    for (std::size_t c = 0; c < C; ++c) {
      mu[c] = static_cast<T>(stats.mean[c]);
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(stats.var[c] + epsilon));
    }
  }

  std::vector<T> xhat(input.numel()), out(input.numel());
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < HW; ++i) {
        const std::size_t k = (b * C + c) * HW + i;
        xhat[k] = (X[k] - mu[c]) * inv_std[c];
        out[k] = gamma[c] * xhat[k] + beta[c];
      }

  const bool batch_stats = mode == Mode::kTrain;
  return Tensor<T>::make_result(
      input.shape(), std::move(out), {input, gamma, beta},
      [input, gamma, beta, xhat = std::move(xhat), inv_std, B, C, HW, per_chan, batch_stats](detail::Node<T>& self) {
        const auto& G = self.grad;
        std::vector<T> dgamma(C, T(0)), dbeta(C, T(0));
        for (std::size_t b = 0; b < B; ++b)
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t i = 0; i < HW; ++i) {
              const std::size_t k = (b * C + c) * HW + i;
              dgamma[c] += G[k] * xhat[k];
              dbeta[c] += G[k];
            }
        if (input.requires_grad()) {
          std::vector<T> gx(input.numel());
          const T n = static_cast<T>(per_chan);
          for (std::size_t b = 0; b < B; ++b)
            for (std::size_t c = 0; c < C; ++c)
              for (std::size_t i = 0; i < HW; ++i) {
                const std::size_t k = (b * C + c) * HW + i;
                const T g = gamma[c] * inv_std[c];
                if (batch_stats) {
                  gx[k] = g * (G[k] - dbeta[c] / n - xhat[k] * dgamma[c] / n);
                } else {
                  gx[k] = g * G[k];
                }
              }
          accumulate<T>(*input.node(), gx);
        }
        accumulate<T>(*gamma.node(), dgamma);
        accumulate<T>(*beta.node(), dbeta);
      });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > T(0) ? x[i] : T(0);
  return Tensor<T>::make_result(x.shape(), std::move(out), {x}, [x](detail::Node<T>& self) {
    std::vector<T> g(self.grad.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = x[i] > T(0) ? self.grad[i] : T(0);
    accumulate<T>(*x.node(), g);
  });
}

/// Inverted dropout. Eval mode and rate 0 return the input handle itself.
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, Mode mode, CounterRng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout: rate must be in [0, 1)");
  if (mode == Mode::kEval || rate == 0.0) return x;
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  std::vector<T> mask(x.numel());
  for (auto& m : mask) m = rng.bernoulli(rate) ? T(0) : scale;
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * mask[i];
  return Tensor<T>::make_result(x.shape(), std::move(out), {x}, [x, mask = std::move(mask)](detail::Node<T>& self) {
    std::vector<T> g(self.grad.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = self.grad[i] * mask[i];
    accumulate<T>(*x.node(), g);
  });
}

/// [batch, chan, h, w] -> [batch, chan], the per-channel spatial mean.
template <typename T>
Tensor<T> adaptive_avg_pool_to_1x1(const Tensor<T>& x) {
  if (x.dim() != 4) throw ShapeError("adaptive_avg_pool_to_1x1: expected [B,C,H,W], got " + shape_str(x.shape()));
  const std::size_t B = x.size(0), C = x.size(1), HW = x.size(2) * x.size(3);
  std::vector<T> out(B * C);
  for (std::size_t bc = 0; bc < B * C; ++bc) {
    T s = 0;
    for (std::size_t i = 0; i < HW; ++i) s += x[bc * HW + i];
    out[bc] = s / static_cast<T>(HW);
  }
  return Tensor<T>::make_result({B, C}, std::move(out), {x}, [x, B, C, HW](detail::Node<T>& self) {
    std::vector<T> g(x.numel());
    for (std::size_t bc = 0; bc < B * C; ++bc) {
      const T v = self.grad[bc] / static_cast<T>(HW);
      for (std::size_t i = 0; i < HW; ++i) g[bc * HW + i] = v;
    }
    accumulate<T>(*x.node(), g);
  });
}

/// Mean over the batch of -log softmax(logits)[label], max-subtracted.
template <typename T>
Tensor<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  if (logits.dim() != 2 || logits.size(0) != labels.size()) {
    throw ShapeError("softmax_cross_entropy: logits " + shape_str(logits.shape()) + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t B = logits.size(0), K = logits.size(1);
  std::vector<T> probs(B * K);
  double loss = 0;
  for (std::size_t b = 0; b < B; ++b) {
    const int y = labels[b];
    if (y < 0 || static_cast<std::size_t>(y) >= K) {
      throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(y) + " outside [0, " +
                              std::to_string(K) + ")");
    }
    const T* z = logits.values().data() + b * K;
    const T zmax = *std::max_element(z, z + K);
    double denom = 0;
    for (std::size_t k = 0; k < K; ++k) denom += std::exp(static_cast<double>(z[k] - zmax));
    for (std::size_t k = 0; k < K; ++k) probs[b * K + k] = static_cast<T>(std::exp(static_cast<double>(z[k] - zmax)) / denom);
    loss += std::log(denom) - static_cast<double>(z[y] - zmax);
  }
  loss /= static_cast<double>(B);
  if (!std::isfinite(loss)) throw NumericError("softmax_cross_entropy: non-finite loss");
  std::vector<int> ys(labels.begin(), labels.end());
  return Tensor<T>::make_result({}, {static_cast<T>(loss)}, {logits},
                                [logits, probs = std::move(probs), ys = std::move(ys), B, K](detail::Node<T>& self) {
                                  const T scale = self.grad[0] / static_cast<T>(B);
                                  std::vector<T> g(B * K);
                                  for (std::size_t b = 0; b < B; ++b)
                                    for (std::size_t k = 0; k < K; ++k)
                                      g[b * K + k] = scale * (probs[b * K + k] - (static_cast<int>(k) == ys[b] ? T(1) : T(0)));
                                  accumulate<T>(*logits.node(), g);
                                });
}

}  // namespace leafkit
