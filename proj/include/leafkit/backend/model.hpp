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

// Convolutional classifier: conv blocks (conv -> ReLU -> batchnorm),
// adaptive average pooling, dropout, linear head.

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "leafkit/core/error.hpp"
#include "leafkit/core/rng.hpp"
#include "leafkit/tensor/conv.hpp"
#include "leafkit/tensor/nn.hpp"
#include "leafkit/tensor/ops.hpp"

namespace leafkit::backend {

struct ConvSpec {
  std::size_t out_channels;
  std::size_t kernel;
  std::size_t stride;
  std::size_t padding;
};

struct ModelConfig {
  std::size_t n_conv_layers = 4;
  double dropout_rate = 0.4;
  std::size_t n_classes = 32;
  std::size_t in_channels = 1;
  std::vector<ConvSpec> channel_plan = default_plan();

  static std::vector<ConvSpec> default_plan() {
    return {{8, 5, 2, 2}, {16, 3, 2, 1}, {32, 3, 2, 1}, {64, 3, 2, 1}, {128, 3, 2, 1}};
  }

  void validate() const {
    if (n_conv_layers != 4 && n_conv_layers != 5) throw std::invalid_argument("model: n_conv_layers must be 4 or 5");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw std::invalid_argument("model: dropout_rate must be in [0, 1)");
    if (n_classes < 2) throw std::invalid_argument("model: need at least 2 classes");
    if (channel_plan.size() < n_conv_layers) throw std::invalid_argument("model: channel plan shorter than layer count");
    for (std::size_t i = 0; i < n_conv_layers; ++i) {
      const auto& c = channel_plan[i];
      if (c.out_channels == 0 || c.kernel == 0 || c.stride == 0) throw std::invalid_argument("model: invalid channel plan");
    }
  }
};

template <typename T>
struct ConvBlock {
  Tensor<T> weight;  // [out, in, k, k]
  Tensor<T> bias;    // [out]
  Tensor<T> gamma;
  Tensor<T> beta;
  RunningStats stats;
  ConvSpec spec;
};

template <typename T>
class Model {
 public:
  Model() = default;

  const ModelConfig& config() const { return cfg_; }

  /// x [B, in_channels, H, W] -> logits [B, n_classes].
  Tensor<T> forward(const Tensor<T>& x, Mode mode, CounterRng& rng) {
    if (x.dim() != 4 || x.size(1) != cfg_.in_channels) {
      throw ShapeError("model: expected input [B, " + std::to_string(cfg_.in_channels) + ", H, W], got " +
                       shape_str(x.shape()));
    }
    Tensor<T> h = x;
    for (auto& blk : blocks_) {
      h = conv2d(h, blk.weight, blk.spec.stride, blk.spec.padding, std::optional<Tensor<T>>(blk.bias));
      h = relu(h);
      h = batchnorm2d(h, blk.gamma, blk.beta, blk.stats, mode);
    }
    auto pooled = adaptive_avg_pool_to_1x1(h);
    auto dropped = dropout(pooled, cfg_.dropout_rate, mode, rng);
    return linear(dropped, fc_weight_, fc_bias_);
  }

  /// Trainable tensors in checkpoint order.
  std::vector<std::pair<std::string, Tensor<T>>> named_parameters() const {
    std::vector<std::pair<std::string, Tensor<T>>> out;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const std::string p = "backend.conv" + std::to_string(i + 1) + ".";
      out.push_back({p + "weight", blocks_[i].weight});
      out.push_back({p + "bias", blocks_[i].bias});
      out.push_back({p + "bn_gamma", blocks_[i].gamma});
      out.push_back({p + "bn_beta", blocks_[i].beta});
    }
    out.push_back({"backend.fc.weight", fc_weight_});
    out.push_back({"backend.fc.bias", fc_bias_});
    return out;
  }

  std::vector<ConvBlock<T>>& blocks() { return blocks_; }
  const std::vector<ConvBlock<T>>& blocks() const { return blocks_; }

  template <typename U>
  friend Model<U> build_model(const ModelConfig& cfg, CounterRng& rng);

 private:
  ModelConfig cfg_;
  std::vector<ConvBlock<T>> blocks_;
  Tensor<T> fc_weight_;
  Tensor<T> fc_bias_;
};

/// Kaiming-uniform conv weights (bound sqrt(6 / fan_in)), zero conv bias,
/// gamma 1, beta 0; linear weights and bias uniform in +-1/sqrt(fan_in).
template <typename T>
Model<T> build_model(const ModelConfig& cfg, CounterRng& rng) {
  cfg.validate();
  Model<T> m;
  m.cfg_ = cfg;
  std::size_t in = cfg.in_channels;
  auto uniform = [&rng](std::size_t n, double bound) {
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(rng.uniform(-bound, bound));
    return v;
  };
  for (std::size_t i = 0; i < cfg.n_conv_layers; ++i) {
    const ConvSpec& s = cfg.channel_plan[i];
    const std::size_t fan_in = in * s.kernel * s.kernel;
    ConvBlock<T> blk;
    blk.spec = s;
    blk.weight = Tensor<T>({s.out_channels, in, s.kernel, s.kernel},
                           uniform(s.out_channels * fan_in, std::sqrt(6.0 / static_cast<double>(fan_in))), true);
    blk.bias = Tensor<T>::zeros({s.out_channels}, true);
    blk.gamma = Tensor<T>::full({s.out_channels}, T(1), true);
    blk.beta = Tensor<T>::zeros({s.out_channels}, true);
    blk.stats = RunningStats(s.out_channels);
    m.blocks_.push_back(std::move(blk));
    in = s.out_channels;
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  m.fc_weight_ = Tensor<T>({cfg.n_classes, in}, uniform(cfg.n_classes * in, bound), true);
  m.fc_bias_ = Tensor<T>({cfg.n_classes}, uniform(cfg.n_classes, bound), true);
  return m;
}

/// Elements across all tensors that require grad.
template <typename T>
std::size_t count_parameters(const std::vector<std::pair<std::string, Tensor<T>>>& tensors) {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors) {
    if (t.requires_grad()) n += t.numel();
  }
  return n;
}

template <typename T>
std::size_t count_parameters(const Model<T>& m) {
  return count_parameters(m.named_parameters());
}

}  // namespace leafkit::backend
