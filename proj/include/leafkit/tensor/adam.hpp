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

#pragma once

#include <map>
#include <string>

#include "leafkit/tensor/tensor.hpp"

namespace leafkit {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double l2_lambda = 1e-3;  // coupled: added to the gradient before the moments
};

/// A named parameter with its own learning-rate multiplier.
template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T> tensor;
  double lr_scale = 1.0;
};

template <typename T>
struct AdamMoments {
  std::vector<double> m;
  std::vector<double> v;
};

/// Adam with coupled L2 regularization.
///
/// Parameters that do not require grad are skipped entirely, so frozen
/// groups stay bit-identical. Moments are kept in double regardless of T.
template <typename T>
class Adam {
 public:
  Adam(std::vector<ParamRef<T>> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    for (const auto& p : params_) {
      moments_[p.name] = {std::vector<double>(p.tensor.numel(), 0.0), std::vector<double>(p.tensor.numel(), 0.0)};
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.tensor.zero_grad();
  }

  void step() {
    ++steps_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
    for (auto& p : params_) {
      if (!p.tensor.requires_grad()) continue;
      auto& mom = moments_.at(p.name);
      auto w = p.tensor.mutable_values();
      const auto g = p.tensor.grad();
      const double lr = cfg_.lr * p.lr_scale;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double gi = (g.empty() ? 0.0 : static_cast<double>(g[i])) + cfg_.l2_lambda * static_cast<double>(w[i]);
        mom.m[i] = cfg_.beta1 * mom.m[i] + (1.0 - cfg_.beta1) * gi;
        mom.v[i] = cfg_.beta2 * mom.v[i] + (1.0 - cfg_.beta2) * gi * gi;
        const double mhat = mom.m[i] / bc1;
        const double vhat = mom.v[i] / bc2;
        w[i] = static_cast<T>(static_cast<double>(w[i]) - lr * mhat / (std::sqrt(vhat) + cfg_.epsilon));
      }
    }
  }

  std::uint64_t steps() const { return steps_; }
  void set_steps(std::uint64_t s) { steps_ = s; }
  const AdamConfig& config() const { return cfg_; }
  std::vector<ParamRef<T>>& params() { return params_; }
  std::map<std::string, AdamMoments<T>>& moments() { return moments_; }
  const std::map<std::string, AdamMoments<T>>& moments() const { return moments_; }

 private:
  std::vector<ParamRef<T>> params_;
  AdamConfig cfg_;
  std::map<std::string, AdamMoments<T>> moments_;
  std::uint64_t steps_ = 0;
};

}  // namespace leafkit
