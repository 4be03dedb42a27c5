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

// Trainable LEAF parameters, initialization, ablation flags and clamping.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "leafkit/core/error.hpp"
#include "leafkit/dsp/mel.hpp"
#include "leafkit/tensor/tensor.hpp"

namespace leafkit::frontend {

struct LeafConfig {
  std::size_t n_filters = 64;
  double sample_rate = 44100.0;
  double f_min = 0.0;
  double f_max = 22050.0;
  std::size_t klen = 294;
  std::size_t stride = 147;
  double sigma_min = 1.5;  // samples
  double pool_init = 0.4;
  double pool_min = 1e-3;
  double alpha_init = 0.96;
  double delta_init = 2.0;
  double root_init = 0.5;
  double smooth_init = 0.04;
  double epsilon = 1e-6;

  /// Upper bandwidth clamp: the kernel spans +-3 sigma.
  double sigma_max() const { return static_cast<double>(klen) / 6.0; }
};

enum class Ablation { kFull, kLeafFB, kLeafPCEN };

inline Ablation parse_ablation(const std::string& s) {
  if (s == "full" || s == "leaf") return Ablation::kFull;
  if (s == "leafFB") return Ablation::kLeafFB;
  if (s == "leafPCEN") return Ablation::kLeafPCEN;
  throw std::invalid_argument("unknown ablation mode '" + s + "' (expected full, leafFB or leafPCEN)");
}

inline std::string ablation_name(Ablation a) {
  switch (a) {
    case Ablation::kFull: return "full";
    case Ablation::kLeafFB: return "leafFB";
    case Ablation::kLeafPCEN: return "leafPCEN";
  }
  return "full";
}

template <typename T>
struct LeafParams {
  LeafConfig config;
  Tensor<T> center_hz;
  Tensor<T> kernel_sigma;  // samples
  Tensor<T> pool_sigma;    // fraction of klen / 2
  Tensor<T> pcen_alpha;
  Tensor<T> pcen_delta;
  Tensor<T> pcen_root;
  Tensor<T> pcen_smooth;
  double epsilon = 1e-6;
  bool trainable_filterbank = true;
  bool trainable_pooling = true;
  bool trainable_pcen = true;

  std::size_t n_filters() const { return center_hz.numel(); }

  /// Checkpoint names, in a fixed order.
  std::vector<std::pair<std::string, Tensor<T>>> named() const {
    return {{"leaf.center_hz", center_hz},   {"leaf.kernel_sigma", kernel_sigma}, {"leaf.pool_sigma", pool_sigma},
            {"leaf.pcen_alpha", pcen_alpha}, {"leaf.pcen_delta", pcen_delta},     {"leaf.pcen_root", pcen_root},
            {"leaf.pcen_smooth", pcen_smooth}};
  }

  /// Sets requires_grad on each tensor from the group flags.
  void apply_flags() {
    center_hz.set_requires_grad(trainable_filterbank);
    kernel_sigma.set_requires_grad(trainable_filterbank);
    pool_sigma.set_requires_grad(trainable_pooling);
    for (Tensor<T>* t : {&pcen_alpha, &pcen_delta, &pcen_root, &pcen_smooth}) t->set_requires_grad(trainable_pcen);
  }

  /// Deep copy with fresh tensor nodes.
  LeafParams clone() const {
    LeafParams p = *this;
    for (auto [dst, src] : {std::pair{&p.center_hz, &center_hz}, {&p.kernel_sigma, &kernel_sigma},
                            {&p.pool_sigma, &pool_sigma}, {&p.pcen_alpha, &pcen_alpha}, {&p.pcen_delta, &pcen_delta},
                            {&p.pcen_root, &pcen_root}, {&p.pcen_smooth, &pcen_smooth}}) {
      *dst = src->clone();
    }
    return p;
  }

  template <typename U>
  LeafParams<U> cast() const {
    auto conv = [](const Tensor<T>& t) {
      return Tensor<U>(t.shape(), std::vector<U>(t.values().begin(), t.values().end()), t.requires_grad());
    };
    LeafParams<U> p;
    p.config = config;
    p.center_hz = conv(center_hz);
    p.kernel_sigma = conv(kernel_sigma);
    p.pool_sigma = conv(pool_sigma);
    p.pcen_alpha = conv(pcen_alpha);
    p.pcen_delta = conv(pcen_delta);
    p.pcen_root = conv(pcen_root);
    p.pcen_smooth = conv(pcen_smooth);
    p.epsilon = epsilon;
    p.trainable_filterbank = trainable_filterbank;
    p.trainable_pooling = trainable_pooling;
    p.trainable_pcen = trainable_pcen;
    return p;
  }

  /// Throws NumericError when an invariant does not hold.
  void validate() const {
    const std::size_t n = n_filters();
    for (const auto& [name, t] : named()) {
      if (t.numel() != n) throw ShapeError(name + ": expected " + std::to_string(n) + " entries");
      for (T v : t.values()) {
        if (!std::isfinite(static_cast<double>(v))) throw NumericError(name + ": non-finite value");
      }
    }
    auto check = [](const Tensor<T>& t, const std::string& name, auto ok) {
      for (T v : t.values()) {
        if (!ok(static_cast<double>(v))) throw NumericError(name + ": value " + std::to_string(v) + " out of domain");
      }
    };
    const double nyq = config.sample_rate / 2.0;
    check(center_hz, "center_hz", [nyq](double v) { return v >= 0 && v <= nyq; });
    check(kernel_sigma, "kernel_sigma", [](double v) { return v > 0; });
    check(pool_sigma, "pool_sigma", [](double v) { return v > 0 && v <= 1; });
    check(pcen_smooth, "pcen_smooth", [](double v) { return v > 0 && v < 1; });
    check(pcen_root, "pcen_root", [](double v) { return v > 0; });
    check(pcen_delta, "pcen_delta", [](double v) { return v > 0; });
  }
};

/// Kernel sigma (samples) whose power response has the given FWHM in Hz.
/// |H(f)|^2 of a Gaussian window with sigma s is a Gaussian of standard
/// deviation sr / (2 sqrt(2) pi s), giving FWHM = sr sqrt(ln 2) / (pi s).
inline double sigma_for_fwhm(double fwhm_hz, double sample_rate) {
  return sample_rate * std::sqrt(std::log(2.0)) / (std::numbers::pi * fwhm_hz);
}

/// Centers on the mel triangle centers, bandwidths matched to the triangle
/// FWHMs (then clamped), PCEN and pooling at their configured defaults.
template <typename T>
LeafParams<T> leaf_init(const LeafConfig& cfg = {}) {
  const auto fb = dsp::build_mel_filterbank(cfg.n_filters, 512, cfg.sample_rate, cfg.f_min, cfg.f_max);
  const std::size_t n = cfg.n_filters;
  std::vector<T> centers(n), sigmas(n);
  for (std::size_t c = 0; c < n; ++c) {
    centers[c] = static_cast<T>(fb.center_hz(c));
    sigmas[c] = static_cast<T>(std::clamp(sigma_for_fwhm(fb.fwhm_hz(c), cfg.sample_rate), cfg.sigma_min, cfg.sigma_max()));
  }
  LeafParams<T> p;
  p.config = cfg;
  p.center_hz = Tensor<T>({n}, centers);
  p.kernel_sigma = Tensor<T>({n}, sigmas);
  p.pool_sigma = Tensor<T>::full({n}, static_cast<T>(cfg.pool_init));
  p.pcen_alpha = Tensor<T>::full({n}, static_cast<T>(cfg.alpha_init));
  p.pcen_delta = Tensor<T>::full({n}, static_cast<T>(cfg.delta_init));
  p.pcen_root = Tensor<T>::full({n}, static_cast<T>(cfg.root_init));
  p.pcen_smooth = Tensor<T>::full({n}, static_cast<T>(cfg.smooth_init));
  p.epsilon = cfg.epsilon;
  p.apply_flags();
  return p;
}

/// full: everything trainable. leafFB: filterbank and pooling, PCEN frozen.
/// leafPCEN: PCEN only.
template <typename T>
LeafParams<T> set_ablation(const LeafParams<T>& in, Ablation mode) {
  LeafParams<T> p = in.clone();
  p.trainable_filterbank = mode != Ablation::kLeafPCEN;
  p.trainable_pooling = mode != Ablation::kLeafPCEN;
  p.trainable_pcen = mode != Ablation::kLeafFB;
  p.apply_flags();
  return p;
}

/// Projects every parameter back into its valid range, in place.
template <typename T>
LeafParams<T>& clamp_params(LeafParams<T>& p) {
  const LeafConfig& c = p.config;
  auto clamp = [](Tensor<T>& t, double lo, double hi) {
    for (T& v : t.mutable_values()) {
      double d = static_cast<double>(v);
      if (std::isnan(d)) throw NumericError("clamp_params: NaN parameter");
      v = static_cast<T>(std::clamp(d, lo, hi));
    }
  };
  clamp(p.center_hz, 0.0, c.sample_rate / 2.0);
  clamp(p.kernel_sigma, c.sigma_min, c.sigma_max());
  clamp(p.pool_sigma, c.pool_min, 1.0);
  clamp(p.pcen_smooth, 1e-3, 0.5);
  clamp(p.pcen_root, 0.05, 2.0);
  clamp(p.pcen_delta, 1e-3, 10.0);
  clamp(p.pcen_alpha, 0.05, 1.5);
  return p;
}

}  // namespace leafkit::frontend
