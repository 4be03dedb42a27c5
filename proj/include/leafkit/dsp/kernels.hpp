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

// Gabor and Gaussian kernel synthesis. Kernels are sampled at
// t = i - (klen - 1) / 2, i.e. symmetric about the kernel midpoint.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace leafkit::dsp {

inline double kernel_time(std::size_t i, std::size_t klen) {
  return static_cast<double>(i) - (static_cast<double>(klen) - 1.0) / 2.0;
}

struct GaborPair {
  std::vector<double> cos;
  std::vector<double> sin;
};

/// Gaussian-enveloped cosine/sine pairs,
///   k(t) = exp(-t^2 / (2 sigma^2)) / (sqrt(2 pi) sigma) * {cos, sin}(2 pi f t / sr).
/// Centers in Hz, sigmas in samples.
inline std::vector<GaborPair> gabor_kernels(std::span<const double> centers_hz, std::span<const double> sigmas,
                                            std::size_t klen, double sample_rate) {
  if (centers_hz.size() != sigmas.size()) throw std::invalid_argument("gabor_kernels: centers/sigmas length mismatch");
  if (klen == 0) throw std::invalid_argument("gabor_kernels: empty kernel");
  std::vector<GaborPair> out(centers_hz.size());
  for (std::size_t n = 0; n < centers_hz.size(); ++n) {
    const double sigma = sigmas[n];
    if (!(sigma > 0)) throw std::invalid_argument("gabor_kernels: sigma must be positive");
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
    const double omega = 2.0 * std::numbers::pi * centers_hz[n] / sample_rate;
    out[n].cos.resize(klen);
    out[n].sin.resize(klen);
    for (std::size_t i = 0; i < klen; ++i) {
      const double t = kernel_time(i, klen);
      const double env = norm * std::exp(-t * t / (2.0 * sigma * sigma));
      out[n].cos[i] = env * std::cos(omega * t);
      out[n].sin[i] = env * std::sin(omega * t);
    }
  }
  return out;
}

/// Sum-normalized Gaussian with standard deviation sigma_fraction * klen / 2.
inline std::vector<double> gaussian_lowpass_kernel(double sigma_fraction, std::size_t klen) {
  if (!(sigma_fraction > 0)) throw std::invalid_argument("gaussian_lowpass_kernel: sigma_fraction must be positive");
  if (sigma_fraction > 1) throw std::invalid_argument("gaussian_lowpass_kernel: sigma_fraction must be <= 1");
  if (klen == 0) throw std::invalid_argument("gaussian_lowpass_kernel: empty kernel");
  const double sd = sigma_fraction * static_cast<double>(klen) / 2.0;
  std::vector<double> k(klen);
  double total = 0;
  for (std::size_t i = 0; i < klen; ++i) {
    const double t = kernel_time(i, klen);
    k[i] = std::exp(-t * t / (2.0 * sd * sd));
    total += k[i];
  }
  if (!(total > 0)) {
    // Narrower than one sample: all mass on the middle tap(s).
    std::fill(k.begin(), k.end(), 0.0);
    if (klen % 2) {
      k[klen / 2] = 1.0;
    } else {
      k[klen / 2 - 1] = k[klen / 2] = 0.5;
    }
    return k;
  }
  for (auto& v : k) v /= total;
  return k;
}

}  // namespace leafkit::dsp
