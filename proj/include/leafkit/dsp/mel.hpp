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

// Mel scale and triangular mel filterbank over FFT bins.
//
// Filter i has feet at edge points i and i+2 and its peak (value 1) at edge
// point i+1, where the n+2 edge points are uniformly spaced in mel between
// mel(f_min) and mel(f_max). Triangles are linear in Hz between edge
// points, so adjacent triangles sum to 1 between the first and last center.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "leafkit/dsp/stft.hpp"

namespace leafkit::dsp {

inline double hz_to_mel(double hz) {
  if (hz < 0 || !std::isfinite(hz)) throw std::domain_error("hz_to_mel: frequency must be finite and >= 0");
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

inline double mel_to_hz(double mel) {
  if (mel < 0 || !std::isfinite(mel)) throw std::domain_error("mel_to_hz: mel must be finite and >= 0");
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

class MelFilterbank {
 public:
  MelFilterbank(std::size_t n_filters, std::size_t fft_size, double sample_rate, double f_min, double f_max)
      : n_filters_(n_filters), fft_size_(fft_size), sample_rate_(sample_rate), f_min_(f_min), f_max_(f_max) {
    if (n_filters < 2) throw std::invalid_argument("mel filterbank: need at least 2 filters");
    if (fft_size < 2) throw std::invalid_argument("mel filterbank: fft size too small");
    if (f_max > sample_rate / 2.0) throw std::invalid_argument("mel filterbank: f_max above Nyquist");
    if (!(f_min >= 0 && f_min < f_max)) throw std::invalid_argument("mel filterbank: need 0 <= f_min < f_max");

    const double m_lo = hz_to_mel(f_min), m_hi = hz_to_mel(f_max);
    edges_hz_.resize(n_filters + 2);
    for (std::size_t i = 0; i < n_filters + 2; ++i) {
      const double m = m_lo + (m_hi - m_lo) * static_cast<double>(i) / static_cast<double>(n_filters + 1);
      edges_hz_[i] = i == 0 ? f_min : (i == n_filters + 1 ? f_max : mel_to_hz(m));
    }
    const std::size_t bins = n_bins();
    weights_.assign(n_filters * bins, 0.0);
    for (std::size_t c = 0; c < n_filters; ++c)
      for (std::size_t k = 0; k < bins; ++k)
        weights_[c * bins + k] = weight_at(c, static_cast<double>(k) * sample_rate / static_cast<double>(fft_size));
  }

  std::size_t n_filters() const { return n_filters_; }
  std::size_t n_bins() const { return fft_size_ / 2 + 1; }
  std::size_t fft_size() const { return fft_size_; }
  double sample_rate() const { return sample_rate_; }
  double f_min() const { return f_min_; }
  double f_max() const { return f_max_; }

  /// n+2 edge points in Hz; filter c spans [edges[c], edges[c+2]].
  const std::vector<double>& edges_hz() const { return edges_hz_; }
  double center_hz(std::size_t c) const { return edges_hz_.at(c + 1); }
  std::vector<double> centers_hz() const { return {edges_hz_.begin() + 1, edges_hz_.end() - 1}; }

  /// Full width at half maximum of triangle c, in Hz.
  double fwhm_hz(std::size_t c) const { return (edges_hz_.at(c + 2) - edges_hz_.at(c)) / 2.0; }

  /// Continuous triangle response of filter c at frequency hz.
  double weight_at(std::size_t c, double hz) const {
    const double lo = edges_hz_.at(c), mid = edges_hz_.at(c + 1), hi = edges_hz_.at(c + 2);
    if (hz <= lo || hz >= hi) return 0.0;
    return hz <= mid ? (hz - lo) / (mid - lo) : (hi - hz) / (hi - mid);
  }

  /// Filter c's weight on FFT bin k.
  double weight(std::size_t c, std::size_t k) const { return weights_[c * n_bins() + k]; }

  /// [bins, frames] power grid -> [filters, frames] mel energies.
  Grid apply(const Grid& power) const {
    if (power.rows != n_bins()) {
      throw std::invalid_argument("mel filterbank: expected " + std::to_string(n_bins()) + " bins, got " +
                                  std::to_string(power.rows));
    }
    Grid out(n_filters_, power.cols);
    for (std::size_t c = 0; c < n_filters_; ++c)
      for (std::size_t k = 0; k < n_bins(); ++k) {
        const double w = weights_[c * n_bins() + k];
        if (w == 0.0) continue;
        const double* src = &power.values[k * power.cols];
        double* dst = &out.values[c * power.cols];
        for (std::size_t f = 0; f < power.cols; ++f) dst[f] += w * src[f];
      }
    return out;
  }

 private:
  std::size_t n_filters_, fft_size_;
  double sample_rate_, f_min_, f_max_;
  std::vector<double> edges_hz_;
  std::vector<double> weights_;
};

inline MelFilterbank build_mel_filterbank(std::size_t n_filters = 64, std::size_t fft_size = 512,
                                          double sample_rate = 44100.0, double f_min = 0.0,
                                          double f_max = 22050.0) {
  return MelFilterbank(n_filters, fft_size, sample_rate, f_min, f_max);
}

}  // namespace leafkit::dsp
