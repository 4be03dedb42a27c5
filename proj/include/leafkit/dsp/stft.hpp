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

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "leafkit/dsp/fft.hpp"
#include "leafkit/dsp/signal.hpp"

namespace leafkit::dsp {

/// Row-major 2-D grid of doubles.
struct Grid {
  std::size_t rows = 0, cols = 0;
  std::vector<double> values;

  Grid() = default;
  Grid(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Frame layout shared by both frontends. The window is always twice the hop.
struct FramingConfig {
  std::size_t hop = 147;  // 3.335 ms at 44.1 kHz
  bool centered = true;

  std::size_t window_len() const { return 2 * hop; }

  /// Centered framing: frame f is centered on sample f*hop.
  std::size_t frames_for(std::size_t length) const {
    if (hop == 0) throw std::invalid_argument("framing: hop must be >= 1");
    if (centered) return (length + hop - 1) / hop;
    if (length < window_len()) return 0;
    return (length - window_len()) / hop + 1;
  }
};

/// Periodic Hann window.
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / static_cast<double>(n));
  return w;
}

/// Magnitude-squared STFT, [fft_size/2 + 1 bins, frames].
///
/// Centered mode reflect-pads by window_len/2 on each side, so frame f
/// covers samples [f*hop - hop, f*hop + hop) and the frame count is
/// ceil(length / hop).
inline Grid stft_power(const Waveform& w, const FramingConfig& cfg, std::size_t fft_size = 512) {
  const std::size_t win = cfg.window_len();
  if (w.samples.empty()) throw std::invalid_argument("stft_power: empty input");
  if (fft_size < win) throw std::invalid_argument("stft_power: fft size smaller than window");
  const std::size_t L = w.samples.size();
  const std::size_t half = cfg.centered ? win / 2 : 0;
  if (cfg.centered && L <= half) throw std::invalid_argument("stft_power: input shorter than half a window");

  const auto window = hann_window(win);
  const std::size_t frames = cfg.frames_for(L);
  const std::size_t bins = fft_size / 2 + 1;
  Grid out(bins, frames);

  auto sample = [&](long i) -> double {
    if (i < 0) i = -i;
    if (i >= static_cast<long>(L)) i = 2 * (static_cast<long>(L) - 1) - i;
    return w.samples[static_cast<std::size_t>(i)];
  };

  RealVec<double> frame(fft_size, 0.0);
  ComplexVec<double> spec(bins);
  const auto plan = detail::cached_plan<double>(fft_size, detail::PlanKind::kR2C);
  for (std::size_t f = 0; f < frames; ++f) {
    const long start = static_cast<long>(f * cfg.hop) - static_cast<long>(half);
    for (std::size_t i = 0; i < win; ++i) frame[i] = window[i] * sample(start + static_cast<long>(i));
    detail::FftwApi<double>::exec_r2c(plan, frame.data(), spec.data());
    for (std::size_t k = 0; k < bins; ++k) out.at(k, f) = std::norm(spec[k]);
  }
  return out;
}

}  // namespace leafkit::dsp
