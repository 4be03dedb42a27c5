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
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "leafkit/core/error.hpp"

namespace leafkit::dsp {

inline constexpr double kTargetRate = 44100.0;

/// Mono audio. Samples are nominally within [-1, 1].
struct Waveform {
  std::vector<float> samples;
  double sample_rate = kTargetRate;

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }

  void validate() const {
    if (!(sample_rate > 0)) throw DataError("waveform: sample rate must be positive");
    for (float s : samples) {
      if (!std::isfinite(s)) throw DataError("waveform: non-finite sample");
    }
  }
};

/// Per-sample mean across channels.
inline Waveform to_mono(const std::vector<std::vector<float>>& channels, double sample_rate) {
  if (channels.empty()) throw DataError("to_mono: zero channels");
  const std::size_t n = channels.front().size();
  for (const auto& c : channels) {
    if (c.size() != n) throw DataError("to_mono: channels differ in length");
  }
  Waveform w;
  w.sample_rate = sample_rate;
  if (channels.size() == 1) {
    w.samples = channels.front();
    return w;
  }
  w.samples.resize(n);
  const double inv = 1.0 / static_cast<double>(channels.size());
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (const auto& c : channels) s += c[i];
    w.samples[i] = static_cast<float>(s * inv);
  }
  return w;
}

namespace detail {

// Zeroth-order modified Bessel function of the first kind, power series.
inline double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

}  // namespace detail

/// Polyphase windowed-sinc rate converter for downsampling.
///
/// The rate ratio is reduced to up/down integers; each of the `up` phases
/// has `taps` coefficients of a Kaiser-windowed sinc whose cutoff sits at
/// the output Nyquist. Every phase is normalized to unit DC gain.
class PolyphaseResampler {
 public:
  PolyphaseResampler(long in_rate, long out_rate, int taps = 64, double kaiser_beta = 12.0)
      : taps_(taps) {
    if (in_rate <= 0 || out_rate <= 0) throw std::invalid_argument("resampler: rates must be positive");
    if (out_rate > in_rate) throw std::invalid_argument("resampler: upsampling is not supported");
    const long g = std::gcd(in_rate, out_rate);
    up_ = out_rate / g;
    down_ = in_rate / g;
    const double cutoff = static_cast<double>(up_) / static_cast<double>(down_);  // 2 * fc, cycles per input sample
    const double half = taps / 2.0;
    const double i0b = detail::bessel_i0(kaiser_beta);
    table_.assign(static_cast<std::size_t>(up_) * taps, 0.0);
    for (long p = 0; p < up_; ++p) {
      const double frac = static_cast<double>(p) / static_cast<double>(up_);
      double total = 0;
      for (int j = 0; j < taps; ++j) {
        const double tau = frac + (half - 1.0) - j;
        const double x = cutoff * tau;
        const double sinc = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
        const double u = tau / half;
        const double win = std::abs(u) >= 1.0 ? 0.0 : detail::bessel_i0(kaiser_beta * std::sqrt(1.0 - u * u)) / i0b;
        const double h = cutoff * sinc * win;
        table_[p * taps + j] = h;
        total += h;
      }
      for (int j = 0; j < taps; ++j) table_[p * taps + j] /= total;
    }
  }

  std::vector<float> process(const std::vector<float>& in) const {
    if (up_ == down_) return in;
    const std::size_t n_in = in.size();
    const std::size_t n_out = (n_in * up_ + down_ - 1) / down_;
    std::vector<float> out(n_out);
    const long half = taps_ / 2;
    for (std::size_t n = 0; n < n_out; ++n) {
      const long pos = static_cast<long>(n) * down_;
      const long base = pos / up_;
      const long phase = pos % up_;
      const double* h = &table_[static_cast<std::size_t>(phase) * taps_];
      double acc = 0;
      for (int j = 0; j < taps_; ++j) {
        const long k = base - (half - 1) + j;
        if (k >= 0 && k < static_cast<long>(n_in)) acc += h[j] * in[k];
      }
      out[n] = static_cast<float>(acc);
    }
    return out;
  }

  long up() const { return up_; }
  long down() const { return down_; }

 private:
  int taps_;
  long up_ = 1, down_ = 1;
  std::vector<double> table_;
};

/// Converts to exactly 44100 Hz. Inputs below 44100 Hz are rejected.
inline Waveform resample_to_44100(const Waveform& w) {
  if (w.sample_rate < kTargetRate) {
    throw DataError("resample_to_44100: sample rate " + std::to_string(w.sample_rate) +
                    " Hz is below 44100 Hz");
  }
  if (w.sample_rate == kTargetRate) return w;
  const long in_rate = std::lround(w.sample_rate);
  if (std::abs(w.sample_rate - static_cast<double>(in_rate)) > 1e-9) {
    throw DataError("resample_to_44100: non-integer sample rate");
  }
  PolyphaseResampler rs(in_rate, 44100);
  return Waveform{rs.process(w.samples), kTargetRate};
}

}  // namespace leafkit::dsp
