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

// The two comparable frontends. Both map [B, L] waveforms to [B, 1, 64, F]
// feature tensors with F = ceil(L / 147); a 5 s clip gives [64, 1500].

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "leafkit/core/error.hpp"
#include "leafkit/dsp/mel.hpp"
#include "leafkit/dsp/signal.hpp"
#include "leafkit/dsp/stft.hpp"
#include "leafkit/frontend/gabor_pool.hpp"
#include "leafkit/frontend/leaf_params.hpp"
#include "leafkit/frontend/pcen.hpp"
#include "leafkit/tensor/ops.hpp"

namespace leafkit::frontend {

inline constexpr std::size_t kClipSamples = 220500;  // 5 s at 44.1 kHz

/// channels x frames features plus each channel's nominal center frequency.
struct FeatureMap {
  dsp::Grid values;
  std::vector<double> channel_hz;

  std::size_t channels() const { return values.rows; }
  std::size_t frames() const { return values.cols; }
};

/// Single-clip entry points accept exactly one 5 s clip at 44.1 kHz.
inline void check_clip(const dsp::Waveform& w) {
  if (w.sample_rate != dsp::kTargetRate) {
    throw DataError("frontend: expected 44100 Hz input, got " + std::to_string(w.sample_rate));
  }
  if (w.samples.size() != kClipSamples) {
    throw DataError("frontend: expected " + std::to_string(kClipSamples) + " samples, got " +
                    std::to_string(w.samples.size()));
  }
}

/// Mel spectrogram: centered Hann STFT (512-point FFT), 64 mel triangles,
/// log(epsilon + x).
class MelFrontend {
 public:
  explicit MelFrontend(std::size_t n_filters = 64, double epsilon = 1e-6, dsp::FramingConfig framing = {},
                       std::size_t fft_size = 512)
      : fb_(dsp::build_mel_filterbank(n_filters, fft_size)), epsilon_(epsilon), framing_(framing),
        fft_size_(fft_size) {}

  const dsp::MelFilterbank& filterbank() const { return fb_; }
  double epsilon() const { return epsilon_; }

  /// Any-length variant; [n_filters, ceil(L / hop)].
  dsp::Grid compute(const dsp::Waveform& w) const {
    auto mel = fb_.apply(dsp::stft_power(w, framing_, fft_size_));
    for (double& v : mel.values) v = std::log(epsilon_ + v);
    return mel;
  }

  template <typename T>
  Tensor<T> batch(const std::vector<dsp::Waveform>& clips) const {
    if (clips.empty()) throw ShapeError("mel frontend: empty batch");
    std::vector<T> out;
    std::size_t frames = 0;
    for (const auto& w : clips) {
      auto g = compute(w);
      if (frames == 0) frames = g.cols;
      if (g.cols != frames) throw ShapeError("mel frontend: clips differ in length");
      for (double v : g.values) out.push_back(static_cast<T>(v));
    }
    return Tensor<T>({clips.size(), 1, fb_.n_filters(), frames}, std::move(out));
  }

 private:
  dsp::MelFilterbank fb_;
  double epsilon_;
  dsp::FramingConfig framing_;
  std::size_t fft_size_;
};

inline FeatureMap mel_frontend(const dsp::Waveform& w, const MelFrontend& fe = MelFrontend()) {
  check_clip(w);
  return {fe.compute(w), fe.filterbank().centers_hz()};
}

/// x [B, L] -> [B, 1, C, ceil(L / stride)], differentiable in every
/// parameter group whose flag is set (and in x if it requires grad).
template <typename T>
Tensor<T> leaf_forward(const Tensor<T>& x, const LeafParams<T>& p) {
  const GaborPoolConfig gcfg{p.config.klen, p.config.stride, p.config.sample_rate};
  auto energy = gabor_pooled_energy(x, p.center_hz, p.kernel_sigma, p.pool_sigma, gcfg);
  auto out = pcen(energy, p.pcen_alpha, p.pcen_delta, p.pcen_root, p.pcen_smooth, p.epsilon);
  return reshape(out, {out.size(0), 1, out.size(1), out.size(2)});
}

template <typename T>
Tensor<T> waveforms_to_tensor(const std::vector<dsp::Waveform>& clips) {
  if (clips.empty()) throw ShapeError("frontend: empty batch");
  const std::size_t L = clips.front().samples.size();
  std::vector<T> v;
  v.reserve(clips.size() * L);
  for (const auto& w : clips) {
    if (w.samples.size() != L) throw ShapeError("frontend: clips differ in length");
    for (float s : w.samples) v.push_back(static_cast<T>(s));
  }
  return Tensor<T>({clips.size(), L}, std::move(v));
}

template <typename T>
FeatureMap leaf_frontend(const dsp::Waveform& w, const LeafParams<T>& p) {
  check_clip(w);
  p.validate();
  NoGradGuard ng;
  auto y = leaf_forward(waveforms_to_tensor<T>({w}), p);
  FeatureMap fm;
  fm.values = dsp::Grid(y.size(2), y.size(3));
  for (std::size_t i = 0; i < y.numel(); ++i) fm.values.values[i] = static_cast<double>(y[i]);
  fm.channel_hz.assign(p.center_hz.values().begin(), p.center_hz.values().end());
  return fm;
}

enum class FrontendKind { kMel, kLeaf, kLeafFB, kLeafPCEN };

inline FrontendKind parse_frontend_kind(const std::string& s) {
  if (s == "mel") return FrontendKind::kMel;
  if (s == "leaf") return FrontendKind::kLeaf;
  if (s == "leafFB") return FrontendKind::kLeafFB;
  if (s == "leafPCEN") return FrontendKind::kLeafPCEN;
  throw std::invalid_argument("unknown frontend '" + s + "' (expected mel, leaf, leafFB or leafPCEN)");
}

inline std::string frontend_kind_name(FrontendKind k) {
  switch (k) {
    case FrontendKind::kMel: return "mel";
    case FrontendKind::kLeaf: return "leaf";
    case FrontendKind::kLeafFB: return "leafFB";
    case FrontendKind::kLeafPCEN: return "leafPCEN";
  }
  return "mel";
}

inline bool is_leaf(FrontendKind k) { return k != FrontendKind::kMel; }

inline Ablation ablation_for(FrontendKind k) {
  switch (k) {
    case FrontendKind::kLeafFB: return Ablation::kLeafFB;
    case FrontendKind::kLeafPCEN: return Ablation::kLeafPCEN;
    default: return Ablation::kFull;
  }
}

/// Either frontend behind one interface, as used by training and eval.
template <typename T>
class Frontend {
 public:
  explicit Frontend(FrontendKind kind, const LeafConfig& cfg = {}) : kind_(kind) {
    if (is_leaf(kind)) leaf_ = set_ablation(leaf_init<T>(cfg), ablation_for(kind));
  }

  FrontendKind kind() const { return kind_; }
  LeafParams<T>& leaf() { return leaf_; }
  const LeafParams<T>& leaf() const { return leaf_; }
  const MelFrontend& mel() const { return mel_; }

  Tensor<T> forward(const std::vector<dsp::Waveform>& clips) const {
    if (!is_leaf(kind_)) return mel_.batch<T>(clips);
    return leaf_forward(waveforms_to_tensor<T>(clips), leaf_);
  }

  /// Named tensors stored in checkpoints (empty for mel).
  std::vector<std::pair<std::string, Tensor<T>>> named() const {
    if (!is_leaf(kind_)) return {};
    return leaf_.named();
  }

  void clamp() {
    if (is_leaf(kind_)) clamp_params(leaf_);
  }

 private:
  FrontendKind kind_;
  MelFrontend mel_;
  LeafParams<T> leaf_;
};

}  // namespace leafkit::frontend
