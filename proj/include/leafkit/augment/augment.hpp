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

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "leafkit/core/error.hpp"
#include "leafkit/core/log.hpp"
#include "leafkit/core/rng.hpp"
#include "leafkit/dataset/chunk.hpp"
#include "leafkit/dataset/manifest.hpp"
#include "leafkit/dsp/fft.hpp"
#include "leafkit/dsp/signal.hpp"
#include "leafkit/dsp/wav.hpp"

namespace leafkit::augment {

using dsp::Waveform;

enum class AugmentMode { kOffline, kOnline };

struct AugmentConfig {
  AugmentMode mode = AugmentMode::kOnline;
  double noise_prob = 0.9;
  std::array<double, 2> snr_range_db{25.0, 40.0};
  std::array<double, 2> decay_range{-2.0, 1.5};
  double ir_prob = 0.7;
  std::array<double, 2> mix_range{0.0, 1.0};
  std::vector<Waveform> ir_bank;
  double mask_prob = 0.0;
  std::array<double, 2> mask_bw_range{0.06, 0.22};
  int offline_generations = 10;
  std::uint64_t seed = 0;

  /// Per-batch online augmentation used for the larger corpora.
  static AugmentConfig online() { return {}; }

  /// Ten offline generations: mask (p 0.5), white noise on every file, IR (p 0.7).
  static AugmentConfig offline() {
    AugmentConfig c;
    c.mode = AugmentMode::kOffline;
    c.noise_prob = 1.0;
    c.snr_range_db = {25.0, 80.0};
    c.decay_range = {0.0, 0.0};
    c.mask_prob = 0.5;
    return c;
  }

  void validate() const {
    auto prob = [](double p, const char* what) {
      if (!(p >= 0.0 && p <= 1.0)) throw InputError(std::string("augment: ") + what + " must lie in [0, 1]");
    };
    prob(noise_prob, "noise_prob");
    prob(ir_prob, "ir_prob");
    prob(mask_prob, "mask_prob");
    if (!(snr_range_db[0] < snr_range_db[1])) throw InputError("augment: snr_range_db needs low < high");
    if (!(decay_range[0] <= decay_range[1])) throw InputError("augment: decay_range needs low <= high");
    if (!(mix_range[0] >= 0 && mix_range[0] <= mix_range[1] && mix_range[1] <= 1)) {
      throw InputError("augment: mix_range must be an ordered sub-range of [0, 1]");
    }
    if (!(mask_bw_range[0] >= kMaskFloor && mask_bw_range[0] <= mask_bw_range[1] && mask_bw_range[1] < 1)) {
      throw InputError("augment: mask_bw_range must be ordered within [0.01, 1)");
    }
    if (offline_generations < 1) throw InputError("augment: offline_generations must be >= 1");
  }

  static constexpr double kMaskFloor = 0.01;
};

namespace detail {

inline double mean_square(std::span<const float> x) {
  double s = 0;
  for (float v : x) s += static_cast<double>(v) * v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

inline std::vector<double> to_double(std::span<const float> x) { return {x.begin(), x.end()}; }

}  // namespace detail

/// Noise with power spectral density proportional to f^(-decay), unit mean square.
inline std::vector<double> colored_noise(std::size_t n, double decay, CounterRng& rng) {
  if (n == 0) return {};
  std::vector<double> white(n);
  for (auto& v : white) v = rng.normal();
  std::vector<double> out = white;
  if (decay != 0.0 && n >= 4) {
    auto spec = dsp::rfft<double>(std::span<const double>(white));
    // Amplitude falls as f^(-decay/2); DC reuses bin 1's gain.
    for (std::size_t k = 1; k < spec.size(); ++k) spec[k] *= std::pow(static_cast<double>(k), -decay / 2.0);
    out = dsp::irfft<double>(std::span<const std::complex<double>>(spec.data(), spec.size()), n);
  }
  double ms = 0;
  for (double v : out) ms += v * v;
  ms /= static_cast<double>(n);
  const double g = 1.0 / std::sqrt(std::max(ms, 1e-300));
  for (auto& v : out) v *= g;
  return out;
}

/// Adds colored noise at exactly `snr_db` relative to the signal's mean square.
/// Silent input is returned unchanged with a warning.
inline Waveform add_colored_noise(const Waveform& w, double snr_db, double decay, CounterRng& rng) {
  const double ps = detail::mean_square(w.samples);
  if (!(ps > 0)) {
    log_warning("add_colored_noise: silent input, noise skipped");
    return w;
  }
  const auto noise = colored_noise(w.size(), decay, rng);
  const double scale = std::sqrt(ps / std::pow(10.0, snr_db / 10.0));
  Waveform out = w;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] = static_cast<float>(w.samples[i] + scale * noise[i]);
  return out;
}

/// Convolves with `ir`, moves the IR's strongest tap to lag 0, matches the
/// dry RMS and mixes: (1 - mix) * dry + mix * wet. Length is preserved.
inline Waveform apply_impulse_response(const Waveform& w, const Waveform& ir, double mix) {
  if (ir.samples.empty()) throw DataError("apply_impulse_response: empty impulse response");
  if (ir.sample_rate != w.sample_rate) {
    throw DataError("apply_impulse_response: IR at " + std::to_string(ir.sample_rate) + " Hz, signal at " +
                    std::to_string(w.sample_rate) + " Hz");
  }
  if (!(mix >= 0.0 && mix <= 1.0)) throw InputError("apply_impulse_response: mix must lie in [0, 1]");
  if (mix == 0.0 || w.samples.empty()) return w;
  const std::size_t n = w.size(), m = ir.size();
  std::size_t peak = 0;
  for (std::size_t i = 1; i < m; ++i) {
    if (std::abs(ir.samples[i]) > std::abs(ir.samples[peak])) peak = i;
  }
  const std::size_t nfft = dsp::next_pow2(n + m - 1);
  std::vector<double> a(nfft, 0.0), b(nfft, 0.0);
  std::copy(w.samples.begin(), w.samples.end(), a.begin());
  std::copy(ir.samples.begin(), ir.samples.end(), b.begin());
  auto fa = dsp::rfft<double>(std::span<const double>(a));
  const auto fb = dsp::rfft<double>(std::span<const double>(b));
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  const auto conv = dsp::irfft<double>(std::span<const std::complex<double>>(fa.data(), fa.size()), nfft);
  std::vector<double> wet(n);
  double pw = 0;
  for (std::size_t i = 0; i < n; ++i) {
    wet[i] = conv[i + peak];
    pw += wet[i] * wet[i];
  }
  pw /= static_cast<double>(n);
  const double pd = detail::mean_square(w.samples);
  const double g = pw > 0 ? std::sqrt(pd / pw) : 0.0;
  Waveform out = w;
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = static_cast<float>((1.0 - mix) * w.samples[i] + mix * g * wet[i]);
  return out;
}

/// Band-stop gain for a mask centered at `center_hz` (width in Hz). Zero
/// inside the band; raised-cosine ramps of 2 % of the width just outside.
inline double mask_gain(double f, double lo, double hi, double taper) {
  if (f >= lo && f <= hi) return 0.0;
  const double d = f < lo ? lo - f : f - hi;
  if (taper <= 0 || d >= taper) return 1.0;
  return 0.5 - 0.5 * std::cos(std::numbers::pi * d / taper);
}

/// Erases a band of width bw_fraction * Nyquist around a uniform random center.
inline Waveform frequency_mask(const Waveform& w, double bw_fraction, CounterRng& rng, double* center_out = nullptr) {
  if (!(bw_fraction > 0.0 && bw_fraction < 1.0)) throw InputError("frequency_mask: bandwidth fraction must lie in (0, 1)");
  const double nyq = w.sample_rate / 2.0;
  const double center = rng.uniform(0.0, nyq);
  if (center_out) *center_out = center;
  if (w.samples.size() < 2) return w;
  const double bw = bw_fraction * nyq;
  const double lo = std::max(0.0, center - bw / 2), hi = std::min(nyq, center + bw / 2);
  const double taper = 0.02 * bw;
  const std::size_t n = w.size();
  const auto x = detail::to_double(w.samples);
  auto spec = dsp::rfft<double>(std::span<const double>(x));
  for (std::size_t k = 0; k < spec.size(); ++k) {
    spec[k] *= mask_gain(static_cast<double>(k) * w.sample_rate / static_cast<double>(n), lo, hi, taper);
  }
  const auto y = dsp::irfft<double>(std::span<const std::complex<double>>(spec.data(), spec.size()), n);
  Waveform out = w;
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = static_cast<float>(y[i]);
  return out;
}

/// Rescales to a peak of 0.999 when any |sample| exceeds 1. Returns true if it did.
inline bool peak_guard(Waveform& w, const std::string& what = "example") {
  float peak = 0;
  for (float v : w.samples) peak = std::max(peak, std::abs(v));
  if (peak <= 1.0f) return false;
  const float g = 0.999f / peak;
  for (auto& v : w.samples) v *= g;
  log_info("augment: " + what + " peaked at " + std::to_string(peak) + ", rescaled to 0.999");
  return true;
}

struct AugmentTrace {
  bool masked = false;
  bool noised = false;
  bool ir_applied = false;
  bool rescaled = false;
  double snr_db = 0, decay = 0, mix = 0, mask_bw = 0;
  std::size_t ir_index = 0;
};

/// One example through mask -> noise -> IR, drawing only from `rng`.
inline Waveform augment_one(const Waveform& w, const AugmentConfig& cfg, CounterRng& rng, AugmentTrace* trace = nullptr) {
  AugmentTrace t;
  Waveform out = w;
  if (cfg.mask_prob > 0 && rng.bernoulli(cfg.mask_prob)) {
    t.masked = true;
    t.mask_bw = rng.uniform(cfg.mask_bw_range[0], cfg.mask_bw_range[1]);
    out = frequency_mask(out, t.mask_bw, rng);
  }
  if (cfg.noise_prob > 0 && rng.bernoulli(cfg.noise_prob)) {
    t.noised = true;
    t.snr_db = rng.uniform(cfg.snr_range_db[0], cfg.snr_range_db[1]);
    t.decay = rng.uniform(cfg.decay_range[0], cfg.decay_range[1]);
    out = add_colored_noise(out, t.snr_db, t.decay, rng);
  }
  if (cfg.ir_prob > 0 && !cfg.ir_bank.empty() && rng.bernoulli(cfg.ir_prob)) {
    t.ir_applied = true;
    t.ir_index = rng.uniform_index(cfg.ir_bank.size());
    t.mix = rng.uniform(cfg.mix_range[0], cfg.mix_range[1]);
    out = apply_impulse_response(out, cfg.ir_bank[t.ir_index], t.mix);
  }
  t.rescaled = peak_guard(out);
  if (trace) *trace = t;
  return out;
}

/// Online augmentation. Each example gets its own stream derived from one
/// draw of `rng`, so results do not depend on evaluation order.
inline std::vector<Waveform> augment_batch(const std::vector<Waveform>& batch, const AugmentConfig& cfg, CounterRng& rng,
                                           std::vector<AugmentTrace>* traces = nullptr) {
  if (cfg.mode != AugmentMode::kOnline) throw ModeError("augment_batch: configuration is not in online mode");
  const CounterRng base(rng.next_u64());
  std::vector<Waveform> out;
  out.reserve(batch.size());
  if (traces) traces->assign(batch.size(), {});
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CounterRng r = base.derive(i);
    out.push_back(augment_one(batch[i], cfg, r, traces ? &(*traces)[i] : nullptr));
  }
  return out;
}

/// Loads every WAV in `dir` (sorted by name) as a mono 44.1 kHz IR.
inline std::vector<Waveform> load_ir_bank(const std::filesystem::path& dir, std::size_t expected = 11) {
  if (!std::filesystem::is_directory(dir)) throw InputError("IR bank is not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& de : std::filesystem::directory_iterator(dir)) {
    std::string e = de.path().extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    if (de.is_regular_file() && e == ".wav") files.push_back(de.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Waveform> bank;
  for (const auto& f : files) bank.push_back(dsp::resample_to_44100(dsp::read_wav_mono(f)));
  if (bank.size() != expected) {
    log_warning("IR bank " + dir.string() + " holds " + std::to_string(bank.size()) + " impulse responses, expected " +
                std::to_string(expected));
  }
  return bank;
}

struct OfflineOutput {
  std::vector<std::filesystem::path> files;
  dataset::DatasetManifest manifest;  // the input manifest plus one train entry per generated file
};

/// Writes `offline_generations` augmented copies of every training chunk as
/// `<out>/<label>/<name>_c<k>_aug<g>_seed<S>.wav`.
inline OfflineOutput generate_offline(const dataset::DatasetManifest& m, const AugmentConfig& cfg,
                                      const std::filesystem::path& out_dir) {
  if (cfg.mode != AugmentMode::kOffline) throw ModeError("generate_offline: configuration is not in offline mode");
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) throw InputError("cannot create output directory " + out_dir.string());
  OfflineOutput res;
  res.manifest = m;
  const CounterRng root(cfg.seed);
  std::size_t chunk_index = 0;
  for (const auto& e : m.entries) {
    if (e.split != dataset::Split::kTrain) continue;
    for (std::size_t k = 0; k < e.chunks.size(); ++k, ++chunk_index) {
      const Waveform src = dataset::load_chunk(e, e.chunks[k]);
      for (int g = 0; g < cfg.offline_generations; ++g) {
        CounterRng r = root.derive(chunk_index).derive(static_cast<std::uint64_t>(g));
        Waveform aug = augment_one(src, cfg, r);
        const std::string stem = e.id + "_c" + std::to_string(k) + "_aug" + std::to_string(g) + "_seed" +
                                 std::to_string(cfg.seed);
        const auto path = out_dir / (stem + ".wav");
        std::filesystem::create_directories(path.parent_path(), ec);
        dsp::write_wav_float(path, aug);
        res.files.push_back(path);
        dataset::RecordingEntry ae;
        ae.id = stem;
        ae.label = e.label;
        ae.duration_s = 5.0;
        ae.split = dataset::Split::kTrain;
        ae.source_path = path.string();
        ae.audio_path = path.string();
        ae.chunks = {{ae.id, 0.0, 0.0, false}};
        ae.extra["augmented_from"] = e.id;
        ae.extra["generation"] = g;
        res.manifest.entries.push_back(std::move(ae));
      }
    }
  }
  return res;
}

}  // namespace leafkit::augment
