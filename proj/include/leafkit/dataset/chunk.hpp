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
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "leafkit/dataset/manifest.hpp"
#include "leafkit/dsp/signal.hpp"
#include "leafkit/dsp/wav.hpp"

namespace leafkit::dataset {

/// Chunk geometry in samples at 44.1 kHz: 5 s windows, 1.25 s hop, and a
/// wrapped tail kept only if at least 1.25 s of the file remains.
struct ChunkGrid {
  std::size_t window = 220500;
  std::size_t hop = 55125;
  std::size_t min_tail = 55125;
  double sample_rate = 44100.0;
};

inline std::size_t seconds_to_samples(double s, double sr = 44100.0) {
  return static_cast<std::size_t>(std::llround(s * sr));
}

/// Boundaries for a recording of n samples. Recordings up to one window long
/// give a single chunk (looped when shorter).
inline std::vector<ChunkSpec> chunk_samples(const std::string& id, std::size_t n, const ChunkGrid& g = {}) {
  if (n == 0) throw DataError("chunk: empty recording " + id);
  const double sr = g.sample_rate;
  std::vector<ChunkSpec> out;
  if (n <= g.window) {
    out.push_back({id, 0.0, static_cast<double>(g.window - n) / sr, n < g.window});
    return out;
  }
  std::size_t start = 0;
  for (; start + g.window <= n; start += g.hop) {
    out.push_back({id, static_cast<double>(start) / sr, 0.0, false});
  }
  if (n - start >= g.min_tail) {
    out.push_back({id, static_cast<double>(start) / sr, static_cast<double>(g.window - (n - start)) / sr, false});
  }
  return out;
}

inline std::vector<ChunkSpec> chunk(const std::string& id, double duration_s, const ChunkGrid& g = {}) {
  if (!(duration_s > 0)) throw DataError("chunk: non-positive duration for " + id);
  return chunk_samples(id, std::max<std::size_t>(1, seconds_to_samples(duration_s, g.sample_rate)), g);
}

/// Fills every entry's chunk list from its duration.
inline void chunk_manifest(DatasetManifest& m, const ChunkGrid& g = {}) {
  for (auto& e : m.entries) e.chunks = chunk(e.id, e.duration_s, g);
}

/// Cuts a chunk out of an in-memory recording: samples are read cyclically
/// from the chunk start, which covers plain, wrapped and looped chunks alike.
inline dsp::Waveform realize_chunk(const dsp::Waveform& rec, const ChunkSpec& c, const ChunkGrid& g = {}) {
  if (rec.samples.empty()) throw DataError("realize_chunk: empty recording " + c.recording_id);
  const std::size_t n = rec.samples.size();
  const std::size_t start = seconds_to_samples(c.start_s, g.sample_rate);
  if (start >= n) throw DataError("realize_chunk: start beyond end of " + c.recording_id);
  dsp::Waveform out;
  out.sample_rate = rec.sample_rate;
  out.samples.resize(g.window);
  for (std::size_t k = 0; k < g.window; ++k) out.samples[k] = rec.samples[(start + k) % n];
  return out;
}

namespace detail {

inline std::vector<float> read_mono_range(const std::filesystem::path& p, std::uint64_t first, std::uint64_t count) {
  auto a = dsp::read_wav(p, first, count);
  return dsp::to_mono(a.channels, a.info.sample_rate).samples;
}

}  // namespace detail

/// Reads one chunk from the entry's audio file without decoding the rest.
inline dsp::Waveform load_chunk(const RecordingEntry& e, const ChunkSpec& c, const ChunkGrid& g = {}) {
  const auto info = dsp::read_wav_info(e.audio_path);
  const std::uint64_t offset = seconds_to_samples(e.offset_s, g.sample_rate);
  if (info.sample_rate != static_cast<std::uint32_t>(g.sample_rate)) {
    // Not converted at ingest: decode and resample the whole file.
    auto a = dsp::read_wav(e.audio_path);
    auto full = dsp::resample_to_44100(dsp::to_mono(a.channels, info.sample_rate));
    const std::size_t n = std::min<std::size_t>(seconds_to_samples(e.duration_s, g.sample_rate),
                                                full.samples.size() > offset ? full.samples.size() - offset : 0);
    if (n == 0) throw DataError("load_chunk: no audio in " + e.audio_path);
    dsp::Waveform rec{{full.samples.begin() + static_cast<std::ptrdiff_t>(offset),
                       full.samples.begin() + static_cast<std::ptrdiff_t>(offset + n)},
                      g.sample_rate};
    return realize_chunk(rec, c, g);
  }
  const std::uint64_t n = std::min<std::uint64_t>(seconds_to_samples(e.duration_s, g.sample_rate),
                                                  info.frames() > offset ? info.frames() - offset : 0);
  if (n == 0) throw DataError("load_chunk: no audio in " + e.audio_path);
  const std::uint64_t start = seconds_to_samples(c.start_s, g.sample_rate);
  dsp::Waveform out;
  out.sample_rate = g.sample_rate;
  if (start + g.window <= n) {
    out.samples = detail::read_mono_range(e.audio_path, offset + start, g.window);
  } else {
    dsp::Waveform rec{detail::read_mono_range(e.audio_path, offset, n), g.sample_rate};
    out = realize_chunk(rec, c, g);
  }
  if (out.samples.size() != g.window) throw DataError("load_chunk: short read from " + e.audio_path);
  return out;
}

}  // namespace leafkit::dataset
