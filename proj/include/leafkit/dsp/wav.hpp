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

// RIFF/WAVE codec. Reads PCM 16/24/32-bit integer and 32/64-bit float,
// including WAVE_FORMAT_EXTENSIBLE headers; writes 32-bit float.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "leafkit/core/error.hpp"
#include "leafkit/dsp/signal.hpp"

namespace leafkit::dsp {

struct WavInfo {
  std::uint16_t format = 0;  // 1 = PCM, 3 = IEEE float (after resolving EXTENSIBLE)
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
  std::uint64_t data_offset = 0;
  std::uint64_t data_bytes = 0;

  std::size_t bytes_per_frame() const { return static_cast<std::size_t>(channels) * bits_per_sample / 8; }
  std::uint64_t frames() const { return bytes_per_frame() ? data_bytes / bytes_per_frame() : 0; }
  double duration() const { return sample_rate ? static_cast<double>(frames()) / sample_rate : 0.0; }
};

struct WavAudio {
  WavInfo info;
  std::vector<std::vector<float>> channels;
};

namespace detail {

inline std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}
inline std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

inline void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

inline float decode_sample(const unsigned char* p, const WavInfo& h) {
  if (h.format == 3) {
    if (h.bits_per_sample == 32) {
      float f;
      std::uint32_t u = le32(p);
      std::memcpy(&f, &u, 4);
      return f;
    }
    std::uint64_t u = static_cast<std::uint64_t>(le32(p)) | static_cast<std::uint64_t>(le32(p + 4)) << 32;
    double d;
    std::memcpy(&d, &u, 8);
    return static_cast<float>(d);
  }
  switch (h.bits_per_sample) {
    case 16:
      return static_cast<float>(static_cast<std::int16_t>(le16(p)) / 32768.0);
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(static_cast<std::uint32_t>(p[0]) << 8 |
                                                 static_cast<std::uint32_t>(p[1]) << 16 |
                                                 static_cast<std::uint32_t>(p[2]) << 24);
      return static_cast<float>((v >> 8) / 8388608.0);
    }
    default:
      return static_cast<float>(static_cast<std::int32_t>(le32(p)) / 2147483648.0);
  }
}

}  // namespace detail

/// Parses the header and locates the data chunk. Throws DataError on
/// anything that is not a supported WAV file.
inline WavInfo read_wav_info(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("wav: cannot open " + path.string());
  unsigned char riff[12];
  if (!in.read(reinterpret_cast<char*>(riff), 12) || std::memcmp(riff, "RIFF", 4) != 0 ||
      std::memcmp(riff + 8, "WAVE", 4) != 0) {
    throw DataError("wav: not a RIFF/WAVE file: " + path.string());
  }
  WavInfo info;
  bool have_fmt = false;
  unsigned char hdr[8];
  while (in.read(reinterpret_cast<char*>(hdr), 8)) {
    const std::uint32_t size = detail::le32(hdr + 4);
    const auto body = static_cast<std::uint64_t>(in.tellg());
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16) throw DataError("wav: short fmt chunk in " + path.string());
      std::vector<unsigned char> f(size);
      if (!in.read(reinterpret_cast<char*>(f.data()), size)) throw DataError("wav: truncated fmt chunk");
      info.format = detail::le16(&f[0]);
      info.channels = detail::le16(&f[2]);
      info.sample_rate = detail::le32(&f[4]);
      info.bits_per_sample = detail::le16(&f[14]);
      if (info.format == 0xFFFE) {
        if (size < 40) throw DataError("wav: short extensible fmt chunk");
        info.format = detail::le16(&f[24]);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw DataError("wav: data chunk before fmt chunk in " + path.string());
      info.data_offset = body;
      in.seekg(0, std::ios::end);
      const auto file_end = static_cast<std::uint64_t>(in.tellg());
      info.data_bytes = std::min<std::uint64_t>(size, file_end - body);
      break;
    }
    in.seekg(static_cast<std::streamoff>(body + size + (size & 1)));
  }
  if (!have_fmt || info.data_offset == 0) throw DataError("wav: missing fmt or data chunk in " + path.string());
  const bool pcm_ok = info.format == 1 && (info.bits_per_sample == 16 || info.bits_per_sample == 24 ||
                                           info.bits_per_sample == 32);
  const bool float_ok = info.format == 3 && (info.bits_per_sample == 32 || info.bits_per_sample == 64);
  if (!pcm_ok && !float_ok) {
    throw DataError("wav: unsupported encoding (format " + std::to_string(info.format) + ", " +
                    std::to_string(info.bits_per_sample) + " bits) in " + path.string());
  }
  if (info.channels == 0 || info.sample_rate == 0) throw DataError("wav: zero channels or sample rate");
  return info;
}

/// Reads `count` frames starting at frame `first` (clipped to the file).
inline WavAudio read_wav(const std::filesystem::path& path, std::uint64_t first = 0,
                         std::uint64_t count = UINT64_MAX) {
  WavAudio out;
  out.info = read_wav_info(path);
  const WavInfo& h = out.info;
  const std::uint64_t total = h.frames();
  first = std::min(first, total);
  count = std::min(count, total - first);
  const std::size_t bpf = h.bytes_per_frame(), bps = h.bits_per_sample / 8;

  std::ifstream in(path, std::ios::binary);
  in.seekg(static_cast<std::streamoff>(h.data_offset + first * bpf));
  std::vector<unsigned char> raw(count * bpf);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw DataError("wav: truncated data in " + path.string());
  }
  out.channels.assign(h.channels, std::vector<float>(count));
  for (std::uint64_t i = 0; i < count; ++i)
    for (std::size_t c = 0; c < h.channels; ++c) out.channels[c][i] = detail::decode_sample(&raw[i * bpf + c * bps], h);
  return out;
}

/// Reads a file as mono at its native rate.
inline Waveform read_wav_mono(const std::filesystem::path& path) {
  auto a = read_wav(path);
  return to_mono(a.channels, a.info.sample_rate);
}

/// Serializes mono float32 WAV bytes.
inline std::string encode_wav_float(const Waveform& w) {
  const auto n = static_cast<std::uint32_t>(w.samples.size());
  const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(w.sample_rate));
  std::string s;
  s.reserve(44 + 4 * static_cast<std::size_t>(n));
  s += "RIFF";
  detail::put32(s, 36 + 4 * n);
  s += "WAVEfmt ";
  detail::put32(s, 16);
  detail::put16(s, 3);
  detail::put16(s, 1);
  detail::put32(s, rate);
  detail::put32(s, rate * 4);
  detail::put16(s, 4);
  detail::put16(s, 32);
  s += "data";
  detail::put32(s, 4 * n);
  for (float f : w.samples) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    detail::put32(s, u);
  }
  return s;
}

inline void write_wav_float(const std::filesystem::path& path, const Waveform& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("wav: cannot write " + path.string());
  const std::string bytes = encode_wav_float(w);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("wav: write failed for " + path.string());
}

/// 16-bit PCM writer for interleaved multi-channel test fixtures.
inline void write_wav_pcm16(const std::filesystem::path& path, const std::vector<std::vector<float>>& channels,
                            std::uint32_t rate) {
  if (channels.empty()) throw std::invalid_argument("write_wav_pcm16: no channels");
  const auto nch = static_cast<std::uint16_t>(channels.size());
  const auto n = static_cast<std::uint32_t>(channels[0].size());
  std::string s = "RIFF";
  detail::put32(s, 36 + 2 * n * nch);
  s += "WAVEfmt ";
  detail::put32(s, 16);
  detail::put16(s, 1);
  detail::put16(s, nch);
  detail::put32(s, rate);
  detail::put32(s, rate * 2 * nch);
  detail::put16(s, static_cast<std::uint16_t>(2 * nch));
  detail::put16(s, 16);
  s += "data";
  detail::put32(s, 2 * n * nch);
  for (std::uint32_t i = 0; i < n; ++i)
    for (const auto& c : channels) {
      const double v = std::clamp(static_cast<double>(c[i]), -1.0, 32767.0 / 32768.0);
      detail::put16(s, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(v * 32768.0))));
    }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("wav: cannot write " + path.string());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

}  // namespace leafkit::dsp
