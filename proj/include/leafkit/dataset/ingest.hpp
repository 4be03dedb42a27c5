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

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "leafkit/dataset/manifest.hpp"
#include "leafkit/dsp/signal.hpp"
#include "leafkit/dsp/wav.hpp"

namespace leafkit::dataset {

namespace fs = std::filesystem;

inline std::string sha256_hex(const void* data, std::size_t n) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data, n, md, &len, EVP_sha256(), nullptr) != 1) throw DataError("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

/// Hash of the WAV data chunk only, so header differences do not matter.
inline std::string audio_payload_sha256(const fs::path& path, const dsp::WavInfo& info) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  in.seekg(static_cast<std::streamoff>(info.data_offset));
  std::string buf(info.data_bytes, '\0');
  if (!in.read(buf.data(), static_cast<std::streamsize>(buf.size()))) throw DataError("truncated data in " + path.string());
  return sha256_hex(buf.data(), buf.size());
}

struct IngestOptions {
  /// Keep only the final ten seconds of each recording.
  bool trim_last_10s = false;
  /// Where resampled copies of non-44.1 kHz files go. Empty keeps the
  /// original path and resamples at read time.
  fs::path converted_dir;
};

struct Rejection {
  std::string path;
  std::string reason;  // NOT_WAV, UNREADABLE, LOW_SAMPLE_RATE, EMPTY, NO_LABEL, DUPLICATE, DUPLICATE_CROSS_LABEL
  std::string detail;
};

struct IngestResult {
  DatasetManifest manifest;
  std::vector<Rejection> rejections;
  std::vector<std::string> warnings;
};

namespace detail {

inline bool has_wav_extension(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ".wav";
}

inline std::string generic_id(const std::string& label, const fs::path& rel) {
  fs::path r = rel;
  r.replace_extension();
  return label + "/" + r.generic_string();
}

}  // namespace detail

/// Scans `<root>/<label>/**.wav`. Nonconforming files are skipped and
/// reported; the returned manifest is unsplit and unchunked.
inline IngestResult ingest(const fs::path& root, const IngestOptions& opt = {}) {
  if (!fs::is_directory(root)) throw InputError("data root is not a directory: " + root.string());
  IngestResult res;

  std::vector<fs::path> label_dirs;
  std::vector<fs::path> loose;
  for (const auto& de : fs::directory_iterator(root)) {
    if (de.is_directory()) {
      label_dirs.push_back(de.path());
    } else {
      loose.push_back(de.path());
    }
  }
  std::sort(label_dirs.begin(), label_dirs.end());
  std::sort(loose.begin(), loose.end());
  for (const auto& p : loose) res.rejections.push_back({p.string(), "NO_LABEL", "file is not inside a label folder"});

  struct Candidate {
    RecordingEntry entry;
    dsp::Waveform converted;  // only for files needing resampling
    bool needs_copy = false;
  };
  std::vector<Candidate> cands;

  for (const auto& dir : label_dirs) {
    const std::string label = dir.filename().string();
    std::vector<fs::path> files;
    for (const auto& de : fs::recursive_directory_iterator(dir)) {
      if (de.is_regular_file()) files.push_back(de.path());
    }
    std::sort(files.begin(), files.end());
    if (std::none_of(files.begin(), files.end(), detail::has_wav_extension)) {
      throw DataError("label folder has no WAV files: " + dir.string());
    }
    for (const auto& f : files) {
      if (!detail::has_wav_extension(f)) {
        res.rejections.push_back({f.string(), "NOT_WAV", "only WAV files are accepted"});
        continue;
      }
      try {
        const auto info = dsp::read_wav_info(f);
        if (info.sample_rate < 44100) {
          res.rejections.push_back({f.string(), "LOW_SAMPLE_RATE", std::to_string(info.sample_rate) + " Hz"});
          continue;
        }
        if (info.frames() == 0) {
          res.rejections.push_back({f.string(), "EMPTY", "no audio frames"});
          continue;
        }
        Candidate c;
        c.entry.id = detail::generic_id(label, fs::relative(f, dir));
        c.entry.label = label;
        c.entry.source_path = f.string();
        c.entry.audio_path = f.string();
        c.entry.sha256 = audio_payload_sha256(f, info);
        std::uint64_t n = info.frames();
        if (info.sample_rate != 44100) {
          auto a = dsp::read_wav(f);
          c.converted = dsp::resample_to_44100(dsp::to_mono(a.channels, info.sample_rate));
          n = c.converted.samples.size();
          c.needs_copy = !opt.converted_dir.empty();
        }
        c.entry.duration_s = static_cast<double>(n) / 44100.0;
        if (opt.trim_last_10s && c.entry.duration_s > 10.0) {
          const std::uint64_t keep = 441000;
          c.entry.offset_s = static_cast<double>(n - keep) / 44100.0;
          c.entry.duration_s = 10.0;
        }
        cands.push_back(std::move(c));
      } catch (const std::exception& ex) {
        res.rejections.push_back({f.string(), "UNREADABLE", ex.what()});
      }
    }
  }

  // Identical audio filed under different labels is dropped everywhere;
  // repeats under one label keep the first id.
  std::map<std::string, std::set<std::string>> labels_by_hash;
  for (const auto& c : cands) labels_by_hash[c.entry.sha256].insert(c.entry.label);
  std::set<std::string> seen;
  for (auto& c : cands) {
    const auto& labels = labels_by_hash[c.entry.sha256];
    if (labels.size() > 1) {
      std::string all;
      for (const auto& l : labels) all += (all.empty() ? "" : ",") + l;
      res.rejections.push_back({c.entry.source_path, "DUPLICATE_CROSS_LABEL", "same audio under labels " + all});
      res.warnings.push_back("duplicate audio under several labels excluded: " + c.entry.source_path);
      continue;
    }
    if (!seen.insert(c.entry.sha256).second) {
      res.rejections.push_back({c.entry.source_path, "DUPLICATE", "identical audio already ingested"});
      continue;
    }
    if (c.needs_copy) {
      const fs::path out = opt.converted_dir / (c.entry.id + ".wav");
      fs::create_directories(out.parent_path());
      dsp::write_wav_float(out, c.converted);
      c.entry.audio_path = out.string();
    }
    res.manifest.entries.push_back(std::move(c.entry));
  }

  std::set<std::string> kept;
  for (const auto& e : res.manifest.entries) kept.insert(e.label);
  for (const auto& dir : label_dirs) {
    const std::string label = dir.filename().string();
    if (!kept.count(label)) res.warnings.push_back("label '" + label + "' has no usable recordings");
  }
  if (res.manifest.entries.empty()) throw DataError("no valid recordings under " + root.string());
  res.manifest.header_extra["trim_last_10s"] = opt.trim_last_10s;
  return res;
}

inline void write_rejection_report(const std::vector<Rejection>& rejections, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write rejection report " + path.string());
  for (const auto& r : rejections) out << r.reason << '\t' << r.path << '\t' << r.detail << '\n';
}

}  // namespace leafkit::dataset
