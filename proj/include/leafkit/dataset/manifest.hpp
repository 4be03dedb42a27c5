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

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "leafkit/core/error.hpp"

namespace leafkit::dataset {

using Json = nlohmann::ordered_json;

enum class Split { kUnassigned = 0, kTrain = 1, kVal = 2, kTest = 3 };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
    default: return "unassigned";
  }
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  if (s == "unassigned") return Split::kUnassigned;
  throw DataError("unknown split '" + std::string(s) + "'");
}

struct ChunkSpec {
  std::string recording_id;
  double start_s = 0;
  double wrap_s = 0;  // seconds taken from the beginning of the recording
  bool looped = false;

  bool operator==(const ChunkSpec&) const = default;
};

struct RecordingEntry {
  std::string id;
  std::string label;
  double duration_s = 0;
  Split split = Split::kUnassigned;
  std::string source_path;  // file as found during ingest
  std::string audio_path;   // mono 44.1 kHz file used for reading; may equal source_path
  double offset_s = 0;      // start of the usable region inside audio_path
  std::string sha256;
  std::vector<ChunkSpec> chunks;
  Json extra = Json::object();  // fields this version does not know about

  bool operator==(const RecordingEntry&) const = default;
};

struct SplitSummary {
  std::array<std::size_t, 4> files{};
  std::array<double, 4> seconds{};
  std::array<std::size_t, 4> chunks{};

  double file_fraction(Split s) const {
    const double total = static_cast<double>(files[1] + files[2] + files[3]);
    return total > 0 ? static_cast<double>(files[static_cast<int>(s)]) / total : 0.0;
  }
  double duration_fraction(Split s) const {
    const double total = seconds[1] + seconds[2] + seconds[3];
    return total > 0 ? seconds[static_cast<int>(s)] / total : 0.0;
  }
};

/// A chunk together with the recording it belongs to.
struct ChunkRef {
  const RecordingEntry* entry = nullptr;
  ChunkSpec chunk;
};

struct DatasetManifest {
  std::vector<RecordingEntry> entries;
  Json header_extra = Json::object();

  bool operator==(const DatasetManifest& o) const {
    return entries == o.entries && header_extra == o.header_extra;
  }

  /// Sorted, unique label set.
  std::vector<std::string> labels() const {
    std::set<std::string> s;
    for (const auto& e : entries) s.insert(e.label);
    return {s.begin(), s.end()};
  }

  std::map<std::string, int> label_index() const {
    std::map<std::string, int> m;
    int i = 0;
    for (const auto& l : labels()) m[l] = i++;
    return m;
  }

  SplitSummary summary() const {
    SplitSummary s;
    for (const auto& e : entries) {
      const int k = static_cast<int>(e.split);
      s.files[k] += 1;
      s.seconds[k] += e.duration_s;
      s.chunks[k] += e.chunks.size();
    }
    return s;
  }

  std::vector<ChunkRef> chunks(Split which) const {
    std::vector<ChunkRef> out;
    for (const auto& e : entries) {
      if (e.split != which) continue;
      for (const auto& c : e.chunks) out.push_back({&e, c});
    }
    return out;
  }

  const RecordingEntry* find(const std::string& id) const {
    for (const auto& e : entries) {
      if (e.id == id) return &e;
    }
    return nullptr;
  }

  void validate() const {
    std::set<std::string> ids;
    for (const auto& e : entries) {
      if (e.id.empty()) throw DataError("manifest: entry with empty id");
      if (!ids.insert(e.id).second) throw DataError("manifest: duplicate id " + e.id);
      if (!(e.duration_s > 0) || !std::isfinite(e.duration_s)) {
        throw DataError("manifest: non-positive duration for " + e.id);
      }
      if (e.label.empty()) throw DataError("manifest: empty label for " + e.id);
      for (const auto& c : e.chunks) {
        if (c.recording_id != e.id) throw DataError("manifest: chunk of " + e.id + " names " + c.recording_id);
        if (c.wrap_s < 0 || c.wrap_s >= 5.0) throw DataError("manifest: wrap length out of range in " + e.id);
      }
    }
  }
};

inline constexpr int kManifestVersion = 1;
inline constexpr const char* kManifestFormat = "leafkit-manifest";

namespace detail {

inline const std::set<std::string>& known_entry_keys() {
  static const std::set<std::string> k{"id",         "label",  "duration_s", "split", "source",
                                       "audio_path", "offset_s", "sha256",   "chunks"};
  return k;
}

inline Json entry_to_json(const RecordingEntry& e) {
  Json j;
  j["id"] = e.id;
  j["label"] = e.label;
  j["duration_s"] = e.duration_s;
  j["split"] = split_name(e.split);
  j["source"] = e.source_path;
  j["audio_path"] = e.audio_path;
  j["offset_s"] = e.offset_s;
  j["sha256"] = e.sha256;
  Json cs = Json::array();
  for (const auto& c : e.chunks) cs.push_back({{"start_s", c.start_s}, {"wrap_s", c.wrap_s}, {"looped", c.looped}});
  j["chunks"] = std::move(cs);
  for (const auto& [k, v] : e.extra.items()) j[k] = v;
  return j;
}

inline RecordingEntry entry_from_json(const Json& j) {
  if (!j.is_object()) throw DataError("expected an object");
  RecordingEntry e;
  e.id = j.at("id").get<std::string>();
  e.label = j.at("label").get<std::string>();
  e.duration_s = j.at("duration_s").get<double>();
  e.split = parse_split(j.at("split").get<std::string>());
  e.source_path = j.value("source", std::string());
  e.audio_path = j.value("audio_path", e.source_path);
  e.offset_s = j.value("offset_s", 0.0);
  e.sha256 = j.value("sha256", std::string());
  for (const auto& c : j.at("chunks")) {
    e.chunks.push_back({e.id, c.at("start_s").get<double>(), c.at("wrap_s").get<double>(), c.at("looped").get<bool>()});
  }
  for (const auto& [k, v] : j.items()) {
    if (!known_entry_keys().count(k)) e.extra[k] = v;
  }
  return e;
}

}  // namespace detail

/// JSON lines: a header record, then one record per recording.
inline void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write manifest " + path.string());
  Json h;
  h["format"] = kManifestFormat;
  h["version"] = kManifestVersion;
  for (const auto& [k, v] : m.header_extra.items()) h[k] = v;
  out << h.dump() << '\n';
  for (const auto& e : m.entries) out << detail::entry_to_json(e).dump() << '\n';
  if (!out) throw InputError("short write on manifest " + path.string());
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open manifest " + path.string());
  DatasetManifest m;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(where + "malformed JSON (" + ex.what() + ")");
    }
    if (!have_header) {
      if (!j.is_object() || j.value("format", std::string()) != kManifestFormat) {
        throw DataError(where + "missing manifest header");
      }
      const int v = j.value("version", -1);
      if (v != kManifestVersion) {
        throw DataError(where + "manifest version " + std::to_string(v) + " is not supported (expected " +
                        std::to_string(kManifestVersion) + ")");
      }
      for (const auto& [k, val] : j.items()) {
        if (k != "format" && k != "version") m.header_extra[k] = val;
      }
      have_header = true;
      continue;
    }
    try {
      m.entries.push_back(detail::entry_from_json(j));
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(where + "bad record (" + ex.what() + ")");
    } catch (const DataError& ex) {
      throw DataError(where + ex.what());
    }
  }
  if (!have_header) throw DataError(path.string() + ":1: empty manifest");
  m.validate();
  return m;
}

}  // namespace leafkit::dataset
