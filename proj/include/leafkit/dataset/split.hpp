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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "leafkit/dataset/manifest.hpp"

namespace leafkit::dataset {

enum class SplitScheme { kPattern, kStratified };

inline SplitScheme parse_split_scheme(std::string_view s) {
  if (s == "pattern") return SplitScheme::kPattern;
  if (s == "stratified") return SplitScheme::kStratified;
  throw InputError("unknown split scheme '" + std::string(s) + "' (expected pattern or stratified)");
}

inline const char* split_scheme_name(SplitScheme s) {
  return s == SplitScheme::kPattern ? "pattern" : "stratified";
}

/// Positions 1..10 of the repeating assignment, longest file first.
inline constexpr std::array<Split, 10> kSplitPattern{Split::kTrain, Split::kTrain, Split::kVal,   Split::kTest,
                                                     Split::kTrain, Split::kTrain, Split::kVal,   Split::kTest,
                                                     Split::kTrain, Split::kTrain};

inline constexpr std::array<double, 3> kStratifiedFractions{0.627, 0.152, 0.221};

/// Train/val/test file counts for the stratified scheme: largest-remainder
/// rounding, then at least one file per subset when there are enough files.
inline std::array<std::size_t, 3> stratified_counts(std::size_t n) {
  std::array<std::size_t, 3> c{};
  std::array<double, 3> rem{};
  std::size_t used = 0;
  for (int k = 0; k < 3; ++k) {
    const double x = static_cast<double>(n) * kStratifiedFractions[k];
    c[k] = static_cast<std::size_t>(std::floor(x));
    rem[k] = x - std::floor(x);
    used += c[k];
  }
  while (used < n) {
    int best = 0;
    for (int k = 1; k < 3; ++k) {
      if (rem[k] > rem[best]) best = k;
    }
    ++c[best];
    rem[best] = -1;
    ++used;
  }
  if (n >= 3) {
    for (int k = 0; k < 3; ++k) {
      if (c[k] > 0) continue;
      const int donor = static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin());
      --c[donor];
      ++c[k];
    }
  }
  return c;
}

namespace detail {

/// Per-label entry indices, longest first, ties by id.
inline std::map<std::string, std::vector<std::size_t>> ordered_groups(const DatasetManifest& m) {
  std::map<std::string, std::vector<std::size_t>> g;
  for (std::size_t i = 0; i < m.entries.size(); ++i) g[m.entries[i].label].push_back(i);
  for (auto& [label, idx] : g) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const auto& ea = m.entries[a];
      const auto& eb = m.entries[b];
      if (ea.duration_s != eb.duration_s) return ea.duration_s > eb.duration_s;
      return ea.id < eb.id;
    });
  }
  return g;
}

}  // namespace detail

/// Assigns every recording to train/val/test, per label. Chunks are not
/// stored with a split of their own, so they follow their recording.
inline DatasetManifest split(DatasetManifest m, SplitScheme scheme = SplitScheme::kPattern) {
  constexpr std::array<Split, 3> kOrder{Split::kTrain, Split::kVal, Split::kTest};
  for (const auto& [label, idx] : detail::ordered_groups(m)) {
    if (scheme == SplitScheme::kPattern) {
      for (std::size_t r = 0; r < idx.size(); ++r) m.entries[idx[r]].split = kSplitPattern[r % kSplitPattern.size()];
      continue;
    }
    // Stratified: fixed counts, interleaved down the sorted list so each
    // subset sees long and short files.
    const auto target = stratified_counts(idx.size());
    std::array<std::size_t, 3> given{};
    const double n = static_cast<double>(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      int pick = -1;
      double best = -1e300;
      for (int k = 0; k < 3; ++k) {
        if (given[k] >= target[k]) continue;
        const double deficit = static_cast<double>(target[k]) * static_cast<double>(r + 1) / n -
                               static_cast<double>(given[k]);
        if (deficit > best) {
          best = deficit;
          pick = k;
        }
      }
      ++given[pick];
      m.entries[idx[r]].split = kOrder[pick];
    }
  }
  m.header_extra["split_scheme"] = split_scheme_name(scheme);
  return m;
}

}  // namespace leafkit::dataset
