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


// Writes a synthetic labeled corpus of pulsed tones, one folder per class.
// Used by the CLI smoke test and the reproduction harness dry runs.
//
//   make_toy_corpus <dir> [--classes 2] [--files 11] [--seconds 6] [--seed 1]
//
// Class k is a sine at 3 kHz * 3^k pulsed at 4 Hz + 6 Hz * k. File i of a class
// lasts `seconds + 0.25 * (files - 1 - i)` seconds, so names sort by
// decreasing duration.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>

#include "CLI11.hpp"
#include "leafkit/core/rng.hpp"
#include "leafkit/dsp/wav.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic pulsed-tone corpus"};
  std::string dir;
  int classes = 2, files = 11;
  double seconds = 6.0;
  std::uint64_t seed = 1;
  app.add_option("dir", dir, "Output root")->required();
  app.add_option("--classes", classes, "Number of classes")->check(CLI::Range(1, 4));
  app.add_option("--files", files, "Files per class")->check(CLI::PositiveNumber);
  app.add_option("--seconds", seconds, "Duration of the shortest file")->check(CLI::Range(0.5, 60.0));
  app.add_option("--seed", seed, "Random seed");
  CLI11_PARSE(app, argc, argv);

  static const char* kNames[] = {"chirper_high", "chirper_low", "chirper_mid", "chirper_top"};
  std::size_t written = 0;
  for (int k = 0; k < classes; ++k) {
    const double carrier = 3000.0 * std::pow(3.0, k % 2) + 1500.0 * (k / 2);
    const double pulse = 4.0 + 6.0 * k;
    const auto folder = std::filesystem::path(dir) / kNames[k];
    std::filesystem::create_directories(folder);
    for (int i = 0; i < files; ++i) {
      leafkit::CounterRng rng(seed, static_cast<std::uint64_t>(k * 1000 + i));
      const double dur = seconds + 0.25 * (files - 1 - i);
      const double phase = rng.uniform(0, 2 * std::numbers::pi);
      const double offset = rng.uniform(0, 1.0 / pulse);
      const double amp = rng.uniform(0.2, 0.5);
      leafkit::dsp::Waveform w;
      w.samples.resize(static_cast<std::size_t>(std::lround(dur * 44100.0)));
      for (std::size_t n = 0; n < w.samples.size(); ++n) {
        const double t = static_cast<double>(n) / 44100.0;
        const double gate = std::fmod(t + offset, 1.0 / pulse) * pulse < 0.5 ? 1.0 : 0.0;
        w.samples[n] = static_cast<float>(amp * gate * std::sin(2 * std::numbers::pi * carrier * t + phase) +
                                          0.01 * rng.normal());
      }
      char name[32];
      std::snprintf(name, sizeof name, "f%02d.wav", i);
      leafkit::dsp::write_wav_pcm16(folder / name, {w.samples}, 44100);
      ++written;
    }
  }
  std::printf("wrote %zu files under %s\n", written, dir.c_str());
  return 0;
}
