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

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "leafkit/core/error.hpp"
#include "leafkit/core/rng.hpp"
#include "leafkit/tensor/tensor.hpp"
#include "leafkit/training/config.hpp"

namespace leafkit::training {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

inline constexpr char kCheckpointMagic[8] = {'L', 'E', 'A', 'F', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Parameters, optimizer moments ("adam.m.<name>", "adam.v.<name>"),
/// batch-norm running statistics and bookkeeping for one training state.
struct Checkpoint {
  TrainConfig config;
  std::vector<std::string> labels;
  int epoch = 0;
  int best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::uint64_t adam_steps = 0;
  CounterRng::State rng;
  std::vector<std::pair<std::string, Tensor<float>>> tensors;

  const Tensor<float>* find(const std::string& name) const {
    for (const auto& [n, t] : tensors) {
      if (n == name) return &t;
    }
    return nullptr;
  }

  std::size_t n_classes() const { return labels.size(); }
};

namespace detail {

template <typename U>
void put(std::string& s, U v) {
  char b[sizeof(U)];
  std::memcpy(b, &v, sizeof(U));
  s.append(b, sizeof(U));
}

class Reader {
 public:
  Reader(std::string data, std::string what) : d_(std::move(data)), what_(std::move(what)) {}
  template <typename U>
  U get() {
    need(sizeof(U));
    U v;
    std::memcpy(&v, d_.data() + pos_, sizeof(U));
    pos_ += sizeof(U);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = d_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == d_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > d_.size()) throw DataError("checkpoint " + what_ + ": truncated");
  }
  std::string d_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_checkpoint(const Checkpoint& c) {
  Json meta{{"config", to_json(c.config)},
            {"labels", c.labels},
            {"epoch", c.epoch},
            {"best_epoch", c.best_epoch},
            {"best_val_loss", std::isfinite(c.best_val_loss) ? Json(c.best_val_loss) : Json(nullptr)},
            {"adam_steps", c.adam_steps},
            {"rng", {{"seed", c.rng.seed}, {"stream", c.rng.stream}, {"counter", c.rng.counter}}}};
  const std::string m = meta.dump();
  std::string s(kCheckpointMagic, 8);
  detail::put<std::uint32_t>(s, kCheckpointVersion);
  detail::put<std::uint64_t>(s, m.size());
  s += m;
  detail::put<std::uint64_t>(s, c.tensors.size());
  for (const auto& [name, t] : c.tensors) {
    detail::put<std::uint32_t>(s, static_cast<std::uint32_t>(name.size()));
    s += name;
    detail::put<std::uint32_t>(s, static_cast<std::uint32_t>(t.dim()));
    for (std::size_t d : t.shape()) detail::put<std::uint64_t>(s, d);
    s.append(reinterpret_cast<const char*>(t.values().data()), t.numel() * sizeof(float));
  }
  return s;
}

inline Checkpoint decode_checkpoint(std::string data, const std::string& what = "buffer") {
  detail::Reader r(std::move(data), what);
  if (r.bytes(8) != std::string(kCheckpointMagic, 8)) throw DataError("checkpoint " + what + ": bad magic");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint " + what + ": version " + std::to_string(version) + " is not supported");
  }
  Checkpoint c;
  try {
    const Json meta = Json::parse(r.bytes(r.get<std::uint64_t>()));
    c.config = train_config_from_json(meta.at("config"));
    c.labels = meta.at("labels").get<std::vector<std::string>>();
    c.epoch = meta.at("epoch").get<int>();
    c.best_epoch = meta.at("best_epoch").get<int>();
    c.best_val_loss = meta.at("best_val_loss").is_null() ? std::numeric_limits<double>::infinity()
                                                          : meta.at("best_val_loss").get<double>();
    c.adam_steps = meta.at("adam_steps").get<std::uint64_t>();
    const Json& rng = meta.at("rng");
    c.rng = {rng.at("seed").get<std::uint64_t>(), rng.at("stream").get<std::uint64_t>(),
             rng.at("counter").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint " + what + ": bad metadata (" + e.what() + ")");
  } catch (const InputError& e) {
    throw DataError("checkpoint " + what + ": " + e.what());
  }
  const auto n = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string name = r.bytes(r.get<std::uint32_t>());
    Shape shape(r.get<std::uint32_t>());
    for (auto& d : shape) d = static_cast<std::size_t>(r.get<std::uint64_t>());
    std::vector<float> v(shape_numel(shape));
    const std::string raw = r.bytes(v.size() * sizeof(float));
    std::memcpy(v.data(), raw.data(), raw.size());
    c.tensors.emplace_back(std::move(name), Tensor<float>(std::move(shape), std::move(v)));
  }
  if (!r.done()) throw DataError("checkpoint " + what + ": trailing bytes");
  return c;
}

inline void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  const std::string s = encode_checkpoint(c);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(s.data(), static_cast<std::streamsize>(s.size()))) {
      throw InputError("cannot write checkpoint " + path.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  std::string s(std::istreambuf_iterator<char>(in), {});
  return decode_checkpoint(std::move(s), path.string());
}

}  // namespace leafkit::training
