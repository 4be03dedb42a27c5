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

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "leafkit/augment/augment.hpp"
#include "leafkit/core/error.hpp"
#include "leafkit/frontend/frontend.hpp"

namespace leafkit::training {

using Json = nlohmann::ordered_json;

struct TrainConfig {
  std::size_t batch_size = 14;
  int max_epochs = 200;
  int patience = 8;
  double lr = 1e-3;
  double frontend_lr_scale = 1.0;  // multiplies lr for frontend parameters
  double l2_lambda = 1e-3;
  double dropout = 0.4;
  frontend::FrontendKind frontend = frontend::FrontendKind::kLeaf;
  std::size_t n_conv_layers = 4;
  std::uint64_t seed = 0;
  bool deterministic = false;
  bool augment_enabled = false;
  std::string ir_bank_dir;  // loaded into augment.ir_bank when non-empty
  augment::AugmentConfig augment = augment::AugmentConfig::online();

  void validate() const {
    if (batch_size < 1) throw InputError("config: batch_size must be >= 1");
    if (patience < 1) throw InputError("config: patience must be >= 1");
    if (max_epochs < 1) throw InputError("config: max_epochs must be >= 1");
    if (!(lr > 0)) throw InputError("config: lr must be positive");
    if (!(frontend_lr_scale >= 0)) throw InputError("config: frontend_lr_scale must be >= 0");
    if (!(l2_lambda >= 0)) throw InputError("config: l2_lambda must be >= 0");
    if (!(dropout >= 0 && dropout < 1)) throw InputError("config: dropout must lie in [0, 1)");
    if (n_conv_layers != 4 && n_conv_layers != 5) throw InputError("config: n_conv_layers must be 4 or 5");
    augment.validate();
  }
};

namespace detail {

inline void check_keys(const Json& j, const std::set<std::string>& known, const std::string& prefix,
                       std::vector<std::string>& unknown) {
  if (!j.is_object()) throw InputError("config: " + (prefix.empty() ? std::string("document") : prefix) + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) unknown.push_back(prefix + k);
  }
}

inline std::array<double, 2> pair_of(const Json& j, const char* key) {
  if (!j.is_array() || j.size() != 2) throw InputError(std::string("config: ") + key + " must be a two-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline const char* augment_mode_name(augment::AugmentMode m) {
  return m == augment::AugmentMode::kOnline ? "online" : "offline";
}

}  // namespace detail

inline Json to_json(const augment::AugmentConfig& a) {
  return Json{{"mode", detail::augment_mode_name(a.mode)},
              {"noise_prob", a.noise_prob},
              {"snr_range_db", a.snr_range_db},
              {"decay_range", a.decay_range},
              {"ir_prob", a.ir_prob},
              {"mix_range", a.mix_range},
              {"mask_prob", a.mask_prob},
              {"mask_bw_range", a.mask_bw_range},
              {"offline_generations", a.offline_generations},
              {"seed", a.seed}};
}

inline Json to_json(const TrainConfig& c) {
  Json aug = to_json(c.augment);
  aug["enabled"] = c.augment_enabled;
  aug["ir_bank_dir"] = c.ir_bank_dir;
  return Json{{"batch_size", c.batch_size},
              {"max_epochs", c.max_epochs},
              {"patience", c.patience},
              {"lr", c.lr},
              {"frontend_lr_scale", c.frontend_lr_scale},
              {"l2_lambda", c.l2_lambda},
              {"dropout", c.dropout},
              {"frontend", frontend::frontend_kind_name(c.frontend)},
              {"n_conv_layers", c.n_conv_layers},
              {"seed", c.seed},
              {"deterministic", c.deterministic},
              {"augment", std::move(aug)}};
}

/// Missing keys keep their defaults; unknown keys are collected and rejected together.
inline TrainConfig train_config_from_json(const Json& j) {
  static const std::set<std::string> kTop{"batch_size", "max_epochs",    "patience",  "lr",
                                          "frontend_lr_scale", "l2_lambda", "dropout", "frontend",
                                          "n_conv_layers", "seed",       "deterministic", "augment"};
  static const std::set<std::string> kAug{"enabled",  "mode",      "noise_prob",    "snr_range_db",
                                          "decay_range", "ir_prob", "mix_range",     "mask_prob",
                                          "mask_bw_range", "offline_generations", "seed", "ir_bank_dir"};
  std::vector<std::string> unknown;
  detail::check_keys(j, kTop, "", unknown);
  if (j.contains("augment")) detail::check_keys(j.at("augment"), kAug, "augment.", unknown);
  if (!unknown.empty()) {
    std::string list;
    for (const auto& u : unknown) list += (list.empty() ? "" : ", ") + u;
    throw InputError("config: unknown keys: " + list);
  }
  TrainConfig c;
  try {
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.lr = j.value("lr", c.lr);
    c.frontend_lr_scale = j.value("frontend_lr_scale", c.frontend_lr_scale);
    c.l2_lambda = j.value("l2_lambda", c.l2_lambda);
    c.dropout = j.value("dropout", c.dropout);
    if (j.contains("frontend")) c.frontend = frontend::parse_frontend_kind(j.at("frontend").get<std::string>());
    c.n_conv_layers = j.value("n_conv_layers", c.n_conv_layers);
    c.seed = j.value("seed", c.seed);
    c.deterministic = j.value("deterministic", c.deterministic);
    if (j.contains("augment")) {
      const Json& a = j.at("augment");
      const std::string mode = a.value("mode", std::string("online"));
      if (mode == "offline") {
        c.augment = augment::AugmentConfig::offline();
      } else if (mode != "online") {
        throw InputError("config: augment.mode must be online or offline");
      }
      auto& g = c.augment;
      c.augment_enabled = a.value("enabled", false);
      c.ir_bank_dir = a.value("ir_bank_dir", std::string());
      g.noise_prob = a.value("noise_prob", g.noise_prob);
      if (a.contains("snr_range_db")) g.snr_range_db = detail::pair_of(a.at("snr_range_db"), "snr_range_db");
      if (a.contains("decay_range")) g.decay_range = detail::pair_of(a.at("decay_range"), "decay_range");
      g.ir_prob = a.value("ir_prob", g.ir_prob);
      if (a.contains("mix_range")) g.mix_range = detail::pair_of(a.at("mix_range"), "mix_range");
      g.mask_prob = a.value("mask_prob", g.mask_prob);
      if (a.contains("mask_bw_range")) g.mask_bw_range = detail::pair_of(a.at("mask_bw_range"), "mask_bw_range");
      g.offline_generations = a.value("offline_generations", g.offline_generations);
      g.seed = a.value("seed", g.seed);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: wrong value type (") + e.what() + ")");
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
  return train_config_from_json(j);
}

}  // namespace leafkit::training
